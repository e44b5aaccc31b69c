use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use sfwm::fitting::{default_init, fit_series, FitResult, THETA_NAMES};
use sfwm::ingest::{analyze, load_histogram, AnalysisOptions};
use sfwm::observables::{generation_rate, spectral_width_mhz, temporal_width_ns};
use sfwm::params::units::{gamma_to_mhz, ghz_to_gamma, ns_to_tau, tau_to_ns};
use sfwm::pipeline::predict;
use sfwm::wavepacket::{biphoton_spectrum, sample_spectral_amplitude_with, wave_packet_with};
use sfwm::{
    BiphotonObservables, Calibration, DetuningSeries, Error, FitOptions, Prediction, SimulationOptions, Spectrum,
    SystemParams,
};

use crate::config::RunConfig;
use crate::failure::{classify, Failure, Outcome};

/// Non-fatal condition reported on stderr as `warning: CODE: message`.
pub struct Warning {
    pub code: &'static str,
    pub message: String,
}

fn warn(code: &'static str, message: impl Into<String>) -> Warning {
    Warning {
        code,
        message: message.into(),
    }
}

/// Shortest decimal that round-trips, switching to exponent form outside
/// `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Outcome<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::data("IO_ERROR", format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::data("IO_ERROR", format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn observables_csv(rows: &[(&str, f64, &str)], calibrated: bool) -> String {
    let mut out = String::from("name,value,units,calibrated\n");
    for (name, value, units) in rows {
        let _ = writeln!(out, "{name},{},{units},{calibrated}", num(*value));
    }
    out
}

fn spectrum_csv(spectrum: &Spectrum, halfwidth_mhz: f64) -> String {
    let mut out = String::from("delta_mhz,intensity_norm\n");
    for (d, i) in spectrum.delta_mhz().into_iter().zip(&spectrum.intensity) {
        if d.abs() <= halfwidth_mhz {
            let _ = writeln!(out, "{},{}", num(d), num(*i));
        }
    }
    out
}

/// Forward run at one parameter point. Zero pump gives an all-zero wave
/// packet and spectrum with a warning instead of an error.
fn forward(cfg: &RunConfig, p: &SystemParams) -> Outcome<(String, Spectrum, BiphotonObservables, Vec<Warning>)> {
    let opts = cfg.simulation();
    let sa = sample_spectral_amplitude_with(p, opts.grid, &opts.quadrature)?;
    let wp = wave_packet_with(&sa, opts.oversample);

    let h = ns_to_tau(cfg.window_ns);
    let mut packet = String::from("tau_ns,g2_arb\n");
    for i in wp.window(-h, h) {
        let _ = writeln!(packet, "{},{}", num(tau_to_ns(wp.tau[i])), num(wp.g2[i]));
    }

    let mut obs = BiphotonObservables {
        r_g: Some(generation_rate(&wp, Calibration::Arbitrary).value),
        ..Default::default()
    };
    let mut warnings = Vec::new();
    let spectrum = match biphoton_spectrum(&sa) {
        Ok(s) => {
            obs.tau_w = Some(temporal_width_ns(&wp)?);
            obs.delta_omega = Some(spectral_width_mhz(&s)?);
            s
        }
        Err(Error::EmptySpectrum) => {
            warnings.push(warn(
                "EMPTY_SPECTRUM",
                "amplitude vanishes everywhere; widths undefined",
            ));
            let delta = sa.grid.values();
            Spectrum {
                intensity: vec![0.0; delta.len()],
                delta,
            }
        }
        Err(e) => return Err(e.into()),
    };
    Ok((packet, spectrum, obs, warnings))
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Outcome<Vec<Warning>> {
    let p = cfg.system_params(true)?;
    let (packet, spectrum, obs, warnings) = forward(cfg, &p)?;
    write_file(out, "wavepacket.csv", &packet)?;
    write_file(
        out,
        "spectrum.csv",
        &spectrum_csv(&spectrum, cfg.spectrum_halfwidth_mhz),
    )?;
    write_file(out, "observables.csv", &observables_csv(&obs.rows(), false))?;
    Ok(warnings)
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Outcome<Vec<Warning>> {
    let p = cfg.system_params(true)?;
    let (_, spectrum, _, warnings) = forward(cfg, &p)?;
    write_file(
        out,
        "spectrum.csv",
        &spectrum_csv(&spectrum, cfg.spectrum_halfwidth_mhz),
    )?;
    Ok(warnings)
}

fn predictions(base: &SystemParams, detunings: &[f64], opts: &SimulationOptions) -> Vec<sfwm::Result<Prediction>> {
    detunings
        .par_iter()
        .map(|&d| predict(&base.with_delta_c(ghz_to_gamma(d)), opts))
        .collect()
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Outcome<Vec<Warning>> {
    let detunings = cfg.sweep.clone().ok_or_else(|| {
        Failure::config(
            "CONFIG_MISSING_KEY",
            format!("{}: missing key `sweep.delta_c_ghz`", cfg.source),
        )
    })?;
    if detunings.len() < 2 {
        return Err(Failure::config(
            "CONFIG_SWEEP_TOO_SHORT",
            format!("sweep needs at least 2 detunings, got {}", detunings.len()),
        ));
    }
    let base = cfg.system_params(false)?;
    let results = predictions(&base, &detunings, &cfg.simulation());

    let mut csv = String::from("delta_c_ghz,rg_arb,tau_w_ns,domega_mhz\n");
    let mut warnings = Vec::new();
    let mut first_failure = None;
    for (d, r) in detunings.iter().zip(results) {
        match r {
            Ok(pr) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    num(*d),
                    num(pr.r_g),
                    num(pr.tau_w_ns),
                    num(pr.delta_omega_mhz)
                );
            }
            Err(e) => {
                let (code, _) = classify(&e);
                let _ = writeln!(csv, "{},ERROR:{code},,", num(*d));
                warnings.push(warn(code, format!("Δc/2π = {d} GHz: {e}")));
                first_failure.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_failure.filter(|_| warnings.len() == detunings.len()) {
        return Err(e.into());
    }
    write_file(out, "sweep.csv", &csv)?;
    Ok(warnings)
}

pub fn analyze_histogram(cfg: &RunConfig, histogram: &Path, relative: bool, out: &Path) -> Outcome<Vec<Warning>> {
    let h = load_histogram(histogram)?;
    let options = AnalysisOptions {
        background_window: cfg.background_window,
        support: cfg.support,
        relative_only: relative,
    };
    let a = analyze(&h, &options)?;

    let mut g2 = String::from("tau_ns,g2\n");
    for (t, v) in a.g2.tau.iter().zip(&a.g2.g2) {
        let _ = writeln!(g2, "{},{}", num(*t), num(*v));
    }
    write_file(out, "g2.csv", &g2)?;

    let mut warnings = Vec::new();
    let rate_units = if relative { "arb" } else { "1/s" };
    let mut rows = vec![
        ("sbr", a.sbr, "1"),
        ("background_per_bin", a.background.per_bin, "counts"),
    ];
    match (a.detected_rate, a.generated) {
        (Some(r_d), Some(g)) => {
            rows.push(("r_d", r_d, rate_units));
            rows.push(("r_g_fiber", g.fiber, rate_units));
            rows.push(("r_g_cell", g.cell, rate_units));
        }
        _ => warnings.push(warn(
            "NO_WAVEPACKET",
            "no bins clear the support threshold; rates omitted",
        )),
    }
    if let Some(h_p) = a.h_p {
        rows.push(("h_p", h_p, "1"));
    }
    write_file(out, "observables.csv", &observables_csv(&rows, !relative))?;
    Ok(warnings)
}

fn fit_report(label: &str, r: &FitResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "label = {label}");
    let _ = writeln!(out, "converged = {}", r.converged);
    let _ = writeln!(out, "iterations = {}", r.iterations);
    let _ = writeln!(out, "chi2 = {}", num(r.chi2));
    let value = r.theta.to_array();
    let error = r.std_errors.to_array();
    for (i, name) in THETA_NAMES.iter().enumerate() {
        // γ leaves in MHz; the Rabi frequency stays in units of Γ.
        let (key, v, e) = match *name {
            "gamma_dec" => (
                "gamma_dec_mhz".to_string(),
                gamma_to_mhz(value[i]),
                gamma_to_mhz(error[i]),
            ),
            _ => (name.to_string(), value[i], error[i]),
        };
        let _ = writeln!(out, "{key} = {}", num(v));
        let _ = writeln!(out, "{key}_err = {}", num(e));
    }
    out.push('\n');
    out.push_str("delta_c_ghz,rg_meas,rg_pred,tauw_meas,tauw_pred\n");
    for p in &r.per_point {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(p.delta_c_ghz),
            num(p.r_g_meas),
            num(p.r_g_pred),
            num(p.tau_w_meas),
            num(p.tau_w_pred)
        );
    }
    out
}

fn fit_curve(series: &DetuningSeries, r: &FitResult, cfg: &RunConfig, step: f64) -> String {
    let (lo, hi) = series
        .points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.delta_c_ghz), hi.max(p.delta_c_ghz))
        });
    let n = ((hi - lo) / step).round() as usize;
    let detunings: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    let opts = SimulationOptions {
        grid: Some(r.grid),
        ..cfg.simulation()
    };
    let base = r.theta.apply(&series.fixed);
    let mut csv = String::from("delta_c_ghz,rg_pred,tau_w_ns_pred\n");
    for (d, p) in detunings.iter().zip(predictions(&base, &detunings, &opts)) {
        match p {
            Ok(p) => {
                let _ = writeln!(csv, "{},{},{}", num(*d), num(r.theta.scale * p.r_g), num(p.tau_w_ns));
            }
            Err(e) => {
                let _ = writeln!(csv, "{},ERROR:{},", num(*d), classify(&e).0);
            }
        }
    }
    csv
}

pub fn fit(cfg: &RunConfig, out: &Path) -> Outcome<Vec<Warning>> {
    if cfg.fit.series.is_empty() {
        return Err(Failure::config(
            "CONFIG_MISSING_KEY",
            format!("{}: missing key `fit.series`", cfg.source),
        ));
    }
    let fixed = cfg.fixed_params()?;
    let defaults = FitOptions::default();
    let options = FitOptions {
        fixed_b: cfg.fit.fixed_b,
        max_iterations: cfg.fit.max_iterations.unwrap_or(defaults.max_iterations),
        simulation: cfg.simulation(),
        ..defaults
    };
    let mut warnings = Vec::new();
    for path in &cfg.fit.series {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "series".into());
        let series = DetuningSeries::load(path, fixed, label.clone())?;
        let init = match cfg.fit.init {
            Some(t) => t,
            None => default_init(&series, &options)?,
        };
        let result = fit_series(&series, &init, &options)?;
        if !result.converged {
            warnings.push(warn(
                "FIT_NOT_CONVERGED",
                format!("{label}: stopped after {} iterations", result.iterations),
            ));
        }
        write_file(out, &format!("fit_{label}.txt"), &fit_report(&label, &result))?;
        write_file(
            out,
            &format!("fit_{label}_curve.csv"),
            &fit_curve(&series, &result, cfg, cfg.fit.curve_step_ghz),
        )?;
    }
    Ok(warnings)
}
