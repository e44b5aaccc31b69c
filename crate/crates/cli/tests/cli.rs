use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sfwm::fitting::{synthesize_points, SERIES_HEADER, STANDARD_DETUNINGS_GHZ};
use sfwm::ingest::save_histogram;
use sfwm::ingest::synthetic::HistogramSpec;
use sfwm::{presets, SimulationOptions, Theta};
use tempfile::TempDir;

const FIFTEEN_MW: &str = "system.b = 0.375\nsystem.omega_c = 11.4\nsystem.gamma_dec_mhz = 0.078\n";

fn sfwm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfwm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// `name,value` pairs of an observables report.
fn report_value(path: &Path, name: &str) -> Option<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[0] == name)
        .map(|f| f[1].parse().unwrap())
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn simulate_reports_the_regression_width() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "run.conf", &format!("{FIFTEEN_MW}system.delta_c_ghz = 0\n"));
    let o = sfwm(&["simulate", "--config", "run.conf", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let tau_w = report_value(&out.join("observables.csv"), "tau_w").unwrap();
    assert!((tau_w - 47.043352).abs() < 1e-6 * 47.043352, "{tau_w}");
    for (file, header) in [
        ("wavepacket.csv", "tau_ns,g2_arb"),
        ("spectrum.csv", "delta_mhz,intensity_norm"),
    ] {
        let text = fs::read_to_string(out.join(file)).unwrap();
        assert_eq!(text.lines().next(), Some(header));
        assert!(text.lines().count() > 100);
    }
    let peak = csv_rows(&out.join("spectrum.csv"))
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(peak, 1.0);
}

#[test]
fn zero_pump_gives_a_zero_wave_packet() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "run.conf",
        &format!("{FIFTEEN_MW}system.delta_c_ghz = 0\nsystem.omega_p = 0\n"),
    );
    let o = sfwm(&["simulate", "--config", "run.conf", "--out", "."], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("wavepacket.csv"));
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));
    assert!(stderr(&o).contains("warning: EMPTY_SPECTRUM"));
}

#[test]
fn missing_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "run.conf", "system.b = 0.375\nsystem.omega_c = 11.4\n");
    let o = sfwm(&["simulate", "--config", "run.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: CONFIG_MISSING_KEY:"), "{err}");
}

#[test]
fn unknown_keys_warn_unless_strict() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "run.conf",
        &format!("{FIFTEEN_MW}system.delta_c_ghz = 0\nsystem.colour = blue\n"),
    );
    let lax = sfwm(&["spectrum", "--config", "run.conf"], dir.path());
    assert!(lax.status.success());
    assert!(stderr(&lax).contains("warning: CONFIG_UNKNOWN_KEY"));
    assert!(dir.path().join("spectrum.csv").exists());
    let strict = sfwm(&["spectrum", "--config", "run.conf", "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(2));
    assert!(stderr(&strict).starts_with("error: CONFIG_UNKNOWN_KEY:"));
}

#[test]
fn invalid_values_and_flags_exit_with_config_status() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "bad_b.conf",
        "system.b = 1.5\nsystem.omega_c = 11.4\nsystem.gamma_dec_mhz = 0.078\nsystem.delta_c_ghz = 0\n",
    );
    let o = sfwm(&["simulate", "--config", "bad_b.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: CONFIG_INVALID_VALUE:"));

    write(dir.path(), "run.conf", &format!("{FIFTEEN_MW}system.delta_c_ghz = 0\n"));
    let o = sfwm(
        &["simulate", "--config", "run.conf", "--quadrature", "simpson"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    let o = Command::new(env!("CARGO_BIN_EXE_sfwm"))
        .args(["simulate", "--config", "run.conf"])
        .current_dir(dir.path())
        .env("SFWM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn sweep_ratio(b: f64) -> f64 {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "sweep.conf",
        &format!("system.b = {b}\nsystem.omega_c = 11.4\nsystem.gamma_dec_mhz = 0.078\nsweep.delta_c_ghz = 0, 1.0\n"),
    );
    let o = sfwm(&["sweep", "--config", "sweep.conf"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 2);
    rows[1][1].parse::<f64>().unwrap() / rows[0][1].parse::<f64>().unwrap()
}

#[test]
fn sweep_contrasts_the_two_theories() {
    assert!(sweep_ratio(0.375) > 1.0);
    assert!(sweep_ratio(0.0) < 1.0);
}

#[test]
fn sweep_needs_two_points_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "one.conf",
        &format!("{FIFTEEN_MW}sweep.delta_c_ghz = 1.0\n"),
    );
    let o = sfwm(&["sweep", "--config", "one.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: CONFIG_SWEEP_TOO_SHORT:"));

    write(
        dir.path(),
        "three.conf",
        &format!("{FIFTEEN_MW}sweep.delta_c_ghz = 2.0, 0.5, 1.5\n"),
    );
    let first = sfwm(&["sweep", "--config", "three.conf", "--out", "a"], dir.path());
    let second = sfwm(&["sweep", "--config", "three.conf", "--out", "b"], dir.path());
    assert!(first.status.success() && second.status.success());
    let a = fs::read(dir.path().join("a/sweep.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/sweep.csv")).unwrap());
    let order: Vec<String> = csv_rows(&dir.path().join("a/sweep.csv"))
        .into_iter()
        .map(|r| r[0].clone())
        .collect();
    assert_eq!(order, ["2", "0.5", "1.5"]);
}

#[test]
fn failed_sweep_points_become_marked_rows() {
    let dir = TempDir::new().unwrap();
    // A fixed ±30 MHz grid truncates the broad spectrum at Δc = 0 but holds
    // the narrow one at 1 GHz.
    write(
        dir.path(),
        "sweep.conf",
        &format!("{FIFTEEN_MW}sweep.delta_c_ghz = 0, 1.0\ngrid.delta_max_mhz = 30\ngrid.points = 16384\n"),
    );
    let o = sfwm(&["sweep", "--config", "sweep.conf"], dir.path());
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().any(|r| r[1].starts_with("ERROR:")), "{rows:?}");
    assert!(rows.iter().any(|r| r[1].parse::<f64>().is_ok()), "{rows:?}");
}

/// Histogram whose peak sits 12.4 backgrounds above the floor, with singles
/// chosen so that the heralding probability is 26.2%.
fn calibrated_histogram() -> HistogramSpec {
    let mut spec = HistogramSpec::reference();
    spec.pairs = spec.pairs_for_peak(12.4 * spec.background_per_bin);
    let generated = spec.pair_rate() / (spec.chain.d_s * spec.chain.d_p);
    spec.singles_signal_per_s = spec.chain.d_s * generated / 0.262;
    spec
}

#[test]
fn analyze_recovers_sbr_and_heralding() {
    let dir = TempDir::new().unwrap();
    save_histogram(&calibrated_histogram().noiseless(), &dir.path().join("h.csv")).unwrap();
    let o = sfwm(&["analyze", "h.csv", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = dir.path().join("out/observables.csv");
    let sbr = report_value(&report, "sbr").unwrap();
    let h_p = report_value(&report, "h_p").unwrap();
    assert!((sbr - 12.4).abs() <= 0.2, "{sbr}");
    assert!((h_p - 0.262).abs() <= 0.005, "{h_p}");
    let ratio = report_value(&report, "r_g_cell").unwrap() / report_value(&report, "r_g_fiber").unwrap();
    assert!((ratio - 1.9).abs() < 1e-12, "{ratio}");
    assert!(dir.path().join("out/g2.csv").exists());
}

#[test]
fn flat_histogram_has_zero_sbr_and_a_warning() {
    let dir = TempDir::new().unwrap();
    let flat = HistogramSpec {
        pairs: 0.0,
        ..HistogramSpec::reference()
    };
    save_histogram(&flat.noiseless(), &dir.path().join("flat.csv")).unwrap();
    let o = sfwm(&["analyze", "flat.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning: NO_WAVEPACKET"));
    assert_eq!(report_value(&dir.path().join("observables.csv"), "sbr"), Some(0.0));
}

#[test]
fn uncorrected_data_needs_relative_mode() {
    let dir = TempDir::new().unwrap();
    let spec = HistogramSpec {
        saturation_corrected: false,
        ..HistogramSpec::reference()
    };
    save_histogram(&spec.noiseless(), &dir.path().join("h.csv")).unwrap();
    let o = sfwm(&["analyze", "h.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: UNCORRECTED_RATES:"));
    let o = sfwm(&["analyze", "h.csv", "--relative"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("observables.csv")).unwrap();
    assert!(text.contains("r_g_fiber") && text.contains(",arb,false"), "{text}");
    assert!(!text.contains("h_p"));
}

#[test]
fn malformed_histogram_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    save_histogram(&HistogramSpec::reference().noiseless(), &dir.path().join("h.csv")).unwrap();
    let meta = fs::read_to_string(dir.path().join("h.meta")).unwrap();
    fs::write(dir.path().join("h.meta"), meta.replace("d_s = ", "d_s = x")).unwrap();
    let o = sfwm(&["analyze", "h.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error: PARSE_ERROR:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("h.meta:"));
}

fn truth() -> Theta {
    Theta {
        b: 0.375,
        omega_c: 11.4,
        gamma_dec: 0.013,
        scale: 1.0,
    }
}

fn write_series(dir: &Path, name: &str, detunings: &[f64]) {
    let points = synthesize_points(
        &truth(),
        &presets::medium(),
        detunings,
        0.0,
        0,
        &SimulationOptions::default(),
    )
    .unwrap();
    let mut csv = format!("{SERIES_HEADER}\n");
    for p in points {
        csv += &format!(
            "{},{},{},{},{}\n",
            p.delta_c_ghz, p.r_g, p.r_g_err, p.tau_w_ns, p.tau_w_err_ns
        );
    }
    fs::write(dir.join(name), csv).unwrap();
}

fn report_entry(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .parse()
        .unwrap()
}

#[test]
fn fit_round_trip_through_the_cli() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), "p15.csv", &STANDARD_DETUNINGS_GHZ);
    // ±30% away from the truth; γ given in MHz (0.013Γ = 0.078 MHz).
    write(
        dir.path(),
        "fit.conf",
        "fit.series = p15.csv\nfit.init.b = 0.4875\nfit.init.omega_c = 7.98\nfit.init.gamma_dec_mhz = 0.1014\nfit.init.scale = 0.7\n",
    );
    let o = sfwm(&["fit", "--config", "fit.conf", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("out/fit_p15.txt")).unwrap();
    assert!(report.contains("converged = true"), "{report}");
    assert!((report_entry(&report, "b") - 0.375).abs() <= 0.02);
    assert!((report_entry(&report, "omega_c") / 11.4 - 1.0).abs() <= 0.02);
    assert!((report_entry(&report, "gamma_dec_mhz") / 0.078 - 1.0).abs() <= 0.10);
    assert!(report.contains("delta_c_ghz,rg_meas,rg_pred,tauw_meas,tauw_pred"));
    let curve = csv_rows(&dir.path().join("out/fit_p15_curve.csv"));
    assert_eq!(curve.len(), 61);
    assert!(curve.iter().all(|r| r[1].parse::<f64>().is_ok()));
}

#[test]
fn short_series_is_rejected() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), "short.csv", &[0.0, 1.0, 2.0]);
    write(dir.path(), "fit.conf", "fit.series = short.csv\n");
    let o = sfwm(&["fit", "--config", "fit.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: SERIES_TOO_SHORT:"), "{}", stderr(&o));
}

#[test]
fn unconverged_fit_still_reports_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    write_series(dir.path(), "s.csv", &[0.0, 0.5, 1.0, 2.0, 3.0]);
    write(
        dir.path(),
        "fit.conf",
        "fit.series = s.csv\nfit.max_iterations = 1\nfit.curve_step_ghz = 1.0\n\
         fit.init.b = 0.2\nfit.init.omega_c = 14\nfit.init.gamma_dec_mhz = 0.05\nfit.init.scale = 2\n",
    );
    let first = sfwm(&["fit", "--config", "fit.conf", "--out", "a"], dir.path());
    let second = sfwm(&["fit", "--config", "fit.conf", "--out", "b"], dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(second.status.success());
    assert!(stderr(&first).contains("warning: FIT_NOT_CONVERGED"));
    let a = fs::read(dir.path().join("a/fit_s.txt")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/fit_s.txt")).unwrap());
    assert!(String::from_utf8(a).unwrap().contains("converged = false"));
}
