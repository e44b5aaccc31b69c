//! `key = value` run configuration with dotted sections.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use sfwm::fitting::Theta;
use sfwm::ingest::{parse_key_values, SupportRule};
use sfwm::params::units::mhz_to_gamma;
use sfwm::{presets, DetuningGrid, LabParams, QuadratureMethod, QuadratureSpec, SimulationOptions, SystemParams};

use crate::failure::{Failure, Outcome};

const MISSING: &str = "CONFIG_MISSING_KEY";
const INVALID: &str = "CONFIG_INVALID_VALUE";

/// Default half-width of the written wave-packet window.
pub const DEFAULT_WINDOW_NS: f64 = 1000.0;
/// Default half-width of the written spectrum.
pub const DEFAULT_SPECTRUM_HALFWIDTH_MHZ: f64 = 60.0;
pub const DEFAULT_CURVE_STEP_GHZ: f64 = 0.05;

/// `system.*` values as given; absent entries fall back to the reference
/// medium, except the ones a command requires.
#[derive(Debug, Clone, Default)]
pub struct SystemBlock {
    pub alpha: Option<f64>,
    pub b: Option<f64>,
    pub gamma_doppler_mhz: Option<f64>,
    pub gamma_etalon_mhz: Option<f64>,
    pub omega_p: Option<f64>,
    pub omega_c: Option<f64>,
    pub delta_p_ghz: Option<f64>,
    pub delta_c_ghz: Option<f64>,
    pub gamma_dec_mhz: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitBlock {
    pub series: Vec<PathBuf>,
    pub init: Option<Theta>,
    pub fixed_b: Option<f64>,
    pub max_iterations: Option<usize>,
    pub curve_step_ghz: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Where the configuration came from, for messages.
    pub source: String,
    pub system: SystemBlock,
    pub grid: Option<DetuningGrid>,
    pub quadrature: QuadratureSpec,
    pub window_ns: f64,
    pub spectrum_halfwidth_mhz: f64,
    pub sweep: Option<Vec<f64>>,
    pub background_window: Option<(f64, f64)>,
    pub support: SupportRule,
    pub fit: FitBlock,
    /// Keys that were not recognised (an error in strict mode).
    pub unknown: Vec<String>,
}

struct Entries {
    path: PathBuf,
    map: BTreeMap<String, (usize, String)>,
    used: BTreeSet<String>,
}

impl Entries {
    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let found = self.map.get(key).cloned();
        if found.is_some() {
            self.used.insert(key.to_owned());
        }
        found
    }

    fn invalid(&self, line: usize, key: &str, message: impl std::fmt::Display) -> Failure {
        Failure::config(
            INVALID,
            format!("{}:{}: `{}`: {}", self.path.display(), line, key, message),
        )
    }

    fn number(&mut self, key: &str) -> Outcome<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(self.invalid(line, key, format!("`{v}` is not a finite number"))),
            },
        }
    }

    fn count(&mut self, key: &str) -> Outcome<Option<usize>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.invalid(line, key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn numbers(&mut self, key: &str) -> Outcome<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|f| match f.trim().parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(self.invalid(line, key, format!("`{}` is not a finite number", f.trim()))),
                })
                .collect::<Outcome<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Both keys or neither.
    fn pair(&mut self, a: &str, b: &str) -> Outcome<Option<(f64, f64)>> {
        match (self.number(a)?, self.number(b)?) {
            (None, None) => Ok(None),
            (Some(x), Some(y)) => Ok(Some((x, y))),
            (Some(_), None) => Err(missing_key(&self.path.display().to_string(), b)),
            (None, Some(_)) => Err(missing_key(&self.path.display().to_string(), a)),
        }
    }
}

fn missing_key(source: &str, key: &str) -> Failure {
    Failure::config(MISSING, format!("{source}: missing key `{key}`"))
}

impl RunConfig {
    /// Reads a configuration file; `None` gives the empty configuration.
    pub fn load(path: Option<&Path>, quadrature_override: Option<&str>) -> Outcome<Self> {
        let (path, text) = match path {
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| Failure::config("CONFIG_IO", format!("{}: {e}", p.display())))?;
                (p.to_path_buf(), text)
            }
            None => (PathBuf::from("<defaults>"), String::new()),
        };
        let map = parse_key_values(&path, &text).map_err(|e| Failure::config("CONFIG_PARSE", e.to_string()))?;
        let mut e = Entries {
            path: path.clone(),
            map,
            used: BTreeSet::new(),
        };
        let source = path.display().to_string();
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();

        let system = SystemBlock {
            alpha: e.number("system.alpha")?,
            b: e.number("system.b")?,
            gamma_doppler_mhz: e.number("system.gamma_doppler_mhz")?,
            gamma_etalon_mhz: e.number("system.gamma_etalon_mhz")?,
            omega_p: e.number("system.omega_p")?,
            omega_c: e.number("system.omega_c")?,
            delta_p_ghz: e.number("system.delta_p_ghz")?,
            delta_c_ghz: e.number("system.delta_c_ghz")?,
            gamma_dec_mhz: e.number("system.gamma_dec_mhz")?,
        };

        let grid_points = e.count("grid.points")?;
        let grid = match (e.number("grid.delta_max_mhz")?, grid_points) {
            (None, None) => None,
            (Some(dm), Some(n)) => Some(DetuningGrid::new(mhz_to_gamma(dm), n)?),
            (Some(_), None) => return Err(missing_key(&source, "grid.points")),
            (None, Some(_)) => return Err(missing_key(&source, "grid.delta_max_mhz")),
        };

        let mut quadrature = QuadratureSpec::default();
        if let Some((line, m)) = e.raw("quadrature.method") {
            quadrature.method = m
                .parse::<QuadratureMethod>()
                .map_err(|err| e.invalid(line, "quadrature.method", err))?;
        }
        if let Some(m) = quadrature_override {
            quadrature.method = m
                .parse::<QuadratureMethod>()
                .map_err(|err| Failure::config(INVALID, format!("--quadrature: {err}")))?;
        }
        if let Some(t) = e.number("quadrature.tolerance")? {
            quadrature.panel_tolerance = t;
        }
        if let Some(n) = e.count("quadrature.points")? {
            quadrature.trapezoid_points = n;
        }
        if let Some(h) = e.number("quadrature.halfwidth")? {
            quadrature.support_halfwidth = h;
        }
        if let Some(n) = e.count("quadrature.panel_budget")? {
            quadrature.panel_budget = n;
        }
        quadrature.validate()?;

        let window_ns = e.number("output.window_ns")?.unwrap_or(DEFAULT_WINDOW_NS);
        let spectrum_halfwidth_mhz = e
            .number("output.spectrum_halfwidth_mhz")?
            .unwrap_or(DEFAULT_SPECTRUM_HALFWIDTH_MHZ);
        for (key, v) in [
            ("output.window_ns", window_ns),
            ("output.spectrum_halfwidth_mhz", spectrum_halfwidth_mhz),
        ] {
            if v <= 0.0 {
                return Err(Failure::config(INVALID, format!("{source}: `{key}` must be > 0")));
            }
        }

        let sweep = e.numbers("sweep.delta_c_ghz")?;

        let background_window = e.pair("analyze.background_lo_ns", "analyze.background_hi_ns")?;
        let mut support = SupportRule::default();
        if let Some(w) = e.count("analyze.smoothing")? {
            support.smoothing = w;
        }
        if let Some(k) = e.number("analyze.sigmas")? {
            support.sigmas = k;
        }

        let series = match e.raw("fit.series") {
            None => Vec::new(),
            Some((_, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| base_dir.join(s))
                .collect(),
        };
        let init_keys = [
            "fit.init.b",
            "fit.init.omega_c",
            "fit.init.gamma_dec_mhz",
            "fit.init.scale",
        ];
        let init_values = init_keys
            .iter()
            .map(|k| e.number(k))
            .collect::<Outcome<Vec<Option<f64>>>>()?;
        let init = if init_values.iter().all(Option::is_none) {
            None
        } else if let Some(k) = init_keys.iter().zip(&init_values).find(|(_, v)| v.is_none()) {
            return Err(missing_key(&source, k.0));
        } else {
            let v: Vec<f64> = init_values.into_iter().flatten().collect();
            let theta = Theta {
                b: v[0],
                omega_c: v[1],
                gamma_dec: mhz_to_gamma(v[2]),
                scale: v[3],
            };
            theta.validate()?;
            Some(theta)
        };
        let fit = FitBlock {
            series,
            init,
            fixed_b: e.number("fit.fixed_b")?,
            max_iterations: e.count("fit.max_iterations")?,
            curve_step_ghz: e.number("fit.curve_step_ghz")?.unwrap_or(DEFAULT_CURVE_STEP_GHZ),
        };
        if fit.curve_step_ghz <= 0.0 {
            return Err(Failure::config(
                INVALID,
                format!("{source}: `fit.curve_step_ghz` must be > 0"),
            ));
        }

        let unknown = e
            .map
            .iter()
            .filter(|(k, _)| !e.used.contains(*k))
            .map(|(k, (line, _))| format!("{}:{}: unknown key `{}`", source, line, k))
            .collect();

        Ok(RunConfig {
            source,
            system,
            grid,
            quadrature,
            window_ns,
            spectrum_halfwidth_mhz,
            sweep,
            background_window,
            support,
            fit,
            unknown,
        })
    }

    fn required(&self, key: &str, v: Option<f64>) -> Outcome<f64> {
        v.ok_or_else(|| missing_key(&self.source, key))
    }

    fn lab(&self, defaults: LabParams) -> Outcome<SystemParams> {
        let s = &self.system;
        let lab = LabParams {
            alpha: s.alpha.unwrap_or(defaults.alpha),
            b: s.b.unwrap_or(defaults.b),
            gamma_doppler_mhz: s.gamma_doppler_mhz.unwrap_or(defaults.gamma_doppler_mhz),
            gamma_etalon_mhz: s.gamma_etalon_mhz.unwrap_or(defaults.gamma_etalon_mhz),
            omega_p_gamma: s.omega_p.unwrap_or(defaults.omega_p_gamma),
            omega_c_gamma: s.omega_c.unwrap_or(defaults.omega_c_gamma),
            delta_p_ghz: s.delta_p_ghz.unwrap_or(defaults.delta_p_ghz),
            delta_c_ghz: s.delta_c_ghz.unwrap_or(defaults.delta_c_ghz),
            gamma_dec_mhz: s.gamma_dec_mhz.unwrap_or(defaults.gamma_dec_mhz),
        };
        Ok(SystemParams::from_lab(&lab)?)
    }

    /// Model parameters for a forward run. `b`, `Ω_c` and `γ` are required,
    /// and `Δc` too unless a sweep supplies it.
    pub fn system_params(&self, need_delta_c: bool) -> Outcome<SystemParams> {
        self.required("system.b", self.system.b)?;
        self.required("system.omega_c", self.system.omega_c)?;
        self.required("system.gamma_dec_mhz", self.system.gamma_dec_mhz)?;
        if need_delta_c {
            self.required("system.delta_c_ghz", self.system.delta_c_ghz)?;
        }
        self.lab(presets::medium().to_lab())
    }

    /// Medium constants held fixed during a fit.
    pub fn fixed_params(&self) -> Outcome<SystemParams> {
        self.lab(presets::medium().to_lab())
    }

    pub fn simulation(&self) -> SimulationOptions {
        SimulationOptions {
            grid: self.grid,
            quadrature: self.quadrature,
            ..SimulationOptions::default()
        }
    }
}
