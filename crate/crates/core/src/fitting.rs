//! Simultaneous fit of `(b, Ω_c, γ, scale)` to measured `R_g` and `τ_w`
//! against coupling detuning.
//!
//! Levenberg-Marquardt on error-weighted residuals with a central-difference
//! Jacobian and bounds enforced by projection.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{units, SystemParams};
use crate::pipeline::{predict, Prediction, SimulationOptions};
use crate::wavepacket::DetuningGrid;

/// Free parameters. `omega_c` and `gamma_dec` are in units of Γ; `scale`
/// converts the model integral `∫G²dτ` into the measured rate units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub b: f64,
    pub omega_c: f64,
    pub gamma_dec: f64,
    pub scale: f64,
}

pub const THETA_NAMES: [&str; 4] = ["b", "omega_c", "gamma_dec", "scale"];
/// Box bounds on θ, in `THETA_NAMES` order.
pub const LOWER: [f64; 4] = [0.0, 1e-6, 0.0, f64::MIN_POSITIVE];
pub const UPPER: [f64; 4] = [1.0, f64::INFINITY, f64::INFINITY, f64::INFINITY];
/// Step base used when a parameter sits at zero.
const TYPICAL: [f64; 4] = [0.1, 1.0, 1e-3, 1.0];

impl Theta {
    pub fn to_array(&self) -> [f64; 4] {
        [self.b, self.omega_c, self.gamma_dec, self.scale]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Theta {
            b: a[0],
            omega_c: a[1],
            gamma_dec: a[2],
            scale: a[3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for ((name, v), (lo, hi)) in THETA_NAMES.iter().zip(self.to_array()).zip(LOWER.iter().zip(UPPER)) {
            if !v.is_finite() || v < *lo || v > hi {
                return Err(Error::invalid(name, format!("{v} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn project(&self) -> Self {
        let mut a = self.to_array();
        for (i, v) in a.iter_mut().enumerate() {
            *v = v.clamp(LOWER[i], UPPER[i]);
        }
        Theta::from_array(a)
    }

    /// `fixed` with `b`, `Ω_c` and `γ` replaced.
    pub fn apply(&self, fixed: &SystemParams) -> SystemParams {
        SystemParams {
            b: self.b,
            omega_c: self.omega_c,
            gamma_dec: self.gamma_dec,
            ..*fixed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub delta_c_ghz: f64,
    pub r_g: f64,
    pub r_g_err: f64,
    pub tau_w_ns: f64,
    pub tau_w_err_ns: f64,
}

/// Measured (or synthetic) observables at several coupling detunings for one
/// coupling power.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningSeries {
    pub points: Vec<SeriesPoint>,
    /// Source of α, Γ_D, Γ_e, Δ_p and Ω_p; its `b`, `Ω_c`, `γ`, `Δ_c` are
    /// ignored.
    pub fixed: SystemParams,
    pub label: String,
}

pub const MIN_SERIES_POINTS: usize = 4;
pub const SERIES_HEADER: &str = "delta_c_ghz,rg,rg_err,tau_w_ns,tau_w_err_ns";

impl DetuningSeries {
    pub fn new(points: Vec<SeriesPoint>, fixed: SystemParams, label: impl Into<String>) -> Result<Self> {
        let series = DetuningSeries {
            points,
            fixed,
            label: label.into(),
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        self.fixed.validate()?;
        if self.points.len() < MIN_SERIES_POINTS {
            return Err(Error::SeriesTooShort {
                points: self.points.len(),
                required: MIN_SERIES_POINTS,
            });
        }
        let mut seen = HashSet::new();
        for p in &self.points {
            let values = [p.delta_c_ghz, p.r_g, p.r_g_err, p.tau_w_ns, p.tau_w_err_ns];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSeries(format!(
                    "non-finite value at Δc/2π = {} GHz",
                    p.delta_c_ghz
                )));
            }
            if !(p.r_g_err > 0.0 && p.tau_w_err_ns > 0.0) {
                return Err(Error::InvalidSeries(format!(
                    "error bar <= 0 at Δc/2π = {} GHz",
                    p.delta_c_ghz
                )));
            }
            if !seen.insert(p.delta_c_ghz.to_bits()) {
                return Err(Error::InvalidSeries(format!("detuning {} GHz repeated", p.delta_c_ghz)));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SERIES_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.delta_c_ghz, p.r_g, p.r_g_err, p.tau_w_ns, p.tau_w_err_ns
            ));
        }
        out
    }

    /// Reads a series CSV with header [`SERIES_HEADER`].
    pub fn load(path: &Path, fixed: SystemParams, label: impl Into<String>) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: Some(line),
            key: None,
            message,
        };
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == SERIES_HEADER => {}
            _ => return Err(parse_err(1, format!("expected header `{SERIES_HEADER}`"))),
        }
        let mut points = Vec::new();
        for (i, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(i + 1, format!("malformed row `{line}`")))?;
            if fields.len() != 5 {
                return Err(parse_err(i + 1, format!("expected 5 fields, found {}", fields.len())));
            }
            points.push(SeriesPoint {
                delta_c_ghz: fields[0],
                r_g: fields[1],
                r_g_err: fields[2],
                tau_w_ns: fields[3],
                tau_w_err_ns: fields[4],
            });
        }
        DetuningSeries::new(points, fixed, label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Bound on `|J_jᵀr| / (‖J_j‖ max(‖r‖, 1))` for every free column: the
    /// cosine between residuals and column, or the plain projection once
    /// `‖r‖ < 1`.
    pub gradient_tolerance: f64,
    /// Relative step size below which the search stops.
    pub step_tolerance: f64,
    pub initial_damping: f64,
    /// Relative central-difference step.
    pub jacobian_step: f64,
    /// Holds `b` at this value when set.
    pub fixed_b: Option<f64>,
    /// Used for every forward evaluation; a `None` grid is sized once from
    /// the initial θ and then kept for the whole fit.
    pub simulation: SimulationOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 100,
            gradient_tolerance: 1e-6,
            step_tolerance: 1e-10,
            initial_damping: 1e-3,
            jacobian_step: 1e-4,
            fixed_b: None,
            simulation: SimulationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointFit {
    pub delta_c_ghz: f64,
    pub r_g_meas: f64,
    pub r_g_pred: f64,
    pub tau_w_meas: f64,
    pub tau_w_pred: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Theta,
    /// Zero for held parameters, NaN when the curvature matrix is singular.
    pub std_errors: Theta,
    pub chi2: f64,
    pub per_point: Vec<PointFit>,
    pub converged: bool,
    pub iterations: usize,
    pub grid: DetuningGrid,
}

type CacheKey = [u64; 4];

/// Forward model over one series with a fixed grid and a prediction cache.
/// `scale` is applied after the cache, so it never triggers a pipeline run.
struct Model<'a> {
    series: &'a DetuningSeries,
    /// Point indices sorted by detuning; all sums run in this order.
    order: Vec<usize>,
    sim: SimulationOptions,
    cache: Mutex<HashMap<CacheKey, Prediction>>,
}

fn key(theta: &Theta, delta_c_ghz: f64) -> CacheKey {
    [
        theta.b.to_bits(),
        theta.omega_c.to_bits(),
        theta.gamma_dec.to_bits(),
        delta_c_ghz.to_bits(),
    ]
}

impl<'a> Model<'a> {
    fn new(series: &'a DetuningSeries, sim: SimulationOptions, sizing: &Theta) -> Result<Self> {
        let grid = match sim.grid {
            Some(g) => g,
            None => DetuningGrid::auto(&sizing.apply(&series.fixed))?,
        };
        let mut order: Vec<usize> = (0..series.points.len()).collect();
        order.sort_by(|&a, &b| series.points[a].delta_c_ghz.total_cmp(&series.points[b].delta_c_ghz));
        Ok(Model {
            series,
            order,
            sim: SimulationOptions {
                grid: Some(grid),
                ..sim
            },
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn grid(&self) -> DetuningGrid {
        self.sim.grid.expect("model grid is always set")
    }

    /// Predictions for every `(θ, point)` pair, in row-major order.
    fn predictions(&self, thetas: &[Theta]) -> Vec<Vec<Result<Prediction>>> {
        let mut missing = Vec::new();
        {
            let cache = self.cache.lock().unwrap();
            let mut queued = HashSet::new();
            for t in thetas {
                for p in &self.series.points {
                    let k = key(t, p.delta_c_ghz);
                    if !cache.contains_key(&k) && queued.insert(k) {
                        missing.push((k, *t, p.delta_c_ghz));
                    }
                }
            }
        }
        let computed: Vec<(CacheKey, f64, Result<Prediction>)> = missing
            .par_iter()
            .map(|&(k, t, dc)| {
                let params = t.apply(&self.series.fixed).with_delta_c(units::ghz_to_gamma(dc));
                (k, dc, predict(&params, &self.sim))
            })
            .collect();

        let mut failures: HashMap<CacheKey, (f64, String)> = HashMap::new();
        {
            let mut cache = self.cache.lock().unwrap();
            for (k, dc, r) in computed {
                match r {
                    Ok(pred) => {
                        cache.insert(k, pred);
                    }
                    Err(e) => {
                        failures.insert(k, (dc, e.to_string()));
                    }
                }
            }
        }
        let cache = self.cache.lock().unwrap();
        thetas
            .iter()
            .map(|t| {
                self.series
                    .points
                    .iter()
                    .map(|p| {
                        let k = key(t, p.delta_c_ghz);
                        match cache.get(&k) {
                            Some(pred) => Ok(*pred),
                            None => {
                                let message = failures
                                    .get(&k)
                                    .map(|f| f.1.clone())
                                    .unwrap_or_else(|| "prediction unavailable".into());
                                Err(Error::Pipeline {
                                    delta_c_ghz: p.delta_c_ghz,
                                    source: Box::new(Error::InvalidSeries(message)),
                                })
                            }
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Interleaved `(R_g, τ_w)` residuals in series order.
    fn residuals_from(&self, theta: &Theta, preds: Vec<Result<Prediction>>) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * preds.len());
        for (p, pred) in self.series.points.iter().zip(preds) {
            let pred = pred?;
            out.push((theta.scale * pred.r_g - p.r_g) / p.r_g_err);
            out.push((pred.tau_w_ns - p.tau_w_ns) / p.tau_w_err_ns);
        }
        Ok(out)
    }

    fn residuals(&self, theta: &Theta) -> Result<Vec<f64>> {
        let preds = self.predictions(std::slice::from_ref(theta)).pop().unwrap_or_default();
        self.residuals_from(theta, preds)
    }

    /// Sum of squares in detuning order, so reordering the series leaves it
    /// bit-identical.
    fn chi2(&self, r: &[f64]) -> f64 {
        self.order
            .iter()
            .map(|&i| r[2 * i] * r[2 * i] + r[2 * i + 1] * r[2 * i + 1])
            .sum()
    }

    fn point_fits(&self, theta: &Theta) -> Result<Vec<PointFit>> {
        let preds = self.predictions(std::slice::from_ref(theta)).pop().unwrap_or_default();
        self.series
            .points
            .iter()
            .zip(preds)
            .map(|(p, pred)| {
                let pred = pred?;
                Ok(PointFit {
                    delta_c_ghz: p.delta_c_ghz,
                    r_g_meas: p.r_g,
                    r_g_pred: theta.scale * pred.r_g,
                    tau_w_meas: p.tau_w_ns,
                    tau_w_pred: pred.tau_w_ns,
                })
            })
            .collect()
    }

    /// Finite-difference Jacobian over the `free` parameters, rows in
    /// residual order. One-sided at a bound.
    fn jacobian(&self, theta: &Theta, base: &[f64], free: &[usize], rel_step: f64) -> Result<DMatrix<f64>> {
        let x = theta.to_array();
        let mut probes = Vec::new();
        let mut plan = Vec::new();
        for &j in free {
            let h = rel_step * if x[j] != 0.0 { x[j].abs() } else { TYPICAL[j] };
            let (lo, hi) = (x[j] - h, x[j] + h);
            let (minus, plus) = match (lo >= LOWER[j], hi <= UPPER[j]) {
                (true, true) => (Some(lo), Some(hi)),
                (false, _) => (None, Some(hi)),
                (true, false) => (Some(lo), None),
            };
            let mut shifted = |v: f64| {
                let mut a = x;
                a[j] = v;
                probes.push(Theta::from_array(a));
                probes.len() - 1
            };
            let m = minus.map(|v| (shifted(v), v));
            let p = plus.map(|v| (shifted(v), v));
            plan.push((m, p));
        }
        let preds = self.predictions(&probes);
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; probes.len()];
        for (i, pred) in preds.into_iter().enumerate() {
            rows[i] = Some(self.residuals_from(&probes[i], pred)?);
        }

        let m = base.len();
        let mut jac = DMatrix::zeros(m, free.len());
        for (col, (&j, (minus, plus))) in free.iter().zip(plan).enumerate() {
            let (r_lo, x_lo) = match minus {
                Some((i, v)) => (rows[i].as_deref().unwrap(), v),
                None => (base, x[j]),
            };
            let (r_hi, x_hi) = match plus {
                Some((i, v)) => (rows[i].as_deref().unwrap(), v),
                None => (base, x[j]),
            };
            let dx = x_hi - x_lo;
            for row in 0..m {
                jac[(row, col)] = (r_hi[row] - r_lo[row]) / dx;
            }
        }
        Ok(jac)
    }
}

fn sim_for(theta: &Theta, series: &DetuningSeries, options: &FitOptions) -> Result<SimulationOptions> {
    let grid = match options.simulation.grid {
        Some(g) => g,
        None => DetuningGrid::auto(&theta.apply(&series.fixed))?,
    };
    Ok(SimulationOptions {
        grid: Some(grid),
        ..options.simulation
    })
}

/// Weighted residuals `(R_pred − R_meas)/σ_R` and `(τ_pred − τ_meas)/σ_τ`,
/// interleaved per point in series order.
pub fn residuals(theta: &Theta, series: &DetuningSeries, options: &FitOptions) -> Result<Vec<f64>> {
    theta.validate()?;
    let model = Model::new(series, sim_for(theta, series, options)?, theta)?;
    model.residuals(theta)
}

/// `Σ r²` with a summation order that does not depend on point order.
pub fn chi2(theta: &Theta, series: &DetuningSeries, options: &FitOptions) -> Result<f64> {
    theta.validate()?;
    let model = Model::new(series, sim_for(theta, series, options)?, theta)?;
    let r = model.residuals(theta)?;
    Ok(model.chi2(&r))
}

/// Default starting point: `b = 0.3`, `γ = 0.01Γ`, `Ω_c` from a coarse scan
/// of the `τ_w` residuals and `scale` from the first point.
pub fn default_init(series: &DetuningSeries, options: &FitOptions) -> Result<Theta> {
    series.validate()?;
    let b = options.fixed_b.unwrap_or(0.3);
    let base = Theta {
        b,
        omega_c: 10.0,
        gamma_dec: 0.01,
        scale: 1.0,
    };
    let model = Model::new(series, sim_for(&base, series, options)?, &base)?;
    let candidates: Vec<Theta> = (0..16)
        .map(|k| Theta {
            omega_c: 2.0 * 20f64.powf(k as f64 / 15.0),
            ..base
        })
        .collect();
    let preds = model.predictions(&candidates);
    let mut best: Option<(f64, Theta, f64)> = None;
    for (theta, row) in candidates.iter().zip(preds) {
        let Ok(row) = row.into_iter().collect::<Result<Vec<_>>>() else {
            continue;
        };
        let cost: f64 = model
            .order
            .iter()
            .map(|&i| ((row[i].tau_w_ns - series.points[i].tau_w_ns) / series.points[i].tau_w_err_ns).powi(2))
            .sum();
        if best.as_ref().is_none_or(|b| cost < b.0) {
            best = Some((cost, *theta, series.points[0].r_g / row[0].r_g));
        }
    }
    let (_, theta, scale) = best.ok_or_else(|| Error::InvalidSeries("no scan point could be evaluated".into()))?;
    let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    Ok(Theta { scale, ..theta })
}

/// Scaled gradient (see [`FitOptions::gradient_tolerance`]), skipping
/// parameters held at a bound by the gradient.
fn gradient_measure(jac: &DMatrix<f64>, r: &DVector<f64>, x: &[f64; 4], free: &[usize]) -> f64 {
    let g = jac.transpose() * r;
    let rn = r.norm().max(1.0);
    free.iter()
        .enumerate()
        .filter(|&(col, &j)| !((x[j] <= LOWER[j] && g[col] > 0.0) || (x[j] >= UPPER[j] && g[col] < 0.0)))
        .map(|(col, _)| {
            let cn = jac.column(col).norm();
            if cn == 0.0 {
                0.0
            } else {
                g[col].abs() / (cn * rn)
            }
        })
        .fold(0.0, f64::max)
}

fn std_errors(jac: &DMatrix<f64>, free: &[usize]) -> Theta {
    let mut out = [0.0; 4];
    let jtj = jac.transpose() * jac;
    match jtj.try_inverse() {
        Some(cov) => {
            for (col, &j) in free.iter().enumerate() {
                out[j] = cov[(col, col)].max(0.0).sqrt();
            }
        }
        None => {
            for &j in free {
                out[j] = f64::NAN;
            }
        }
    }
    Theta::from_array(out)
}

pub fn fit_series(series: &DetuningSeries, init: &Theta, options: &FitOptions) -> Result<FitResult> {
    series.validate()?;
    let mut x = *init;
    if let Some(b) = options.fixed_b {
        x.b = b;
    }
    x.validate()?;
    let free: Vec<usize> = if options.fixed_b.is_some() {
        vec![1, 2, 3]
    } else {
        vec![0, 1, 2, 3]
    };

    let model = Model::new(series, options.simulation, &x)?;
    let mut r = model.residuals(&x)?;
    let mut chi2 = model.chi2(&r);
    let mut lambda = options.initial_damping;
    let mut iterations = 0;
    let mut converged = false;
    let mut last_jac = None;

    while iterations < options.max_iterations {
        let jac = match model.jacobian(&x, &r, &free, options.jacobian_step) {
            Ok(j) => j,
            Err(_) => break,
        };
        let rv = DVector::from_column_slice(&r);
        if gradient_measure(&jac, &rv, &x.to_array(), &free) <= options.gradient_tolerance {
            converged = true;
            last_jac = Some(jac);
            break;
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &rv;
        let xa = x.to_array();
        let mut accepted = false;
        let mut stalled = false;
        while !accepted {
            let mut a = jtj.clone();
            for k in 0..free.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let step = match a.clone().cholesky() {
                Some(c) => c.solve(&(-&g)),
                None => match a.lu().solve(&(-&g)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        if lambda > 1e12 {
                            stalled = true;
                            break;
                        }
                        continue;
                    }
                },
            };
            let mut trial = xa;
            for (col, &j) in free.iter().enumerate() {
                trial[j] += step[col];
            }
            let trial = Theta::from_array(trial).project();
            let ta = trial.to_array();
            let moved: f64 = free.iter().map(|&j| (ta[j] - xa[j]).powi(2)).sum::<f64>().sqrt();
            let size: f64 = free.iter().map(|&j| xa[j].powi(2)).sum::<f64>().sqrt();
            if moved <= options.step_tolerance * (size + options.step_tolerance) {
                stalled = true;
                break;
            }
            // A trial the model cannot evaluate counts as a rejected step.
            if let Ok(rt) = model.residuals(&trial) {
                let ct = model.chi2(&rt);
                if ct < chi2 {
                    x = trial;
                    r = rt;
                    chi2 = ct;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    continue;
                }
            }
            lambda *= 10.0;
            if lambda > 1e12 {
                stalled = true;
                break;
            }
        }
        iterations += 1;
        last_jac = Some(jac);
        if stalled {
            break;
        }
    }

    // Curvature at the returned point.
    let jac = match model.jacobian(&x, &r, &free, options.jacobian_step) {
        Ok(j) => Some(j),
        Err(_) => last_jac,
    };
    let std_errors = match &jac {
        Some(j) => std_errors(j, &free),
        None => Theta::from_array([f64::NAN; 4]),
    };
    if !converged {
        if let Some(j) = &jac {
            let rv = DVector::from_column_slice(&r);
            converged = gradient_measure(j, &rv, &x.to_array(), &free) <= options.gradient_tolerance;
        }
    }
    Ok(FitResult {
        theta: x,
        std_errors,
        chi2,
        per_point: model.point_fits(&x)?,
        converged,
        iterations,
        grid: model.grid(),
    })
}

/// Forward-model values at each detuning with multiplicative Gaussian noise.
/// Error bars are `max(noise, 1%)` of each reported value. Repeated detunings
/// are allowed here and share one pipeline run.
pub fn synthesize_points(
    theta: &Theta,
    fixed: &SystemParams,
    detunings_ghz: &[f64],
    noise: f64,
    seed: u64,
    simulation: &SimulationOptions,
) -> Result<Vec<SeriesPoint>> {
    theta.validate()?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid("noise", format!("{noise} is not >= 0")));
    }
    let series = DetuningSeries {
        points: detunings_ghz
            .iter()
            .map(|&d| SeriesPoint {
                delta_c_ghz: d,
                r_g: 1.0,
                r_g_err: 1.0,
                tau_w_ns: 1.0,
                tau_w_err_ns: 1.0,
            })
            .collect(),
        fixed: *fixed,
        label: String::new(),
    };
    let model = Model::new(&series, *simulation, theta)?;
    let preds = model.predictions(std::slice::from_ref(theta)).pop().unwrap_or_default();
    let mut rng = StdRng::seed_from_u64(seed);
    let rel = noise.max(0.01);
    detunings_ghz
        .iter()
        .zip(preds)
        .map(|(&d, pred)| {
            let pred = pred?;
            let mut perturb = |v: f64| {
                if noise == 0.0 {
                    v
                } else {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v * (1.0 + noise * z)
                }
            };
            let r_g = perturb(theta.scale * pred.r_g);
            let tau_w = perturb(pred.tau_w_ns);
            Ok(SeriesPoint {
                delta_c_ghz: d,
                r_g,
                r_g_err: rel * r_g.abs(),
                tau_w_ns: tau_w,
                tau_w_err_ns: rel * tau_w.abs(),
            })
        })
        .collect()
}

pub fn synthesize_series(
    theta: &Theta,
    fixed: &SystemParams,
    detunings_ghz: &[f64],
    noise: f64,
    seed: u64,
    simulation: &SimulationOptions,
) -> Result<DetuningSeries> {
    let points = synthesize_points(theta, fixed, detunings_ghz, noise, seed, simulation)?;
    DetuningSeries::new(points, *fixed, "synthetic")
}

/// The twelve coupling detunings (GHz) used for synthetic series.
pub const STANDARD_DETUNINGS_GHZ: [f64; 12] = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.3, 1.6, 2.0, 2.5, 3.0];
