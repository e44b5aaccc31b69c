//! Numerical Doppler averaging.
//!
//! Evaluates `∫ exp(-ω²/Γ_D²)/(√π Γ_D) f(ω) dω` on the truncated support
//! `[-h Γ_D, h Γ_D]`, either with a dense compensated trapezoid rule or with
//! adaptive Gauss–Kronrod (7/15) panels. Both accumulate in a fixed order, so
//! a given spec always yields the same bits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureMethod {
    /// Closed-form reduction to the Faddeeva function (kernels only).
    FaddeevaAnalytic,
    AdaptivePanels,
    DenseTrapezoid,
}

impl QuadratureMethod {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureMethod::FaddeevaAnalytic => "faddeeva_analytic",
            QuadratureMethod::AdaptivePanels => "adaptive_panels",
            QuadratureMethod::DenseTrapezoid => "dense_trapezoid",
        }
    }
}

impl fmt::Display for QuadratureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuadratureMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faddeeva_analytic" => Ok(QuadratureMethod::FaddeevaAnalytic),
            "adaptive_panels" => Ok(QuadratureMethod::AdaptivePanels),
            "dense_trapezoid" => Ok(QuadratureMethod::DenseTrapezoid),
            other => Err(Error::invalid("quadrature.method", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    /// Relative tolerance of the adaptive panel rule.
    pub panel_tolerance: f64,
    /// Sample count of the dense trapezoid rule.
    pub trapezoid_points: usize,
    /// Support truncation `h`, in multiples of Γ_D.
    pub support_halfwidth: f64,
    /// Maximum number of adaptive panels before giving up.
    pub panel_budget: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::FaddeevaAnalytic,
            panel_tolerance: 1e-11,
            trapezoid_points: 1_000_000,
            support_halfwidth: 8.0,
            panel_budget: 20_000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_method(method: QuadratureMethod) -> Self {
        QuadratureSpec {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.panel_tolerance > 0.0 && self.panel_tolerance.is_finite()) {
            return Err(Error::invalid("panel_tolerance", "must be > 0"));
        }
        if self.trapezoid_points < 1000 {
            return Err(Error::invalid("trapezoid_points", "must be >= 1000"));
        }
        if !(self.support_halfwidth >= 6.0 && self.support_halfwidth.is_finite()) {
            return Err(Error::invalid("support_halfwidth", "must be >= 6"));
        }
        if self.panel_budget < 16 {
            return Err(Error::invalid("panel_budget", "must be >= 16"));
        }
        Ok(())
    }
}

/// Normalised Doppler weight `exp(-ω²/Γ_D²)/(√π Γ_D)`.
pub fn doppler_weight(omega: f64, gamma_doppler: f64) -> f64 {
    let x = omega / gamma_doppler;
    (-x * x).exp() / (PI.sqrt() * gamma_doppler)
}

/// Doppler average of `integrand` per `quad`.
///
/// [`QuadratureMethod::FaddeevaAnalytic`] has no meaning for an arbitrary
/// integrand and is served by the adaptive panel rule.
pub fn doppler_average<F>(integrand: F, gamma_doppler: f64, quad: &QuadratureSpec) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    quad.validate()?;
    if !(gamma_doppler > 0.0 && gamma_doppler.is_finite()) {
        return Err(Error::invalid("gamma_doppler", "must be > 0"));
    }
    let half = quad.support_halfwidth * gamma_doppler;
    let weighted = |w: f64| doppler_weight(w, gamma_doppler) * integrand(w);
    match quad.method {
        QuadratureMethod::DenseTrapezoid => Ok(trapezoid(weighted, -half, half, quad.trapezoid_points)),
        QuadratureMethod::AdaptivePanels | QuadratureMethod::FaddeevaAnalytic => {
            adaptive(weighted, -half, half, quad.panel_tolerance, quad.panel_budget)
        }
    }
}

/// Neumaier-compensated complex accumulator.
#[derive(Default, Clone, Copy)]
struct Accumulator {
    sum: Complex64,
    carry: Complex64,
}

impl Accumulator {
    fn add(&mut self, v: Complex64) {
        self.sum.re = neumaier(self.sum.re, v.re, &mut self.carry.re);
        self.sum.im = neumaier(self.sum.im, v.im, &mut self.carry.im);
    }

    fn total(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn neumaier(sum: f64, v: f64, carry: &mut f64) -> f64 {
    let t = sum + v;
    if sum.abs() >= v.abs() {
        *carry += (sum - t) + v;
    } else {
        *carry += (v - t) + sum;
    }
    t
}

/// Composite trapezoid rule with `points` samples on `[a, b]`.
pub fn trapezoid<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, points: usize) -> Complex64 {
    let h = (b - a) / (points - 1) as f64;
    let mut acc = Accumulator::default();
    for k in 0..points {
        let x = if k + 1 == points { b } else { a + k as f64 * h };
        let v = f(x);
        acc.add(if k == 0 || k + 1 == points { 0.5 * v } else { v });
    }
    acc.total() * h
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    /// Kronrod estimate of `∫|f|`, the scale for cancelling integrands.
    magnitude: f64,
    error: f64,
}

impl Panel {
    fn new<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Self {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let fc = f(center);
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        let mut magnitude = fc.norm() * WGK[7];
        for j in 0..7 {
            let dx = half * XGK[j];
            let (lo, hi) = (f(center - dx), f(center + dx));
            let pair = lo + hi;
            kronrod += pair * WGK[j];
            magnitude += (lo.norm() + hi.norm()) * WGK[j];
            if j % 2 == 1 {
                gauss += pair * WG[j / 2];
            }
        }
        Panel {
            a,
            b,
            value: kronrod * half,
            magnitude: magnitude * half.abs(),
            error: ((kronrod - gauss) * half).norm(),
        }
    }
}

// Max-heap on error; ties broken by position so refinement order is fixed.
impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

const INITIAL_PANELS: usize = 16;

/// Globally adaptive Gauss–Kronrod integration on `[a, b]`.
pub fn adaptive<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tolerance: f64, budget: usize) -> Result<Complex64> {
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut heap: BinaryHeap<Panel> = (0..INITIAL_PANELS)
        .map(|k| {
            let lo = a + k as f64 * width;
            let hi = if k + 1 == INITIAL_PANELS { b } else { lo + width };
            Panel::new(&f, lo, hi)
        })
        .collect();

    loop {
        let (value, magnitude, error) = totals(&heap);
        // Relative to |∫f|, or to ∫|f| when the integral cancels.
        let scale = value.norm().max(tolerance.sqrt() * magnitude);
        if error <= tolerance * scale || error == 0.0 {
            return Ok(value);
        }
        if heap.len() >= budget {
            return Err(Error::Convergence {
                achieved: error / scale,
                requested: tolerance,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(Panel::new(&f, worst.a, mid));
        heap.push(Panel::new(&f, mid, worst.b));
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (Complex64, f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut acc = Accumulator::default();
    let mut error = 0.0;
    let mut magnitude = 0.0;
    for p in panels {
        acc.add(p.value);
        magnitude += p.magnitude;
        error += p.error;
    }
    (acc.total(), magnitude, error)
}
