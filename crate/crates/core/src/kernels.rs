//! Doppler-averaged response functions of the double-Λ medium.
//!
//! - `κ̄(δ)`: cross-susceptibility between signal and probe.
//! - `ρ̄_c(δ)`: probe self-susceptibility from atoms carrying the ground-state
//!   coherence (EIT).
//! - `ρ̄_m(δ)`: probe self-susceptibility from impurity atoms, which respond
//!   as plain two-level absorbers.
//!
//! Every integrand is a Gaussian times factors with simple poles in the
//! Doppler shift ω_D, so the analytic path reduces each average to one or two
//! evaluations of [`gaussian_cauchy`]. Writing `s = δ + iγ`, the coherent
//! denominator is `Ω_c² - 4s(δ + Δ_c + ω_D + iΓ/2) = -4s(ω_D - q)` with
//! `q = Ω_c²/(4s) - δ - Δ_c - iΓ/2`. For `γ ≥ 0` all poles sit in the lower
//! half-plane; the Cauchy transform handles either sign regardless.
//!
//! The impurity term carries the absorptive sign: it is the `Ω_c → 0` limit
//! of the coherent integrand, `-Γ/(4(δ + Δ_c + ω_D + iΓ/2))`, giving
//! `Im ρ̄_m > 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::faddeeva::gaussian_cauchy;
use crate::params::SystemParams;
use crate::quadrature::{doppler_average, QuadratureMethod, QuadratureSpec};

/// A dimensionless complex response value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResponse {
    pub value: Complex64,
}

impl From<Complex64> for ComplexResponse {
    fn from(value: Complex64) -> Self {
        ComplexResponse { value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub kappa: Complex64,
    pub rho_c: Complex64,
    pub rho_m: Complex64,
}

/// Pole separation, in units of Γ_D, below which the two-pole reduction of
/// κ̄ loses too many digits to cancellation and quadrature is used instead.
const COINCIDENT_POLES: f64 = 1e-3;

/// Kernel evaluator for one parameter set. Caches the δ-independent pump
/// pole transform.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    params: SystemParams,
    quad: QuadratureSpec,
    pump_transform: Complex64,
}

impl KernelEvaluator {
    pub fn new(params: &SystemParams, quad: QuadratureSpec) -> Result<Self> {
        params.validate()?;
        quad.validate()?;
        let pump_transform = gaussian_cauchy(pump_pole(params) / params.gamma_doppler);
        Ok(KernelEvaluator {
            params: *params,
            quad,
            pump_transform,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn rho_m(&self, delta: f64) -> Result<Complex64> {
        check_delta(delta)?;
        match self.quad.method {
            QuadratureMethod::FaddeevaAnalytic => Ok(self.rho_m_analytic(delta)),
            _ => self.rho_m_numeric(delta, &self.quad),
        }
    }

    pub fn rho_c(&self, delta: f64) -> Result<Complex64> {
        check_delta(delta)?;
        match self.quad.method {
            QuadratureMethod::FaddeevaAnalytic => {
                let q = coupled_pole(&self.params, delta);
                Ok(self.rho_c_from(q.map(|q| self.transform(q))))
            }
            _ => self.rho_c_numeric(delta, &self.quad),
        }
    }

    pub fn kappa(&self, delta: f64) -> Result<Complex64> {
        check_delta(delta)?;
        match self.quad.method {
            QuadratureMethod::FaddeevaAnalytic => {
                let q = coupled_pole(&self.params, delta);
                self.kappa_from(delta, q, q.map(|q| self.transform(q)))
            }
            _ => self.kappa_numeric(delta, &self.quad),
        }
    }

    /// All three kernels at `delta`, sharing the coherent-pole transform.
    pub fn evaluate(&self, delta: f64) -> Result<KernelValues> {
        check_delta(delta)?;
        if self.quad.method != QuadratureMethod::FaddeevaAnalytic {
            return Ok(KernelValues {
                kappa: self.kappa_numeric(delta, &self.quad)?,
                rho_c: self.rho_c_numeric(delta, &self.quad)?,
                rho_m: self.rho_m_numeric(delta, &self.quad)?,
            });
        }
        let q = coupled_pole(&self.params, delta);
        let cq = q.map(|q| self.transform(q));
        Ok(KernelValues {
            kappa: self.kappa_from(delta, q, cq)?,
            rho_c: self.rho_c_from(cq),
            rho_m: self.rho_m_analytic(delta),
        })
    }

    fn transform(&self, pole: Complex64) -> Complex64 {
        gaussian_cauchy(pole / self.params.gamma_doppler) / self.params.gamma_doppler
    }

    fn rho_m_analytic(&self, delta: f64) -> Complex64 {
        let p = &self.params;
        let pre = rho_m_prefactor(p);
        if pre == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let pole = Complex64::new(-(delta + p.delta_c), -0.5 * p.gamma_natural);
        -pre * 0.25 * p.gamma_natural * self.transform(pole)
    }

    fn rho_c_from(&self, coupled_transform: Option<Complex64>) -> Complex64 {
        let p = &self.params;
        let pre = rho_c_prefactor(p);
        match coupled_transform {
            Some(cq) if pre != 0.0 => -pre * 0.25 * p.gamma_natural * cq,
            // δ + iγ = 0 kills the numerator.
            _ => Complex64::new(0.0, 0.0),
        }
    }

    fn kappa_from(&self, delta: f64, q: Option<Complex64>, cq: Option<Complex64>) -> Result<Complex64> {
        let p = &self.params;
        let pre = kappa_prefactor(p);
        if pre == 0.0 || p.omega_p == 0.0 || p.omega_c == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = p.gamma_natural;
        let (q, cq) = match (q, cq) {
            (Some(q), Some(cq)) => (q, cq),
            // s = 0: the coherent factor is the constant Γ/Ω_c.
            _ => return Ok(pre * p.omega_p * g / p.omega_c * self.pump_transform / p.gamma_doppler),
        };
        if (pump_pole(p) - q).norm() < COINCIDENT_POLES * p.gamma_doppler {
            let quad = QuadratureSpec {
                method: QuadratureMethod::AdaptivePanels,
                ..self.quad
            };
            return self.kappa_numeric(delta, &quad);
        }
        let s = Complex64::new(delta, p.gamma_dec);
        let d = p.omega_c * p.omega_c - 4.0 * s * (delta + p.delta_c - p.delta_p);
        let diff = self.pump_transform / p.gamma_doppler - cq;
        Ok(pre * p.omega_p * p.omega_c * g / d * diff)
    }

    fn rho_m_numeric(&self, delta: f64, quad: &QuadratureSpec) -> Result<Complex64> {
        let p = self.params;
        let pre = rho_m_prefactor(&p);
        if pre == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = p.gamma_natural;
        let f = move |w: f64| -g / (4.0 * Complex64::new(delta + p.delta_c + w, 0.5 * g));
        Ok(pre * doppler_average(f, p.gamma_doppler, quad)?)
    }

    fn rho_c_numeric(&self, delta: f64, quad: &QuadratureSpec) -> Result<Complex64> {
        let p = self.params;
        let pre = rho_c_prefactor(&p);
        if pre == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = p.gamma_natural;
        let s = Complex64::new(delta, p.gamma_dec);
        let f =
            move |w: f64| s * g / (p.omega_c * p.omega_c - 4.0 * s * Complex64::new(delta + p.delta_c + w, 0.5 * g));
        Ok(pre * doppler_average(f, p.gamma_doppler, quad)?)
    }

    fn kappa_numeric(&self, delta: f64, quad: &QuadratureSpec) -> Result<Complex64> {
        let p = self.params;
        let pre = kappa_prefactor(&p);
        if pre == 0.0 || p.omega_p == 0.0 || p.omega_c == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let g = p.gamma_natural;
        let s = Complex64::new(delta, p.gamma_dec);
        let f = move |w: f64| {
            p.omega_p / Complex64::new(p.delta_p + w, 0.5 * g) * p.omega_c * g
                / (p.omega_c * p.omega_c - 4.0 * s * Complex64::new(delta + p.delta_c + w, 0.5 * g))
        };
        Ok(pre * doppler_average(f, p.gamma_doppler, quad)?)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("delta", format!("{delta} is not finite")))
    }
}

fn rho_m_prefactor(p: &SystemParams) -> f64 {
    0.5 * p.b * p.alpha
}

fn rho_c_prefactor(p: &SystemParams) -> f64 {
    0.5 * (1.0 - p.b) * p.alpha
}

fn kappa_prefactor(p: &SystemParams) -> f64 {
    0.25 * (1.0 - p.b) * p.alpha
}

/// Pole of the pump factor `Ω_p/(Δ_p + ω_D + iΓ/2)`.
fn pump_pole(p: &SystemParams) -> Complex64 {
    Complex64::new(-p.delta_p, -0.5 * p.gamma_natural)
}

/// Pole `q` of the coherent denominator, or `None` when `δ + iγ = 0`.
fn coupled_pole(p: &SystemParams, delta: f64) -> Option<Complex64> {
    let s = Complex64::new(delta, p.gamma_dec);
    if s.re == 0.0 && s.im == 0.0 {
        return None;
    }
    Some(p.omega_c * p.omega_c / (4.0 * s) - Complex64::new(delta + p.delta_c, 0.5 * p.gamma_natural))
}

pub fn rho_m_bar(delta: f64, params: &SystemParams, quad: &QuadratureSpec) -> Result<ComplexResponse> {
    KernelEvaluator::new(params, *quad)?.rho_m(delta).map(Into::into)
}

pub fn rho_c_bar(delta: f64, params: &SystemParams, quad: &QuadratureSpec) -> Result<ComplexResponse> {
    KernelEvaluator::new(params, *quad)?.rho_c(delta).map(Into::into)
}

pub fn kappa_bar(delta: f64, params: &SystemParams, quad: &QuadratureSpec) -> Result<ComplexResponse> {
    KernelEvaluator::new(params, *quad)?.kappa(delta).map(Into::into)
}

/// Combined signal/probe etalon transmission `(1/(1 + 4δ²/Γ_e²))²`.
pub fn etalon_response(delta: f64, gamma_etalon: f64) -> Result<f64> {
    if !(gamma_etalon > 0.0 && gamma_etalon.is_finite()) {
        return Err(Error::invalid("gamma_etalon", "must be > 0"));
    }
    check_delta(delta)?;
    let x = 2.0 * delta / gamma_etalon;
    let lorentz = 1.0 / (1.0 + x * x);
    Ok(lorentz * lorentz)
}

/// Below this modulus `sin(z)/z` is summed as a series.
pub const SINC_SERIES_RADIUS: f64 = 1e-4;

/// `sin(z)/z` with the removable singularity filled in.
pub fn complex_sinc(z: Complex64) -> Complex64 {
    if z.norm() < SINC_SERIES_RADIUS {
        let z2 = z * z;
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0)
    } else {
        z.sin() / z
    }
}
