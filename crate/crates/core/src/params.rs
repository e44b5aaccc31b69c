//! Physical parameters of the double-Λ model.
//!
//! [`SystemParams`] stores every angular frequency in units of the natural
//! linewidth Γ, so `gamma_natural` is 1 for anything built from lab units.
//! [`LabParams`] is the user-facing record (MHz/GHz, Rabi frequencies in Γ).

use crate::error::{Error, Result};

pub mod units {
    //! Boundary converters between lab units and the internal Γ units.

    use std::f64::consts::PI;

    /// Γ/2π in MHz.
    pub const GAMMA_MHZ: f64 = 6.0;

    pub fn mhz_to_gamma(f_mhz: f64) -> f64 {
        f_mhz / GAMMA_MHZ
    }

    pub fn gamma_to_mhz(x: f64) -> f64 {
        x * GAMMA_MHZ
    }

    pub fn ghz_to_gamma(f_ghz: f64) -> f64 {
        f_ghz * 1.0e3 / GAMMA_MHZ
    }

    pub fn gamma_to_ghz(x: f64) -> f64 {
        x * GAMMA_MHZ / 1.0e3
    }

    /// 1/Γ expressed in ns.
    pub fn inverse_gamma_ns() -> f64 {
        1.0e3 / (2.0 * PI * GAMMA_MHZ)
    }

    /// Delay in units of 1/Γ to ns.
    pub fn tau_to_ns(tau: f64) -> f64 {
        tau * inverse_gamma_ns()
    }

    pub fn ns_to_tau(t_ns: f64) -> f64 {
        t_ns / inverse_gamma_ns()
    }
}

use units::*;

/// Model parameters, angular frequencies in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Optical depth α.
    pub alpha: f64,
    /// Fraction of impurity atoms, `0 ≤ b ≤ 1`.
    pub b: f64,
    /// Excited-state decay rate Γ (1 in internal units).
    pub gamma_natural: f64,
    /// Doppler e⁻¹ half-width Γ_D.
    pub gamma_doppler: f64,
    /// Effective combined etalon width Γ_e.
    pub gamma_etalon: f64,
    /// Pump Rabi frequency Ω_p.
    pub omega_p: f64,
    /// Coupling Rabi frequency Ω_c.
    pub omega_c: f64,
    /// Pump one-photon detuning Δ_p.
    pub delta_p: f64,
    /// Coupling one-photon detuning Δ_c.
    pub delta_c: f64,
    /// Ground-state decoherence rate γ.
    pub gamma_dec: f64,
}

fn check(name: &'static str, value: f64, ok: bool, rule: &str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(name, format!("{value} is not finite")));
    }
    if !ok {
        return Err(Error::invalid(name, format!("{value} violates {rule}")));
    }
    Ok(())
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        check("alpha", self.alpha, self.alpha > 0.0, "alpha > 0")?;
        check("b", self.b, (0.0..=1.0).contains(&self.b), "0 <= b <= 1")?;
        check("gamma_natural", self.gamma_natural, self.gamma_natural > 0.0, "> 0")?;
        check("gamma_doppler", self.gamma_doppler, self.gamma_doppler > 0.0, "> 0")?;
        check("gamma_etalon", self.gamma_etalon, self.gamma_etalon > 0.0, "> 0")?;
        check("omega_p", self.omega_p, true, "")?;
        check("omega_c", self.omega_c, true, "")?;
        check("delta_p", self.delta_p, true, "")?;
        check("delta_c", self.delta_c, true, "")?;
        check("gamma_dec", self.gamma_dec, self.gamma_dec >= 0.0, ">= 0")?;
        Ok(())
    }

    pub fn from_lab(lab: &LabParams) -> Result<Self> {
        let p = SystemParams {
            alpha: lab.alpha,
            b: lab.b,
            gamma_natural: 1.0,
            gamma_doppler: mhz_to_gamma(lab.gamma_doppler_mhz),
            gamma_etalon: mhz_to_gamma(lab.gamma_etalon_mhz),
            omega_p: lab.omega_p_gamma,
            omega_c: lab.omega_c_gamma,
            delta_p: ghz_to_gamma(lab.delta_p_ghz),
            delta_c: ghz_to_gamma(lab.delta_c_ghz),
            gamma_dec: mhz_to_gamma(lab.gamma_dec_mhz),
        };
        p.validate()?;
        Ok(p)
    }

    /// Lab-unit view. Only meaningful when `gamma_natural == 1`.
    pub fn to_lab(&self) -> LabParams {
        LabParams {
            alpha: self.alpha,
            b: self.b,
            gamma_doppler_mhz: gamma_to_mhz(self.gamma_doppler),
            gamma_etalon_mhz: gamma_to_mhz(self.gamma_etalon),
            omega_p_gamma: self.omega_p,
            omega_c_gamma: self.omega_c,
            delta_p_ghz: gamma_to_ghz(self.delta_p),
            delta_c_ghz: gamma_to_ghz(self.delta_c),
            gamma_dec_mhz: gamma_to_mhz(self.gamma_dec),
        }
    }

    pub fn with_delta_c(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }
}

/// Parameters in lab units: detunings in GHz, widths in MHz (all /2π),
/// Rabi frequencies in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabParams {
    pub alpha: f64,
    pub b: f64,
    pub gamma_doppler_mhz: f64,
    pub gamma_etalon_mhz: f64,
    pub omega_p_gamma: f64,
    pub omega_c_gamma: f64,
    pub delta_p_ghz: f64,
    pub delta_c_ghz: f64,
    pub gamma_dec_mhz: f64,
}

/// Parameter sets of the reference experiment.
pub mod presets {
    use super::units::ghz_to_gamma;
    use super::SystemParams;

    pub const ALPHA: f64 = 500.0;
    pub const GAMMA_DOPPLER: f64 = 54.0;
    pub const GAMMA_ETALON: f64 = 8.9;
    pub const DELTA_P_GHZ: f64 = 1.9;

    /// Fixed medium and filter constants; `b`, `Ω_c`, `γ` and `Δ_c` left at
    /// placeholder values for the caller to set. Ω_p = 1Γ (it is only an
    /// overall scale).
    pub fn medium() -> SystemParams {
        SystemParams {
            alpha: ALPHA,
            b: 0.0,
            gamma_natural: 1.0,
            gamma_doppler: GAMMA_DOPPLER,
            gamma_etalon: GAMMA_ETALON,
            omega_p: 1.0,
            omega_c: 1.0,
            delta_p: ghz_to_gamma(DELTA_P_GHZ),
            delta_c: 0.0,
            gamma_dec: 0.0,
        }
    }

    /// Best-fit set at 15 mW coupling power: Ω_c = 11.4Γ, γ = 0.013Γ, b = 0.375.
    pub fn coupling_15mw() -> SystemParams {
        SystemParams {
            b: 0.375,
            omega_c: 11.4,
            gamma_dec: 0.013,
            ..medium()
        }
    }

    /// Best-fit set at 30 mW coupling power: Ω_c = 16.6Γ, γ = 0.010Γ, b = 0.315.
    pub fn coupling_30mw() -> SystemParams {
        SystemParams {
            b: 0.315,
            omega_c: 16.6,
            gamma_dec: 0.010,
            ..medium()
        }
    }
}
