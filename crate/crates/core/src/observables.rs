//! Scalar figures of merit: widths, rates, SBR, heralding probability and
//! spectral brightness.

use crate::error::{Error, Result, Side};
use crate::ingest::G2Curve;
use crate::params::units;
use crate::wavepacket::{trapezoid_uniform, Spectrum, WavePacket};

/// Whether a rate is in pairs/s or in the model's arbitrary units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Calibration {
    Arbitrary,
    /// Multiply the model integral by `scale` to get pairs/s.
    Absolute {
        scale: f64,
    },
}

impl Calibration {
    pub fn factor(&self) -> f64 {
        match *self {
            Calibration::Arbitrary => 1.0,
            Calibration::Absolute { scale } => scale,
        }
    }

    pub fn is_calibrated(&self) -> bool {
        matches!(self, Calibration::Absolute { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub calibrated: bool,
}

impl Rate {
    pub fn absolute(value: f64) -> Self {
        Rate {
            value,
            calibrated: true,
        }
    }

    pub fn arbitrary(value: f64) -> Self {
        Rate {
            value,
            calibrated: false,
        }
    }
}

/// Detection efficiencies of the signal and probe arms plus the factor that
/// converts a fiber-referenced rate to the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionChain {
    pub d_s: f64,
    pub d_p: f64,
    pub fiber_factor: f64,
}

impl DetectionChain {
    pub const DEFAULT_FIBER_FACTOR: f64 = 1.9;

    pub fn new(d_s: f64, d_p: f64, fiber_factor: f64) -> Result<Self> {
        let chain = DetectionChain { d_s, d_p, fiber_factor };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d_s", self.d_s), ("d_p", self.d_p)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::invalid(name, format!("{v} outside (0, 1]")));
            }
        }
        if !(self.fiber_factor >= 1.0 && self.fiber_factor.is_finite()) {
            return Err(Error::invalid("fiber_factor", format!("{} < 1", self.fiber_factor)));
        }
        Ok(())
    }
}

/// Full width at half maximum of a sampled curve around its global peak.
///
/// Each half-maximum crossing is found by linear interpolation between the
/// bracketing samples. `x` must be increasing.
pub fn fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::invalid("curve", "needs at least 3 paired samples"));
    }
    let (peak, &max) = y.iter().enumerate().fold(
        (0, &f64::NEG_INFINITY),
        |best, (i, v)| if *v > *best.1 { (i, v) } else { best },
    );
    if peak == 0 {
        return Err(Error::PeakAtEndpoint(Side::Left));
    }
    if peak == y.len() - 1 {
        return Err(Error::PeakAtEndpoint(Side::Right));
    }
    let half = max / 2.0;
    let crossing = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);

    let left = (0..peak)
        .rev()
        .find(|&i| y[i] <= half)
        .map(|i| crossing(i, i + 1))
        .ok_or(Error::NoCrossing(Side::Left))?;
    let right = (peak + 1..y.len())
        .find(|&i| y[i] <= half)
        .map(|i| crossing(i - 1, i))
        .ok_or(Error::NoCrossing(Side::Right))?;
    Ok(right - left)
}

/// Temporal FWHM of `G²` in ns.
pub fn temporal_width_ns(wp: &WavePacket) -> Result<f64> {
    Ok(units::tau_to_ns(fwhm(&wp.tau, &wp.g2)?))
}

/// Spectral FWHM as Δω/2π in MHz.
pub fn spectral_width_mhz(spectrum: &Spectrum) -> Result<f64> {
    Ok(units::gamma_to_mhz(fwhm(&spectrum.delta, &spectrum.intensity)?))
}

/// `scale · ∫G² dτ` (trapezoid, τ in units of 1/Γ).
pub fn generation_rate(wp: &WavePacket, calibration: Calibration) -> Rate {
    let value = calibration.factor() * trapezoid_uniform(&wp.g2, wp.spacing());
    Rate {
        value,
        calibrated: calibration.is_calibrated(),
    }
}

pub fn heralding_probability(r_g: Rate, singles_rate: Rate) -> Result<f64> {
    if r_g.calibrated != singles_rate.calibrated {
        return Err(Error::invalid("singles_rate", "calibration differs from r_g"));
    }
    if !(singles_rate.value > 0.0) {
        return Err(Error::invalid(
            "singles_rate",
            format!("{} is not > 0", singles_rate.value),
        ));
    }
    if !(r_g.value >= 0.0) {
        return Err(Error::invalid("r_g", format!("{} is negative", r_g.value)));
    }
    if r_g.value > singles_rate.value {
        return Err(Error::InconsistentRates {
            r_g: r_g.value,
            singles: singles_rate.value,
        });
    }
    Ok(r_g.value / singles_rate.value)
}

/// `max g⁽²⁾ − 1` of a background-normalised curve.
pub fn sbr_from_g2(curve: &G2Curve) -> Result<f64> {
    if !(curve.background_counts_per_bin > 0.0 && curve.background_counts_per_bin.is_finite()) {
        return Err(Error::MissingNormalization);
    }
    let max = curve.g2.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::MissingNormalization);
    }
    Ok(max - 1.0)
}

/// Fiber- and cell-referenced generation rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratedRate {
    pub fiber: f64,
    pub cell: f64,
}

/// `R_g = R_d / (D_s D_p)`. `r_d` must already be saturation corrected.
pub fn detected_to_generated(r_d: f64, chain: &DetectionChain) -> Result<GeneratedRate> {
    chain.validate()?;
    let fiber = r_d / (chain.d_s * chain.d_p);
    Ok(GeneratedRate {
        fiber,
        cell: chain.fiber_factor * fiber,
    })
}

/// Pairs per second per MHz of linewidth.
pub fn spectral_brightness(r_g: f64, delta_omega_mhz: f64) -> Result<f64> {
    if !(delta_omega_mhz > 0.0) {
        return Err(Error::invalid("delta_omega", format!("{delta_omega_mhz} is not > 0")));
    }
    Ok(r_g / delta_omega_mhz)
}

/// Observable report. Any field may be absent depending on the source
/// (theory or measured histogram).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BiphotonObservables {
    pub r_g: Option<f64>,
    /// ns.
    pub tau_w: Option<f64>,
    /// Δω/2π in MHz.
    pub delta_omega: Option<f64>,
    pub sbr: Option<f64>,
    pub h_p: Option<f64>,
    pub calibrated: bool,
}

impl BiphotonObservables {
    pub fn sb(&self) -> Option<f64> {
        match (self.r_g, self.delta_omega) {
            (Some(r), Some(w)) => spectral_brightness(r, w).ok(),
            _ => None,
        }
    }

    /// `(name, value, units)` rows for present fields, in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64, &'static str)> {
        let rate_units = if self.calibrated { "1/s" } else { "arb" };
        let sb_units = if self.calibrated { "1/s/MHz" } else { "arb/MHz" };
        [
            ("r_g", self.r_g, rate_units),
            ("tau_w", self.tau_w, "ns"),
            ("delta_omega", self.delta_omega, "MHz"),
            ("sbr", self.sbr, "1"),
            ("h_p", self.h_p, "1"),
            ("sb", self.sb(), sb_units),
        ]
        .into_iter()
        .filter_map(|(n, v, u)| v.map(|v| (n, v, u)))
        .collect()
    }
}
