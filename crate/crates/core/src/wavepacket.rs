//! Spectral amplitude, two-photon correlation function and spectrum.
//!
//! The amplitude on the two-photon detuning grid is
//! `A(δ) = κ̄(δ) · sinc(ρ̄(δ)) · exp(iρ̄(δ)) · B(δ)` with `ρ̄ = ρ̄_c + ρ̄_m`,
//! and the wave packet is `G²(τ) = |∫ dδ e^{-iδτ}/(2π) A(δ)|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::kernels::{complex_sinc, etalon_response, KernelEvaluator};
use crate::params::{units, SystemParams};
use crate::quadrature::QuadratureSpec;

/// Uniform, symmetric two-photon detuning grid (units of Γ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningGrid {
    delta_max: f64,
    n_points: usize,
}

impl DetuningGrid {
    pub const MIN_POINTS: usize = 1 << 14;
    pub const MAX_POINTS: usize = 1 << 22;
    /// Floor on the feature width used for auto-sizing, so that γ = 0 does
    /// not demand an unbounded grid.
    pub const FEATURE_FLOOR: f64 = 1e-3;

    pub fn new(delta_max: f64, n_points: usize) -> Result<Self> {
        if !(delta_max > 0.0 && delta_max.is_finite()) {
            return Err(Error::invalid("grid.delta_max", "must be finite and > 0"));
        }
        if !n_points.is_power_of_two() || n_points < Self::MIN_POINTS {
            return Err(Error::invalid(
                "grid.n_points",
                format!("{n_points} is not a power of two >= {}", Self::MIN_POINTS),
            ));
        }
        if n_points > Self::MAX_POINTS {
            return Err(Error::invalid(
                "grid.n_points",
                format!("{n_points} exceeds {}", Self::MAX_POINTS),
            ));
        }
        Ok(DetuningGrid { delta_max, n_points })
    }

    /// `δ_max = max(20Γ, 5Γ_e)`, spacing at most a quarter of
    /// `min(γ, Γ_e/100)`.
    pub fn auto(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let delta_max = (20.0 * params.gamma_natural).max(5.0 * params.gamma_etalon);
        let feature = params
            .gamma_dec
            .max(Self::FEATURE_FLOOR * params.gamma_natural)
            .min(params.gamma_etalon / 100.0);
        Self::with_spacing(delta_max, feature / 4.0)
    }

    /// Smallest admissible grid on `[-delta_max, delta_max]` with spacing at
    /// most `spacing`.
    pub fn with_spacing(delta_max: f64, spacing: f64) -> Result<Self> {
        let needed = (2.0 * delta_max / spacing).ceil() + 1.0;
        if !(needed <= Self::MAX_POINTS as f64) {
            return Err(Error::GridOverflow {
                widenings: 0,
                edge_ratio: f64::NAN,
            });
        }
        let n = (needed as usize).next_power_of_two().max(Self::MIN_POINTS);
        Self::new(delta_max, n)
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    pub fn delta_min(&self) -> f64 {
        -self.delta_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.delta_max / (self.n_points - 1) as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.delta_max
        } else {
            self.delta_min() + k as f64 * self.spacing()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.value(k)).collect()
    }

    /// Twice the span at the same spacing (as near as a power of two allows).
    fn widened(&self) -> Result<Self> {
        Self::new(2.0 * self.delta_max, 2 * self.n_points)
    }
}

/// Sampled integrand of the wave-packet transform.
#[derive(Debug, Clone)]
pub struct SpectralAmplitude {
    pub grid: DetuningGrid,
    pub amplitude: Vec<Complex64>,
    pub params: SystemParams,
}

/// Largest allowed `|A|` at the grid edges relative to the peak.
pub const EDGE_RATIO: f64 = 1e-6;
const MAX_WIDENINGS: usize = 3;

impl SpectralAmplitude {
    fn edge_ratio(&self) -> f64 {
        let peak = self.amplitude.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.amplitude.first().map_or(0.0, |a| a.norm());
        let last = self.amplitude.last().map_or(0.0, |a| a.norm());
        first.max(last) / peak
    }

    /// Trapezoid value of `(1/2π) ∫ |A(δ)|² dδ`.
    pub fn spectral_energy(&self) -> f64 {
        let n = self.amplitude.len();
        let sum: f64 = self
            .amplitude
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
                w * a.norm_sqr()
            })
            .sum();
        sum * self.grid.spacing() / (2.0 * PI)
    }
}

/// One sample of the amplitude from the three kernels and the etalon.
pub fn amplitude_at(kernels: &KernelEvaluator, delta: f64) -> Result<Complex64> {
    let k = kernels.evaluate(delta)?;
    let rho = k.rho_c + k.rho_m;
    let etalon = etalon_response(delta, kernels.params().gamma_etalon)?;
    Ok(k.kappa * complex_sinc(rho) * (Complex64::i() * rho).exp() * etalon)
}

/// Samples `A(δ)` with the analytic kernels. See
/// [`sample_spectral_amplitude_with`].
pub fn sample_spectral_amplitude(params: &SystemParams, grid_hint: Option<DetuningGrid>) -> Result<SpectralAmplitude> {
    sample_spectral_amplitude_with(params, grid_hint, &QuadratureSpec::default())
}

/// Samples `A(δ)` on `grid_hint` (or an auto-sized grid), widening the grid
/// up to three times until the edge magnitude is below [`EDGE_RATIO`] of the
/// peak.
pub fn sample_spectral_amplitude_with(
    params: &SystemParams,
    grid_hint: Option<DetuningGrid>,
    quad: &QuadratureSpec,
) -> Result<SpectralAmplitude> {
    let kernels = KernelEvaluator::new(params, *quad)?;
    let mut grid = match grid_hint {
        Some(g) => g,
        None => DetuningGrid::auto(params)?,
    };
    let mut widenings = 0;
    loop {
        let amplitude = (0..grid.n_points())
            .into_par_iter()
            .map(|k| amplitude_at(&kernels, grid.value(k)))
            .collect::<Result<Vec<_>>>()?;
        let sa = SpectralAmplitude {
            grid,
            amplitude,
            params: *params,
        };
        let ratio = sa.edge_ratio();
        if ratio < EDGE_RATIO {
            return Ok(sa);
        }
        if widenings == MAX_WIDENINGS {
            return Err(Error::GridOverflow {
                widenings,
                edge_ratio: ratio,
            });
        }
        grid = grid.widened().map_err(|_| Error::GridOverflow {
            widenings,
            edge_ratio: ratio,
        })?;
        widenings += 1;
    }
}

/// Two-photon correlation function on a uniform delay grid.
#[derive(Debug, Clone)]
pub struct WavePacket {
    /// Delay, units of 1/Γ, ascending.
    pub tau: Vec<f64>,
    /// `G²(τ)`, arbitrary units.
    pub g2: Vec<f64>,
    pub params: SystemParams,
}

impl WavePacket {
    pub fn tau_ns(&self) -> Vec<f64> {
        self.tau.iter().map(|&t| units::tau_to_ns(t)).collect()
    }

    pub fn spacing(&self) -> f64 {
        self.tau[1] - self.tau[0]
    }

    /// Trapezoid `∫ G² dτ` over the whole grid.
    pub fn integral(&self) -> f64 {
        trapezoid_uniform(&self.g2, self.spacing())
    }

    /// Index range of samples with `lo ≤ τ ≤ hi` (units of 1/Γ).
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.tau.partition_point(|&t| t < lo);
        let end = self.tau.partition_point(|&t| t <= hi);
        start..end.max(start)
    }
}

pub(crate) fn trapezoid_uniform(y: &[f64], h: f64) -> f64 {
    match y.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = y[1..n - 1].iter().sum();
            (inner + 0.5 * (y[0] + y[n - 1])) * h
        }
    }
}

/// Zero-padding factor applied before the transform; it refines the delay
/// sampling to `2π / (oversample · N · Δδ)`.
pub const DEFAULT_OVERSAMPLE: usize = 4;

/// Continuous transform `F(τ) = ∫ dδ e^{-iδτ}/(2π) A(δ)` of uniform samples.
///
/// Trapezoid weights on the samples, zero padding to `oversample · N`, one
/// FFT, then the phase `e^{-iδ_min τ}` that moves the origin from the first
/// sample to δ = 0. Returns `(τ, F)` with τ ascending and τ = 0 included.
pub fn continuous_transform(
    samples: &[Complex64],
    delta_min: f64,
    spacing: f64,
    oversample: usize,
) -> (Vec<f64>, Vec<Complex64>) {
    let n = samples.len();
    let m = n * oversample.max(1);
    let mut buffer = vec![Complex64::new(0.0, 0.0); m];
    for (k, (slot, &a)) in buffer.iter_mut().zip(samples).enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        *slot = a * w;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buffer);

    let dtau = 2.0 * PI / (m as f64 * spacing);
    let scale = spacing / (2.0 * PI);
    let half = m / 2;
    let mut tau = Vec::with_capacity(m);
    let mut values = Vec::with_capacity(m);
    for j in (half..m).chain(0..half) {
        let index = if j >= half { j as f64 - m as f64 } else { j as f64 };
        let t = index * dtau;
        tau.push(t);
        values.push(buffer[j] * Complex64::from_polar(scale, -delta_min * t));
    }
    (tau, values)
}

pub fn wave_packet(sa: &SpectralAmplitude) -> WavePacket {
    wave_packet_with(sa, DEFAULT_OVERSAMPLE)
}

pub fn wave_packet_with(sa: &SpectralAmplitude, oversample: usize) -> WavePacket {
    let (tau, values) = continuous_transform(&sa.amplitude, sa.grid.delta_min(), sa.grid.spacing(), oversample);
    WavePacket {
        tau,
        g2: values.iter().map(|v| v.norm_sqr()).collect(),
        params: sa.params,
    }
}

/// Biphoton spectrum `|A(δ)|²` normalised to unit peak.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Two-photon detuning, units of Γ.
    pub delta: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl Spectrum {
    /// Detuning axis as δ/2π in MHz.
    pub fn delta_mhz(&self) -> Vec<f64> {
        self.delta.iter().map(|&d| units::gamma_to_mhz(d)).collect()
    }
}

pub fn biphoton_spectrum(sa: &SpectralAmplitude) -> Result<Spectrum> {
    let power: Vec<f64> = sa.amplitude.iter().map(|a| a.norm_sqr()).collect();
    let peak = power.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    Ok(Spectrum {
        delta: sa.grid.values(),
        intensity: power.iter().map(|p| p / peak).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::presets;

    fn gaussian_amplitude(sigma: f64, grid: DetuningGrid) -> SpectralAmplitude {
        SpectralAmplitude {
            grid,
            amplitude: grid
                .values()
                .iter()
                .map(|&d| Complex64::new((-d * d / (2.0 * sigma * sigma)).exp(), 0.0))
                .collect(),
            params: presets::coupling_15mw(),
        }
    }

    #[test]
    fn grid_validation() {
        assert!(DetuningGrid::new(10.0, 1000).is_err());
        assert!(DetuningGrid::new(10.0, 1 << 13).is_err());
        assert!(DetuningGrid::new(-1.0, 1 << 14).is_err());
        let g = DetuningGrid::new(10.0, 1 << 14).unwrap();
        assert_eq!(g.value(0), -10.0);
        assert_eq!(g.value(g.n_points() - 1), 10.0);
    }

    #[test]
    fn auto_grid_resolves_the_decoherence_scale() {
        let p = presets::coupling_15mw();
        let g = DetuningGrid::auto(&p).unwrap();
        assert_eq!(g.delta_max(), 5.0 * p.gamma_etalon);
        assert!(g.spacing() <= p.gamma_dec / 4.0);
        assert!(g.n_points().is_power_of_two());
        assert_eq!(g.n_points(), 1 << 15);
        // γ = 0 falls back to the floor instead of an unbounded grid.
        let g0 = DetuningGrid::auto(&SystemParams { gamma_dec: 0.0, ..p }).unwrap();
        assert!(g0.spacing() <= DetuningGrid::FEATURE_FLOOR / 4.0);
    }

    #[test]
    fn gaussian_transform_pair() {
        // A(δ) = exp(-δ²/2σ²) ⇒ F(τ) = σ/√(2π) exp(-σ²τ²/2), real and positive.
        let sigma = 2.0;
        let sa = gaussian_amplitude(sigma, DetuningGrid::new(20.0, 1 << 14).unwrap());
        let (tau, f) = continuous_transform(&sa.amplitude, sa.grid.delta_min(), sa.grid.spacing(), 4);
        let zero = tau.iter().position(|&t| t == 0.0).unwrap();
        for j in [zero, zero + 3, zero - 17, zero + 40] {
            let t = tau[j];
            let exact = sigma / (2.0 * PI).sqrt() * (-sigma * sigma * t * t / 2.0).exp();
            assert!((f[j] - exact).norm() < 1e-12, "τ = {t}: {} vs {exact}", f[j]);
        }
    }

    #[test]
    fn gaussian_wave_packet_width() {
        let sigma = 1.5;
        let sa = gaussian_amplitude(sigma, DetuningGrid::new(20.0, 1 << 14).unwrap());
        let wp = wave_packet(&sa);
        let measured = crate::observables::fwhm(&wp.tau, &wp.g2).unwrap();
        // |F|² ∝ exp(-σ²τ²) has FWHM 2√(ln 2)/σ.
        let exact = 2.0 * std::f64::consts::LN_2.sqrt() / sigma;
        assert!((measured - exact).abs() / exact < 1e-3, "{measured} vs {exact}");
    }

    #[test]
    fn zero_amplitude_gives_zero_packet_and_no_spectrum() {
        let p = SystemParams {
            omega_p: 0.0,
            ..presets::coupling_15mw()
        };
        let sa = sample_spectral_amplitude(&p, None).unwrap();
        assert!(sa.amplitude.iter().all(|a| a.norm() == 0.0));
        let wp = wave_packet(&sa);
        assert!(wp.g2.iter().all(|&g| g == 0.0));
        assert!(matches!(biphoton_spectrum(&sa), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn parseval_and_edge_decay() {
        let p = presets::coupling_15mw();
        let sa = sample_spectral_amplitude(&p, None).unwrap();
        assert!(sa.edge_ratio() < EDGE_RATIO);
        let wp = wave_packet(&sa);
        assert!(wp.g2.iter().all(|&g| g >= 0.0));
        let rel = (wp.integral() - sa.spectral_energy()).abs() / sa.spectral_energy();
        assert!(rel < 1e-6, "{rel:e}");
    }

    #[test]
    fn narrow_grid_is_widened_or_rejected() {
        let p = presets::coupling_15mw();
        let tiny = DetuningGrid::new(2.0, 1 << 14).unwrap();
        // Edge ratio at ±2Γ is far above 1e-6; three doublings reach ±16Γ,
        // still not enough for the etalon tail.
        match sample_spectral_amplitude(&p, Some(tiny)) {
            Err(Error::GridOverflow { widenings, .. }) => assert_eq!(widenings, 3),
            other => panic!("expected overflow, got {:?}", other.map(|s| s.grid)),
        }
        let short = DetuningGrid::new(12.0, 1 << 15).unwrap();
        let sa = sample_spectral_amplitude(&p, Some(short)).unwrap();
        assert!(sa.grid.delta_max() > 12.0);
    }

    #[test]
    fn spectrum_is_unit_peak() {
        let sa = gaussian_amplitude(1.0, DetuningGrid::new(10.0, 1 << 14).unwrap());
        let s = biphoton_spectrum(&sa).unwrap();
        let peak = s.intensity.iter().copied().fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
        let at = |d: f64| {
            let k = s.delta.iter().position(|&x| (x - d).abs() < 1e-3).unwrap();
            (s.delta[k], s.intensity[k])
        };
        let (d, v) = at(0.5);
        assert!((v - (-d * d).exp()).abs() < 1e-6);
    }
}
