//! Forward model end to end: kernels, wave packet, observables.

use crate::error::Result;
use crate::observables::{self, BiphotonObservables, Calibration};
use crate::params::{units, SystemParams};
use crate::quadrature::QuadratureSpec;
use crate::wavepacket::{
    biphoton_spectrum, sample_spectral_amplitude_with, wave_packet_with, DetuningGrid, SpectralAmplitude, Spectrum,
    WavePacket, DEFAULT_OVERSAMPLE,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    /// `None` sizes the grid from the parameters.
    pub grid: Option<DetuningGrid>,
    pub quadrature: QuadratureSpec,
    pub oversample: usize,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            grid: None,
            quadrature: QuadratureSpec::default(),
            oversample: DEFAULT_OVERSAMPLE,
        }
    }
}

/// Model observables at one parameter point, in lab units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// `∫G² dτ`, arbitrary units.
    pub r_g: f64,
    pub tau_w_ns: f64,
    pub delta_omega_mhz: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub amplitude: SpectralAmplitude,
    pub wave_packet: WavePacket,
    pub spectrum: Spectrum,
    pub prediction: Prediction,
}

impl Simulation {
    pub fn run(params: &SystemParams, options: &SimulationOptions) -> Result<Self> {
        let amplitude = sample_spectral_amplitude_with(params, options.grid, &options.quadrature)?;
        let wave_packet = wave_packet_with(&amplitude, options.oversample);
        let spectrum = biphoton_spectrum(&amplitude)?;
        let prediction = Prediction {
            r_g: observables::generation_rate(&wave_packet, Calibration::Arbitrary).value,
            tau_w_ns: observables::temporal_width_ns(&wave_packet)?,
            delta_omega_mhz: observables::spectral_width_mhz(&spectrum)?,
        };
        Ok(Simulation {
            amplitude,
            wave_packet,
            spectrum,
            prediction,
        })
    }

    pub fn observables(&self) -> BiphotonObservables {
        BiphotonObservables {
            r_g: Some(self.prediction.r_g),
            tau_w: Some(self.prediction.tau_w_ns),
            delta_omega: Some(self.prediction.delta_omega_mhz),
            ..Default::default()
        }
    }

    /// Samples of `G²` with `|τ| ≤ halfwidth_ns`, as `(τ in ns, G²)`.
    pub fn wave_packet_window(&self, halfwidth_ns: f64) -> Vec<(f64, f64)> {
        let h = units::ns_to_tau(halfwidth_ns);
        let wp = &self.wave_packet;
        wp.window(-h, h)
            .map(|i| (units::tau_to_ns(wp.tau[i]), wp.g2[i]))
            .collect()
    }
}

/// Rate and widths only.
pub fn predict(params: &SystemParams, options: &SimulationOptions) -> Result<Prediction> {
    Simulation::run(params, options).map(|s| s.prediction)
}
