//! Simulation and data analysis for double-Λ spontaneous four-wave-mixing
//! biphoton sources in Doppler-broadened atomic vapour.
//!
//! The crate is organised bottom-up:
//!
//! - [`faddeeva`] and [`quadrature`]: the complex error function and the
//!   Doppler-averaging engines (analytic reduction plus brute-force oracles).
//! - [`kernels`]: the Doppler-averaged cross- and self-susceptibility
//!   responses, the etalon filter and the complex sinc.
//! - [`wavepacket`]: spectral amplitude sampling, the continuous Fourier
//!   transform to the two-photon correlation function, and the spectrum.
//! - [`observables`]: figures of merit (rate, widths, SBR, heralding
//!   probability, spectral brightness).
//! - [`ingest`]: measured coincidence histograms and their normalisation.
//! - [`fitting`]: damped least-squares fits of `(b, Ω_c, γ, scale)` to
//!   rate/width-versus-detuning series.
//!
//! All angular frequencies are carried internally in units of the natural
//! linewidth Γ (Γ/2π = 6 MHz) and all times in units of 1/Γ; see
//! [`params::units`] for the converters used at the boundary.

// NaN must fail every range check, so `!(x > 0.0)` is the idiom throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod faddeeva;
pub mod fitting;
pub mod ingest;
pub mod kernels;
pub mod observables;
pub mod params;
pub mod pipeline;
pub mod quadrature;
pub mod wavepacket;

pub use error::{Error, Result};
pub use fitting::{DetuningSeries, FitOptions, FitResult, SeriesPoint, Theta};
pub use ingest::{CoincidenceHistogram, G2Curve};
pub use kernels::{ComplexResponse, KernelEvaluator, KernelValues};
pub use observables::{BiphotonObservables, Calibration, DetectionChain, Rate};
pub use params::{presets, LabParams, SystemParams};
pub use pipeline::{Prediction, Simulation, SimulationOptions};
pub use quadrature::{QuadratureMethod, QuadratureSpec};
pub use wavepacket::{DetuningGrid, SpectralAmplitude, Spectrum, WavePacket};

pub use num_complex::Complex64;
