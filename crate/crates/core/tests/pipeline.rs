//! Forward-model regression values and wave-packet invariants.
//!
//! The frozen numbers were produced by a separate NumPy/SciPy implementation
//! of the same model (scipy.special.wofz for the Doppler integrals, numpy FFT)
//! on identical grids.

use proptest::prelude::*;
use sfwm::params::units::ghz_to_gamma;
use sfwm::wavepacket::{sample_spectral_amplitude, wave_packet, DetuningGrid};
use sfwm::{presets, Simulation, SimulationOptions, SystemParams};

fn close(actual: f64, expected: f64, rel: f64) -> bool {
    (actual - expected).abs() <= rel * expected.abs()
}

fn run(p: &SystemParams) -> Simulation {
    Simulation::run(p, &SimulationOptions::default()).unwrap()
}

/// (b, Ω_c, γ, Δc/2π GHz) → (∫G²dτ, τ_w ns, Δω/2π MHz)
type Frozen = ((f64, f64, f64, f64), (f64, f64, f64));

const FROZEN: [Frozen; 5] = [
    ((0.375, 11.4, 0.013, 0.0), (3.5247366363e-05, 47.043352, 6.811903)),
    ((0.375, 11.4, 0.013, 1.0), (1.0906379353e-04, 131.418991, 0.746071)),
    ((0.375, 11.4, 0.013, 3.0), (5.3634396189e-05, 531.015138, 0.278053)),
    ((0.0, 11.4, 0.013, 0.0), (2.1589140538e-04, 82.645297, 5.273576)),
    ((0.315, 16.6, 0.010, 1.0), (1.2740913244e-04, 72.739005, 1.055159)),
];

#[test]
fn frozen_forward_model_values() {
    for ((b, oc, g, dc), (rg, tau, dw)) in FROZEN {
        let p = SystemParams {
            b,
            omega_c: oc,
            gamma_dec: g,
            ..presets::medium()
        }
        .with_delta_c(ghz_to_gamma(dc));
        let pr = run(&p).prediction;
        assert!(close(pr.r_g, rg, 1e-8), "R_g at {dc} GHz, b = {b}: {}", pr.r_g);
        assert!(
            close(pr.tau_w_ns, tau, 1e-6),
            "τ_w at {dc} GHz, b = {b}: {}",
            pr.tau_w_ns
        );
        assert!(
            close(pr.delta_omega_mhz, dw, 1e-5),
            "Δω at {dc} GHz, b = {b}: {}",
            pr.delta_omega_mhz
        );
    }
}

#[test]
fn impurities_change_the_spectral_width() {
    let with = run(&presets::coupling_15mw()).prediction.delta_omega_mhz;
    let without = run(&presets::coupling_15mw().with_b(0.0)).prediction.delta_omega_mhz;
    assert!((with - without).abs() > 0.1, "{with} vs {without}");
}

#[test]
fn doubling_grid_points_preserves_the_integral() {
    for dc in [0.0, 1.0] {
        let p = presets::coupling_15mw().with_delta_c(ghz_to_gamma(dc));
        let sa = sample_spectral_amplitude(&p, None).unwrap();
        let coarse = wave_packet(&sa).integral();
        let fine_grid = DetuningGrid::new(sa.grid.delta_max(), 2 * sa.grid.n_points()).unwrap();
        let fine = wave_packet(&sample_spectral_amplitude(&p, Some(fine_grid)).unwrap()).integral();
        assert!(close(fine, coarse, 1e-6), "{dc} GHz: {coarse} vs {fine}");
    }
}

#[test]
fn narrower_etalon_never_shortens_the_packet() {
    for dc in [0.0, 1.0] {
        let p = presets::coupling_15mw().with_delta_c(ghz_to_gamma(dc));
        let wide = run(&p).prediction.tau_w_ns;
        let narrow = run(&SystemParams {
            gamma_etalon: p.gamma_etalon / 2.0,
            ..p
        })
        .prediction
        .tau_w_ns;
        assert!(narrow >= wide, "{dc} GHz: {wide} -> {narrow}");
    }
}

fn physical_params() -> impl Strategy<Value = SystemParams> {
    (0.0f64..=1.0, 4.0f64..20.0, 0.0f64..0.05, 0.0f64..3.0, 100.0f64..800.0).prop_map(|(b, oc, g, dc, alpha)| {
        SystemParams {
            b,
            omega_c: oc,
            gamma_dec: g,
            alpha,
            ..presets::medium()
        }
        .with_delta_c(ghz_to_gamma(dc))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn parseval_and_non_negativity(p in physical_params()) {
        let sa = sample_spectral_amplitude(&p, None).unwrap();
        let wp = wave_packet(&sa);
        prop_assert!(wp.g2.iter().all(|&g| g >= 0.0));
        let time = wp.integral();
        let freq = sa.spectral_energy();
        prop_assert!(close(time, freq, 1e-6), "{time} vs {freq}");
    }
}
