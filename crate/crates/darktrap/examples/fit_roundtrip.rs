//! Parameter estimation round trip: generate a noisy synthetic expansion
//! curve, fit it, and compare the recovered parameters (with uncertainties)
//! against the generator values.
//!
//! Run with:
//!   cargo run --release --example fit_roundtrip

use std::f64::consts::PI;

use darktrap::analytic::variance_inverted;
use darktrap::fit::{fit_expansion, FitModel, FitParams, FitSettings, Weights};
use darktrap::units::{HBAR, K_B};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

const MASS: f64 = 1.95e-18;

fn main() {
    let truth = FitParams {
        gamma1: K_B * 5.91 / (HBAR * 2.0 * PI * 43.5e3),
        trap_frequency: 2.0 * PI * 43.5e3,
        dark_frequency: 2.0 * PI * 1.4e3,
        var0: 45.6e-12_f64 * 45.6e-12,
        phase: 0.0,
    };

    // dense early points pin sigma(0) and the trap frequency; the linear
    // tail pins the dark frequency and the heating rate
    let mut times: Vec<f64> =
        (0..12).map(|i| 0.2e-6 * 40.0_f64.powf(i as f64 / 11.0)).collect();
    times.extend((0..40).map(|i| 10e-6 + 250e-6 * i as f64 / 39.0));

    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let clean: Vec<f64> = times
        .iter()
        .map(|t| {
            variance_inverted(*t, truth.var0, truth.trap_frequency, truth.dark_frequency,
                truth.gamma1, MASS)
            .unwrap()
            .sqrt()
        })
        .collect();
    let noisy: Vec<f64> = clean
        .iter()
        .map(|s| s * (1.0 + 0.03 * rng.sample::<f64, _>(StandardNormal)))
        .collect();

    let init = FitParams {
        gamma1: 2.0 * truth.gamma1,
        trap_frequency: 1.5 * truth.trap_frequency,
        dark_frequency: 0.6 * truth.dark_frequency,
        var0: 2.0 * truth.var0,
        phase: 0.0,
    };
    let bounds = (
        FitParams { gamma1: 0.0, trap_frequency: 1e3, dark_frequency: 1e2, var0: 1e-25, phase: -PI },
        FitParams { gamma1: 1e9, trap_frequency: 1e8, dark_frequency: 1e6, var0: 1e-18, phase: PI },
    );
    let mut settings = FitSettings::new(MASS);
    settings.weights = Weights::PerPoint(clean.iter().map(|s| 0.03 * s).collect());

    let fit = fit_expansion(&times, &noisy, FitModel::Inverted, init, bounds, &settings).unwrap();
    println!("converged in {} iterations, residual rms {:.2e} m", fit.iterations, fit.residual_rms);
    println!("parameter      truth        fitted       1-sigma      pull");
    let rows = [
        ("gamma1", truth.gamma1, fit.params.gamma1, fit.uncertainty(0)),
        ("Omega", truth.trap_frequency, fit.params.trap_frequency, fit.uncertainty(1)),
        ("omega", truth.dark_frequency, fit.params.dark_frequency, fit.uncertainty(2)),
        ("var0", truth.var0, fit.params.var0, fit.uncertainty(3)),
    ];
    for (name, t, f, u) in rows {
        println!("{name:12} {t:12.5e} {f:12.5e} {u:12.2e} {:+7.2}", (f - t) / u);
    }
    for w in &fit.degeneracy_warnings {
        println!("warning: {w}");
    }
}
