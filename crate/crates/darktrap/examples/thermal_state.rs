//! Prepared-state bookkeeping: zero-point motion, thermal state sizes,
//! purity, coherence length, and the squeezing level of the measured
//! expansion.
//!
//! Run with:
//!   cargo run --release --example thermal_state

use std::f64::consts::PI;

use darktrap::fit::expansion_ratio;
use darktrap::state::{
    coherence_length, occupation_from_temperature, purity, squeezing_db, thermal_state,
    zero_point_sigma, GaussianState,
};
use darktrap::units::HBAR;

const MASS: f64 = 1.95e-18; // kg

fn main() {
    // the three cooled axes: (label, trap frequency, occupation)
    let axes = [
        ("x", 2.0 * PI * 185e3, 721.0),
        ("y", 2.0 * PI * 171e3, 3763.0),
        ("z", 2.0 * PI * 43.5e3, 10.0),
    ];

    println!("axis   f (kHz)   n_bar     sigma_zp (pm)  sigma (pm)  purity");
    for (label, omega, nbar) in axes {
        let zp = zero_point_sigma(omega, MASS).unwrap();
        let state = thermal_state(nbar, omega, MASS).unwrap();
        println!(
            "{label:4} {:9.1} {nbar:8.0} {:14.2} {:11.1} {:9.2e}",
            omega / (2.0 * PI * 1e3),
            zp * 1e12,
            state.sigma() * 1e12,
            purity(&state).unwrap()
        );
    }

    // temperature bookkeeping for the z axis
    let omega_z = 2.0 * PI * 43.5e3;
    let t_z = darktrap::state::temperature_from_occupation(10.0, omega_z).unwrap();
    println!("\nz-axis mode temperature for n_bar = 10: {:.2} uK", t_z * 1e6);
    println!(
        "round trip n_bar: {:.4}",
        occupation_from_temperature(t_z, omega_z).unwrap()
    );

    // coherence length of the prepared z state (sigma = 45.6 pm, n = 10)
    let var0 = 45.6e-12_f64 * 45.6e-12;
    let vp0 = (HBAR * 21.0 / 2.0) * (HBAR * 21.0 / 2.0) / var0;
    let z0 = GaussianState::from_covariance(var0, 0.0, vp0).unwrap();
    println!(
        "\nprepared z state: sigma = {:.1} pm, purity = {:.4}, xi = {:.2} pm",
        z0.sigma() * 1e12,
        purity(&z0).unwrap(),
        coherence_length(&z0).unwrap() * 1e12
    );

    // the headline squeezing number: 45.6 pm expanded to 43.4 nm
    let eta = expansion_ratio(43.4e-9, 45.6e-12).unwrap();
    println!(
        "expansion eta = {:.1}  ->  squeezing level {:.1} dB",
        eta,
        squeezing_db(eta).unwrap()
    );
}
