//! Coherence-length evolution during the expansion: the inverted axis decays
//! to a plateau where the expansion compensates the heating, and reducing the
//! heating rate by 1000 lifts the whole curve.
//!
//! Run with:
//!   cargo run --release --example coherence_length

use std::f64::consts::PI;
use std::path::Path;

use darktrap::fit::{coherence_curve, FitModel, FitParams, FitResult};
use darktrap::units::{HBAR, K_B};
use darktrap::{io, svg};

const MASS: f64 = 1.95e-18;

fn z_axis_fit() -> FitResult {
    // nominal z-axis parameters standing in for a fitted curve
    FitResult {
        params: FitParams {
            gamma1: K_B * 5.91 / (HBAR * 2.0 * PI * 43.5e3),
            trap_frequency: 2.0 * PI * 43.5e3,
            dark_frequency: 2.0 * PI * 1.4e3,
            var0: 45.6e-12_f64 * 45.6e-12,
            phase: 0.0,
        },
        covariance: [[0.0; 5]; 5],
        residual_rms: 0.0,
        n_points: 0,
        model: FitModel::Inverted,
        mass: MASS,
        iterations: 0,
        degeneracy_warnings: vec![],
    }
}

fn main() {
    let fit = z_axis_fit();
    let grid: Vec<f64> = (0..=300).map(|i| i as f64 * 1e-6).collect();
    let curve = coherence_curve(&fit, MASS, 10.0, &grid, 1e-3).unwrap();

    println!("xi(0)      = {:.2} pm", curve.xi[0] * 1e12);
    println!("xi(260 us) = {:.2} pm (plateau: expansion compensates heating)", curve.xi[260] * 1e12);
    println!(
        "xi(260 us) with heating/1000 = {:.1} pm",
        curve.xi_improved[260] * 1e12
    );
    println!(
        "ground-state coherence threshold = {:.2} pm",
        curve.xi_zpm_threshold * 1e12
    );

    let out = Path::new("output");
    io::write_coherence_csv(&out.join("coherence_z.csv"), &curve.times, &curve.xi, &curve.xi_improved)
        .unwrap();
    let base: Vec<(f64, f64)> = curve.times.iter().zip(&curve.xi).map(|(t, x)| (*t, *x)).collect();
    let imp: Vec<(f64, f64)> =
        curve.times.iter().zip(&curve.xi_improved).map(|(t, x)| (*t, *x)).collect();
    let thr: Vec<(f64, f64)> =
        curve.times.iter().map(|t| (*t, curve.xi_zpm_threshold)).collect();
    let chart = svg::line_chart(
        &[("fitted heating", &base), ("heating / 1000", &imp), ("ground state", &thr)],
        "time (s)",
        "coherence length (m)",
        "coherence length, z axis",
    );
    io::atomic_write(&out.join("coherence_z.svg"), &chart).unwrap();
    println!("wrote output/coherence_z.csv and output/coherence_z.svg");
}
