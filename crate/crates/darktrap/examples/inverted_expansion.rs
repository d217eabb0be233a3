//! Exponential state expansion in the inverted potential vs free flight:
//! the sigma(t_r) curves behind the release-time scan, written as CSV and
//! SVG into output/.
//!
//! Run with:
//!   cargo run --release --example inverted_expansion

use std::f64::consts::PI;
use std::path::Path;

use darktrap::analytic::{variance_free, variance_inverted};
use darktrap::units::{HBAR, K_B};
use darktrap::{io, svg};

const MASS: f64 = 1.95e-18;
const OMEGA: f64 = 2.0 * PI * 43.5e3; // optical trap
const W_DARK: f64 = 2.0 * PI * 1.4e3; // inverted curvature
const SIGMA0: f64 = 45.6e-12;
const EDOT: f64 = K_B * 5.91; // J/s

fn main() {
    let gamma1 = EDOT / (HBAR * OMEGA);
    let var0 = SIGMA0 * SIGMA0;

    let times: Vec<f64> = (0..=260).map(|i| i as f64 * 1e-6).collect();
    let inverted: Vec<f64> = times
        .iter()
        .map(|t| variance_inverted(*t, var0, OMEGA, W_DARK, gamma1, MASS).unwrap().sqrt())
        .collect();
    let free: Vec<f64> = times
        .iter()
        .map(|t| variance_free(*t, var0, OMEGA, EDOT, MASS).unwrap().sqrt())
        .collect();

    let out = Path::new("output");
    io::write_curve_csv(&out.join("inverted_expansion.csv"), &times, &inverted, None).unwrap();
    io::write_curve_csv(&out.join("free_expansion.csv"), &times, &free, None).unwrap();

    let inv_pts: Vec<(f64, f64)> = times.iter().zip(&inverted).map(|(t, s)| (*t, *s)).collect();
    let free_pts: Vec<(f64, f64)> = times.iter().zip(&free).map(|(t, s)| (*t, *s)).collect();
    let chart = svg::line_chart(
        &[("inverted potential", &inv_pts), ("free expansion", &free_pts)],
        "release time (s)",
        "position std dev (m)",
        "state expansion along z",
    );
    io::atomic_write(&out.join("inverted_expansion.svg"), &chart).unwrap();

    let last = *inverted.last().unwrap();
    println!("sigma_z(260 us) = {:.1} nm  (eta = {:.0})", last * 1e9, last / SIGMA0);
    println!(
        "free expansion reaches {:.1} nm: slower than the inverted potential",
        free.last().unwrap() * 1e9
    );
    println!("wrote output/inverted_expansion.csv, output/free_expansion.csv and the SVG");
}
