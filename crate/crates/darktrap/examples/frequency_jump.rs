//! Breathing dynamics after the frequency jump into the Paul trap, with and
//! without micromotion: maximum expansion at a quarter secular period,
//! recompression at half, and small RF-frequency ripples on top.
//!
//! Run with:
//!   cargo run --release --example frequency_jump

use std::f64::consts::PI;
use std::path::Path;

use darktrap::analytic::variance_jump;
use darktrap::propagator::{calibrate_mathieu_from_secular, propagate_recording, StiffnessSchedule};
use darktrap::state::{thermal_state, NoiseSpec};
use darktrap::{io, svg};

const MASS: f64 = 1.95e-18;
const OMEGA: f64 = 2.0 * PI * 185e3; // optical trap before the jump
const W_SEC: f64 = 2.0 * PI * 2.7e3; // secular frequency after it
const RF: f64 = 2.0 * PI * 25e3;

fn main() {
    let init = thermal_state(721.0, OMEGA, MASS).unwrap();
    let t_half = PI / W_SEC;

    // micromotion-free secular prediction
    let times: Vec<f64> = (0..=2000).map(|i| t_half * i as f64 / 2000.0).collect();
    let secular: Vec<f64> = times
        .iter()
        .map(|t| variance_jump(*t, init.var_position, OMEGA, W_SEC, 0.0, MASS).unwrap().sqrt())
        .collect();

    // full Mathieu propagation with q calibrated to the same secular frequency
    let q = calibrate_mathieu_from_secular(W_SEC, RF, 0.0).unwrap();
    println!("calibrated Mathieu q = {q:.4} for {:.2} kHz secular", W_SEC / (2.0 * PI * 1e3));
    let sched = StiffnessSchedule::mathieu(0.0, q, RF, 0.0, 1.01 * t_half).unwrap();
    let mathieu: Vec<f64> = propagate_recording(&init, &sched, &NoiseSpec::off(), MASS, &times, 1.0)
        .unwrap()
        .iter()
        .map(|s| s.sigma())
        .collect();

    let out = Path::new("output");
    io::write_curve_csv(&out.join("jump_secular.csv"), &times, &secular, None).unwrap();
    io::write_curve_csv(&out.join("jump_micromotion.csv"), &times, &mathieu, None).unwrap();
    let sec_pts: Vec<(f64, f64)> = times.iter().zip(&secular).map(|(t, s)| (*t, *s)).collect();
    let mm_pts: Vec<(f64, f64)> = times.iter().zip(&mathieu).map(|(t, s)| (*t, *s)).collect();
    let chart = svg::line_chart(
        &[("with micromotion", &mm_pts), ("secular only", &sec_pts)],
        "release time (s)",
        "position std dev (m)",
        "frequency jump breathing, u axis",
    );
    io::atomic_write(&out.join("frequency_jump.svg"), &chart).unwrap();

    let quarter = variance_jump(t_half / 2.0, init.var_position, OMEGA, W_SEC, 0.0, MASS)
        .unwrap()
        .sqrt();
    println!(
        "sigma at T/4 = {:.1} nm = {:.1} x sigma(0); recompressed at T/2 to {:.0} pm",
        quarter * 1e9,
        quarter / init.sigma(),
        secular.last().unwrap() * 1e12
    );
    println!("confinement bound: Omega/omega = {:.1}", OMEGA / W_SEC);
    println!("wrote output/jump_secular.csv, output/jump_micromotion.csv and the SVG");
}
