//! Full protocol Monte Carlo: 400 release-evolve-retrap-measure shots along
//! the inverted axis, phase-space histogram and Gaussianity check. This is
//! the library-level equivalent of `darktrap simulate`.
//!
//! Run with:
//!   cargo run --release --example ensemble_histogram

use std::path::Path;

use darktrap::config::RunConfig;
use darktrap::ensemble::{run_ensemble, ShotContext};
use darktrap::state::AxisLabel;
use darktrap::{io, svg};

fn main() {
    let cfg = RunConfig::from_toml_str(include_str!("../configs/paper_nominal.toml")).unwrap();
    let axis = cfg.axis(AxisLabel::Z).unwrap();
    let t_r = 260e-6;
    let schedule = cfg.schedule_for(axis, t_r).unwrap();
    let ctx = ShotContext {
        axis: &axis.params,
        schedule: &schedule,
        noise: &axis.noise,
        protocol: &cfg.protocol,
        mass: cfg.physical.mass,
        initial: axis.initial,
        measurement_broadening: axis.broadening,
    };

    let result = run_ensemble(&ctx, t_r, cfg.seed_base).unwrap();
    println!(
        "{} shots at t_r = {:.0} us ({} valid)",
        result.shots.len(),
        t_r * 1e6,
        result.n_valid
    );
    println!(
        "sigma (major axis) = {:.2} nm +- {:.2} nm",
        result.sample_sigma * 1e9,
        result.sample_sigma_err * 1e9
    );
    println!(
        "expansion ratio eta = {:.0}",
        result.sample_sigma / axis.initial.sigma()
    );
    println!(
        "post-rotation angle = {:.4} rad, minor axis (low confidence) = {:.2} nm",
        result.rotation_angle,
        result.minor_sigma_low_confidence * 1e9
    );
    println!("D'Agostino gaussianity p-value = {:.3}", result.gaussianity_pvalue);

    let out = Path::new("output");
    io::write_shots_csv(&out.join("shots_z_260us.csv"), &result.shots).unwrap();
    io::write_histogram_csv(&out.join("hist_z_260us.csv"), &result.histogram).unwrap();
    let panel = svg::histogram_panel(
        &result.histogram,
        result.sample_sigma,
        "z axis phase space, t_r = 260 us",
    );
    io::atomic_write(&out.join("hist_z_260us.svg"), &panel).unwrap();
    println!("wrote output/shots_z_260us.csv, output/hist_z_260us.csv and the SVG panel");
}
