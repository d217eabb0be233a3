//! Stochastic single-trajectory simulation of the full release-retrap
//! protocol, producing per-shot phase-space points and the Fig.-2-style
//! ensemble statistics.
//!
//! One shot: draw (z, p) from the prepared Gaussian, evolve in the optical
//! trap with feedback off for t_FB, integrate the Langevin equation
//! dz = (p/m)dt, dp = −k(t)z dt − γp dt + noise through the dark schedule to
//! t_r, retrap for t_m while recording the position, and reconstruct
//! (z(t_r), p(t_r)) by lock-in demodulation.
//!
//! The SDE integrator is a splitting scheme: the exact linear flow of the
//! (midpoint-frozen) stiffness over each half-substep, composed with an exact
//! Ornstein-Uhlenbeck momentum kick in between. For piecewise-constant
//! stiffness the deterministic part is exact for any substep size, which
//! removes discretization bias from the sampled variances.
//!
//! Every random draw comes from a counter-style stream cipher RNG
//! (ChaCha12) keyed by (seed, substream), so shots are bit-exact
//! reproducible regardless of thread count or execution order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lockin::{lockin_reconstruct, state_from_lockin};
use crate::propagator::{flow_constant_k, Segment, SegmentKind, StiffnessSchedule};
use crate::state::{AxisLabel, AxisParams, GaussianState, NoiseSpec, ProtocolSpec, ReadoutMode};
use crate::stats::{
    bootstrap_sigma_err, dagostino_k2, histogram2d, principal_angle, sample_cov2, std_dev,
    Histogram2d,
};

/// One repetition of the experimental sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub axis: AxisLabel,
    /// Release duration t_r, s.
    pub release_time: f64,
    /// Reconstructed z(t_r), m.
    pub reconstructed_position: f64,
    /// Reconstructed p(t_r), kg·m/s.
    pub reconstructed_momentum: f64,
    /// Seed that replays this trajectory bit-exactly.
    pub seed: u64,
    pub valid: bool,
}

/// Everything a single shot needs, shared read-only across workers.
#[derive(Debug, Clone, Copy)]
pub struct ShotContext<'a> {
    pub axis: &'a AxisParams,
    pub schedule: &'a StiffnessSchedule,
    pub noise: &'a NoiseSpec,
    pub protocol: &'a ProtocolSpec,
    pub mass: f64,
    /// State prepared by the feedback cooling, sampled per shot.
    pub initial: GaussianState,
    /// Measurement broadening δσ for this axis, m.
    pub measurement_broadening: f64,
}

/// Ensemble statistics over the shots of one release time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub shots: Vec<Shot>,
    /// Major-axis position standard deviation after phase-space
    /// post-rotation, m.
    pub sample_sigma: f64,
    /// Bootstrap standard error of `sample_sigma`, m.
    pub sample_sigma_err: f64,
    /// `sample_sigma` with the measurement broadening added in quadrature, m.
    pub sigma_measured: f64,
    /// Raw (unrotated) sample covariance of (z, p).
    pub sample_cov: [[f64; 2]; 2],
    pub mean_position: f64,
    pub mean_momentum: f64,
    /// Post-processing rotation angle applied in the (z, p/mΩ) plane, rad.
    pub rotation_angle: f64,
    /// Minor-axis standard deviation, m. Low confidence: the measurement
    /// resolves the major axis reliably, not this one.
    pub minor_sigma_low_confidence: f64,
    /// 2D histogram of the rotated cloud, both axes in meters (momentum
    /// divided by mΩ).
    pub histogram: Histogram2d,
    /// D'Agostino K² p-value of the major-axis marginal; NaN when the sample
    /// is too small for the test.
    pub gaussianity_pvalue: f64,
    pub n_valid: usize,
}

/// Quadrature-sum model of the measurement-induced broadening:
/// √(σ_true² + δσ²).
pub fn apply_measurement_broadening(sigma_true: f64, delta_sigma: f64) -> Result<f64> {
    if sigma_true < 0.0 || delta_sigma < 0.0 {
        return Err(Error::domain("sigma and broadening must be >= 0"));
    }
    Ok(sigma_true.hypot(delta_sigma))
}

/// Dedicated RNG stream for (seed, substream).
fn stream(seed: u64, substream: u32) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..12].copy_from_slice(&substream.to_le_bytes());
    key[12..20].copy_from_slice(b"darktrap");
    ChaCha12Rng::from_seed(key)
}

/// Samples (z, p) from a Gaussian state via the Cholesky factor of Σ.
fn sample_state(state: &GaussianState, rng: &mut ChaCha12Rng) -> (f64, f64) {
    let xi1: f64 = rng.sample(StandardNormal);
    let xi2: f64 = rng.sample(StandardNormal);
    let sz = state.var_position.sqrt();
    if sz == 0.0 {
        return (state.mean_position, state.mean_momentum + state.var_momentum.sqrt() * xi1);
    }
    let l21 = state.covariance / sz;
    let l22 = (state.var_momentum - l21 * l21).max(0.0).sqrt();
    (state.mean_position + sz * xi1, state.mean_momentum + l21 * xi1 + l22 * xi2)
}

/// Substep count for a segment span: resolve the fastest oscillation and,
/// when diffusing, keep the midpoint-rule noise accumulation fine.
fn substeps(seg: &Segment, span: f64, mass: f64, diffusing: bool) -> u64 {
    let mut h_max = span;
    match seg.kind {
        SegmentKind::ConstantK { k } => {
            if k != 0.0 {
                let t_char = 2.0 * std::f64::consts::PI / (k.abs() / mass).sqrt();
                h_max = h_max.min(t_char / 64.0);
            }
        }
        SegmentKind::Mathieu { rf_frequency, .. } => {
            h_max = h_max.min(2.0 * std::f64::consts::PI / rf_frequency / 256.0);
        }
    }
    let mut n = (span / h_max).ceil().max(1.0) as u64;
    if diffusing {
        n = n.max(64);
    }
    n
}

/// Integrates the Langevin dynamics across one segment window [t0, t1].
fn langevin_span(
    z: &mut f64,
    p: &mut f64,
    seg: &Segment,
    t0: f64,
    t1: f64,
    mass: f64,
    gamma: f64,
    d_pp: f64,
    rng: &mut ChaCha12Rng,
) {
    let span = t1 - t0;
    if span <= 0.0 {
        return;
    }
    let n = substeps(seg, span, mass, d_pp > 0.0);
    let h = span / n as f64;
    let damp = (-gamma * h).exp();
    let kick_var = if d_pp == 0.0 {
        0.0
    } else if gamma > 0.0 {
        d_pp / (2.0 * gamma) * (1.0 - (-2.0 * gamma * h).exp())
    } else {
        d_pp * h
    };
    let kick_std = kick_var.sqrt();
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let f1 = flow_constant_k(seg.stiffness(t + 0.25 * h, mass), mass, 0.5 * h);
        let (z1, p1) = (f1[0][0] * *z + f1[0][1] * *p, f1[1][0] * *z + f1[1][1] * *p);
        let mut pm = p1 * damp;
        if kick_std > 0.0 {
            pm += kick_std * rng.sample::<f64, _>(StandardNormal);
        }
        let f2 = flow_constant_k(seg.stiffness(t + 0.75 * h, mass), mass, 0.5 * h);
        *z = f2[0][0] * z1 + f2[0][1] * pm;
        *p = f2[1][0] * z1 + f2[1][1] * pm;
    }
}

/// Walks the dark schedule from 0 to t_r.
fn langevin_schedule(
    z: &mut f64,
    p: &mut f64,
    schedule: &StiffnessSchedule,
    t_r: f64,
    mass: f64,
    gamma: f64,
    d_pp: f64,
    rng: &mut ChaCha12Rng,
) -> Result<()> {
    let (s0, s1) = schedule.span();
    if t_r > s1 * (1.0 + 1e-12) + 1e-15 || s0 > 0.0 {
        return Err(Error::config(
            "schedule",
            format!("schedule covers [{s0}, {s1}] but the shot needs [0, {t_r}]"),
        ));
    }
    for seg in &schedule.segments {
        let a = seg.t_start.max(0.0);
        let b = seg.t_end.min(t_r);
        if b > a {
            langevin_span(z, p, seg, a, b, mass, gamma, d_pp, rng);
        }
    }
    Ok(())
}

/// Runs one full shot. Integration or reconstruction failures mark the shot
/// invalid (NaN coordinates); they are never silently dropped.
pub fn simulate_shot(ctx: &ShotContext<'_>, t_r: f64, seed: u64) -> Shot {
    match simulate_shot_inner(ctx, t_r, seed) {
        Ok((z, p)) => Shot {
            axis: ctx.axis.label,
            release_time: t_r,
            reconstructed_position: z,
            reconstructed_momentum: p,
            seed,
            valid: z.is_finite() && p.is_finite(),
        },
        Err(_) => Shot {
            axis: ctx.axis.label,
            release_time: t_r,
            reconstructed_position: f64::NAN,
            reconstructed_momentum: f64::NAN,
            seed,
            valid: false,
        },
    }
}

fn simulate_shot_inner(ctx: &ShotContext<'_>, t_r: f64, seed: u64) -> Result<(f64, f64)> {
    let mass = ctx.mass;
    let gamma = ctx.noise.gas_damping;
    let d_pp = ctx.noise.momentum_diffusion(mass);
    let omega = ctx.axis.trap_frequency;
    let k_opt = mass * omega * omega;

    // (1) initial state draw
    let (mut z, mut p) = sample_state(&ctx.initial, &mut stream(seed, 0));

    // (2) feedback off, still optically trapped
    if ctx.protocol.feedback_off_lead > 0.0 {
        let seg = Segment {
            t_start: 0.0,
            t_end: ctx.protocol.feedback_off_lead,
            kind: SegmentKind::ConstantK { k: k_opt },
        };
        langevin_span(
            &mut z,
            &mut p,
            &seg,
            0.0,
            ctx.protocol.feedback_off_lead,
            mass,
            gamma,
            d_pp,
            &mut stream(seed, 1),
        );
    }

    // (3) dark evolution to t_r
    langevin_schedule(&mut z, &mut p, ctx.schedule, t_r, mass, gamma, d_pp, &mut stream(seed, 2))?;

    // (4)+(5) retrap, measure, reconstruct
    match ctx.protocol.readout {
        ReadoutMode::Ideal => Ok((z, p)),
        ReadoutMode::Lockin => {
            let fs = ctx.protocol.sample_rate;
            let n_samples = (ctx.protocol.measure_window * fs).floor() as usize;
            if n_samples < 2 {
                return Err(Error::Reconstruction("measurement window too short".into()));
            }
            let seg = Segment {
                t_start: 0.0,
                t_end: ctx.protocol.measure_window,
                kind: SegmentKind::ConstantK { k: k_opt },
            };
            let mut dyn_rng = stream(seed, 3);
            let mut det_rng = stream(seed, 4);
            let det_std = (ctx.protocol.detector_noise_psd * fs / 2.0).sqrt();
            let mut trace = Vec::with_capacity(n_samples);
            let (mut zr, mut pr) = (z, p);
            for k in 0..n_samples {
                let mut sample = zr;
                if det_std > 0.0 {
                    sample += det_std * det_rng.sample::<f64, _>(StandardNormal);
                }
                trace.push(sample);
                if k + 1 < n_samples {
                    let t0 = k as f64 / fs;
                    langevin_span(
                        &mut zr, &mut pr, &seg, t0, t0 + 1.0 / fs, mass, gamma, d_pp,
                        &mut dyn_rng,
                    );
                }
            }
            let (amp, phase) = lockin_reconstruct(&trace, omega, fs)?;
            Ok(state_from_lockin(amp, phase, mass, omega))
        }
    }
}

/// Runs `protocol.shots_per_release` independent shots with seeds
/// `seed_base + shot_index` and assembles the ensemble statistics. Shots run
/// in parallel on the current rayon pool; results are merged by shot index,
/// so the output is identical for any worker count.
pub fn run_ensemble(ctx: &ShotContext<'_>, t_r: f64, seed_base: u64) -> Result<EnsembleResult> {
    let n_shots = ctx.protocol.shots_per_release;
    if n_shots < 2 {
        return Err(Error::domain(format!("need at least 2 shots per release, got {n_shots}")));
    }
    let shots: Vec<Shot> = (0..n_shots as u64)
        .into_par_iter()
        .map(|i| simulate_shot(ctx, t_r, seed_base.wrapping_add(i)))
        .collect();

    let n_invalid = shots.iter().filter(|s| !s.valid).count();
    if n_invalid as f64 > 0.01 * shots.len() as f64 {
        return Err(Error::Ensemble(format!(
            "{n_invalid} of {} shots invalid (> 1%)",
            shots.len()
        )));
    }

    let zs: Vec<f64> = shots.iter().filter(|s| s.valid).map(|s| s.reconstructed_position).collect();
    let ps: Vec<f64> = shots.iter().filter(|s| s.valid).map(|s| s.reconstructed_momentum).collect();
    let n_valid = zs.len();
    let sample_cov = sample_cov2(&zs, &ps);
    let mean_position = zs.iter().sum::<f64>() / n_valid as f64;
    let mean_momentum = ps.iter().sum::<f64>() / n_valid as f64;

    // post-processing phase-space rotation: align the major axis of the
    // (z, p/mΩ) cloud with the position axis
    let scale = ctx.mass * ctx.axis.trap_frequency;
    let pt: Vec<f64> = ps.iter().map(|p| p / scale).collect();
    let rotation_angle = principal_angle(&zs, &pt);
    let (cs, sn) = (rotation_angle.cos(), rotation_angle.sin());
    let major: Vec<f64> = zs.iter().zip(&pt).map(|(z, q)| cs * z + sn * q).collect();
    let minor: Vec<f64> = zs.iter().zip(&pt).map(|(z, q)| -sn * z + cs * q).collect();

    let sample_sigma = std_dev(&major);
    let minor_sigma = std_dev(&minor);
    let mut boot_rng = stream(seed_base ^ 0x626f_6f74_7374u64, u32::MAX);
    let sample_sigma_err = bootstrap_sigma_err(&major, 1000, &mut boot_rng);
    let sigma_measured = apply_measurement_broadening(sample_sigma, ctx.measurement_broadening)?;
    let histogram = histogram2d(&major, &minor);
    debug_assert_eq!(histogram.total() as usize, n_valid);
    let gaussianity_pvalue = dagostino_k2(&major).map(|(_, p)| p).unwrap_or(f64::NAN);

    Ok(EnsembleResult {
        shots,
        sample_sigma,
        sample_sigma_err,
        sigma_measured,
        sample_cov,
        mean_position,
        mean_momentum,
        rotation_angle,
        minor_sigma_low_confidence: minor_sigma,
        histogram,
        gaussianity_pvalue,
        n_valid,
    })
}

/// Raw sample covariance of `n` shots without the ensemble post-processing;
/// the cheap path for convergence studies.
pub fn sample_moments(
    ctx: &ShotContext<'_>,
    t_r: f64,
    seed_base: u64,
    n: u64,
) -> Result<[[f64; 2]; 2]> {
    let shots: Vec<Shot> = (0..n)
        .into_par_iter()
        .map(|i| simulate_shot(ctx, t_r, seed_base.wrapping_add(i)))
        .collect();
    let zs: Vec<f64> = shots.iter().filter(|s| s.valid).map(|s| s.reconstructed_position).collect();
    let ps: Vec<f64> = shots.iter().filter(|s| s.valid).map(|s| s.reconstructed_momentum).collect();
    if (zs.len() as f64) < 0.99 * n as f64 {
        return Err(Error::Ensemble(format!("{} of {n} shots invalid", n as usize - zs.len())));
    }
    Ok(sample_cov2(&zs, &ps))
}
