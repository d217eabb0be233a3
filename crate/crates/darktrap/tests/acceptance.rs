//! Acceptance suite: one test per validation criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).
//!
//! Criterion 7 (lowest-order pseudopotential consistency at 1%, secular
//! envelope at 5%, both on a q <= 0.4 grid) is implemented exactly as
//! specified and is expected to fail: the zeroth-order secular approximation
//! is genuinely 3-4% off in frequency at q = 0.4 and tens of percent off in
//! the RF-averaged variance envelope once q exceeds ~0.1. The submodule
//! tests in `propagator` pin the same machinery against an independent
//! integrator and the literature stability boundary (q = 0.9080 at a = 0),
//! so the failure is a property of the approximation, not of the code.

use std::f64::consts::PI;
use std::path::Path;

use darktrap::analytic::{
    second_moments, variance_free, variance_inverted, variance_jump, Regime,
};
use darktrap::config::RunConfig;
use darktrap::ensemble::{sample_moments, simulate_shot, ShotContext};
use darktrap::fit::{coherence_xi, fit_expansion, FitModel, FitParams, FitSettings, Weights};
use darktrap::propagator::{
    floquet_analyze, propagate_moments, propagate_recording, pseudopotential_secular,
    StiffnessSchedule,
};
use darktrap::state::{
    purity, squeezing_db, thermal_state, AxisLabel, GaussianState, NoiseSpec, PotentialKind,
    ProtocolSpec, ReadoutMode,
};
use darktrap::units::{HBAR, K_B};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

const M: f64 = 1.95e-18;

fn nominal_config() -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/paper_nominal.toml");
    RunConfig::load(&path).expect("bundled config loads")
}

fn report(name: &str, pass: bool, detail: &str) {
    println!("ACCEPTANCE {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn criterion_01_squeezing_identity() {
    let s = squeezing_db(952.3).unwrap();
    let pass = (s - 59.6).abs() <= 0.05;
    report("01 squeezing identity", pass, &format!("20 log10(952.3) = {s:.4} dB vs 59.6 +- 0.05"));
    assert!(pass);
}

#[test]
fn criterion_02_purity_and_coherence_numbers() {
    let omega_z = 2.0 * PI * 43.5e3;
    let p = purity(&thermal_state(10.0, omega_z, M).unwrap()).unwrap();
    let purity_ok = (p - 0.04762).abs() <= 1e-5;

    // prepared z state: sigma = 45.6 pm with n = 10 purity
    let var0 = 45.6e-12_f64 * 45.6e-12;
    let vp0 = (HBAR * 21.0 / 2.0) * (HBAR * 21.0 / 2.0) / var0;
    let xi = GaussianState::from_covariance(var0, 0.0, vp0)
        .unwrap()
        .coherence_length()
        .unwrap();
    let expect = 8.0_f64.sqrt() / 21.0 * 45.6e-12;
    let xi_ok = (xi - expect).abs() <= 1e-15 && (xi - 6.5e-12).abs() / 6.5e-12 <= 0.10;

    let pass = purity_ok && xi_ok;
    report(
        "02 purity/coherence numbers",
        pass,
        &format!("purity {p:.6} vs 0.04762; xi(0) = {:.3} pm vs 6.5 pm +- 10%", xi * 1e12),
    );
    assert!(pass);
}

#[test]
fn criterion_03_inverted_expansion_magnitude() {
    let cfg = nominal_config();
    let z = cfg.axis(AxisLabel::Z).unwrap();
    let var = variance_inverted(
        260e-6,
        z.initial.var_position,
        z.params.trap_frequency,
        z.params.dark_frequency,
        z.noise.gamma1,
        cfg.physical.mass,
    )
    .unwrap();
    let sigma = var.sqrt();
    let pass = sigma >= 30e-9 && sigma <= 56e-9;
    report(
        "03 inverted expansion magnitude",
        pass,
        &format!("sigma_z(260 us) = {:.2} nm, band [30, 56] nm around 43.4 nm", sigma * 1e9),
    );
    assert!(pass);
}

#[test]
fn criterion_04_frequency_jump_bounds() {
    let (om, w) = (2.0 * PI * 185e3, 2.0 * PI * 2.7e3);
    let var0 = 183e-12_f64 * 183e-12;
    let quarter = variance_jump(PI / (2.0 * w), var0, om, w, 0.0, M).unwrap().sqrt();
    let half = variance_jump(PI / w, var0, om, w, 0.0, M).unwrap().sqrt();
    let ratio_err = (quarter / var0.sqrt() - om / w).abs() / (om / w);
    let half_err = (half - var0.sqrt()).abs() / var0.sqrt();
    let pass = ratio_err <= 1e-10 && half_err <= 1e-10;
    report(
        "04 frequency jump bounds",
        pass,
        &format!("sigma(T/4)/sigma(0) off by {ratio_err:.2e}, sigma(T/2) off by {half_err:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_oracle_equivalence_constant_stiffness() {
    let mut rng = ChaCha12Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for draw in 0..100 {
        let om = 2.0 * PI * rng.gen_range(20e3..250e3);
        let w = 2.0 * PI * rng.gen_range(0.8e3..3.5e3);
        let nbar = rng.gen_range(0.0..4000.0);
        let gamma1 = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(1e4..5e6) };
        let init = thermal_state(nbar, om, M).unwrap();
        let noise = NoiseSpec::from_gamma1(gamma1, om).unwrap();
        let regime = match draw % 3 {
            0 => Regime::Inverted,
            1 => Regime::Jump,
            _ => Regime::Free,
        };
        let k = match regime {
            Regime::Inverted => -M * w * w,
            Regime::Jump => M * w * w,
            Regime::Free => 0.0,
        };
        // keep the inverted growth within f64-resolvable range
        let t_end = match regime {
            Regime::Inverted => 2.5 / w,
            _ => 400e-6,
        };
        let sched = StiffnessSchedule::constant(k, t_end * 1.0001).unwrap();
        let times: Vec<f64> = (1..=50).map(|i| t_end * i as f64 / 50.0).collect();
        let states = propagate_recording(&init, &sched, &noise, M, &times, 1.0).unwrap();
        for (t, s) in times.iter().zip(&states) {
            let expect = match regime {
                Regime::Inverted => variance_inverted(*t, init.var_position, om, w, gamma1, M),
                Regime::Jump => variance_jump(*t, init.var_position, om, w, gamma1, M),
                Regime::Free => {
                    variance_free(*t, init.var_position, om, noise.heating_rate, M)
                }
            }
            .unwrap();
            worst = worst.max((s.var_position - expect).abs() / expect);
        }
    }
    let pass = worst <= 1e-8;
    report(
        "05 oracle equivalence A (moments vs closed forms)",
        pass,
        &format!("worst relative deviation {worst:.2e} over 100 draws x 50 times, rtol 1e-8"),
    );
    assert!(pass);
}

fn ideal_protocol(shots: u32) -> ProtocolSpec {
    ProtocolSpec {
        feedback_off_lead: 0.0,
        release_times: vec![0.0],
        measure_window: 500e-6,
        shots_per_release: shots,
        sample_rate: 10e6,
        detector_noise_psd: 0.0,
        readout: ReadoutMode::Ideal,
    }
}

struct C6Case {
    name: &'static str,
    axis: darktrap::state::AxisParams,
    schedule: StiffnessSchedule,
    noise: NoiseSpec,
    initial: GaussianState,
    t_r: f64,
}

fn c6_cases() -> Vec<C6Case> {
    let om_z = 2.0 * PI * 43.5e3;
    let w_z = 2.0 * PI * 1.4e3;
    let om_u = 2.0 * PI * 185e3;
    let w_u = 2.0 * PI * 2.7e3;
    let rf = 2.0 * PI * 25e3;
    let q = darktrap::propagator::calibrate_mathieu_from_secular(w_u, rf, 0.0).unwrap();
    vec![
        C6Case {
            name: "inverted",
            axis: darktrap::state::AxisParams::new(
                AxisLabel::Z, om_z, w_z, PotentialKind::Inverted, 0.0,
            )
            .unwrap(),
            schedule: StiffnessSchedule::constant(-M * w_z * w_z, 300e-6).unwrap(),
            noise: NoiseSpec::from_heating_rate(K_B * 5.91, om_z).unwrap(),
            initial: thermal_state(10.0, om_z, M).unwrap(),
            t_r: 200e-6,
        },
        C6Case {
            name: "jump+mathieu",
            axis: darktrap::state::AxisParams::new(
                AxisLabel::U, om_u, w_u, PotentialKind::HarmonicJump, 0.0,
            )
            .unwrap(),
            schedule: StiffnessSchedule::mathieu(0.0, q, rf, 0.0, 300e-6).unwrap(),
            noise: NoiseSpec::from_heating_rate(K_B * 8.47, om_u).unwrap(),
            initial: thermal_state(721.0, om_u, M).unwrap(),
            t_r: 90e-6,
        },
        C6Case {
            name: "free",
            axis: darktrap::state::AxisParams::new(
                AxisLabel::X, om_u, 0.0, PotentialKind::Free, 0.0,
            )
            .unwrap(),
            schedule: StiffnessSchedule::constant(0.0, 300e-6).unwrap(),
            noise: NoiseSpec::from_heating_rate(K_B * 8.47, om_u).unwrap(),
            initial: thermal_state(721.0, om_u, M).unwrap(),
            t_r: 150e-6,
        },
    ]
}

#[test]
fn criterion_06_oracle_equivalence_ensemble() {
    // ideal readout isolates the dark-segment dynamics; the lock-in
    // measurement adds its own (separately modeled) broadening
    let proto = ideal_protocol(2);
    let mut all_pass = true;
    let mut details = Vec::new();
    for case in c6_cases() {
        let ctx = ShotContext {
            axis: &case.axis,
            schedule: &case.schedule,
            noise: &case.noise,
            protocol: &proto,
            mass: M,
            initial: case.initial,
            measurement_broadening: 0.0,
        };
        let oracle = propagate_moments(&case.initial, &case.schedule, &case.noise, M, case.t_r, 1.0)
            .unwrap();
        let n = 10_000u64;
        let cov = sample_moments(&ctx, case.t_r, 606, n).unwrap();
        let nf = n as f64;
        let se_vz = oracle.var_position * (2.0 / (nf - 1.0)).sqrt();
        let se_vp = oracle.var_momentum * (2.0 / (nf - 1.0)).sqrt();
        let se_c = ((oracle.var_position * oracle.var_momentum
            + oracle.covariance * oracle.covariance)
            / (nf - 1.0))
            .sqrt();
        let dz = (cov[0][0] - oracle.var_position).abs() / se_vz;
        let dp = (cov[1][1] - oracle.var_momentum).abs() / se_vp;
        let dc = (cov[0][1] - oracle.covariance).abs() / se_c;
        let entry_ok = dz < 5.0 && dp < 5.0 && dc < 5.0;

        // convergence slope of the var_position error over N
        let ns = [100u64, 400, 1600, 6400];
        let repeats = 96u64;
        let mut pts = Vec::new();
        for (i, &nn) in ns.iter().enumerate() {
            let mut err_sum = 0.0;
            for r in 0..repeats {
                // seed bases spaced beyond the largest N so no two repeats
                // share any shot stream
                let seed = 70_000 + (i as u64) * 10_000_000 + r * 100_000;
                let c = sample_moments(&ctx, case.t_r, seed, nn).unwrap();
                err_sum += (c[0][0] - oracle.var_position).abs() / oracle.var_position;
            }
            pts.push(((nn as f64).ln(), (err_sum / repeats as f64).ln()));
        }
        let nmean = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let emean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let slope = pts.iter().map(|p| (p.0 - nmean) * (p.1 - emean)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - nmean) * (p.0 - nmean)).sum::<f64>();
        let slope_ok = (slope + 0.5).abs() <= 0.1;

        all_pass &= entry_ok && slope_ok;
        details.push(format!(
            "{}: |dev| = ({dz:.2}, {dc:.2}, {dp:.2}) SE, slope {slope:.3}",
            case.name
        ));
    }
    report("06 oracle equivalence B (ensemble vs moments)", all_pass, &details.join("; "));
    assert!(all_pass);
}

#[test]
fn criterion_07_mathieu_secular_consistency() {
    let rf = 2.0 * PI * 25e3;

    // (a) Floquet secular frequency vs the lowest-order pseudopotential
    // formula, 1% over the q <= 0.4 grid
    let mut worst_freq: f64 = 0.0;
    let mut worst_at = (0.0, 0.0);
    for &a in &[0.0, 0.02, 0.05] {
        for &q in &[0.05, 0.1, 0.2, 0.3, 0.4] {
            let fr = floquet_analyze(a, q, rf).unwrap();
            let w = fr.secular_frequency.unwrap();
            let wp = pseudopotential_secular(a, q, rf);
            let dev = ((w - wp) / wp).abs();
            if dev > worst_freq {
                worst_freq = dev;
                worst_at = (a, q);
            }
        }
    }
    let freq_ok = worst_freq <= 0.01;

    // (b) RF-period-averaged variance envelope vs the jump closed form at
    // the Floquet secular frequency, 5% over the same grid (a <= 0.05);
    // probes avoid the recompression zero crossings
    let om = 2.0 * PI * 43.5e3;
    let init = thermal_state(100.0, om, M).unwrap();
    let mut worst_env: f64 = 0.0;
    let mut worst_env_at = (0.0, 0.0);
    for &a in &[0.0, 0.05] {
        for &q in &[0.1, 0.2, 0.3, 0.4] {
            let fr = floquet_analyze(a, q, rf).unwrap();
            let wsec = fr.secular_frequency.unwrap();
            let t_sec = 2.0 * PI / wsec;
            let sched = StiffnessSchedule::mathieu(a, q, rf, 0.0, 1.2 * t_sec).unwrap();
            let t_rf = 2.0 * PI / rf;
            let n_per_rf = 16usize;
            let dt = t_rf / n_per_rf as f64;
            let n = (t_sec / dt).floor() as usize;
            let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
            let states =
                propagate_recording(&init, &sched, &NoiseSpec::off(), M, &times, 1.0).unwrap();
            let half = n_per_rf / 2;
            for center in (n_per_rf..n - n_per_rf).step_by(n_per_rf) {
                let tc = times[center];
                if (wsec * tc).sin().powi(2) < 0.2 {
                    continue;
                }
                let avg: f64 = (center - half..=center + half)
                    .map(|i| states[i].var_position)
                    .sum::<f64>()
                    / (2 * half + 1) as f64;
                let expect =
                    variance_jump(tc, init.var_position, om, wsec, 0.0, M).unwrap();
                let dev = ((avg - expect) / expect).abs();
                if dev > worst_env {
                    worst_env = dev;
                    worst_env_at = (a, q);
                }
            }
        }
    }
    let env_ok = worst_env <= 0.05;

    let pass = freq_ok && env_ok;
    report(
        "07 Mathieu/secular consistency",
        pass,
        &format!(
            "pseudopotential dev {:.2}% at (a, q) = {:?} vs 1% allowed; \
             envelope dev {:.1}% at (a, q) = {:?} vs 5% allowed — the zeroth-order secular \
             approximation is intrinsically coarser than these tolerances at q >= 0.2 \
             (implementation pinned against an independent integrator and the q = 0.9080 \
             stability boundary elsewhere in the suite)",
            100.0 * worst_freq,
            worst_at,
            100.0 * worst_env,
            worst_env_at
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_fit_round_trip_and_coverage() {
    let truth = FitParams {
        gamma1: 0.3 * K_B * 5.91 / (HBAR * 2.0 * PI * 43.5e3),
        trap_frequency: 2.0 * PI * 43.5e3,
        dark_frequency: 2.0 * PI * 1.4e3,
        var0: 45.6e-12_f64 * 45.6e-12,
        phase: 0.0,
    };
    let bounds = (
        FitParams { gamma1: 0.0, trap_frequency: 1e3, dark_frequency: 1e2, var0: 1e-25, phase: -PI },
        FitParams { gamma1: 1e9, trap_frequency: 1e8, dark_frequency: 1e6, var0: 1e-18, phase: PI },
    );
    let mut times: Vec<f64> = (0..12).map(|i| 0.2e-6 * 40.0_f64.powf(i as f64 / 11.0)).collect();
    times.extend((0..40).map(|i| 10e-6 + 290e-6 * i as f64 / 39.0));
    let clean: Vec<f64> = times
        .iter()
        .map(|t| {
            variance_inverted(*t, truth.var0, truth.trap_frequency, truth.dark_frequency,
                truth.gamma1, M)
            .unwrap()
            .sqrt()
        })
        .collect();

    // noiseless recovery from a 2x-off start
    let init = FitParams {
        gamma1: 2.0 * truth.gamma1,
        trap_frequency: 2.0 * truth.trap_frequency,
        dark_frequency: 2.0 * truth.dark_frequency,
        var0: 2.0 * truth.var0,
        phase: 0.0,
    };
    let fit = fit_expansion(&times, &clean, FitModel::Inverted, init, bounds, &FitSettings::new(M))
        .unwrap();
    let recovery = [
        (fit.params.gamma1 - truth.gamma1).abs() / truth.gamma1,
        (fit.params.trap_frequency - truth.trap_frequency).abs() / truth.trap_frequency,
        (fit.params.dark_frequency - truth.dark_frequency).abs() / truth.dark_frequency,
        (fit.params.var0 - truth.var0).abs() / truth.var0,
    ];
    let worst_recovery = recovery.iter().cloned().fold(0.0, f64::max);
    let recovery_ok = worst_recovery <= 1e-6;

    // 95% confidence-ellipse coverage over 50 noisy replicates
    let mut inside = 0;
    for rep in 0..50u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(8000 + rep);
        let noisy: Vec<f64> = clean
            .iter()
            .map(|s| s * (1.0 + 0.03 * rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let init = FitParams {
            gamma1: 1.2 * truth.gamma1,
            trap_frequency: 1.1 * truth.trap_frequency,
            dark_frequency: 0.9 * truth.dark_frequency,
            var0: 1.2 * truth.var0,
            phase: 0.0,
        };
        let mut settings = FitSettings::new(M);
        settings.weights = Weights::PerPoint(clean.iter().map(|s| 0.03 * s).collect());
        let Ok(fit) = fit_expansion(&times, &noisy, FitModel::Inverted, init, bounds, &settings)
        else {
            continue;
        };
        let mut cov = nalgebra::DMatrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                cov[(i, j)] = fit.covariance[i][j];
            }
        }
        let Some(inv) = cov.try_inverse() else { continue };
        let d = nalgebra::DVector::from_vec(vec![
            fit.params.gamma1 - truth.gamma1,
            fit.params.trap_frequency - truth.trap_frequency,
            fit.params.dark_frequency - truth.dark_frequency,
            fit.params.var0 - truth.var0,
        ]);
        let chi2 = (d.transpose() * &inv * &d)[(0, 0)];
        // chi-square(4) 95th percentile
        if chi2 <= 9.487729036781154 {
            inside += 1;
        }
    }
    let coverage_ok = inside >= 45;

    let pass = recovery_ok && coverage_ok;
    report(
        "08 fit round trip",
        pass,
        &format!("noiseless recovery {worst_recovery:.2e} (<= 1e-6); coverage {inside}/50 (>= 45)"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_coherence_length_behavior() {
    let fit = darktrap::fit::FitResult {
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
        mass: M,
        iterations: 0,
        degeneracy_warnings: vec![],
    };
    let h = 0.5e-6;
    let grid = vec![
        0.0,
        20e-6 - h,
        20e-6 + h,
        250e-6 - h,
        250e-6 + h,
        260e-6,
    ];
    let xi = coherence_xi(&fit, M, 10.0, &grid, 1.0).unwrap();
    let d20 = (xi[2] - xi[1]) / (2.0 * h);
    let d250 = (xi[4] - xi[3]) / (2.0 * h);
    let plateau_ok = d250.abs() < 0.1 * d20.abs();

    let dense: Vec<f64> = (0..=300).map(|i| i as f64 * 1e-6).collect();
    let base = coherence_xi(&fit, M, 10.0, &dense, 1.0).unwrap();
    let improved = coherence_xi(&fit, M, 10.0, &dense, 1e-3).unwrap();
    let dominates = dense
        .iter()
        .zip(base.iter().zip(&improved))
        .all(|(t, (b, i))| *t == 0.0 || i >= b);

    let pass = plateau_ok && dominates;
    report(
        "09 coherence length behavior",
        pass,
        &format!(
            "|xi'(250us)|/|xi'(20us)| = {:.3} (< 0.1); reduced-heating curve dominates: {dominates}",
            (d250 / d20).abs()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_symplectic_invariants() {
    let mut rng = ChaCha12Rng::seed_from_u64(1010);
    let om = 2.0 * PI * 43.5e3;
    let init = thermal_state(25.0, om, M).unwrap();
    let det0 = init.det_sigma();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n_seg = rng.gen_range(1..4);
        let mut t0 = 0.0;
        let mut segments = Vec::new();
        for _ in 0..n_seg {
            let dt = rng.gen_range(20e-6..60e-6);
            let kind = match rng.gen_range(0..3) {
                0 => {
                    let w = 2.0 * PI * rng.gen_range(5e3..50e3);
                    darktrap::propagator::SegmentKind::ConstantK { k: M * w * w }
                }
                1 => {
                    let w = 2.0 * PI * rng.gen_range(0.8e3..2e3);
                    darktrap::propagator::SegmentKind::ConstantK { k: -M * w * w }
                }
                _ => darktrap::propagator::SegmentKind::Mathieu {
                    a: rng.gen_range(0.0..0.02),
                    q: rng.gen_range(0.05..0.4),
                    rf_frequency: 2.0 * PI * 25e3,
                    rf_phase: rng.gen_range(0.0..2.0 * PI),
                },
            };
            segments.push(darktrap::propagator::Segment { t_start: t0, t_end: t0 + dt, kind });
            t0 += dt;
        }
        let sched = StiffnessSchedule::new(segments).unwrap();
        // propagate_moments validates the Heisenberg bound on construction of
        // every returned state, so a clamp-tolerance violation would error
        let out = propagate_moments(&init, &sched, &NoiseSpec::off(), M, t0, 1.0).unwrap();
        worst = worst.max((out.det_sigma() - det0).abs() / det0);
        out.purity().expect("state stays physical");
    }
    // and with noise, the bound holds trivially but must still validate
    let noisy = NoiseSpec::from_heating_rate(K_B * 5.91, om).unwrap();
    let sched = StiffnessSchedule::constant(-M * (2.0 * PI * 1.4e3).powi(2), 300e-6).unwrap();
    propagate_moments(&init, &sched, &noisy, M, 260e-6, 1.0)
        .unwrap()
        .purity()
        .unwrap();

    let pass = worst <= 1e-8;
    report(
        "10 symplectic invariants",
        pass,
        &format!("worst det drift {worst:.2e} over 50 random noiseless schedules (<= 1e-8)"),
    );
    assert!(pass);
}

#[test]
fn criterion_11_cli_determinism() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/paper_nominal.toml");
    let run = |dir: &Path, workers: &str| {
        let code = darktrap::cli::run([
            "darktrap",
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--axis",
            "z",
            "--t-r-us",
            "60",
            "--shots",
            "64",
            "--seed",
            "9",
            "--workers",
            workers,
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "simulate exited {code}");
        (
            std::fs::read(dir.join("shots_z_60us.csv")).unwrap(),
            std::fs::read(dir.join("hist_z_60us.csv")).unwrap(),
        )
    };
    let tmp = tempfile::tempdir().unwrap();
    let (s1, h1) = run(&tmp.path().join("a"), "1");
    let (s2, h2) = run(&tmp.path().join("b"), "1");
    let (s4, h4) = run(&tmp.path().join("c"), "4");
    let pass = s1 == s2 && s1 == s4 && h1 == h2 && h1 == h4;
    report(
        "11 determinism",
        pass,
        &format!(
            "shot CSV {} bytes, identical across reruns and worker counts 1/4: {pass}",
            s1.len()
        ),
    );
    assert!(pass);
}

#[test]
fn noiseless_shot_identity_cross_check() {
    // supporting check for criterion 6: the trajectory engine is exact on
    // noiseless constant stiffness, so ensemble-vs-moments deviations are
    // purely statistical
    let om = 2.0 * PI * 43.5e3;
    let w = 2.0 * PI * 1.4e3;
    let axis =
        darktrap::state::AxisParams::new(AxisLabel::Z, om, w, PotentialKind::Inverted, 0.0)
            .unwrap();
    let sched = StiffnessSchedule::constant(-M * w * w, 300e-6).unwrap();
    let proto = ideal_protocol(2);
    let init = thermal_state(10.0, om, M).unwrap();
    let ctx = ShotContext {
        axis: &axis,
        schedule: &sched,
        noise: &NoiseSpec::off(),
        protocol: &proto,
        mass: M,
        initial: init,
        measurement_broadening: 0.0,
    };
    let t_r = 260e-6;
    let flow = second_moments(t_r, &init, Regime::Inverted, w, 0.0, M).unwrap();
    // noiseless ensemble variance converges to the deterministic flow of the
    // initial covariance; 4000 shots pin it to a few percent
    let cov = sample_moments(&ctx, t_r, 42, 4000).unwrap();
    let dev = (cov[0][0] - flow.var_position).abs()
        / (flow.var_position * (2.0 / 3999.0_f64).sqrt());
    assert!(dev < 5.0, "deviation {dev:.2} SE");
    let s = simulate_shot(&ctx, t_r, 7);
    assert!(s.valid);
}
