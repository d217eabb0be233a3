//! Numerical propagation of Gaussian first and second moments under arbitrary
//! piecewise quadratic potentials, including Mathieu-modulated Paul-trap
//! stiffness, with momentum drag and white-force diffusion.
//!
//! The moment equations for A(t) = [[0, 1/m], [−k(t), −γ]] and
//! D = diag(0, D_pp) are
//!
//! ```text
//! d⟨z⟩/dt = ⟨p⟩/m                 dσ²/dt   = 2σ_zp/m
//! d⟨p⟩/dt = −k⟨z⟩ − γ⟨p⟩          dσ_zp/dt = σ_p²/m − kσ² − γσ_zp
//!                                 dσ_p²/dt = −2kσ_zp − 2γσ_p² + D_pp
//! ```
//!
//! integrated with a fixed-step RK4 whose step is refined until a Richardson
//! (step-halving) comparison of the endpoint moments is below 1e-8 relative.
//! This module is the oracle for the closed forms in [`crate::analytic`] and
//! the only place micromotion physics lives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{GaussianState, NoiseSpec, PaulTrapSpec};

/// Relative endpoint accuracy demanded from the step-halving control.
pub const PROPAGATION_RTOL: f64 = 1e-8;

/// Stiffness of one schedule segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Fixed spring constant k in N/m; k < 0 is an inverted potential.
    ConstantK { k: f64 },
    /// RF-modulated stiffness k(t)/m = (Ω_RF/2)²[a − 2q cos(Ω_RF t + φ)].
    Mathieu { a: f64, q: f64, rf_frequency: f64, rf_phase: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub kind: SegmentKind,
}

impl Segment {
    /// k(t) in N/m at absolute time t.
    pub fn stiffness(&self, t: f64, mass: f64) -> f64 {
        match self.kind {
            SegmentKind::ConstantK { k } => k,
            SegmentKind::Mathieu { a, q, rf_frequency, rf_phase } => {
                let w2 = rf_frequency / 2.0;
                mass * w2 * w2 * (a - 2.0 * q * (rf_frequency * t + rf_phase).cos())
            }
        }
    }

    /// Upper bound on |k| over the segment, for step-size selection.
    fn stiffness_bound(&self, mass: f64) -> f64 {
        match self.kind {
            SegmentKind::ConstantK { k } => k.abs(),
            SegmentKind::Mathieu { a, q, rf_frequency, .. } => {
                let w2 = rf_frequency / 2.0;
                mass * w2 * w2 * (a.abs() + 2.0 * q.abs())
            }
        }
    }
}

/// Piecewise stiffness schedule: contiguous, non-overlapping segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessSchedule {
    pub segments: Vec<Segment>,
}

impl StiffnessSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::config("schedule.segments", "must not be empty"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.t_end > s.t_start) {
                return Err(Error::config(
                    format!("schedule.segments[{i}]"),
                    format!("t_end ({}) must exceed t_start ({})", s.t_end, s.t_start),
                ));
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            let gap = pair[1].t_start - pair[0].t_end;
            if gap.abs() > 1e-15 * pair[0].t_end.abs().max(1.0) {
                return Err(Error::config(
                    format!("schedule.segments[{}]", i + 1),
                    format!(
                        "segments must be contiguous: segment {} ends at {} but segment {} starts at {}",
                        i,
                        pair[0].t_end,
                        i + 1,
                        pair[1].t_start
                    ),
                ));
            }
        }
        Ok(Self { segments })
    }

    /// Single constant-stiffness segment covering [0, t_end].
    pub fn constant(k: f64, t_end: f64) -> Result<Self> {
        Self::new(vec![Segment { t_start: 0.0, t_end, kind: SegmentKind::ConstantK { k } }])
    }

    /// Single Mathieu segment covering [0, t_end].
    pub fn mathieu(a: f64, q: f64, rf_frequency: f64, rf_phase: f64, t_end: f64) -> Result<Self> {
        if !(rf_frequency > 0.0) {
            return Err(Error::config("schedule.rf_frequency", "must be > 0"));
        }
        Self::new(vec![Segment {
            t_start: 0.0,
            t_end,
            kind: SegmentKind::Mathieu { a, q, rf_frequency, rf_phase },
        }])
    }

    pub fn span(&self) -> (f64, f64) {
        (self.segments[0].t_start, self.segments[self.segments.len() - 1].t_end)
    }

    fn check_covers(&self, t0: f64, t1: f64) -> Result<()> {
        let (s0, s1) = self.span();
        if t0 < s0 - 1e-15 || t1 > s1 * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::config(
                "schedule",
                format!("schedule covers [{s0}, {s1}] but propagation needs [{t0}, {t1}]"),
            ));
        }
        Ok(())
    }
}

/// (z, p, σ², σ_zp, σ_p²) carried through the integrator.
#[derive(Debug, Clone, Copy)]
struct Moments([f64; 5]);

impl Moments {
    fn from_state(s: &GaussianState) -> Self {
        Moments([s.mean_position, s.mean_momentum, s.var_position, s.covariance, s.var_momentum])
    }

    fn to_state(self) -> Result<GaussianState> {
        let [z, p, vz, c, vp] = self.0;
        GaussianState::new(z, p, vz, vp, c)
    }
}

fn deriv(y: &[f64; 5], k: f64, gamma: f64, d_pp: f64, mass: f64) -> [f64; 5] {
    let [z, p, vz, c, vp] = *y;
    [
        p / mass,
        -k * z - gamma * p,
        2.0 * c / mass,
        vp / mass - k * vz - gamma * c,
        -2.0 * k * c - 2.0 * gamma * vp + d_pp,
    ]
}

fn rk4_step(
    y: &Moments,
    t: f64,
    h: f64,
    seg: &Segment,
    gamma: f64,
    d_pp: f64,
    mass: f64,
) -> Moments {
    let f = |tt: f64, yy: &[f64; 5]| deriv(yy, seg.stiffness(tt, mass), gamma, d_pp, mass);
    let k1 = f(t, &y.0);
    let mut y2 = y.0;
    for i in 0..5 {
        y2[i] += 0.5 * h * k1[i];
    }
    let k2 = f(t + 0.5 * h, &y2);
    let mut y3 = y.0;
    for i in 0..5 {
        y3[i] += 0.5 * h * k2[i];
    }
    let k3 = f(t + 0.5 * h, &y3);
    let mut y4 = y.0;
    for i in 0..5 {
        y4[i] += h * k3[i];
    }
    let k4 = f(t + h, &y4);
    let mut out = y.0;
    for i in 0..5 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Moments(out)
}

/// Base step for a segment: min(dt_max, T_RF/200, 1/(50 √(k_max/m))).
fn base_step(seg: &Segment, mass: f64, dt_max: f64) -> f64 {
    let mut h = dt_max;
    if let SegmentKind::Mathieu { rf_frequency, .. } = seg.kind {
        h = h.min(2.0 * std::f64::consts::PI / rf_frequency / 200.0);
    }
    let kb = seg.stiffness_bound(mass);
    if kb > 0.0 {
        h = h.min(1.0 / (50.0 * (kb / mass).sqrt()));
    }
    h
}

/// Integrates the moments from `t0` to `t1` recording at each requested time.
/// `record` must be sorted ascending within [t0, t1]; `refine` divides the
/// base step.
fn sweep(
    initial: &Moments,
    schedule: &StiffnessSchedule,
    gamma: f64,
    d_pp: f64,
    mass: f64,
    t0: f64,
    t1: f64,
    dt_max: f64,
    refine: u32,
    record: &[f64],
    out: &mut Vec<Moments>,
) -> Result<Moments> {
    let mut y = *initial;
    let mut rec_iter = record.iter().peekable();
    // emit any records at exactly t0
    while let Some(&&r) = rec_iter.peek() {
        if r <= t0 {
            out.push(y);
            rec_iter.next();
        } else {
            break;
        }
    }
    for seg in &schedule.segments {
        let a = seg.t_start.max(t0);
        let b = seg.t_end.min(t1);
        if b <= a {
            continue;
        }
        let h_base = base_step(seg, mass, dt_max) / refine as f64;
        // walk from checkpoint to checkpoint (segment end or record time)
        let mut t = a;
        loop {
            let next_record = rec_iter.peek().map(|&&r| r).filter(|r| *r <= b);
            let target = next_record.unwrap_or(b).min(b);
            if target > t {
                let n = ((target - t) / h_base).ceil().max(1.0);
                if n > 1e12 {
                    return Err(Error::Integration(format!(
                        "step underflow: {n:.1e} steps required for segment [{a}, {b}]"
                    )));
                }
                let h = (target - t) / n;
                for i in 0..n as u64 {
                    y = rk4_step(&y, t + i as f64 * h, h, seg, gamma, d_pp, mass);
                }
                t = target;
                if !y.0.iter().all(|v| v.is_finite()) {
                    return Err(Error::Integration(format!(
                        "non-finite moments at t = {t:.3e} (k = {:.3e})",
                        seg.stiffness(t, mass)
                    )));
                }
            }
            if next_record.is_some() && (target - next_record.unwrap()).abs() == 0.0 {
                out.push(y);
                rec_iter.next();
            }
            if t >= b {
                break;
            }
        }
    }
    // records exactly at t1 that were not consumed (t1 == schedule end)
    for &r in rec_iter {
        if (r - t1).abs() <= 1e-15 * t1.abs().max(1.0) {
            out.push(y);
        } else {
            return Err(Error::Integration(format!("record time {r} outside [{t0}, {t1}]")));
        }
    }
    Ok(y)
}

/// Worst relative endpoint difference of (components, det Σ). Each component
/// is scaled by its own magnitude or by the characteristic scale the state
/// dictates (√σ² for the mean, √(σ²σ_p²) for the covariance), so zero
/// crossings do not blow the metric up. det Σ is tracked separately: for
/// squeezed states it cancels two large products and its error is amplified
/// far beyond the component error.
fn rel_diff(a: &Moments, b: &Moments) -> (f64, f64) {
    let sz = a.0[2].abs().max(b.0[2].abs()).sqrt();
    let sp = a.0[4].abs().max(b.0[4].abs()).sqrt();
    let floors = [sz, sp, 0.0, sz * sp, 0.0];
    let mut comp: f64 = 0.0;
    for i in 0..5 {
        let s = a.0[i].abs().max(b.0[i].abs()).max(floors[i]).max(f64::MIN_POSITIVE);
        comp = comp.max((a.0[i] - b.0[i]).abs() / s);
    }
    let det_a = a.0[2] * a.0[4] - a.0[3] * a.0[3];
    let det_b = b.0[2] * b.0[4] - b.0[3] * b.0[3];
    let det_scale = det_a.abs().max(det_b.abs()).max(f64::MIN_POSITIVE);
    (comp, (det_a - det_b).abs() / det_scale)
}

/// Propagates a Gaussian state through `schedule` from t = 0 to `t_final`.
///
/// The step is refined by successive halving until the endpoint moments agree
/// with the half-step run to [`PROPAGATION_RTOL`] relative; failure to reach
/// that within 14 halvings is an integration error.
pub fn propagate_moments(
    initial: &GaussianState,
    schedule: &StiffnessSchedule,
    noise: &NoiseSpec,
    mass: f64,
    t_final: f64,
    dt_max: f64,
) -> Result<GaussianState> {
    Ok(propagate_recording(initial, schedule, noise, mass, &[t_final], dt_max)?
        .pop()
        .expect("one record requested"))
}

/// Like [`propagate_moments`] but records the state at each time in `times`
/// (sorted ascending, all within the schedule span).
pub fn propagate_recording(
    initial: &GaussianState,
    schedule: &StiffnessSchedule,
    noise: &NoiseSpec,
    mass: f64,
    times: &[f64],
    dt_max: f64,
) -> Result<Vec<GaussianState>> {
    if !(dt_max > 0.0) {
        return Err(Error::domain(format!("dt_max must be > 0, got {dt_max}")));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass}")));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("record times must be sorted ascending"));
    }
    let t_final = *times.last().unwrap();
    if times[0] < 0.0 {
        return Err(Error::domain("record times must be >= 0"));
    }
    schedule.check_covers(0.0, t_final)?;

    let y0 = Moments::from_state(initial);
    let gamma = noise.gas_damping;
    let d_pp = noise.momentum_diffusion(mass);

    if t_final == 0.0 {
        return times.iter().map(|_| y0.to_state()).collect();
    }

    let mut refine = 1u32;
    let mut scratch = Vec::new();
    let mut end_coarse =
        sweep(&y0, schedule, gamma, d_pp, mass, 0.0, t_final, dt_max, refine, &[], &mut scratch)?;
    let mut prev_det = f64::INFINITY;
    loop {
        let end_fine = sweep(
            &y0,
            schedule,
            gamma,
            d_pp,
            mass,
            0.0,
            t_final,
            dt_max,
            refine * 2,
            &[],
            &mut scratch,
        )?;
        let (comp, det) = rel_diff(&end_coarse, &end_fine);
        refine *= 2;
        // det converges either to the tolerance or to the roundoff plateau
        // of its cancellation, where halving stops helping (truncation would
        // improve ~16x per halving)
        let det_done = det <= PROPAGATION_RTOL || det > prev_det / 4.0;
        if comp <= PROPAGATION_RTOL && det_done {
            break;
        }
        prev_det = det;
        end_coarse = end_fine;
        if refine > 1 << 14 {
            return Err(Error::Integration(format!(
                "step control failed to reach rtol {PROPAGATION_RTOL:.1e} at refine factor \
                 {refine}; residuals: components {comp:.3e}, det {det:.3e}"
            )));
        }
    }

    let mut recorded = Vec::with_capacity(times.len());
    sweep(&y0, schedule, gamma, d_pp, mass, 0.0, t_final, dt_max, refine, times, &mut recorded)?;
    recorded.into_iter().map(Moments::to_state).collect()
}

/// Result of a Floquet analysis of the Mathieu equation over one RF period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetResult {
    /// Characteristic exponent β ∈ [0, 1] on the principal branch;
    /// `None` when unstable.
    pub characteristic_exponent: Option<f64>,
    /// Secular frequency β·Ω_RF/2, rad/s; `None` when unstable.
    pub secular_frequency: Option<f64>,
    pub stable: bool,
    /// One-period state-transition matrix, row major.
    pub monodromy: [[f64; 2]; 2],
}

impl FloquetResult {
    pub fn monodromy_trace(&self) -> f64 {
        self.monodromy[0][0] + self.monodromy[1][1]
    }

    pub fn monodromy_det(&self) -> f64 {
        self.monodromy[0][0] * self.monodromy[1][1] - self.monodromy[0][1] * self.monodromy[1][0]
    }
}

/// Number of RK4 steps per RF period used to build the monodromy matrix.
const FLOQUET_STEPS: usize = 8192;

/// Builds the monodromy matrix of z̈ + (Ω_RF/2)²[a − 2q cos(Ω_RF t)] z = 0
/// over one period and maps its trace to the characteristic exponent:
/// tr M = 2 cos(πβ), β = arccos(tr/2)/π, secular frequency β·Ω_RF/2.
pub fn floquet_analyze(a: f64, q: f64, rf_frequency: f64) -> Result<FloquetResult> {
    if !a.is_finite() || !q.is_finite() {
        return Err(Error::domain("mathieu parameters must be finite"));
    }
    if !(rf_frequency > 0.0) {
        return Err(Error::domain(format!("rf frequency must be > 0, got {rf_frequency}")));
    }
    let period = 2.0 * std::f64::consts::PI / rf_frequency;
    let h = period / FLOQUET_STEPS as f64;
    let w2 = rf_frequency / 2.0;
    let kappa = |t: f64| w2 * w2 * (a - 2.0 * q * (rf_frequency * t).cos());

    // integrate both unit solutions at once: (y1, y1', y2, y2')
    let mut y = [1.0, 0.0, 0.0, 1.0];
    let f = |t: f64, s: &[f64; 4]| {
        let k = kappa(t);
        [s[1], -k * s[0], s[3], -k * s[2]]
    };
    for i in 0..FLOQUET_STEPS {
        let t = i as f64 * h;
        let k1 = f(t, &y);
        let mut y2 = y;
        for j in 0..4 {
            y2[j] += 0.5 * h * k1[j];
        }
        let k2 = f(t + 0.5 * h, &y2);
        let mut y3 = y;
        for j in 0..4 {
            y3[j] += 0.5 * h * k2[j];
        }
        let k3 = f(t + 0.5 * h, &y3);
        let mut y4 = y;
        for j in 0..4 {
            y4[j] += h * k3[j];
        }
        let k4 = f(t + h, &y4);
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    let monodromy = [[y[0], y[2]], [y[1], y[3]]];
    let trace = monodromy[0][0] + monodromy[1][1];
    // |trace| = 2 within tolerance counts as (marginally) stable
    let stable = trace.abs() < 2.0 + 1e-9;
    if !stable {
        return Ok(FloquetResult {
            characteristic_exponent: None,
            secular_frequency: None,
            stable: false,
            monodromy,
        });
    }
    let beta = (trace / 2.0).clamp(-1.0, 1.0).acos() / std::f64::consts::PI;
    Ok(FloquetResult {
        characteristic_exponent: Some(beta),
        secular_frequency: Some(beta * rf_frequency / 2.0),
        stable: true,
        monodromy,
    })
}

/// Lowest-order pseudopotential secular frequency (Ω_RF/2)√(a + q²/2).
pub fn pseudopotential_secular(a: f64, q: f64, rf_frequency: f64) -> f64 {
    rf_frequency / 2.0 * (a + q * q / 2.0).max(0.0).sqrt()
}

/// Root-finds q ≥ 0 such that the Floquet secular frequency equals
/// `omega_target` (relative 1e-6) for fixed `a`, staying inside the first
/// stability region.
pub fn calibrate_mathieu_from_secular(omega_target: f64, rf_frequency: f64, a: f64) -> Result<f64> {
    if !(rf_frequency > 0.0) {
        return Err(Error::domain("rf frequency must be > 0"));
    }
    if omega_target < 0.0 || omega_target >= rf_frequency / 2.0 {
        return Err(Error::Calibration(format!(
            "target secular frequency {omega_target:.3e} must lie in [0, Ω_RF/2 = {:.3e})",
            rf_frequency / 2.0
        )));
    }
    let secular = |q: f64| -> Result<Option<f64>> {
        Ok(floquet_analyze(a, q, rf_frequency)?.secular_frequency)
    };
    let at_zero = secular(0.0)?
        .ok_or_else(|| Error::Calibration(format!("a = {a} is unstable already at q = 0")))?;
    if omega_target <= at_zero {
        if (at_zero - omega_target).abs() <= 1e-6 * omega_target.max(1e-300) || omega_target == at_zero {
            return Ok(0.0);
        }
        if omega_target == 0.0 && at_zero == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Calibration(format!(
            "secular frequency at q = 0 is already {at_zero:.3e} > target {omega_target:.3e}; \
             no q >= 0 solves it"
        )));
    }
    // bracket: march q upward until the target is passed or stability is lost
    let mut lo = 0.0;
    let mut hi = 0.05;
    loop {
        match secular(hi)? {
            Some(w) if w >= omega_target => break,
            Some(_) => {
                lo = hi;
                hi += 0.05;
                if hi > 1.5 {
                    return Err(Error::Calibration(
                        "target not reached anywhere in the first stability region".into(),
                    ));
                }
            }
            None => {
                return Err(Error::Calibration(format!(
                    "stability lost at q = {hi:.3} before reaching target {omega_target:.3e}"
                )));
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let w = secular(mid)?.ok_or_else(|| {
            Error::Calibration(format!("stability lost at q = {mid:.4} during bisection"))
        })?;
        if (w - omega_target).abs() <= 1e-6 * omega_target {
            return Ok(mid);
        }
        if w < omega_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) < 1e-15 {
            break;
        }
    }
    Err(Error::Calibration(format!(
        "bisection failed to reach 1e-6 relative on target {omega_target:.3e}"
    )))
}

/// Passive rotation of the (x, y) phase-space pair into the (u, v) trap plane
/// by θ_t. Cross-axis correlations are treated as zero: the modes are cooled
/// and propagate independently.
pub fn rotate_plane(
    state_x: &GaussianState,
    state_y: &GaussianState,
    theta: f64,
) -> Result<(GaussianState, GaussianState)> {
    let (c, s) = (theta.cos(), theta.sin());
    let (c2, s2) = (c * c, s * s);
    let mix = |ax: f64, ay: f64| (c2 * ax + s2 * ay, s2 * ax + c2 * ay);
    let (vz_u, vz_v) = mix(state_x.var_position, state_y.var_position);
    let (vp_u, vp_v) = mix(state_x.var_momentum, state_y.var_momentum);
    let (cv_u, cv_v) = mix(state_x.covariance, state_y.covariance);
    let u = GaussianState::new(
        c * state_x.mean_position + s * state_y.mean_position,
        c * state_x.mean_momentum + s * state_y.mean_momentum,
        vz_u,
        vp_u,
        cv_u,
    )?;
    let v = GaussianState::new(
        -s * state_x.mean_position + c * state_y.mean_position,
        -s * state_x.mean_momentum + c * state_y.mean_momentum,
        vz_v,
        vp_v,
        cv_v,
    )?;
    Ok((u, v))
}

/// Checks a Paul-trap drive: (a, q) must be Floquet-stable, and in the
/// genuinely small-q regime (|q| ≤ 0.15) the lowest-order pseudopotential
/// frequency must agree with the Floquet one to 1%.
pub fn validate_paul_trap(spec: &PaulTrapSpec) -> Result<FloquetResult> {
    let fr = floquet_analyze(spec.mathieu_a, spec.mathieu_q, spec.rf_frequency)?;
    if !fr.stable {
        return Err(Error::config(
            "paul_trap",
            format!(
                "(a = {}, q = {}) is outside the first Mathieu stability region (|tr M| = {:.4})",
                spec.mathieu_a,
                spec.mathieu_q,
                fr.monodromy_trace().abs()
            ),
        ));
    }
    if spec.mathieu_q.abs() <= 0.15 && spec.mathieu_a + spec.mathieu_q * spec.mathieu_q / 2.0 > 0.0 {
        let w = fr.secular_frequency.unwrap();
        let wp = pseudopotential_secular(spec.mathieu_a, spec.mathieu_q, spec.rf_frequency);
        if w > 0.0 && ((w - wp) / w).abs() > 0.01 {
            return Err(Error::config(
                "paul_trap",
                format!(
                    "small-q consistency check failed: Floquet {w:.4e} vs pseudopotential {wp:.4e}"
                ),
            ));
        }
    }
    Ok(fr)
}

/// Exact flow matrix of ż = p/m, ṗ = −kz over a step h, row major.
/// k > 0 rotates, k < 0 stretches, k = 0 shears.
pub fn flow_constant_k(k: f64, mass: f64, h: f64) -> [[f64; 2]; 2] {
    if k > 0.0 {
        let w = (k / mass).sqrt();
        let (cs, sn) = ((w * h).cos(), (w * h).sin());
        [[cs, sn / (mass * w)], [-mass * w * sn, cs]]
    } else if k < 0.0 {
        let w = (-k / mass).sqrt();
        let (ch, sh) = ((w * h).cosh(), (w * h).sinh());
        [[ch, sh / (mass * w)], [mass * w * sh, ch]]
    } else {
        [[1.0, h / mass], [0.0, 1.0]]
    }
}
