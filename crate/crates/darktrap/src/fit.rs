//! Parameter estimation: weighted least-squares fits of σ(t_r) curves and the
//! coherence-length curves derived from fitted parameters.
//!
//! The model parameters are {Γ¹, Ω, ω, σ(0)², φ}. For the inverted model the
//! prediction is the closed form of [`crate::analytic::variance_inverted`]
//! and φ is fixed at zero (micromotion is negligible along the inverted
//! axis); for the jump-with-micromotion model the prediction comes from the
//! Mathieu moment propagation with φ as the RF release phase.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{second_moments, variance_inverted, Regime};
use crate::error::{Error, Result};
use crate::propagator::{calibrate_mathieu_from_secular, propagate_recording, StiffnessSchedule};
use crate::state::GaussianState;
use crate::units::HBAR;

pub const PARAM_NAMES: [&str; 5] = ["gamma1", "trap_frequency", "dark_frequency", "var0", "phase"];

/// Model parameters; frequencies in rad/s, var0 in m², phase in rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub gamma1: f64,
    pub trap_frequency: f64,
    pub dark_frequency: f64,
    pub var0: f64,
    pub phase: f64,
}

impl FitParams {
    fn to_array(self) -> [f64; 5] {
        [self.gamma1, self.trap_frequency, self.dark_frequency, self.var0, self.phase]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self {
            gamma1: a[0],
            trap_frequency: a[1],
            dark_frequency: a[2],
            var0: a[3],
            phase: a[4],
        }
    }
}

/// Which σ(t) model is being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitModel {
    /// Closed-form inverted expansion; φ is held at zero.
    Inverted,
    /// Mathieu moment propagation with q calibrated so the Floquet secular
    /// frequency equals the fitted ω; φ is the RF phase at release.
    JumpMicromotion { rf_frequency: f64, mathieu_a: f64 },
}

impl FitModel {
    fn n_free(&self) -> usize {
        match self {
            FitModel::Inverted => 4,
            FitModel::JumpMicromotion { .. } => 5,
        }
    }
}

/// How residuals are weighted.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    /// Per-point standard errors (same length as the data).
    PerPoint(Vec<f64>),
    /// wᵢ = fraction · σᵢ; the default 3% model for curves without an error
    /// column.
    ConstantRelative(f64),
}

impl Default for Weights {
    fn default() -> Self {
        Weights::ConstantRelative(0.03)
    }
}

#[derive(Debug, Clone)]
pub struct FitSettings {
    pub mass: f64,
    pub weights: Weights,
    /// Measurement broadening δσ entering the model as √(σ_model² + δσ²).
    pub broadening: Option<f64>,
    pub max_iterations: usize,
}

impl FitSettings {
    pub fn new(mass: f64) -> Self {
        Self { mass, weights: Weights::default(), broadening: None, max_iterations: 500 }
    }
}

/// Fit outcome. The covariance is ordered as [`PARAM_NAMES`]; for the
/// inverted model the φ row and column are zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FitParams,
    pub covariance: [[f64; 5]; 5],
    /// RMS of (σ_model − σ_data), m.
    pub residual_rms: f64,
    pub n_points: usize,
    pub model: FitModel,
    pub mass: f64,
    pub iterations: usize,
    /// Near-unidentifiable parameter pairs (|correlation| > 0.99).
    pub degeneracy_warnings: Vec<String>,
}

impl FitResult {
    /// One-standard-deviation uncertainty of parameter `i`.
    pub fn uncertainty(&self, i: usize) -> f64 {
        self.covariance[i][i].max(0.0).sqrt()
    }
}

/// Expansion ratio η = σ(t_r)/σ(0).
pub fn expansion_ratio(sigma_t: f64, sigma_0: f64) -> Result<f64> {
    if !(sigma_0 > 0.0) {
        return Err(Error::domain(format!("sigma_0 must be > 0, got {sigma_0}")));
    }
    if sigma_t < 0.0 {
        return Err(Error::domain(format!("sigma_t must be >= 0, got {sigma_t}")));
    }
    Ok(sigma_t / sigma_0)
}

/// Predicted σ(t) at every requested time for one parameter vector.
fn predict(
    times: &[f64],
    p: &FitParams,
    model: &FitModel,
    mass: f64,
    broadening: Option<f64>,
) -> Result<Vec<f64>> {
    let mut out = match model {
        FitModel::Inverted => times
            .iter()
            .map(|t| {
                variance_inverted(*t, p.var0, p.trap_frequency, p.dark_frequency, p.gamma1, mass)
                    .map(f64::sqrt)
            })
            .collect::<Result<Vec<f64>>>()?,
        FitModel::JumpMicromotion { rf_frequency, mathieu_a } => {
            let q = calibrate_mathieu_from_secular(p.dark_frequency, *rf_frequency, *mathieu_a)?;
            let t_end = times.last().copied().unwrap_or(0.0).max(1e-9);
            let sched =
                StiffnessSchedule::mathieu(*mathieu_a, q, *rf_frequency, p.phase, t_end * 1.0001)?;
            // state prepared in the optical trap: momentum thermal at Ω
            let vp0 = mass * mass * p.trap_frequency * p.trap_frequency * p.var0;
            let init = GaussianState::from_covariance(p.var0, 0.0, vp0)?;
            let noise =
                crate::state::NoiseSpec::from_gamma1(p.gamma1, p.trap_frequency)?;
            propagate_recording(&init, &sched, &noise, mass, times, 1.0)?
                .into_iter()
                .map(|s| Ok(s.var_position.sqrt()))
                .collect::<Result<Vec<f64>>>()?
        }
    };
    if let Some(d) = broadening {
        for s in &mut out {
            *s = s.hypot(d);
        }
    }
    Ok(out)
}

fn weight_vector(sigma: &[f64], weights: &Weights) -> Result<Vec<f64>> {
    match weights {
        Weights::PerPoint(w) => {
            if w.len() != sigma.len() {
                return Err(Error::domain(format!(
                    "weight vector length {} does not match data length {}",
                    w.len(),
                    sigma.len()
                )));
            }
            if w.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::domain("per-point errors must be > 0"));
            }
            Ok(w.clone())
        }
        Weights::ConstantRelative(f) => {
            if !(*f > 0.0) {
                return Err(Error::domain("relative error fraction must be > 0"));
            }
            Ok(sigma.iter().map(|s| (f * s).max(f64::MIN_POSITIVE)).collect())
        }
    }
}

struct Objective<'a> {
    times: &'a [f64],
    sigma: &'a [f64],
    w: Vec<f64>,
    model: FitModel,
    mass: f64,
    broadening: Option<f64>,
    free: Vec<usize>,
    scale: [f64; 5],
    fixed: [f64; 5],
    lo: [f64; 5],
    hi: [f64; 5],
}

impl Objective<'_> {
    fn params_from(&self, x: &DVector<f64>) -> FitParams {
        let mut a = self.fixed;
        for (j, &i) in self.free.iter().enumerate() {
            a[i] = (x[j] * self.scale[i]).clamp(self.lo[i], self.hi[i]);
        }
        FitParams::from_array(a)
    }

    fn residuals(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.params_from(x);
        let pred = predict(self.times, &p, &self.model, self.mass, self.broadening)?;
        Ok(DVector::from_iterator(
            self.times.len(),
            pred.iter().zip(self.sigma).zip(&self.w).map(|((m, d), w)| (m - d) / w),
        ))
    }

    fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = self.times.len();
        let k = self.free.len();
        let mut jac = DMatrix::zeros(n, k);
        for j in 0..k {
            let h = 1e-6 * x[j].abs().max(1e-3);
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            let rp = self.residuals(&xp)?;
            let rm = self.residuals(&xm)?;
            for i in 0..n {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }
}

/// Weighted Levenberg-Marquardt fit of a σ(t_r) curve.
///
/// `init` must lie inside `bounds`; convergence is a relative parameter step
/// below 1e-8. A Jacobian whose smallest singular value collapses raises a
/// degeneracy error naming the unidentifiable parameter direction.
pub fn fit_expansion(
    times: &[f64],
    sigma: &[f64],
    model: FitModel,
    init: FitParams,
    bounds: (FitParams, FitParams),
    settings: &FitSettings,
) -> Result<FitResult> {
    if times.len() != sigma.len() {
        return Err(Error::domain(format!(
            "times ({}) and sigma ({}) lengths differ",
            times.len(),
            sigma.len()
        )));
    }
    if times.len() < 8 {
        return Err(Error::domain(format!("need at least 8 data points, got {}", times.len())));
    }
    if times.iter().any(|t| *t < 0.0) || sigma.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::domain("times must be >= 0 and sigma finite >= 0"));
    }
    let (blo, bhi) = (bounds.0.to_array(), bounds.1.to_array());
    let init_a = init.to_array();
    let free: Vec<usize> = (0..model.n_free()).collect();
    for &i in &free {
        if init_a[i] < blo[i] || init_a[i] > bhi[i] {
            return Err(Error::domain(format!(
                "initial guess for {} ({:.4e}) outside bounds [{:.4e}, {:.4e}]",
                PARAM_NAMES[i], init_a[i], blo[i], bhi[i]
            )));
        }
    }
    let w = weight_vector(sigma, &settings.weights)?;

    // internal coordinates: each free parameter divided by the magnitude of
    // its initial guess (or bound span), so the optimizer is unit-free
    let mut scale = [1.0; 5];
    for &i in &free {
        scale[i] = init_a[i].abs().max(1e-6 * (bhi[i] - blo[i]).abs()).max(f64::MIN_POSITIVE);
    }
    let obj = Objective {
        times,
        sigma,
        w,
        model,
        mass: settings.mass,
        broadening: settings.broadening,
        free: free.clone(),
        scale,
        fixed: init_a,
        lo: blo,
        hi: bhi,
    };

    let mut x = DVector::from_iterator(free.len(), free.iter().map(|&i| init_a[i] / scale[i]));
    let mut r = obj.residuals(&x)?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut jac = obj.jacobian(&x)?;

    while iterations < settings.max_iterations {
        iterations += 1;
        check_jacobian(&jac, &free)?;
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut step_ok = false;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for i in 0..damped.nrows() {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let delta = chol.solve(&(-&jtr));
            let x_new = &x + &delta;
            let r_new = obj.residuals(&x_new)?;
            let cost_new = r_new.norm_squared();
            if cost_new <= cost {
                // accepted LM steps never increase the objective
                let rel_step = delta
                    .iter()
                    .zip(x_new.iter())
                    .map(|(d, xn)| d.abs() / xn.abs().max(1.0))
                    .fold(0.0, f64::max);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda / 3.0).max(1e-14);
                step_ok = true;
                if rel_step < 1e-8 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break;
            }
        }
        if converged || cost == 0.0 {
            converged = true;
            break;
        }
        if !step_ok {
            // no downhill direction left at huge damping: treat a tiny
            // gradient as converged, otherwise report failure
            let grad_norm = jtr.norm();
            if grad_norm < 1e-12 * (1.0 + cost) {
                converged = true;
                break;
            }
            return Err(Error::Fit(format!(
                "no acceptable step at iteration {iterations}; cost {cost:.6e}, \
                 gradient norm {grad_norm:.3e}, lambda {lambda:.1e}"
            )));
        }
        jac = obj.jacobian(&x)?;
    }
    if !converged {
        return Err(Error::Fit(format!(
            "no convergence in {} iterations; final cost {cost:.6e}",
            settings.max_iterations
        )));
    }

    // covariance = (JᵀJ)⁻¹ in internal coordinates, scaled by the residual
    // variance and mapped back to physical units
    jac = obj.jacobian(&x)?;
    check_jacobian(&jac, &free)?;
    let jtj = jac.transpose() * &jac;
    let dof = times.len().saturating_sub(free.len()).max(1);
    let s2 = cost / dof as f64;
    let cov_int = jtj
        .try_inverse()
        .ok_or_else(|| degeneracy_from_svd(&jac, &free))?;
    let mut covariance = [[0.0; 5]; 5];
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            covariance[i][j] = cov_int[(a, b)] * s2 * scale[i] * scale[j];
        }
    }
    // correlations from the unscaled (JᵀJ)⁻¹: the residual variance cancels,
    // so perfect (zero-residual) fits still flag unidentifiable directions
    let mut warnings = Vec::new();
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            if b > a {
                let denom = (cov_int[(a, a)] * cov_int[(b, b)]).sqrt();
                if denom > 0.0 {
                    let corr = cov_int[(a, b)] / denom;
                    if corr.abs() > 0.99 {
                        warnings.push(format!(
                            "{} and {} are nearly unidentifiable (correlation {corr:.4})",
                            PARAM_NAMES[i], PARAM_NAMES[j]
                        ));
                    }
                }
            }
        }
    }

    let params = obj.params_from(&x);
    let pred = predict(times, &params, &model, settings.mass, settings.broadening)?;
    let rms = (pred
        .iter()
        .zip(sigma)
        .map(|(m, d)| (m - d) * (m - d))
        .sum::<f64>()
        / times.len() as f64)
        .sqrt();

    Ok(FitResult {
        params,
        covariance,
        residual_rms: rms,
        n_points: times.len(),
        model,
        mass: settings.mass,
        iterations,
        degeneracy_warnings: warnings,
    })
}

fn check_jacobian(jac: &DMatrix<f64>, free: &[usize]) -> Result<()> {
    if jac.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite Jacobian entry".into()));
    }
    let svd = jac.clone().svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin < 1e-12 * smax {
        return Err(degeneracy_from_svd(jac, free));
    }
    Ok(())
}

fn degeneracy_from_svd(jac: &DMatrix<f64>, free: &[usize]) -> Error {
    let svd = jac.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    // row of V^T for the smallest singular value = null-ish direction
    let mut imin = 0;
    let mut smin = f64::INFINITY;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < smin {
            smin = *s;
            imin = i;
        }
    }
    let dir: Vec<String> = free
        .iter()
        .enumerate()
        .map(|(j, &i)| format!("{:+.3}·{}", vt[(imin, j)], PARAM_NAMES[i]))
        .collect();
    Error::Degenerate { direction: dir.join(" ") }
}

/// Coherence curve on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    /// ξ(t) with the fitted heating rate, m.
    pub xi: Vec<f64>,
    /// ξ(t) with the heating rate scaled down (default 1/1000), m.
    pub xi_improved: Vec<f64>,
    /// Ground-state coherence length √8·√(ħ/2mΩ) of the same axis, m.
    pub xi_zpm_threshold: f64,
}

impl CoherenceCurve {
    pub fn new(times: Vec<f64>, xi: Vec<f64>, xi_improved: Vec<f64>, threshold: f64) -> Result<Self> {
        if times.len() != xi.len() || xi.len() != xi_improved.len() {
            return Err(Error::domain("coherence curve arrays must share a length"));
        }
        if xi.iter().chain(&xi_improved).any(|v| !(*v > 0.0)) {
            return Err(Error::domain("coherence lengths must be > 0"));
        }
        for ((t, a), b) in times.iter().zip(&xi).zip(&xi_improved) {
            if *t > 0.0 && *b < *a * (1.0 - 1e-9) {
                return Err(Error::domain(format!(
                    "improved curve must dominate the baseline pointwise; violated at t = {t:.3e}"
                )));
            }
        }
        Ok(Self { times, xi, xi_improved, xi_zpm_threshold: threshold })
    }
}

/// ξ(t) = √8 𝒫(t) σ(t) for the fitted parameters with the heating rate
/// multiplied by `heating_scale` (1 = as fitted). The initial state takes
/// σ(0)² from the fit and the momentum variance from the initial occupancy,
/// σ_p²(0) = [ħ(2n̄₀+1)/2]²/σ(0)², so the t = 0 purity is exactly (2n̄₀+1)⁻¹.
pub fn coherence_xi(
    fit: &FitResult,
    mass: f64,
    nbar0: f64,
    t_grid: &[f64],
    heating_scale: f64,
) -> Result<Vec<f64>> {
    if !(heating_scale > 0.0) {
        return Err(Error::domain(format!("heating scale must be > 0, got {heating_scale}")));
    }
    if nbar0 < 0.0 {
        return Err(Error::domain("initial occupation must be >= 0"));
    }
    let p = &fit.params;
    let vp0 = (HBAR * (2.0 * nbar0 + 1.0) / 2.0).powi(2) / p.var0;
    let init = GaussianState::from_covariance(p.var0, 0.0, vp0)?;
    let e_dot = HBAR * p.trap_frequency * p.gamma1 * heating_scale;
    let states: Vec<GaussianState> = match fit.model {
        FitModel::Inverted => t_grid
            .iter()
            .map(|t| second_moments(*t, &init, Regime::Inverted, p.dark_frequency, e_dot, mass))
            .collect::<Result<_>>()?,
        FitModel::JumpMicromotion { rf_frequency, mathieu_a } => {
            let q = calibrate_mathieu_from_secular(p.dark_frequency, rf_frequency, mathieu_a)?;
            let t_end = t_grid.last().copied().unwrap_or(0.0).max(1e-9);
            let sched =
                StiffnessSchedule::mathieu(mathieu_a, q, rf_frequency, p.phase, t_end * 1.0001)?;
            let noise = crate::state::NoiseSpec {
                gamma1: p.gamma1 * heating_scale,
                heating_rate: e_dot,
                gas_damping: 0.0,
                pressure: None,
            };
            propagate_recording(&init, &sched, &noise, mass, t_grid, 1.0)?
        }
    };
    states.iter().map(crate::state::coherence_length).collect()
}

/// Bundles the baseline curve, the reduced-heating curve and the ground-state
/// threshold for plotting.
pub fn coherence_curve(
    fit: &FitResult,
    mass: f64,
    nbar0: f64,
    t_grid: &[f64],
    improved_scale: f64,
) -> Result<CoherenceCurve> {
    if !(improved_scale > 0.0 && improved_scale <= 1.0) {
        return Err(Error::domain(format!(
            "improved heating scale must be in (0, 1], got {improved_scale}"
        )));
    }
    let xi = coherence_xi(fit, mass, nbar0, t_grid, 1.0)?;
    let xi_improved = coherence_xi(fit, mass, nbar0, t_grid, improved_scale)?;
    let threshold = 8.0_f64.sqrt() * (HBAR / (2.0 * mass * fit.params.trap_frequency)).sqrt();
    CoherenceCurve::new(t_grid.to_vec(), xi, xi_improved, threshold)
}

/// Initial-guess heuristic: Ω from the earliest-time rise (all protocols
/// share the free-expansion form at small t), ω from the late-time
/// exponential slope (inverted) or the recompression period (jump).
pub fn initial_guess(times: &[f64], sigma: &[f64], model: &FitModel, mass: f64) -> FitParams {
    let var0 = sigma.first().map(|s| s * s).unwrap_or(1e-21);
    // sigma^2 ~ var0 (1 + Omega^2 t^2) early on
    let mut omega_est: f64 = 1e5;
    for (t, s) in times.iter().zip(sigma).skip(1) {
        let ratio = s * s / var0;
        if ratio > 2.0 && *t > 0.0 {
            omega_est = (ratio - 1.0).sqrt() / t;
            break;
        }
    }
    let dark_est = match model {
        FitModel::Inverted => {
            // late-time log slope: sigma ~ exp(omega t)
            let n = times.len();
            if n >= 4 && sigma[n - 3] > 0.0 {
                ((sigma[n - 1] / sigma[n - 3]).ln() / (times[n - 1] - times[n - 3])).abs().max(100.0)
            } else {
                1e4
            }
        }
        FitModel::JumpMicromotion { .. } => {
            // first maximum of sigma sits at a quarter period
            let imax = sigma
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let t_quarter = times[imax].max(times[times.len() - 1] / 4.0);
            std::f64::consts::PI / (2.0 * t_quarter)
        }
    };
    let _ = mass;
    FitParams {
        gamma1: 1e5,
        trap_frequency: omega_est,
        dark_frequency: dark_est,
        var0,
        phase: 0.0,
    }
}
