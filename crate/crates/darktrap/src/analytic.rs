//! Closed-form propagation of the position variance (and full second moments)
//! for the three constant-stiffness regimes: inverted potential, frequency
//! jump, free flight.
//!
//! Conventions: Ω is the optical trap frequency the state was prepared in,
//! ω the dark frequency after release, Γ¹ the displacement-noise rate with
//! Ė = ħΩΓ¹, and the momentum diffusion is D_pp = 2mĖ so that free flight
//! gives ⟨p²⟩ = ⟨p²⟩₀ + 2mĖt. Gas damping is deliberately absent here; it
//! only enters the numerical propagator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{AxisParams, GaussianState, NoiseSpec, PotentialKind};
use crate::units::HBAR;

/// Which closed form produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Inverted,
    Jump,
    Free,
}

impl From<PotentialKind> for Regime {
    fn from(kind: PotentialKind) -> Self {
        match kind {
            PotentialKind::Inverted => Regime::Inverted,
            PotentialKind::HarmonicJump => Regime::Jump,
            PotentialKind::Free => Regime::Free,
        }
    }
}

/// A σ(t_r) curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCurve {
    /// Release times, s, strictly increasing.
    pub times: Vec<f64>,
    /// Position standard deviations, m.
    pub sigma: Vec<f64>,
    pub axis: AxisParams,
    pub regime: Regime,
}

impl ExpansionCurve {
    pub fn new(times: Vec<f64>, sigma: Vec<f64>, axis: AxisParams, regime: Regime) -> Result<Self> {
        if times.len() != sigma.len() {
            return Err(Error::domain(format!(
                "times ({}) and sigma ({}) lengths differ",
                times.len(),
                sigma.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("times must be strictly increasing"));
        }
        if sigma.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::domain("sigma entries must be >= 0"));
        }
        Ok(Self { times, sigma, axis, regime })
    }
}

fn check_common(t: f64, var0: f64, trap_frequency: f64, gamma1: f64) -> Result<()> {
    if t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    if var0 < 0.0 {
        return Err(Error::domain(format!("initial variance must be >= 0, got {var0}")));
    }
    if !(trap_frequency > 0.0) {
        return Err(Error::domain(format!("trap frequency must be > 0, got {trap_frequency}")));
    }
    if gamma1 < 0.0 {
        return Err(Error::domain(format!("gamma1 must be >= 0, got {gamma1}")));
    }
    Ok(())
}

/// Position variance in the inverted potential:
///
/// σ²(t) = σ0²[cosh²(ωt) + (Ω²/ω²)sinh²(ωt)] − (ħΩΓ¹/(mω²))[t − sinh(2ωt)/(2ω)].
///
/// The bracket is ≤ 0 for t ≥ 0, so the incoherent term is non-negative and
/// the whole expression is non-decreasing in t.
pub fn variance_inverted(
    t: f64,
    var0: f64,
    trap_frequency: f64,
    dark_frequency: f64,
    gamma1: f64,
    mass: f64,
) -> Result<f64> {
    check_common(t, var0, trap_frequency, gamma1)?;
    if !(dark_frequency > 0.0) {
        return Err(Error::domain(
            "dark frequency must be > 0 for the inverted closed form (use variance_free for ω = 0)",
        ));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass}")));
    }
    let (om, w) = (trap_frequency, dark_frequency);
    let (ch, sh) = (f64::cosh(w * t), f64::sinh(w * t));
    let coherent = var0 * (ch * ch + (om * om) / (w * w) * sh * sh);
    let bracket = t - f64::sinh(2.0 * w * t) / (2.0 * w);
    let incoherent = -(HBAR * om * gamma1) / (mass * w * w) * bracket;
    Ok(coherent + incoherent)
}

/// Position variance after the frequency jump Ω → ω:
///
/// σ²(t) = σ0²[cos²(ωt) + (Ω²/ω²)sin²(ωt)] + (ħΩΓ¹/(mω²))[t − sin(2ωt)/(2ω)].
///
/// With Γ¹ = 0 this is periodic with period π/ω. It is the ω → iω analytic
/// continuation of [`variance_inverted`].
pub fn variance_jump(
    t: f64,
    var0: f64,
    trap_frequency: f64,
    dark_frequency: f64,
    gamma1: f64,
    mass: f64,
) -> Result<f64> {
    check_common(t, var0, trap_frequency, gamma1)?;
    if !(dark_frequency > 0.0) {
        return Err(Error::domain(
            "dark frequency must be > 0 for the jump closed form (use variance_free for ω = 0)",
        ));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass}")));
    }
    let (om, w) = (trap_frequency, dark_frequency);
    let (cs, sn) = (f64::cos(w * t), f64::sin(w * t));
    let coherent = var0 * (cs * cs + (om * om) / (w * w) * sn * sn);
    let bracket = t - f64::sin(2.0 * w * t) / (2.0 * w);
    let incoherent = (HBAR * om * gamma1) / (mass * w * w) * bracket;
    Ok(coherent + incoherent)
}

/// Free expansion with heating:
///
/// σ²(t) = σ0²(1 + Ω²t²) + (2/3)(Ė/m)t³.
pub fn variance_free(t: f64, var0: f64, trap_frequency: f64, heating_rate: f64, mass: f64) -> Result<f64> {
    check_common(t, var0, trap_frequency, 0.0)?;
    if heating_rate < 0.0 {
        return Err(Error::domain(format!("heating rate must be >= 0, got {heating_rate}")));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass}")));
    }
    Ok(var0 * (1.0 + trap_frequency * trap_frequency * t * t)
        + 2.0 / 3.0 * heating_rate / mass * t * t * t)
}

/// Full second moments (σ², σ_zp, σ_p²) and means from the closed-form
/// solution of ż = p/m, ṗ = ±mω²z (+ white-force diffusion D_pp = 2mĖ) for a
/// general initial Gaussian. Gas damping is not included.
pub fn second_moments(
    t: f64,
    initial: &GaussianState,
    regime: Regime,
    dark_frequency: f64,
    heating_rate: f64,
    mass: f64,
) -> Result<GaussianState> {
    if t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    if heating_rate < 0.0 {
        return Err(Error::domain(format!("heating rate must be >= 0, got {heating_rate}")));
    }
    if !(mass > 0.0) {
        return Err(Error::domain(format!("mass must be > 0, got {mass}")));
    }
    if dark_frequency <= 0.0 && regime != Regime::Free {
        return Err(Error::domain("dark frequency must be > 0 for inverted/jump moments"));
    }
    let (vz0, c0, vp0) = (initial.var_position, initial.covariance, initial.var_momentum);
    let (z0, p0) = (initial.mean_position, initial.mean_momentum);
    let (m, w, edot) = (mass, dark_frequency, heating_rate);

    let (vz, c, vp, z, p) = match regime {
        Regime::Inverted => {
            let (ch, sh) = (f64::cosh(w * t), f64::sinh(w * t));
            let s2w = f64::sinh(2.0 * w * t) / (2.0 * w);
            let vz = vz0 * ch * ch
                + vp0 * sh * sh / (m * m * w * w)
                + 2.0 * c0 * ch * sh / (m * w)
                + edot / (m * w * w) * (s2w - t);
            let c = (m * w * vz0 + vp0 / (m * w)) * ch * sh
                + c0 * (ch * ch + sh * sh)
                + edot * sh * sh / (w * w);
            let vp = m * m * w * w * vz0 * sh * sh
                + vp0 * ch * ch
                + 2.0 * m * w * c0 * sh * ch
                + m * edot * (s2w + t);
            (vz, c, vp, z0 * ch + p0 * sh / (m * w), m * w * z0 * sh + p0 * ch)
        }
        Regime::Jump => {
            let (cs, sn) = (f64::cos(w * t), f64::sin(w * t));
            let s2w = f64::sin(2.0 * w * t) / (2.0 * w);
            let vz = vz0 * cs * cs
                + vp0 * sn * sn / (m * m * w * w)
                + 2.0 * c0 * cs * sn / (m * w)
                + edot / (m * w * w) * (t - s2w);
            let c = (-m * w * vz0 + vp0 / (m * w)) * cs * sn
                + c0 * (cs * cs - sn * sn)
                + edot * sn * sn / (w * w);
            let vp = m * m * w * w * vz0 * sn * sn + vp0 * cs * cs - 2.0 * m * w * c0 * sn * cs
                + m * edot * (t + s2w);
            (vz, c, vp, z0 * cs + p0 * sn / (m * w), -m * w * z0 * sn + p0 * cs)
        }
        Regime::Free => {
            let vz = vz0 + 2.0 * c0 * t / m + vp0 * t * t / (m * m)
                + 2.0 / 3.0 * edot / m * t * t * t;
            let c = c0 + vp0 * t / m + edot * t * t;
            let vp = vp0 + 2.0 * m * edot * t;
            (vz, c, vp, z0 + p0 * t / m, p0)
        }
    };
    GaussianState::new(z, p, vz, vp, c)
}

/// Second moments in the inverted potential. The position-variance component
/// equals [`variance_inverted`] whenever the initial state is thermal at the
/// axis' optical trap frequency.
pub fn second_moments_inverted(
    t: f64,
    initial: &GaussianState,
    axis: &AxisParams,
    noise: &NoiseSpec,
    mass: f64,
) -> Result<GaussianState> {
    if axis.kind != PotentialKind::Inverted {
        return Err(Error::domain(format!(
            "axis {} is not configured as inverted",
            axis.label
        )));
    }
    second_moments(t, initial, Regime::Inverted, axis.dark_frequency, noise.heating_rate, mass)
}
