//! Configuration loading: a flat TOML schema whose keys carry explicit unit
//! suffixes (`trap_freq_khz`, `sigma0_pm`, `heating_k_per_s`, ...) so the
//! lab-unit values can be copied in verbatim. Everything is converted to SI
//! at load time and validated with field-precise error messages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::propagator::{calibrate_mathieu_from_secular, validate_paul_trap, StiffnessSchedule};
use crate::state::{
    AxisLabel, AxisParams, GaussianState, NoiseSpec, PaulTrapSpec, PhysicalParams, PotentialKind,
    ProtocolSpec, ReadoutMode,
};
use crate::units;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleToml {
    mass_fg: f64,
    radius_nm: Option<f64>,
    charge_count: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PaulTrapToml {
    rf_freq_khz: f64,
    rf_voltage_v: Option<f64>,
    #[serde(default)]
    mathieu_a: f64,
    /// Optional explicit q; when absent it is calibrated per axis from the
    /// dark frequency.
    mathieu_q: Option<f64>,
    #[serde(default = "default_rotation")]
    plane_rotation_deg: f64,
}

fn default_rotation() -> f64 {
    45.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolToml {
    #[serde(default)]
    feedback_off_lead_us: f64,
    release_times_us: Vec<f64>,
    measure_window_us: f64,
    shots_per_release: u32,
    #[serde(default = "default_sample_rate")]
    sample_rate_mhz: f64,
    #[serde(default)]
    detector_noise_pm_per_sqrt_hz: f64,
    #[serde(default = "default_readout")]
    readout: String,
    #[serde(default)]
    seed_base: u64,
    output_dir: Option<String>,
}

fn default_sample_rate() -> f64 {
    10.0
}

fn default_readout() -> String {
    "lockin".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisToml {
    kind: String,
    trap_freq_khz: f64,
    #[serde(default)]
    dark_freq_khz: f64,
    occupation: f64,
    /// Initial state size; derived from the occupation when absent.
    sigma0_pm: Option<f64>,
    #[serde(default)]
    heating_k_per_s: f64,
    #[serde(default)]
    gas_damping_hz: f64,
    pressure_mbar: Option<f64>,
    #[serde(default)]
    broadening_pm: f64,
    #[serde(default)]
    release_phase_deg: f64,
    /// Use the Mathieu-modulated stiffness for jump axes (needs [paul_trap]).
    #[serde(default)]
    micromotion: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfigToml {
    particle: ParticleToml,
    paul_trap: Option<PaulTrapToml>,
    protocol: ProtocolToml,
    axis: BTreeMap<String, AxisToml>,
}

/// One fully-resolved axis: dynamics parameters, noise, prepared state.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSetup {
    pub params: AxisParams,
    pub noise: NoiseSpec,
    /// State prepared by feedback cooling: σ(0)² as configured, momentum
    /// thermal at the optical trap frequency.
    pub initial: GaussianState,
    /// Configured occupation n̄ (kept independent of σ(0); see
    /// `thermal_consistency_ratio`).
    pub occupation: f64,
    /// Measurement broadening δσ, m.
    pub broadening: f64,
    pub micromotion: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalParams,
    pub paul_trap: Option<PaulTrapSpec>,
    pub protocol: ProtocolSpec,
    pub axes: Vec<AxisSetup>,
    pub seed_base: u64,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(path.display().to_string(), format!("cannot read config: {e}"))
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RunConfigToml = toml::from_str(text)
            .map_err(|e| Error::config("config", e.to_string()))?;
        raw.resolve()
    }

    pub fn axis(&self, label: AxisLabel) -> Result<&AxisSetup> {
        self.axes
            .iter()
            .find(|a| a.params.label == label)
            .ok_or_else(|| Error::config(format!("axis.{label}"), "axis not in config"))
    }

    /// Stiffness schedule for one axis covering [0, t_end].
    pub fn schedule_for(&self, axis: &AxisSetup, t_end: f64) -> Result<StiffnessSchedule> {
        let m = self.physical.mass;
        let w = axis.params.dark_frequency;
        match axis.params.kind {
            PotentialKind::Inverted => StiffnessSchedule::constant(-m * w * w, t_end),
            PotentialKind::Free => StiffnessSchedule::constant(0.0, t_end),
            PotentialKind::HarmonicJump => {
                if axis.micromotion {
                    let trap = self.paul_trap.as_ref().ok_or_else(|| {
                        Error::config(
                            format!("axis.{}.micromotion", axis.params.label),
                            "micromotion requires a [paul_trap] section",
                        )
                    })?;
                    let q =
                        calibrate_mathieu_from_secular(w, trap.rf_frequency, trap.mathieu_a)?;
                    StiffnessSchedule::mathieu(
                        trap.mathieu_a,
                        q,
                        trap.rf_frequency,
                        axis.params.release_phase,
                        t_end,
                    )
                } else {
                    StiffnessSchedule::constant(m * w * w, t_end)
                }
            }
        }
    }
}

impl RunConfigToml {
    fn resolve(self) -> Result<RunConfig> {
        let key = |k: &str| k.to_string();
        if !(self.particle.mass_fg > 0.0) {
            return Err(Error::config(key("particle.mass_fg"), "must be > 0"));
        }
        let physical = PhysicalParams::new(
            units::fg_to_kg(self.particle.mass_fg),
            self.particle.radius_nm.map(units::nm_to_m),
            self.particle.charge_count.unwrap_or(0),
        )
        .map_err(|e| Error::config(key("particle"), e.to_string()))?;

        let paul_trap = match &self.paul_trap {
            None => None,
            Some(pt) => {
                if !(pt.rf_freq_khz > 0.0) {
                    return Err(Error::config(key("paul_trap.rf_freq_khz"), "must be > 0"));
                }
                let spec = PaulTrapSpec {
                    rf_frequency: units::khz_to_rad_per_s(pt.rf_freq_khz),
                    mathieu_q: pt.mathieu_q.unwrap_or(0.0),
                    mathieu_a: pt.mathieu_a,
                    plane_rotation: units::deg_to_rad(pt.plane_rotation_deg),
                    rf_voltage: pt.rf_voltage_v,
                };
                if pt.mathieu_q.is_some() {
                    validate_paul_trap(&spec)
                        .map_err(|e| Error::config(key("paul_trap"), e.to_string()))?;
                }
                Some(spec)
            }
        };

        let p = &self.protocol;
        for (i, t) in p.release_times_us.iter().enumerate() {
            if *t < 0.0 {
                return Err(Error::config(
                    format!("protocol.release_times_us[{i}]"),
                    "must be >= 0",
                ));
            }
        }
        if p.shots_per_release < 2 {
            return Err(Error::config(
                key("protocol.shots_per_release"),
                "must be at least 2",
            ));
        }
        let readout = match p.readout.as_str() {
            "lockin" => ReadoutMode::Lockin,
            "ideal" => ReadoutMode::Ideal,
            other => {
                return Err(Error::config(
                    key("protocol.readout"),
                    format!("unknown readout {other:?} (expected \"lockin\" or \"ideal\")"),
                ))
            }
        };
        let protocol = ProtocolSpec {
            feedback_off_lead: units::us_to_s(p.feedback_off_lead_us),
            release_times: p.release_times_us.iter().map(|t| units::us_to_s(*t)).collect(),
            measure_window: units::us_to_s(p.measure_window_us),
            shots_per_release: p.shots_per_release,
            sample_rate: p.sample_rate_mhz * 1e6,
            detector_noise_psd: (p.detector_noise_pm_per_sqrt_hz * 1e-12).powi(2),
            readout,
        };
        protocol
            .validate()
            .map_err(|e| Error::config(key("protocol"), e.to_string()))?;

        let mut axes = Vec::new();
        for (name, ax) in &self.axis {
            let keya = |f: &str| format!("axis.{name}.{f}");
            let label: AxisLabel = name
                .parse()
                .map_err(|e: Error| Error::config(format!("axis.{name}"), e.to_string()))?;
            let kind = match ax.kind.as_str() {
                "inverted" => PotentialKind::Inverted,
                "jump" => PotentialKind::HarmonicJump,
                "free" => PotentialKind::Free,
                other => {
                    return Err(Error::config(
                        keya("kind"),
                        format!("unknown kind {other:?} (expected inverted|jump|free)"),
                    ))
                }
            };
            if !(ax.trap_freq_khz > 0.0) {
                return Err(Error::config(keya("trap_freq_khz"), "must be > 0"));
            }
            if ax.dark_freq_khz < 0.0 {
                return Err(Error::config(keya("dark_freq_khz"), "must be >= 0"));
            }
            if ax.occupation < 0.0 {
                return Err(Error::config(keya("occupation"), "must be >= 0"));
            }
            if ax.heating_k_per_s < 0.0 {
                return Err(Error::config(keya("heating_k_per_s"), "must be >= 0"));
            }
            if ax.gas_damping_hz < 0.0 {
                return Err(Error::config(keya("gas_damping_hz"), "must be >= 0"));
            }
            if ax.broadening_pm < 0.0 {
                return Err(Error::config(keya("broadening_pm"), "must be >= 0"));
            }
            if ax.micromotion && kind != PotentialKind::HarmonicJump {
                return Err(Error::config(
                    keya("micromotion"),
                    "micromotion only applies to jump axes",
                ));
            }
            if ax.micromotion && self.paul_trap.is_none() {
                return Err(Error::config(
                    keya("micromotion"),
                    "micromotion requires a [paul_trap] section",
                ));
            }
            let trap_frequency = units::khz_to_rad_per_s(ax.trap_freq_khz);
            let params = AxisParams::new(
                label,
                trap_frequency,
                units::khz_to_rad_per_s(ax.dark_freq_khz),
                kind,
                units::deg_to_rad(ax.release_phase_deg),
            )
            .map_err(|e| Error::config(format!("axis.{name}"), e.to_string()))?;
            let noise = NoiseSpec::from_heating_rate(
                units::k_per_s_to_j_per_s(ax.heating_k_per_s),
                trap_frequency,
            )
            .and_then(|n| {
                n.with_gas_damping(ax.gas_damping_hz, ax.pressure_mbar.map(units::mbar_to_pa))
            })
            .map_err(|e| Error::config(format!("axis.{name}"), e.to_string()))?;
            let sigma0 = match ax.sigma0_pm {
                Some(s) if s > 0.0 => units::pm_to_m(s),
                Some(_) => return Err(Error::config(keya("sigma0_pm"), "must be > 0")),
                None => crate::state::thermal_state(ax.occupation, trap_frequency, physical.mass)
                    .map_err(|e| Error::config(keya("occupation"), e.to_string()))?
                    .sigma(),
            };
            let var0 = sigma0 * sigma0;
            let vp0 = physical.mass * physical.mass * trap_frequency * trap_frequency * var0;
            let initial = GaussianState::from_covariance(var0, 0.0, vp0)
                .map_err(|e| Error::config(keya("sigma0_pm"), e.to_string()))?;
            axes.push(AxisSetup {
                params,
                noise,
                initial,
                occupation: ax.occupation,
                broadening: units::pm_to_m(ax.broadening_pm),
                micromotion: ax.micromotion,
            });
        }
        if axes.is_empty() {
            return Err(Error::config(key("axis"), "at least one [axis.<label>] is required"));
        }

        Ok(RunConfig {
            physical,
            paul_trap,
            protocol,
            axes,
            seed_base: self.protocol.seed_base,
            output_dir: self.protocol.output_dir.as_ref().map(PathBuf::from),
        })
    }
}
