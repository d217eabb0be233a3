//! Batch command-line front end: `simulate`, `scan`, `fit`, `coherence`.
//!
//! Exit codes: 0 success, 2 configuration/input error, 3 simulation error,
//! 4 fit error. Output files are CSV (always) plus optional self-contained
//! SVG renderings, written atomically. Every command is deterministic given
//! (config, flags, seed): outputs are byte-identical across repeated runs
//! and worker counts.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analytic::{variance_free, variance_inverted, variance_jump};
use crate::config::{AxisSetup, RunConfig};
use crate::ensemble::{apply_measurement_broadening, run_ensemble, ShotContext};
use crate::error::Error;
use crate::fit::{
    coherence_curve, expansion_ratio, fit_expansion, initial_guess, FitModel, FitParams,
    FitResult, FitSettings, Weights,
};
use crate::propagator::propagate_recording;
use crate::state::{squeezing_db, AxisLabel, PotentialKind};
use crate::{io, svg, units};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "DARKTRAP_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "darktrap",
    about = "Phase-space expansion simulator for levitated nanoparticles in dark potentials",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the shot ensemble at one release time and write shot/histogram CSVs.
    Simulate(SimulateArgs),
    /// Scan sigma(t_r) over a release-time range with a chosen engine.
    Scan(ScanArgs),
    /// Fit the expansion model to a sigma(t_r) CSV.
    Fit(FitArgs),
    /// Coherence-length curves from a saved fit result.
    Coherence(CoherenceArgs),
}

#[derive(Args, Debug)]
struct CommonOut {
    /// Output directory (falls back to $DARKTRAP_OUT_DIR, the config value,
    /// then the current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also render SVG plots next to the CSVs.
    #[arg(long)]
    svg: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Axis label (u, v, z, x, y).
    #[arg(long)]
    axis: String,
    /// Release time in microseconds.
    #[arg(long)]
    t_r_us: f64,
    /// Override the configured shots per release.
    #[arg(long)]
    shots: Option<u32>,
    /// Override the configured seed base.
    #[arg(long)]
    seed: Option<u64>,
    /// Rayon worker count (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    axis: String,
    #[arg(long)]
    t_r_min_us: f64,
    #[arg(long)]
    t_r_max_us: f64,
    /// Number of scan points (>= 2).
    #[arg(long)]
    points: usize,
    /// analytic | moments | ensemble
    #[arg(long, default_value = "analytic")]
    engine: String,
    /// With the moments engine, also write the full second-moment trace
    /// (t_s,var_pos_m2,covar,var_mom).
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    out: CommonOut,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Input curve CSV (t_s,sigma_m[,sigma_err_m]).
    #[arg(long)]
    data: PathBuf,
    /// inverted | jump
    #[arg(long, default_value = "inverted")]
    model: String,
    /// Config file supplying mass (and RF drive for the jump model).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Particle mass in femtograms (overrides the config value).
    #[arg(long)]
    mass_fg: Option<f64>,
    /// RF drive frequency in kHz for the jump model (overrides the config).
    #[arg(long)]
    rf_freq_khz: Option<f64>,
    /// Measurement broadening in pm entering the model in quadrature.
    #[arg(long)]
    broadening_pm: Option<f64>,
    /// Where to write the JSON fit report.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args, Debug)]
struct CoherenceArgs {
    /// JSON fit result produced by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Reduced-heating scale for the improved curve (0 < s <= 1).
    #[arg(long, default_value_t = 1e-3)]
    heating_scale: f64,
    /// Curve end time in microseconds.
    #[arg(long)]
    t_max_us: f64,
    /// Grid points.
    #[arg(long, default_value_t = 301)]
    points: usize,
    /// Initial phonon occupation fixing the t = 0 purity.
    #[arg(long, default_value_t = 0.0)]
    nbar0: f64,
    #[command(flatten)]
    out: CommonOut,
}

/// Entry point shared by the binary and the integration tests; returns the
/// process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Coherence(a) => cmd_coherence(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Fit(_) | Error::Degenerate { .. } => 4,
        Error::Integration(_) | Error::Ensemble(_) | Error::Reconstruction(_) => 3,
        _ => 2,
    }
}

fn out_dir(cli: &CommonOut, config: Option<&RunConfig>) -> PathBuf {
    if let Some(d) = &cli.out_dir {
        return d.clone();
    }
    if let Ok(d) = std::env::var(OUT_DIR_ENV) {
        if !d.is_empty() {
            return PathBuf::from(d);
        }
    }
    config
        .and_then(|c| c.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn parse_axis(s: &str) -> Result<AxisLabel, Error> {
    s.parse()
}

fn with_pool<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send, _: &()) -> T
where
    T: Send,
{
    match workers {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool");
            pool.install(f)
        }
    }
}

/// Stable microsecond tag for artifact names.
fn us_tag(t_us: f64) -> String {
    let s = format!("{t_us:.3}");
    s.trim_end_matches('0').trim_end_matches('.').replace('.', "p")
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Error> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(shots) = a.shots {
        if shots < 2 {
            return Err(Error::config("--shots", "must be at least 2"));
        }
        cfg.protocol.shots_per_release = shots;
    }
    let seed = a.seed.unwrap_or(cfg.seed_base);
    let label = parse_axis(&a.axis)?;
    let axis = cfg.axis(label)?.clone();
    if a.t_r_us < 0.0 {
        return Err(Error::config("--t-r-us", "must be >= 0"));
    }
    let t_r = units::us_to_s(a.t_r_us);
    let schedule = cfg.schedule_for(&axis, t_r.max(1e-9))?;
    let ctx = ShotContext {
        axis: &axis.params,
        schedule: &schedule,
        noise: &axis.noise,
        protocol: &cfg.protocol,
        mass: cfg.physical.mass,
        initial: axis.initial,
        measurement_broadening: axis.broadening,
    };
    let result = with_pool(a.workers, || run_ensemble(&ctx, t_r, seed), &())?;

    let dir = out_dir(&a.out, Some(&cfg));
    let tag = format!("{}_{}us", label, us_tag(a.t_r_us));
    let shots_path = dir.join(format!("shots_{tag}.csv"));
    io::write_shots_csv(&shots_path, &result.shots)?;
    let hist_path = dir.join(format!("hist_{tag}.csv"));
    io::write_histogram_csv(&hist_path, &result.histogram)?;
    if a.out.svg {
        let panel = svg::histogram_panel(
            &result.histogram,
            result.sample_sigma,
            &format!("axis {label}, t_r = {} us", a.t_r_us),
        );
        io::atomic_write(&dir.join(format!("hist_{tag}.svg")), &panel)?;
    }
    println!(
        "axis {label}  t_r = {} us  shots = {}  (valid {})",
        a.t_r_us,
        result.shots.len(),
        result.n_valid
    );
    println!(
        "sigma (major axis) = {:.6e} m +- {:.2e} m",
        result.sample_sigma, result.sample_sigma_err
    );
    println!(
        "sigma incl. measurement broadening = {:.6e} m",
        apply_measurement_broadening(result.sample_sigma, axis.broadening)?
    );
    println!(
        "minor axis (low confidence) = {:.3e} m  rotation = {:.4} rad  gaussianity p = {:.3}",
        result.minor_sigma_low_confidence, result.rotation_angle, result.gaussianity_pvalue
    );
    println!("wrote {}", shots_path.display());
    println!("wrote {}", hist_path.display());
    Ok(())
}

fn scan_times(a: &ScanArgs) -> Result<Vec<f64>, Error> {
    if a.points < 2 {
        return Err(Error::config("--points", "must be at least 2"));
    }
    if a.t_r_min_us < 0.0 || a.t_r_max_us <= a.t_r_min_us {
        return Err(Error::config("--t-r-min-us/--t-r-max-us", "need 0 <= min < max"));
    }
    Ok((0..a.points)
        .map(|i| {
            units::us_to_s(
                a.t_r_min_us + (a.t_r_max_us - a.t_r_min_us) * i as f64 / (a.points - 1) as f64,
            )
        })
        .collect())
}

fn analytic_sigma(
    cfg: &RunConfig,
    axis: &AxisSetup,
    times: &[f64],
) -> Result<Vec<f64>, Error> {
    let m = cfg.physical.mass;
    let p = &axis.params;
    times
        .iter()
        .map(|t| {
            let var = match p.kind {
                PotentialKind::Inverted => variance_inverted(
                    *t,
                    axis.initial.var_position,
                    p.trap_frequency,
                    p.dark_frequency,
                    axis.noise.gamma1,
                    m,
                )?,
                PotentialKind::HarmonicJump => variance_jump(
                    *t,
                    axis.initial.var_position,
                    p.trap_frequency,
                    p.dark_frequency,
                    axis.noise.gamma1,
                    m,
                )?,
                PotentialKind::Free => variance_free(
                    *t,
                    axis.initial.var_position,
                    p.trap_frequency,
                    axis.noise.heating_rate,
                    m,
                )?,
            };
            Ok(var.sqrt())
        })
        .collect()
}

fn cmd_scan(a: ScanArgs) -> Result<(), Error> {
    let cfg = RunConfig::load(&a.config)?;
    let label = parse_axis(&a.axis)?;
    let axis = cfg.axis(label)?.clone();
    let times = scan_times(&a)?;
    let seed = a.seed.unwrap_or(cfg.seed_base);
    let dir = out_dir(&a.out, Some(&cfg));
    let tag = format!("{}_{}", label, a.engine);

    let (sigma, errs): (Vec<f64>, Option<Vec<f64>>) = match a.engine.as_str() {
        "analytic" => (analytic_sigma(&cfg, &axis, &times)?, None),
        "moments" => {
            let t_end = times.last().copied().unwrap_or(0.0).max(1e-9);
            let schedule = cfg.schedule_for(&axis, t_end * 1.0001)?;
            let states = propagate_recording(
                &axis.initial,
                &schedule,
                &axis.noise,
                cfg.physical.mass,
                &times,
                1.0,
            )?;
            if a.trace {
                let trace_path = dir.join(format!("trace_{tag}.csv"));
                io::atomic_write(&trace_path, &io::trace_csv(&times, &states))?;
                println!("wrote {}", trace_path.display());
            }
            (states.iter().map(|s| s.sigma()).collect(), None)
        }
        "ensemble" => {
            let t_end = times.last().copied().unwrap_or(0.0).max(1e-9);
            let schedule = cfg.schedule_for(&axis, t_end * 1.0001)?;
            let ctx = ShotContext {
                axis: &axis.params,
                schedule: &schedule,
                noise: &axis.noise,
                protocol: &cfg.protocol,
                mass: cfg.physical.mass,
                initial: axis.initial,
                measurement_broadening: axis.broadening,
            };
            let results: Result<Vec<_>, Error> = with_pool(
                a.workers,
                || times.iter().map(|t| run_ensemble(&ctx, *t, seed)).collect(),
                &(),
            );
            let results = results?;
            (
                results.iter().map(|r| r.sample_sigma).collect(),
                Some(results.iter().map(|r| r.sample_sigma_err.max(f64::MIN_POSITIVE)).collect()),
            )
        }
        other => {
            return Err(Error::config(
                "--engine",
                format!("unknown engine {other:?} (analytic|moments|ensemble)"),
            ))
        }
    };

    let path = dir.join(format!("scan_{tag}.csv"));
    io::write_curve_csv(&path, &times, &sigma, errs.as_deref())?;
    println!("wrote {}", path.display());

    let mut svg_series: Vec<(String, Vec<(f64, f64)>)> = vec![(
        format!("{} ({})", label, a.engine),
        times.iter().zip(&sigma).map(|(t, s)| (*t, *s)).collect(),
    )];

    if a.engine == "analytic" && axis.params.kind != PotentialKind::Free {
        // free-expansion comparator alongside the trapped dynamics
        let free: Vec<f64> = times
            .iter()
            .map(|t| {
                variance_free(
                    *t,
                    axis.initial.var_position,
                    axis.params.trap_frequency,
                    axis.noise.heating_rate,
                    cfg.physical.mass,
                )
                .map(f64::sqrt)
            })
            .collect::<Result<_, Error>>()?;
        let free_path = dir.join(format!("scan_{tag}_free.csv"));
        io::write_curve_csv(&free_path, &times, &free, None)?;
        println!("wrote {}", free_path.display());
        svg_series.push((
            "free expansion".to_string(),
            times.iter().zip(&free).map(|(t, s)| (*t, *s)).collect(),
        ));
    }

    if a.out.svg {
        let series: Vec<(&str, &[(f64, f64)])> =
            svg_series.iter().map(|(l, p)| (l.as_str(), p.as_slice())).collect();
        let chart = svg::line_chart(
            &series,
            "release time (s)",
            "position std dev (m)",
            &format!("expansion scan, axis {label}"),
        );
        io::atomic_write(&dir.join(format!("scan_{tag}.svg")), &chart)?;
    }
    Ok(())
}

fn cmd_fit(a: FitArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&a.data)
        .map_err(|e| Error::config(a.data.display().to_string(), format!("cannot read: {e}")))?;
    let (times, sigma, errs) = io::read_curve_csv(&text)?;

    let cfg = a.config.as_ref().map(|p| RunConfig::load(p)).transpose()?;
    let mass = match (a.mass_fg, &cfg) {
        (Some(fg), _) if fg > 0.0 => units::fg_to_kg(fg),
        (Some(_), _) => return Err(Error::config("--mass-fg", "must be > 0")),
        (None, Some(c)) => c.physical.mass,
        (None, None) => {
            return Err(Error::config(
                "--mass-fg",
                "particle mass required (flag or --config)",
            ))
        }
    };
    let model = match a.model.as_str() {
        "inverted" => FitModel::Inverted,
        "jump" => {
            let rf = match (a.rf_freq_khz, &cfg) {
                (Some(khz), _) if khz > 0.0 => units::khz_to_rad_per_s(khz),
                (Some(_), _) => return Err(Error::config("--rf-freq-khz", "must be > 0")),
                (None, Some(c)) => {
                    c.paul_trap
                        .as_ref()
                        .ok_or_else(|| {
                            Error::config(
                                "--rf-freq-khz",
                                "jump model needs an RF frequency (flag or [paul_trap] in config)",
                            )
                        })?
                        .rf_frequency
                }
                (None, None) => {
                    return Err(Error::config(
                        "--rf-freq-khz",
                        "jump model needs an RF frequency (flag or --config)",
                    ))
                }
            };
            let mathieu_a = cfg
                .as_ref()
                .and_then(|c| c.paul_trap.as_ref())
                .map(|t| t.mathieu_a)
                .unwrap_or(0.0);
            FitModel::JumpMicromotion { rf_frequency: rf, mathieu_a }
        }
        other => {
            return Err(Error::config(
                "--model",
                format!("unknown model {other:?} (inverted|jump)"),
            ))
        }
    };

    let mut settings = FitSettings::new(mass);
    settings.broadening = a.broadening_pm.map(units::pm_to_m);
    if let Some(errs) = errs {
        settings.weights = Weights::PerPoint(errs);
    }
    let init = initial_guess(&times, &sigma, &model, mass);
    let bounds = (
        FitParams {
            gamma1: 0.0,
            trap_frequency: init.trap_frequency * 1e-3,
            dark_frequency: init.dark_frequency * 1e-3,
            var0: init.var0 * 1e-6,
            phase: -std::f64::consts::PI,
        },
        FitParams {
            gamma1: init.gamma1.max(1.0) * 1e6,
            trap_frequency: init.trap_frequency * 1e3,
            dark_frequency: init.dark_frequency * 1e3,
            var0: init.var0 * 1e6,
            phase: std::f64::consts::PI,
        },
    );
    let fit = fit_expansion(&times, &sigma, model, init, bounds, &settings)?;

    // derived quantities at the latest measured time
    let imax = times
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .unwrap();
    let eta = expansion_ratio(sigma[imax], fit.params.var0.sqrt())?;
    let s_db = squeezing_db(eta)?;

    println!("fit converged in {} iterations on {} points", fit.iterations, fit.n_points);
    let p = &fit.params;
    println!(
        "  gamma1        = {:.6e} 1/s  +- {:.2e}",
        p.gamma1,
        fit.uncertainty(0)
    );
    println!(
        "  trap freq     = {:.6} kHz   +- {:.3} kHz",
        units::rad_per_s_to_khz(p.trap_frequency),
        units::rad_per_s_to_khz(fit.uncertainty(1))
    );
    println!(
        "  dark freq     = {:.6} kHz   +- {:.3} kHz",
        units::rad_per_s_to_khz(p.dark_frequency),
        units::rad_per_s_to_khz(fit.uncertainty(2))
    );
    println!("  sigma(0)      = {:.6e} m   (var0 {:.6e} m^2)", p.var0.sqrt(), p.var0);
    if matches!(fit.model, FitModel::JumpMicromotion { .. }) {
        println!("  release phase = {:.4} rad +- {:.4}", p.phase, fit.uncertainty(4));
    }
    println!("  residual rms  = {:.3e} m", fit.residual_rms);
    println!("  eta(t_max)    = {eta:.3}   squeezing = {s_db:.2} dB");
    for w in &fit.degeneracy_warnings {
        println!("  warning: {w}");
    }

    let report = serde_json::json!({
        "fit": &fit,
        "derived": { "eta_at_t_max": eta, "squeezing_db": s_db },
    });
    io::atomic_write(&a.report, &format!("{:#}\n", report))?;
    println!("wrote {}", a.report.display());
    Ok(())
}

fn cmd_coherence(a: CoherenceArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&a.fit)
        .map_err(|e| Error::config(a.fit.display().to_string(), format!("cannot read: {e}")))?;
    let parsed: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::config("fit file", format!("not valid JSON: {e}")))?;
    let fit: FitResult = serde_json::from_value(
        parsed.get("fit").cloned().unwrap_or(parsed),
    )
    .map_err(|e| Error::config("fit file", format!("not a fit result: {e}")))?;

    if a.t_max_us < 0.0 {
        return Err(Error::config("--t-max-us", "must be >= 0"));
    }
    let points = a.points.max(1);
    let t_max = units::us_to_s(a.t_max_us);
    let grid: Vec<f64> = if t_max == 0.0 || points == 1 {
        vec![0.0]
    } else {
        (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect()
    };
    let curve = coherence_curve(&fit, fit.mass, a.nbar0, &grid, a.heating_scale)?;

    let dir = out_dir(&a.out, None);
    let path = dir.join("coherence.csv");
    io::write_coherence_csv(&path, &curve.times, &curve.xi, &curve.xi_improved)?;
    println!(
        "xi(0) = {:.4e} m   xi(t_max) = {:.4e} m   ground-state threshold = {:.4e} m",
        curve.xi[0],
        curve.xi[curve.xi.len() - 1],
        curve.xi_zpm_threshold
    );
    println!("wrote {}", path.display());

    if a.out.svg {
        let base: Vec<(f64, f64)> =
            curve.times.iter().zip(&curve.xi).map(|(t, x)| (*t, *x)).collect();
        let improved: Vec<(f64, f64)> =
            curve.times.iter().zip(&curve.xi_improved).map(|(t, x)| (*t, *x)).collect();
        let thresh: Vec<(f64, f64)> = curve
            .times
            .iter()
            .map(|t| (*t, curve.xi_zpm_threshold))
            .collect();
        let chart = svg::line_chart(
            &[
                ("fitted heating", &base),
                (&format!("heating x {}", a.heating_scale), &improved),
                ("ground-state threshold", &thresh),
            ],
            "time (s)",
            "coherence length (m)",
            "coherence length",
        );
        io::atomic_write(&dir.join("coherence.svg"), &chart)?;
    }
    Ok(())
}

type Result<T, E = Error> = std::result::Result<T, E>;
