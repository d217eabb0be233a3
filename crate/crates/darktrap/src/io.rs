//! CSV readers and writers for the wire formats, plus atomic file output.
//!
//! Schemas:
//! - curves: `t_s,sigma_m[,sigma_err_m]`
//! - shots: `axis,t_r_s,z_m,p_kgms,seed,valid`
//! - histograms: `z_lo,z_hi,p_lo,p_hi,count`
//! - coherence: `t_s,xi_m,xi_improved_m`
//! - moment traces: `t_s,var_pos_m2,covar,var_mom`
//!
//! Floats are written with 17 significant digits so every CSV round-trips
//! losslessly; writing is to a temporary file followed by an atomic rename,
//! so an interrupted run never leaves a truncated artifact behind.

use std::path::Path;

use crate::ensemble::Shot;
use crate::error::{Error, Result};
use crate::state::AxisLabel;
use crate::stats::Histogram2d;

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// Writes `content` to `path` via a sibling temp file and atomic rename.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn curve_csv(times: &[f64], sigma: &[f64], errs: Option<&[f64]>) -> String {
    let mut out = String::new();
    match errs {
        None => {
            out.push_str("t_s,sigma_m\n");
            for (t, s) in times.iter().zip(sigma) {
                out.push_str(&format!("{},{}\n", fmt(*t), fmt(*s)));
            }
        }
        Some(errs) => {
            out.push_str("t_s,sigma_m,sigma_err_m\n");
            for ((t, s), e) in times.iter().zip(sigma).zip(errs) {
                out.push_str(&format!("{},{},{}\n", fmt(*t), fmt(*s), fmt(*e)));
            }
        }
    }
    out
}

pub fn write_curve_csv(
    path: &Path,
    times: &[f64],
    sigma: &[f64],
    errs: Option<&[f64]>,
) -> Result<()> {
    atomic_write(path, &curve_csv(times, sigma, errs))
}

/// Parses a curve CSV. Duplicate or unordered times are allowed (repeated
/// measurements); values must be finite, times non-negative.
pub fn read_curve_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty curve CSV".into()))?;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let with_err = match cols.as_slice() {
        ["t_s", "sigma_m"] => false,
        ["t_s", "sigma_m", "sigma_err_m"] => true,
        _ => {
            return Err(Error::Parse(format!(
                "unexpected curve header {header:?} (want t_s,sigma_m[,sigma_err_m])"
            )))
        }
    };
    let mut times = Vec::new();
    let mut sigma = Vec::new();
    let mut errs = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.trim().split(',').collect();
        let want = if with_err { 3 } else { 2 };
        if fields.len() != want {
            return Err(Error::Parse(format!(
                "line {}: expected {want} fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: bad {what} {s:?}: {e}", i + 2)))
        };
        let t = parse(fields[0], "time")?;
        let s = parse(fields[1], "sigma")?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parse(format!("line {}: time must be finite >= 0", i + 2)));
        }
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Parse(format!("line {}: sigma must be finite >= 0", i + 2)));
        }
        times.push(t);
        sigma.push(s);
        if with_err {
            let e = parse(fields[2], "sigma error")?;
            if !e.is_finite() || e <= 0.0 {
                return Err(Error::Parse(format!("line {}: sigma error must be > 0", i + 2)));
            }
            errs.push(e);
        }
    }
    if times.is_empty() {
        return Err(Error::Parse("curve CSV has a header but no data rows".into()));
    }
    Ok((times, sigma, with_err.then_some(errs)))
}

pub fn shots_csv(shots: &[Shot]) -> String {
    let mut out = String::from("axis,t_r_s,z_m,p_kgms,seed,valid\n");
    for s in shots {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.axis,
            fmt(s.release_time),
            fmt(s.reconstructed_position),
            fmt(s.reconstructed_momentum),
            s.seed,
            s.valid
        ));
    }
    out
}

pub fn write_shots_csv(path: &Path, shots: &[Shot]) -> Result<()> {
    atomic_write(path, &shots_csv(shots))
}

pub fn read_shots_csv(text: &str) -> Result<Vec<Shot>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty shots CSV".into()))?;
    if header.trim() != "axis,t_r_s,z_m,p_kgms,seed,valid" {
        return Err(Error::Parse(format!("unexpected shots header {header:?}")));
    }
    let mut shots = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(Error::Parse(format!("line {}: expected 6 fields", i + 2)));
        }
        let axis: AxisLabel = f[0].parse()?;
        let err = |what: &str| Error::Parse(format!("line {}: bad {what}", i + 2));
        shots.push(Shot {
            axis,
            release_time: f[1].parse().map_err(|_| err("t_r"))?,
            reconstructed_position: f[2].parse().map_err(|_| err("z"))?,
            reconstructed_momentum: f[3].parse().map_err(|_| err("p"))?,
            seed: f[4].parse().map_err(|_| err("seed"))?,
            valid: f[5].parse().map_err(|_| err("valid flag"))?,
        });
    }
    Ok(shots)
}

pub fn histogram_csv(h: &Histogram2d) -> String {
    let mut out = String::from("z_lo,z_hi,p_lo,p_hi,count\n");
    for (ix, col) in h.counts.iter().enumerate() {
        for (iy, c) in col.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt(h.x_edges[ix]),
                fmt(h.x_edges[ix + 1]),
                fmt(h.y_edges[iy]),
                fmt(h.y_edges[iy + 1]),
                c
            ));
        }
    }
    out
}

pub fn write_histogram_csv(path: &Path, h: &Histogram2d) -> Result<()> {
    atomic_write(path, &histogram_csv(h))
}

pub fn coherence_csv(times: &[f64], xi: &[f64], xi_improved: &[f64]) -> String {
    let mut out = String::from("t_s,xi_m,xi_improved_m\n");
    for ((t, a), b) in times.iter().zip(xi).zip(xi_improved) {
        out.push_str(&format!("{},{},{}\n", fmt(*t), fmt(*a), fmt(*b)));
    }
    out
}

pub fn write_coherence_csv(path: &Path, times: &[f64], xi: &[f64], xi_improved: &[f64]) -> Result<()> {
    atomic_write(path, &coherence_csv(times, xi, xi_improved))
}

pub fn trace_csv(times: &[f64], states: &[crate::state::GaussianState]) -> String {
    let mut out = String::from("t_s,var_pos_m2,covar,var_mom\n");
    for (t, s) in times.iter().zip(states) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(*t),
            fmt(s.var_position),
            fmt(s.covariance),
            fmt(s.var_momentum)
        ));
    }
    out
}
