//! Small statistics toolbox for ensemble post-processing: sample moments,
//! Freedman-Diaconis histograms, bootstrap errors, a D'Agostino K² normality
//! test and the principal-axis angle of a 2D point cloud.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// 2D histogram with explicit bin edges; `counts[ix][iy]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2d {
    pub x_edges: Vec<f64>,
    pub y_edges: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
}

impl Histogram2d {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Unbiased sample standard deviation.
pub fn std_dev(data: &[f64]) -> f64 {
    if data.len() < 2 {
        return 0.0;
    }
    let m = mean(data);
    (data.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (data.len() - 1) as f64).sqrt()
}

/// Sample covariance matrix of paired data, [[var_x, cov], [cov, var_y]].
pub fn sample_cov2(xs: &[f64], ys: &[f64]) -> [[f64; 2]; 2] {
    let n = xs.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut vx, mut vy, mut c) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
        c += (x - mx) * (y - my);
    }
    let d = (n - 1.0).max(1.0);
    [[vx / d, c / d], [c / d, vy / d]]
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = p * (sorted.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    let frac = idx - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Freedman-Diaconis bin edges: width 2·IQR·n^(−1/3), clamped to [1, 256] bins.
pub fn freedman_diaconis_edges(data: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = data.iter().copied().filter(|x| x.is_finite()).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if sorted.is_empty() {
        return vec![0.0, 1.0];
    }
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if hi <= lo {
        return vec![lo - 0.5, lo + 0.5];
    }
    let iqr = percentile(&sorted, 0.75) - percentile(&sorted, 0.25);
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    let nbins = if width > 0.0 { (((hi - lo) / width).ceil() as usize).clamp(1, 256) } else { 1 };
    let step = (hi - lo) / nbins as f64;
    // nudge the top edge so the maximum lands inside the last bin
    (0..=nbins)
        .map(|i| if i == nbins { hi + step * 1e-9 } else { lo + i as f64 * step })
        .collect()
}

pub fn histogram2d(xs: &[f64], ys: &[f64]) -> Histogram2d {
    let x_edges = freedman_diaconis_edges(xs);
    let y_edges = freedman_diaconis_edges(ys);
    let (nx, ny) = (x_edges.len() - 1, y_edges.len() - 1);
    let mut counts = vec![vec![0u64; ny]; nx];
    let find = |edges: &[f64], v: f64| -> Option<usize> {
        if v < edges[0] || v >= edges[edges.len() - 1] {
            return None;
        }
        // uniform edges
        let w = (edges[edges.len() - 1] - edges[0]) / (edges.len() - 1) as f64;
        Some((((v - edges[0]) / w) as usize).min(edges.len() - 2))
    };
    for (x, y) in xs.iter().zip(ys) {
        if let (Some(ix), Some(iy)) = (find(&x_edges, *x), find(&y_edges, *y)) {
            counts[ix][iy] += 1;
        }
    }
    Histogram2d { x_edges, y_edges, counts }
}

/// D'Agostino K² omnibus normality test (combined skewness and kurtosis
/// z-statistics). Returns (K², p) with p from the χ²(2) survival function
/// exp(−K²/2), or `None` for samples too small to transform (n < 8).
pub fn dagostino_k2(data: &[f64]) -> Option<(f64, f64)> {
    let n = data.len();
    if n < 8 {
        return None;
    }
    let nf = n as f64;
    let m = mean(data);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in data {
        let d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return None;
    }
    let g1 = m3 / m2.powf(1.5);
    let b2 = m4 / (m2 * m2);

    // skewness z-transform
    let y = g1 * (((nf + 1.0) * (nf + 3.0)) / (6.0 * (nf - 2.0))).sqrt();
    let beta2 = 3.0 * (nf * nf + 27.0 * nf - 70.0) * (nf + 1.0) * (nf + 3.0)
        / ((nf - 2.0) * (nf + 5.0) * (nf + 7.0) * (nf + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let ya = if y == 0.0 { 1.0 } else { y / alpha };
    let z1 = delta * (ya + (ya * ya + 1.0).sqrt()).ln();

    // kurtosis z-transform
    let eb2 = 3.0 * (nf - 1.0) / (nf + 1.0);
    let vb2 = 24.0 * nf * (nf - 2.0) * (nf - 3.0) / ((nf + 1.0).powi(2) * (nf + 3.0) * (nf + 5.0));
    let x = (b2 - eb2) / vb2.sqrt();
    let sqrt_beta1 = 6.0 * (nf * nf - 5.0 * nf + 2.0) / ((nf + 7.0) * (nf + 9.0))
        * ((6.0 * (nf + 3.0) * (nf + 5.0)) / (nf * (nf - 2.0) * (nf - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    if denom == 0.0 {
        return None;
    }
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    let z2 = (term1 - term2) / (2.0 / (9.0 * a)).sqrt();

    let k2 = z1 * z1 + z2 * z2;
    Some((k2, (-k2 / 2.0).exp()))
}

/// Principal-axis angle of a 2D cloud: 0.5·atan2(2 cov, var_x − var_y),
/// oriented so the returned angle points along the major axis.
pub fn principal_angle(xs: &[f64], ys: &[f64]) -> f64 {
    let c = sample_cov2(xs, ys);
    let mut theta = 0.5 * (2.0 * c[0][1]).atan2(c[0][0] - c[1][1]);
    // variance along theta must be the larger one
    let along = |th: f64| {
        let (cs, sn) = (th.cos(), th.sin());
        cs * cs * c[0][0] + 2.0 * cs * sn * c[0][1] + sn * sn * c[1][1]
    };
    if along(theta) < along(theta + std::f64::consts::FRAC_PI_2) {
        theta += std::f64::consts::FRAC_PI_2;
    }
    theta
}

/// Bootstrap standard error of the sample standard deviation.
pub fn bootstrap_sigma_err(data: &[f64], resamples: usize, rng: &mut impl Rng) -> f64 {
    if data.len() < 2 {
        return 0.0;
    }
    let mut stds = Vec::with_capacity(resamples);
    let mut resample = vec![0.0; data.len()];
    for _ in 0..resamples {
        for slot in resample.iter_mut() {
            *slot = data[rng.gen_range(0..data.len())];
        }
        stds.push(std_dev(&resample));
    }
    std_dev(&stds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn dagostino_matches_reference_small_vector() {
        // frozen against an independent reference implementation
        let small = [
            0.1, -0.4, 1.2, 0.33, -0.92, 2.1, -1.5, 0.77, 0.05, -0.6, 1.9, -2.2, 0.44, 0.12,
            -0.05, 0.6, -1.1, 0.9, 1.4, -0.3, 0.21, -0.88, 0.55, -1.7, 0.02,
        ];
        let (k2, p) = dagostino_k2(&small).unwrap();
        assert_relative_eq!(k2, 0.08369546088319882, max_relative = 1e-9);
        assert_relative_eq!(p, 0.9590157983672865, max_relative = 1e-9);
    }

    #[test]
    fn dagostino_matches_reference_generated_sample() {
        // reproduce the reference sample: 64-bit LCG + Box-Muller
        let mut x: u64 = 12345;
        let mut u = Vec::with_capacity(200);
        for _ in 0..200 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            u.push(x as f64 / 2f64.powi(64));
        }
        let mut vals = Vec::with_capacity(200);
        for i in (0..200).step_by(2) {
            let r = (-2.0 * (u[i] + 1e-300).ln()).sqrt();
            vals.push(r * (2.0 * std::f64::consts::PI * u[i + 1]).cos());
            vals.push(r * (2.0 * std::f64::consts::PI * u[i + 1]).sin());
        }
        let (k2, p) = dagostino_k2(&vals).unwrap();
        assert_relative_eq!(k2, 0.9337401408610171, max_relative = 1e-6);
        assert_relative_eq!(p, 0.6269615459642748, max_relative = 1e-6);
        // squares of normals are wildly non-normal
        let squares: Vec<f64> = vals.iter().map(|v| v * v).collect();
        let (k2b, pb) = dagostino_k2(&squares).unwrap();
        assert_relative_eq!(k2b, 169.40323766720454, max_relative = 1e-6);
        assert!(pb < 1e-30);
    }

    #[test]
    fn dagostino_declines_tiny_samples() {
        assert!(dagostino_k2(&[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn histogram_counts_every_point() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = (0..500).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let h = histogram2d(&xs, &ys);
        assert_eq!(h.total(), 500);
        assert!(h.x_edges.len() >= 2 && h.y_edges.len() >= 2);
    }

    #[test]
    fn histogram_degenerate_data() {
        let xs = vec![1.0; 10];
        let h = histogram2d(&xs, &xs);
        assert_eq!(h.total(), 10);
    }

    #[test]
    fn principal_angle_recovers_rotation() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let theta: f64 = 0.6;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for _ in 0..4000 {
            let a: f64 = rng.gen_range(-3.0..3.0); // major, var ~ 3
            let b: f64 = rng.gen_range(-0.3..0.3); // minor
            xs.push(a * theta.cos() - b * theta.sin());
            ys.push(a * theta.sin() + b * theta.cos());
        }
        let got = principal_angle(&xs, &ys);
        assert!((got - theta).abs() < 0.02, "angle {got} vs {theta}");
    }

    #[test]
    fn bootstrap_error_scales_with_sample_size() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let big: Vec<f64> = (0..4000).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let small: Vec<f64> = big[..100].to_vec();
        let mut r1 = ChaCha12Rng::seed_from_u64(1);
        let mut r2 = ChaCha12Rng::seed_from_u64(1);
        let e_big = bootstrap_sigma_err(&big, 400, &mut r1);
        let e_small = bootstrap_sigma_err(&small, 400, &mut r2);
        assert!(e_big < e_small);
        assert!(e_big > 0.0);
    }
}
