//! Shared test oracles, independent of the implementation paths they check.
#![allow(dead_code)] // each test binary uses its own subset

use sphgof::empirical::bias_b;
use sphgof::oracles::{spacing_joint_cdf, spacing_marginal_cdf};

/// Exact `Cov(Ghat_l(a1), Ghat_l(a2))` assembled from the marginal and joint
/// spacings laws: one same-index term plus `l - 1` cross terms.
pub fn exact_row_cov(l: u32, alpha1: f64, alpha2: f64) -> f64 {
    if l == 1 {
        // the single spacing is identically one: a deterministic row
        return 0.0;
    }
    let lf = f64::from(l);
    let to_xi = |a: f64| -(1.0 - a).ln() / lf;
    let (a1, a2) = (to_xi(alpha1), to_xi(alpha2));
    let p1 = spacing_marginal_cdf(l, a1);
    let p2 = spacing_marginal_cdf(l, a2);
    let pmin = spacing_marginal_cdf(l, a1.min(a2));
    let pj = spacing_joint_cdf(l, a1, a2);
    (pmin - p1 * p2) + (lf - 1.0) * (pj - p1 * p2)
}

/// Exact `Cov(Khat_L(a1, r1), Khat_L(a2, r2))`: rows are independent, so the
/// covariance is the average of per-row covariances up to `floor(L min r)`.
pub fn exact_integrated_cov(lmax: u32, a1: f64, r1: f64, a2: f64, r2: f64) -> f64 {
    let lf = f64::from(lmax);
    let cut = (lf * r1.min(r2)).floor() as u32;
    (1..=cut).map(|l| exact_row_cov(l, a1, a2)).sum::<f64>() / lf
}

/// Exact `E Khat_L(alpha, 1) = sum_l b_l(alpha) / sqrt(l L)`.
pub fn exact_integrated_mean(lmax: u32, alpha: f64) -> f64 {
    let lf = f64::from(lmax);
    (1..=lmax)
        .map(|l| sphgof::empirical::bias_b_l(alpha, l) / (f64::from(l) * lf).sqrt())
        .sum()
}

/// Brute-force sup of the corrected process: every partial sum evaluated at
/// a uniform grid plus all jump positions, both one-sided counts, both
/// r-step endpoints. Recomputes all counts per candidate.
pub fn brute_force_sup(rows: &[Vec<f64>], grid_points: usize) -> f64 {
    let lmax = rows.len();
    let lf = lmax as f64;
    let mut sorted: Vec<Vec<f64>> = rows.to_vec();
    for r in &mut sorted {
        r.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let mut candidates: Vec<f64> = (0..=grid_points)
        .map(|g| g as f64 / grid_points as f64)
        .collect();
    candidates.extend(rows.iter().flatten().copied());
    candidates.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    let mut sup = 0.0f64;
    for &alpha in &candidates {
        let mut acc_le = 0.0;
        let mut acc_lt = 0.0;
        for (i, row) in sorted.iter().enumerate() {
            let l = (i + 1) as f64;
            let le = row.partition_point(|&v| v <= alpha) as f64;
            let lt = row.partition_point(|&v| v < alpha) as f64;
            acc_le += (le - l * alpha) / (l * lf).sqrt();
            acc_lt += (lt - l * alpha) / (l * lf).sqrt();
            let k = (i + 1) as f64;
            for c in [2.0 * (k / lf).sqrt(), 2.0 * ((k + 1.0).min(lf) / lf).sqrt()] {
                let bias = c * bias_b(alpha);
                sup = sup.max((acc_le - bias).abs()).max((acc_lt - bias).abs());
            }
        }
    }
    sup
}
