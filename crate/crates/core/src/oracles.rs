//! Exact spacings laws and appendix-bound checks used as independent test
//! oracles, and the named check suite behind the `verify` command.
//!
//! Everything here is deliberately written from the closed forms, not by
//! calling the implementation paths it is meant to check.

use rand::Rng;
use rand_distr::Exp1;

use crate::empirical;
use crate::error::{Error, Result};
use crate::harmonics::legendre::gauss_legendre;
use crate::seed;

/// Marginal law of a flat-Dirichlet coordinate:
/// `P{xi_l1 <= a} = 1 - (1-a)^{l-1}`.
///
/// For `l = 1` the coordinate is identically one, so the CDF is `0` below
/// one and `1` at and above it; the formula covers that case on its own.
pub fn spacing_marginal_cdf(l: u32, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    if alpha <= 0.0 {
        return 0.0;
    }
    1.0 - (1.0 - alpha).powi(l as i32 - 1)
}

/// Joint law of two flat-Dirichlet coordinates, with the support-constrained
/// last term: `1 - (1-a1)^{l-1} - (1-a2)^{l-1} + ((1-a1-a2)+)^{l-1}`.
///
/// The printed form omits the positive-part clamp; without it the law would
/// be wrong for `a1 + a2 > 1`. The clamped version is verified against
/// [`simplex_joint_cdf_quadrature`].
pub fn spacing_joint_cdf(l: u32, alpha1: f64, alpha2: f64) -> f64 {
    assert!(l >= 2, "joint spacings law needs l >= 2");
    let e = l as i32 - 1;
    let z = |a: f64| (1.0 - a).max(0.0).powi(e);
    let a1 = alpha1.max(0.0);
    let a2 = alpha2.max(0.0);
    1.0 - z(a1) - z(a2) + (1.0 - a1 - a2).max(0.0).powi(e)
}

/// Brute-force evaluation of `P{xi_l1 <= a1, xi_l2 <= a2}` by quadrature of
/// the pair density over the simplex. Exact (to rounding) for `l <= ~30`
/// since the integrand is piecewise polynomial.
pub fn simplex_joint_cdf_quadrature(l: u32, alpha1: f64, alpha2: f64) -> f64 {
    assert!(l >= 2);
    let a1 = alpha1.clamp(0.0, 1.0);
    let a2 = alpha2.clamp(0.0, 1.0);
    if l == 2 {
        // (xi1, xi2) = (x, 1-x) with x uniform: the event is an interval
        return (a1.min(1.0) - (1.0 - a2).max(0.0)).max(0.0);
    }
    let lf = f64::from(l);
    let norm = (lf - 1.0) * (lf - 2.0);
    let e = l as i32 - 3;
    let (xs, ws) = gauss_legendre(32);
    // inner integral over x2 in [0, min(a2, 1-x1)]
    let inner = |x1: f64| {
        let hi = a2.min(1.0 - x1);
        if hi <= 0.0 {
            return 0.0;
        }
        let half = hi / 2.0;
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let x2 = half * (x + 1.0);
                w * half * (1.0 - x1 - x2).max(0.0).powi(e)
            })
            .sum::<f64>()
    };
    // split the outer range at the kink x1 = 1 - a2
    let kink = (1.0 - a2).clamp(0.0, a1);
    let mut total = 0.0;
    for (lo, hi) in [(0.0, kink), (kink, a1)] {
        if hi <= lo {
            continue;
        }
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        total += xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| w * half * inner(mid + half * x))
            .sum::<f64>();
    }
    norm * total
}

/// `q(a, b) = integral_a^b (1 + |log(1-y)|) dy` by its exact antiderivative.
///
/// On `[0, 1)` the logarithm is nonpositive, so the integrand is
/// `1 - log(1-y)` and the antiderivative of the log part is
/// `A(y) = (1-y)(1 - log(1-y))`.
pub fn q_measure(a: f64, b: f64) -> f64 {
    let prim = |y: f64| {
        if y >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - y;
        u * (1.0 - u.ln())
    };
    (b - a) + prim(a) - prim(b)
}

/// One simulated spacings row `y_{l,1..l}` from raw exponentials.
fn sample_y_row<R: Rng + ?Sized>(l: u32, rng: &mut R, buf: &mut Vec<f64>) {
    buf.clear();
    let mut total = 0.0;
    for _ in 0..l {
        let e: f64 = rng.sample(Exp1);
        buf.push(e);
        total += e;
    }
    let lf = f64::from(l);
    for v in buf.iter_mut() {
        *v = -(-lf * (*v / total)).exp_m1();
    }
}

/// Result of the marginal-density bound check (the uniform `e^2` bound).
#[derive(Debug, Clone)]
pub struct DensityCheck {
    /// Largest histogram density estimate.
    pub max_density: f64,
    /// Binomial standard error of the density estimate at that bin.
    pub sigma_at_max: f64,
    /// Total integral of the histogram estimate (1 up to dropped mass).
    pub integral: f64,
    pub bins: usize,
    pub n_samples: usize,
}

/// Histogram estimate of the marginal density of `y_lm`, for checking the
/// uniform `e^2` bound.
pub fn y_density_bound_check(l: u32, n_samples: usize, master_seed: u64) -> Result<DensityCheck> {
    if l < 2 {
        return Err(Error::Domain("density bound needs l >= 2".into()));
    }
    let bins = 512usize;
    let mut counts = vec![0u64; bins];
    let mut rng = seed::stream(master_seed, "oracle-density", &[u64::from(l)]);
    let mut row = Vec::with_capacity(l as usize);
    let rows = n_samples.div_ceil(l as usize);
    let mut n = 0usize;
    for _ in 0..rows {
        sample_y_row(l, &mut rng, &mut row);
        for &y in &row {
            let b = ((y * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
            n += 1;
        }
    }
    let w = 1.0 / bins as f64;
    let nf = n as f64;
    let mut max_density = 0.0;
    let mut sigma_at_max = 0.0;
    for &c in &counts {
        let p = c as f64 / nf;
        let d = p / w;
        if d > max_density {
            max_density = d;
            sigma_at_max = (p * (1.0 - p) / nf).sqrt() / w;
        }
    }
    let integral: f64 = counts.iter().map(|&c| c as f64 / nf).sum();
    Ok(DensityCheck {
        max_density,
        sigma_at_max,
        integral,
        bins,
        n_samples: n,
    })
}

/// Monte Carlo estimates of the scaled central indicator moments used by
/// the covariance-decay checks.
#[derive(Debug, Clone)]
pub struct DecayCheck {
    /// `l * |Cov{1(y_1 in I_0), 1(y_2 in I_1)}|`
    pub two_point: f64,
    pub two_point_se: f64,
    /// `l * |E Z_1 Z_2 Z_3|` over intervals `I_0, I_1, I_2`
    pub three_point: f64,
    pub three_point_se: f64,
    /// `l^2 * |E Z_1 Z_2 Z_3 Z_4|` over intervals `I_0..I_3`
    pub four_point: f64,
    pub four_point_se: f64,
}

/// Estimate the 2-, 3-, and 4-indicator central moments of one spacings row
/// over the supplied intervals, scaled by `l`, `l`, and `l^2`.
///
/// Indicators are centered at their exact marginal probabilities, so the
/// estimates are unbiased. `n_samples` counts replicated rows; within each
/// row the estimate averages every disjoint component tuple (exchangeability
/// makes them identically distributed), which is what keeps the `l^2`-scaled
/// four-point moment resolvable at large `l`. Standard errors come from the
/// spread of the independent per-row averages.
pub fn covariance_decay_check(
    l: u32,
    intervals: &[(f64, f64)],
    n_samples: usize,
    master_seed: u64,
) -> Result<DecayCheck> {
    if l < 4 {
        return Err(Error::Domain("decay check needs l >= 4".into()));
    }
    if intervals.len() < 2 {
        return Err(Error::Domain("need at least two intervals".into()));
    }
    let edge = 1.0 - f64::from(l).powf(-1.5);
    for &(a, b) in intervals {
        if !(0.0 <= a && a < b && b <= edge) {
            return Err(Error::Domain(format!(
                "interval ({a}, {b}) outside [0, 1 - l^-3/2]"
            )));
        }
    }
    let lf = f64::from(l);
    let iv = |k: usize| intervals[k % intervals.len()];
    // exact marginal probability of y in (a, b]
    let prob = |(a, b): (f64, f64)| {
        let to_xi = |t: f64| -(1.0 - t).ln() / lf;
        spacing_marginal_cdf(l, to_xi(b)) - spacing_marginal_cdf(l, to_xi(a))
    };
    let ps: Vec<f64> = (0..4).map(|k| prob(iv(k))).collect();

    let mut rng = seed::stream(master_seed, "oracle-decay", &[u64::from(l)]);
    let mut row = Vec::with_capacity(l as usize);
    let mut acc2 = (0.0, 0.0);
    let mut acc3 = (0.0, 0.0);
    let mut acc4 = (0.0, 0.0);
    for _ in 0..n_samples {
        sample_y_row(l, &mut rng, &mut row);
        let z = |m: usize, k: usize| {
            let (a, b) = iv(k);
            let y = row[m];
            (if y > a && y <= b { 1.0 } else { 0.0 }) - ps[k]
        };
        let push = |acc: &mut (f64, f64), total: f64, groups: usize| {
            let v = total / groups as f64;
            acc.0 += v;
            acc.1 += v * v;
        };
        let g2 = l as usize / 2;
        let mut t2 = 0.0;
        for g in 0..g2 {
            t2 += z(2 * g, 0) * z(2 * g + 1, 1);
        }
        push(&mut acc2, t2, g2);
        let g3 = l as usize / 3;
        let mut t3 = 0.0;
        for g in 0..g3 {
            t3 += z(3 * g, 0) * z(3 * g + 1, 1) * z(3 * g + 2, 2);
        }
        push(&mut acc3, t3, g3);
        let g4 = l as usize / 4;
        let mut t4 = 0.0;
        for g in 0..g4 {
            t4 += z(4 * g, 0) * z(4 * g + 1, 1) * z(4 * g + 2, 2) * z(4 * g + 3, 3);
        }
        push(&mut acc4, t4, g4);
    }
    let nf = n_samples as f64;
    let finish = |(s, s2): (f64, f64), scale: f64| {
        let mean = s / nf;
        let var = (s2 / nf - mean * mean).max(0.0);
        (scale * mean.abs(), scale * (var / nf).sqrt())
    };
    let (two_point, two_point_se) = finish(acc2, lf);
    let (three_point, three_point_se) = finish(acc3, lf);
    let (four_point, four_point_se) = finish(acc4, lf * lf);
    Ok(DecayCheck {
        two_point,
        two_point_se,
        three_point,
        three_point_se,
        four_point,
        four_point_se,
    })
}

/// Outcome of one named verification check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Run the oracle verification suite. `quick` restricts to the closed-form
/// checks (no Monte Carlo), which finish in well under ten seconds.
pub fn run_suite(quick: bool, master_seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    // --- closed-form checks ---
    {
        let ok = (spacing_marginal_cdf(3, 0.5) - 0.75).abs() < 1e-15
            && spacing_marginal_cdf(1, 0.999) == 0.0
            && spacing_marginal_cdf(1, 1.0) == 1.0
            && spacing_marginal_cdf(7, 1.0) == 1.0
            && spacing_marginal_cdf(7, 0.0) == 0.0;
        out.push(CheckResult::new(
            "marginal-spacings-closed-form",
            ok,
            "hand values of the marginal spacings CDF".into(),
        ));
    }
    {
        let mut worst: f64 = 0.0;
        for l in [2u32, 3, 5] {
            for a in [0.1, 0.4, 0.9] {
                worst =
                    worst.max((spacing_joint_cdf(l, a, 1.0) - spacing_marginal_cdf(l, a)).abs());
                for b in [0.2, 0.7] {
                    worst =
                        worst.max((spacing_joint_cdf(l, a, b) - spacing_joint_cdf(l, b, a)).abs());
                }
            }
        }
        out.push(CheckResult::new(
            "joint-spacings-marginalization",
            worst < 1e-14,
            format!("worst deviation {worst:.2e}"),
        ));
    }
    {
        let mut worst: f64 = 0.0;
        for l in 2..=6u32 {
            for a1 in [0.1, 0.3, 0.55, 0.8, 0.95] {
                for a2 in [0.15, 0.45, 0.7, 0.9] {
                    let clamped = spacing_joint_cdf(l, a1, a2);
                    let brute = simplex_joint_cdf_quadrature(l, a1, a2);
                    worst = worst.max((clamped - brute).abs());
                }
            }
        }
        out.push(CheckResult::new(
            "joint-spacings-vs-simplex-quadrature",
            worst < 1e-6,
            format!("worst |closed - quadrature| = {worst:.2e}"),
        ));
    }
    {
        // q-measure antiderivative against composite quadrature
        let (xs, ws) = gauss_legendre(64);
        let quad = |a: f64, b: f64| {
            let half = (b - a) / 2.0;
            let mid = (b + a) / 2.0;
            xs.iter()
                .zip(&ws)
                .map(|(&x, &w)| {
                    let y = mid + half * x;
                    w * half * (1.0 + (1.0 - y).ln().abs())
                })
                .sum::<f64>()
        };
        let mut worst: f64 = 0.0;
        for (a, b) in [(0.0, 0.5), (0.1, 0.2), (0.3, 0.9), (0.0, 0.99)] {
            worst = worst.max((q_measure(a, b) - quad(a, b)).abs());
        }
        out.push(CheckResult::new(
            "q-measure-antiderivative",
            worst < 1e-10,
            format!("worst |exact - quadrature| = {worst:.2e}"),
        ));
    }
    {
        // finite bias closed form == l (marginal CDF - alpha), exactly
        let mut ok = true;
        for l in [1u32, 2, 5, 40, 1000] {
            for a in [0.05f64, 0.3, 0.5, 0.8646, 0.99, 0.999999] {
                let lf = f64::from(l);
                let al = -((1.0 - a).ln() / lf);
                let via_cdf = lf * (spacing_marginal_cdf(l, al) - a);
                if empirical::bias_b_l(a, l) != via_cdf {
                    ok = false;
                }
            }
        }
        out.push(CheckResult::new(
            "finite-bias-identity-with-marginal-law",
            ok,
            "b_l equals l (P{xi <= alpha_l} - alpha) bit for bit".into(),
        ));
    }
    {
        // uniform convergence of the finite-degree bias to its limit
        let sup_gap = |l: u32| {
            let hi = 1.0 - f64::from(l).powf(-1.5);
            (0..=20_000)
                .map(|i| hi * i as f64 / 20_000.0)
                .map(|a| (empirical::bias_b_l(a, l) - empirical::bias_b(a)).abs())
                .fold(0.0f64, f64::max)
        };
        let g2 = sup_gap(100);
        let g4 = sup_gap(10_000);
        let ok = g4 < 5e-3 && g4 < g2;
        out.push(CheckResult::new(
            "finite-bias-uniform-convergence",
            ok,
            format!("sup gap {g2:.3e} at l=1e2, {g4:.3e} at l=1e4"),
        ));
    }

    if quick {
        return out;
    }

    // --- Monte Carlo checks ---
    {
        // DKW band for the empirical CDF of xi_l1 at 99%
        let mut ok = true;
        let mut detail = String::new();
        for l in [10u32, 100, 2000] {
            let n = 2000usize;
            let mut rng = seed::stream(master_seed, "oracle-dkw", &[u64::from(l)]);
            let mut row = Vec::with_capacity(l as usize);
            let mut xi1 = Vec::with_capacity(n);
            for _ in 0..n {
                // first coordinate of a fresh simplex row
                let mut total = 0.0;
                row.clear();
                for _ in 0..l {
                    let e: f64 = rng.sample(Exp1);
                    row.push(e);
                    total += e;
                }
                xi1.push(row[0] / total);
            }
            xi1.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            let band = ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt();
            let mut dist: f64 = 0.0;
            for (i, &x) in xi1.iter().enumerate() {
                let f = spacing_marginal_cdf(l, x);
                dist = dist.max((f - i as f64 / n as f64).abs());
                dist = dist.max((f - (i as f64 + 1.0) / n as f64).abs());
            }
            if dist > band {
                ok = false;
            }
            detail.push_str(&format!("l={l}: D={dist:.4} band={band:.4}; "));
        }
        out.push(CheckResult::new("marginal-spacings-dkw-99", ok, detail));
    }
    {
        // joint CDF on a 3x3 grid at l=100, 4 sigma
        let l = 100u32;
        let n = 20_000usize;
        let mut rng = seed::stream(master_seed, "oracle-joint", &[]);
        let grid = [0.005, 0.02, 0.05];
        let mut hits = [[0u32; 3]; 3];
        let mut raw = Vec::with_capacity(l as usize);
        for _ in 0..n {
            raw.clear();
            let mut total = 0.0;
            for _ in 0..l {
                let e: f64 = rng.sample(Exp1);
                raw.push(e);
                total += e;
            }
            let x1 = raw[0] / total;
            let x2 = raw[1] / total;
            for (i, &a1) in grid.iter().enumerate() {
                for (j, &a2) in grid.iter().enumerate() {
                    if x1 <= a1 && x2 <= a2 {
                        hits[i][j] += 1;
                    }
                }
            }
        }
        let mut ok = true;
        let mut worst = 0.0f64;
        for (i, &a1) in grid.iter().enumerate() {
            for (j, &a2) in grid.iter().enumerate() {
                let p = spacing_joint_cdf(l, a1, a2);
                let phat = f64::from(hits[i][j]) / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-12);
                let dev = (phat - p).abs() / se;
                worst = worst.max(dev);
                if dev > 4.0 {
                    ok = false;
                }
            }
        }
        out.push(CheckResult::new(
            "joint-spacings-mc-4sigma",
            ok,
            format!("worst deviation {worst:.2} sigma (l=100, 3x3 grid)"),
        ));
    }
    {
        // density bound: max density <= 1.05 e^2 + 3 sigma, and normalization
        let mut ok = true;
        let mut detail = String::new();
        for l in [2u32, 1000] {
            let check = y_density_bound_check(l, 1_000_000, master_seed).unwrap();
            let cap = 1.05 * (std::f64::consts::E * std::f64::consts::E) + 3.0 * check.sigma_at_max;
            if check.max_density > cap || (check.integral - 1.0).abs() > 0.01 {
                ok = false;
            }
            detail.push_str(&format!(
                "l={l}: max {:.3} cap {:.3} integral {:.4}; ",
                check.max_density, cap, check.integral
            ));
        }
        out.push(CheckResult::new("spacings-density-e2-bound", ok, detail));
    }
    {
        // scaled central moments stay bounded across l (no growth trend)
        let intervals = [(0.05, 0.25), (0.40, 0.60), (0.65, 0.80), (0.85, 0.95)];
        let mut vals2 = Vec::new();
        let mut vals3 = Vec::new();
        let mut vals4 = Vec::new();
        let mut detail = String::new();
        for l in [50u32, 200, 1000] {
            let c = covariance_decay_check(l, &intervals, 60_000, master_seed).unwrap();
            detail.push_str(&format!(
                "l={l}: 2pt {:.3}+-{:.3} 3pt {:.3}+-{:.3} 4pt {:.3}+-{:.3}; ",
                c.two_point,
                c.two_point_se,
                c.three_point,
                c.three_point_se,
                c.four_point,
                c.four_point_se
            ));
            vals2.push((c.two_point, c.two_point_se));
            vals3.push((c.three_point, c.three_point_se));
            vals4.push((c.four_point, c.four_point_se));
        }
        // no growth beyond MC noise: largest l within (smallest value + noise) * 10
        let bounded = |vs: &[(f64, f64)]| {
            let (v0, s0) = vs[0];
            let (vn, sn) = vs[vs.len() - 1];
            vn <= 10.0 * (v0 + 4.0 * s0) + 4.0 * sn
        };
        let ok = bounded(&vals2) && bounded(&vals3) && bounded(&vals4);
        out.push(CheckResult::new("indicator-moment-decay", ok, detail));
    }
    {
        // p-values of null data against a null calibration are uniform
        let lmax = 40u32;
        let n_cal = 300usize;
        let n_test = 300usize;
        let cal = crate::testing::calibrate_null(
            lmax,
            n_cal,
            &[0.1],
            seed::substream_seed(master_seed, "oracle-pcal", &[]),
        )
        .expect("calibration");
        let spectrum = crate::harmonics::AngularPowerSpectrum::flat(lmax);
        let mut ps: Vec<f64> = (0..n_test)
            .map(|i| {
                let mut rng = seed::stream(master_seed, "oracle-pval", &[i as u64]);
                let coeffs = crate::harmonics::simulate_gaussian_coeffs(&spectrum, &mut rng);
                cal.p_value(crate::testing::ks_statistic(&coeffs).expect("nondegenerate"))
            })
            .collect();
        ps.sort_unstable_by(f64::total_cmp);
        let nf = n_test as f64;
        let mut dist = 0.0f64;
        for (i, &p) in ps.iter().enumerate() {
            dist = dist.max((p - i as f64 / nf).abs());
            dist = dist.max((p - (i as f64 + 1.0) / nf).abs());
        }
        // 1% Kolmogorov band plus the lattice width of the discrete p-values
        let band = 1.6276 / nf.sqrt() + 1.0 / (n_cal as f64 + 1.0);
        out.push(CheckResult::new(
            "p-value-uniformity",
            dist <= band,
            format!("KS distance {dist:.4} <= {band:.4} over {n_test} null tests"),
        ));
    }
    {
        // an indicator paired with itself degenerates to a variance:
        // positive and at most the interval probability
        let l = 200u32;
        let (a, b) = (0.2, 0.5);
        let lf = f64::from(l);
        let to_xi = |t: f64| -(1.0 - t).ln() / lf;
        let p = spacing_marginal_cdf(l, to_xi(b)) - spacing_marginal_cdf(l, to_xi(a));
        let mut rng = seed::stream(master_seed, "oracle-var", &[]);
        let mut row = Vec::with_capacity(l as usize);
        let n = 20_000usize;
        let mut hits = 0usize;
        for _ in 0..n {
            sample_y_row(l, &mut rng, &mut row);
            if row[0] > a && row[0] <= b {
                hits += 1;
            }
        }
        let phat = hits as f64 / n as f64;
        let var = phat * (1.0 - phat);
        let ok = var > 0.0 && var <= p;
        out.push(CheckResult::new(
            "variance-degenerate-interval",
            ok,
            format!("var {var:.4} vs p {p:.4}"),
        ));
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn marginal_cdf_values() {
        assert_abs_diff_eq!(spacing_marginal_cdf(3, 0.5), 0.75);
        assert_eq!(spacing_marginal_cdf(1, 0.5), 0.0);
        assert_eq!(spacing_marginal_cdf(1, 1.0), 1.0);
        assert_eq!(spacing_marginal_cdf(9, 1.0), 1.0);
        assert_eq!(spacing_marginal_cdf(9, 0.0), 0.0);
    }

    #[test]
    fn joint_cdf_values() {
        // l = 2, a1 = a2 = 0.5: no mass strictly inside
        assert_eq!(spacing_joint_cdf(2, 0.5, 0.5), 0.0);
        // reduces to the marginal at a2 = 1
        for l in [2u32, 4, 9] {
            for a in [0.1, 0.6, 0.95] {
                assert_abs_diff_eq!(
                    spacing_joint_cdf(l, a, 1.0),
                    spacing_marginal_cdf(l, a),
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn joint_cdf_matches_simplex_quadrature() {
        for l in 2..=6u32 {
            for a1 in [0.2, 0.5, 0.85] {
                for a2 in [0.1, 0.6, 0.9] {
                    assert_abs_diff_eq!(
                        spacing_joint_cdf(l, a1, a2),
                        simplex_joint_cdf_quadrature(l, a1, a2),
                        epsilon = 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn q_measure_endpoints() {
        assert_abs_diff_eq!(q_measure(0.0, 1.0), 2.0, epsilon = 1e-12);
        assert_eq!(q_measure(0.3, 0.3), 0.0);
    }

    #[test]
    fn quick_suite_is_green() {
        let results = run_suite(true, 99);
        for r in &results {
            assert!(r.passed, "{} failed: {}", r.name, r.detail);
        }
    }
}
