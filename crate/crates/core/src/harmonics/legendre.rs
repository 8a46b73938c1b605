//! Normalized associated Legendre functions and Gauss–Legendre nodes.
//!
//! `plm` here always means the fully normalized function: the spherical
//! harmonic factorizes as `Y_lm(theta, phi) = plm(l, m, theta) * exp(i m phi)`
//! with the Condon–Shortley sign absorbed into `plm`, so that
//! `integral(plm^2 sin(theta) dtheta) = 1/(2 pi)`.

/// Flattened triangular index for `(l, m)`, `0 <= m <= l`.
#[inline]
pub fn tri(l: u32, m: u32) -> usize {
    (l as usize * (l as usize + 1)) / 2 + m as usize
}

const Y00: f64 = 0.28209479177387814; // sqrt(1 / 4 pi)

/// Table of `plm(l, m, theta)` for all `l <= lmax`, `m <= l`, indexed by [`tri`].
///
/// Sectoral seed and the two recurrences are the standard forward-stable
/// forms; no factorials are formed explicitly, so the table stays finite for
/// any band limit this crate uses.
pub fn plm_table(lmax: u32, theta: f64) -> Vec<f64> {
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let n = tri(lmax, lmax) + 1;
    let mut p = vec![0.0; n];
    p[0] = Y00;
    // sectoral band p_mm, then climb in l along each order
    for m in 1..=lmax {
        let fm = f64::from(m);
        p[tri(m, m)] = -((2.0 * fm + 1.0) / (2.0 * fm)).sqrt() * sin_t * p[tri(m - 1, m - 1)];
    }
    for m in 0..lmax {
        let fm = f64::from(m);
        p[tri(m + 1, m)] = (2.0 * fm + 3.0).sqrt() * cos_t * p[tri(m, m)];
        for l in (m + 2)..=lmax {
            let fl = f64::from(l);
            let num = 4.0 * fl * fl - 1.0;
            let den = fl * fl - fm * fm;
            let prev = 4.0 * (fl - 1.0) * (fl - 1.0) - 1.0;
            let a = (num / den).sqrt();
            let b = (((fl - 1.0) * (fl - 1.0) - fm * fm) / prev).sqrt();
            p[tri(l, m)] = a * (cos_t * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// Fill `out[l - m] = plm(l, m, theta)` for `l = m..=lmax`.
pub fn plm_column(lmax: u32, m: u32, theta: f64, out: &mut Vec<f64>) {
    out.clear();
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let mut pmm = Y00;
    for k in 1..=m {
        let fk = f64::from(k);
        pmm *= -((2.0 * fk + 1.0) / (2.0 * fk)).sqrt() * sin_t;
    }
    out.push(pmm);
    if lmax == m {
        return;
    }
    let fm = f64::from(m);
    let mut prev = pmm;
    let mut cur = (2.0 * fm + 3.0).sqrt() * cos_t * pmm;
    out.push(cur);
    for k in (m + 2)..=lmax {
        let fk = f64::from(k);
        let a = ((4.0 * fk * fk - 1.0) / (fk * fk - fm * fm)).sqrt();
        let b =
            (((fk - 1.0) * (fk - 1.0) - fm * fm) / (4.0 * (fk - 1.0) * (fk - 1.0) - 1.0)).sqrt();
        let next = a * (cos_t * cur - b * prev);
        prev = cur;
        cur = next;
        out.push(cur);
    }
}

/// Single `plm(l, m, theta)` by the same recurrences, without the full table.
pub fn plm_single(l: u32, m: u32, theta: f64) -> f64 {
    let (sin_t, cos_t) = (theta.sin(), theta.cos());
    let mut pmm = Y00;
    for k in 1..=m {
        let fk = f64::from(k);
        pmm *= -((2.0 * fk + 1.0) / (2.0 * fk)).sqrt() * sin_t;
    }
    if l == m {
        return pmm;
    }
    let fm = f64::from(m);
    let mut prev = pmm;
    let mut cur = (2.0 * fm + 3.0).sqrt() * cos_t * pmm;
    for k in (m + 2)..=l {
        let fk = f64::from(k);
        let a = ((4.0 * fk * fk - 1.0) / (fk * fk - fm * fm)).sqrt();
        let b =
            (((fk - 1.0) * (fk - 1.0) - fm * fm) / (4.0 * (fk - 1.0) * (fk - 1.0) - 1.0)).sqrt();
        let next = a * (cos_t * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gauss–Legendre nodes (ascending in `x`) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pn(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_pn(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = w;
        xs[i] = -x;
        ws[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_pn(n, 0.0);
        xs[n / 2] = 0.0;
        ws[n / 2] = 2.0 / (d * d);
    }
    (xs, ws)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_pn(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}
