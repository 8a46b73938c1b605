//! Coefficient arrays, Gaussian simulation, and the map <-> coefficient
//! transforms on Gauss–Legendre sphere grids.
//!
//! Degrees run from `l = 1`; the monopole is not modeled. Rows store the
//! `m >= 0` coefficients only — negative orders are implied by
//! `a_{l,-m} = (-1)^m conj(a_{l,m})` and never materialized.

pub(crate) mod legendre;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub use legendre::gauss_legendre;

/// Angular power spectrum `C_l`, `l = 1..=lmax`, all strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPowerSpectrum {
    values: Vec<f64>,
}

impl AngularPowerSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("spectrum", "lmax must be at least 1"));
        }
        for (i, &c) in values.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonpositiveSpectrum {
                    l: i as u32 + 1,
                    value: c,
                });
            }
        }
        Ok(Self { values })
    }

    /// The flat spectrum `C_l = 1`. The spacings construction is exactly
    /// scale-invariant per row, so null calibrations may use this without
    /// loss of generality.
    pub fn flat(lmax: u32) -> Self {
        Self {
            values: vec![1.0; lmax as usize],
        }
    }

    pub fn lmax(&self) -> u32 {
        self.values.len() as u32
    }

    /// `C_l` for `1 <= l <= lmax`.
    pub fn value(&self, l: u32) -> f64 {
        self.values[l as usize - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Triangular array of harmonic coefficients; row `l` holds `a_{l,m}` for
/// `m = 0..=l`, with `a_{l,0}` real.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    rows: Vec<Vec<Complex64>>,
}

impl HarmonicCoefficients {
    pub fn new(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let l = i + 1;
            if row.len() != l + 1 {
                return Err(Error::invalid(
                    "coefficients",
                    format!("row l = {l} has {} entries, expected {}", row.len(), l + 1),
                ));
            }
            if row[0].im != 0.0 {
                return Err(Error::invalid(
                    "coefficients",
                    format!("a_(l=={l},m==0) must be real (im = {})", row[0].im),
                ));
            }
        }
        Ok(Self { rows })
    }

    pub fn lmax(&self) -> u32 {
        self.rows.len() as u32
    }

    /// Row `l` as the slice `[a_{l,0}, ..., a_{l,l}]`.
    pub fn row(&self, l: u32) -> &[Complex64] {
        &self.rows[l as usize - 1]
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    /// Rescale each row by a positive constant (diagnostic, used by the
    /// scale-invariance checks).
    pub fn scale_rows(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.rows.len() {
            return Err(Error::invalid("scale factors", "length must equal lmax"));
        }
        if let Some(&c) = factors.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::invalid("scale factors", format!("nonpositive {c}")));
        }
        let rows = self
            .rows
            .iter()
            .zip(factors)
            .map(|(row, &c)| row.iter().map(|a| a * c).collect())
            .collect();
        Ok(Self { rows })
    }
}

/// Gauss–Legendre colatitudes (ascending), their quadrature weights in
/// `cos(theta)`, and equispaced longitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    theta: Vec<f64>,
    theta_weights: Vec<f64>,
    phi: Vec<f64>,
}

impl SphereGrid {
    pub fn gauss_legendre(ntheta: usize, nphi: usize) -> Result<Self> {
        if ntheta == 0 || nphi == 0 {
            return Err(Error::invalid(
                "sphere grid",
                "node counts must be positive",
            ));
        }
        let (xs, ws) = legendre::gauss_legendre(ntheta);
        // x ascending => theta = acos(x) descending; store theta ascending
        let theta: Vec<f64> = xs.iter().rev().map(|x| x.acos()).collect();
        let theta_weights: Vec<f64> = ws.iter().rev().copied().collect();
        let phi = (0..nphi)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / nphi as f64)
            .collect();
        Ok(Self {
            theta,
            theta_weights,
            phi,
        })
    }

    pub fn ntheta(&self) -> usize {
        self.theta.len()
    }

    pub fn nphi(&self) -> usize {
        self.phi.len()
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }
}

/// Real field samples `T(theta_i, phi_j)` on a [`SphereGrid`], row-major in
/// `theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    grid: SphereGrid,
    samples: Vec<f64>,
}

impl FieldMap {
    pub fn new(grid: SphereGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.ntheta() * grid.nphi() {
            return Err(Error::invalid(
                "field map",
                "sample count does not match grid dimensions",
            ));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample(&self, itheta: usize, iphi: usize) -> f64 {
        self.samples[itheta * self.grid.nphi() + iphi]
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }
}

/// Draw a Gaussian coefficient array under `spectrum`.
///
/// `a_{l,0}` is real `N(0, C_l)`; for `m >= 1` the real and imaginary parts
/// are independent `N(0, C_l / 2)`, so `E |a_lm|^2 = C_l` for every stored
/// entry. The draw order (l ascending, m ascending, re before im) is part of
/// the determinism contract.
pub fn simulate_gaussian_coeffs<R: Rng + ?Sized>(
    spectrum: &AngularPowerSpectrum,
    rng: &mut R,
) -> HarmonicCoefficients {
    let lmax = spectrum.lmax();
    let mut rows = Vec::with_capacity(lmax as usize);
    for l in 1..=lmax {
        let c = spectrum.value(l);
        let sd_full = c.sqrt();
        let sd_half = (c / 2.0).sqrt();
        let mut row = Vec::with_capacity(l as usize + 1);
        let z: f64 = rng.sample(StandardNormal);
        row.push(Complex64::new(sd_full * z, 0.0));
        for _ in 1..=l {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            row.push(Complex64::new(sd_half * re, sd_half * im));
        }
        rows.push(row);
    }
    HarmonicCoefficients { rows }
}

/// Seeded wrapper around [`simulate_gaussian_coeffs`].
pub fn simulate_gaussian_coeffs_seeded(
    spectrum: &AngularPowerSpectrum,
    seed: u64,
) -> HarmonicCoefficients {
    let mut rng = crate::seed::stream(seed, "simulate", &[]);
    simulate_gaussian_coeffs(spectrum, &mut rng)
}

/// Maximum-likelihood spectrum estimate `Chat_l = mean_{m=1..l} |a_lm|^2`.
///
/// The `m = 0` entry is excluded. A row whose `m >= 1` entries are all zero
/// has no usable scale and is rejected.
pub fn estimate_spectrum(coeffs: &HarmonicCoefficients) -> Result<AngularPowerSpectrum> {
    let mut values = Vec::with_capacity(coeffs.rows.len());
    for (i, row) in coeffs.rows.iter().enumerate() {
        let l = i + 1;
        let sum: f64 = row[1..].iter().map(|a| a.norm_sqr()).sum();
        if sum == 0.0 {
            return Err(Error::DegenerateRow { l: l as u32 });
        }
        values.push(sum / l as f64);
    }
    Ok(AngularPowerSpectrum { values })
}

/// `Y_lm(theta, phi)` for `m >= 0` under the crate's normalization
/// (orthonormal on the sphere, Condon–Shortley phase).
pub fn eval_spherical_harmonic(l: u32, m: u32, theta: f64, phi: f64) -> Result<Complex64> {
    if m > l {
        return Err(Error::Domain(format!(
            "order m = {m} exceeds degree l = {l}"
        )));
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, pi]")));
    }
    let p = legendre::plm_single(l, m, theta);
    let (s, c) = (f64::from(m) * phi).sin_cos();
    Ok(Complex64::new(p * c, p * s))
}

/// Truncated spectral synthesis `T = sum_{l,m} a_lm Y_lm` over the grid,
/// folding `m < 0` through the conjugation rule so the result is real.
pub fn synthesize_map(coeffs: &HarmonicCoefficients, grid: &SphereGrid) -> FieldMap {
    let lmax = coeffs.lmax();
    let samples: Vec<f64> = grid
        .theta
        .par_iter()
        .flat_map_iter(|&theta| {
            let p = legendre::plm_table(lmax, theta);
            // A_m(theta) = sum_l a_lm plm(l, m, theta)
            let mut am = vec![Complex64::new(0.0, 0.0); lmax as usize + 1];
            for l in 1..=lmax {
                let row = coeffs.row(l);
                for m in 0..=l {
                    am[m as usize] += row[m as usize] * p[legendre::tri(l, m)];
                }
            }
            grid.phi.iter().map(move |&phi| {
                let base = Complex64::from_polar(1.0, phi);
                let mut rot = base;
                let mut t = am[0].re;
                for a in &am[1..] {
                    t += 2.0 * (a * rot).re;
                    rot *= base;
                }
                t
            })
        })
        .collect();
    FieldMap {
        grid: grid.clone(),
        samples,
    }
}

/// Recover coefficients up to `lmax` by Gauss–Legendre x uniform-longitude
/// quadrature of the inversion integral. Exact for band-limited maps when
/// `ntheta >= lmax + 1` and `nphi >= 2 lmax + 1`.
pub fn analyze_map(map: &FieldMap, lmax: u32) -> Result<HarmonicCoefficients> {
    let grid = &map.grid;
    let (ntheta, nphi) = (grid.ntheta(), grid.nphi());
    let (min_theta, min_phi) = (lmax as usize + 1, 2 * lmax as usize + 1);
    if ntheta < min_theta || nphi < min_phi {
        return Err(Error::UnderResolvedQuadrature {
            lmax,
            ntheta,
            nphi,
            min_theta,
            min_phi,
        });
    }

    // per-colatitude longitudinal moments F_m(theta_i) = sum_j T_ij e^{-im phi_j}
    let moments: Vec<Vec<Complex64>> = (0..ntheta)
        .into_par_iter()
        .map(|i| {
            let mut f = vec![Complex64::new(0.0, 0.0); lmax as usize + 1];
            for j in 0..nphi {
                let t = map.samples[i * nphi + j];
                let base = Complex64::from_polar(1.0, -grid.phi[j]);
                let mut rot = Complex64::new(1.0, 0.0);
                for fm in f.iter_mut() {
                    *fm += t * rot;
                    rot *= base;
                }
            }
            f
        })
        .collect();

    // quadrature per order: climb the column recurrence along l for every
    // colatitude, so the Legendre cost stays O(L^2 ntheta)
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
    let columns: Vec<Vec<Complex64>> = (0..=lmax)
        .into_par_iter()
        .map(|m| {
            let mut acc = vec![Complex64::new(0.0, 0.0); (lmax - m.max(1) + 1) as usize];
            let mut col = Vec::new();
            for (i, f_row) in moments.iter().enumerate() {
                legendre::plm_column(lmax, m, grid.theta[i], &mut col);
                let wf = grid.theta_weights[i] * f_row[m as usize];
                let lo = m.max(1);
                for (slot, &p) in acc.iter_mut().zip(&col[(lo - m) as usize..]) {
                    *slot += wf * p;
                }
            }
            for slot in acc.iter_mut() {
                *slot *= dphi;
            }
            acc
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (1..=lmax)
        .map(|l| {
            (0..=l)
                .map(|m| columns[m as usize][(l - m.max(1)) as usize])
                .collect()
        })
        .collect();

    // F_0 is computed with the untouched unit rotor, so a_{l,0} comes out
    // exactly real; no forcing is needed.
    HarmonicCoefficients::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spectrum_rejects_nonpositive() {
        let err = AngularPowerSpectrum::new(vec![0.0]).unwrap_err();
        assert!(err.to_string().contains("nonpositive spectrum"));
        assert!(AngularPowerSpectrum::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn simulation_is_deterministic_given_seed() {
        let sp = AngularPowerSpectrum::flat(40);
        let a = simulate_gaussian_coeffs_seeded(&sp, 7);
        let b = simulate_gaussian_coeffs_seeded(&sp, 7);
        assert_eq!(a, b);
        let c = simulate_gaussian_coeffs_seeded(&sp, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn simulated_rows_satisfy_storage_invariants() {
        let sp = AngularPowerSpectrum::flat(25);
        let a = simulate_gaussian_coeffs_seeded(&sp, 3);
        for l in 1..=25u32 {
            assert_eq!(a.row(l).len(), l as usize + 1);
            assert_eq!(a.row(l)[0].im, 0.0);
        }
    }

    #[test]
    fn estimate_spectrum_matches_hand_values() {
        // row l=1 with a_11 = 3+4i -> Chat_1 = 25
        // row l=2 with a_21 = 1, a_22 = i -> Chat_2 = 1
        let rows = vec![
            vec![Complex64::new(0.5, 0.0), Complex64::new(3.0, 4.0)],
            vec![
                Complex64::new(-1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
            ],
        ];
        let coeffs = HarmonicCoefficients::new(rows).unwrap();
        let sp = estimate_spectrum(&coeffs).unwrap();
        assert_abs_diff_eq!(sp.value(1), 25.0);
        assert_abs_diff_eq!(sp.value(2), 1.0);
    }

    #[test]
    fn estimate_spectrum_rejects_degenerate_row() {
        let rows = vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]];
        let coeffs = HarmonicCoefficients::new(rows).unwrap();
        assert!(matches!(
            estimate_spectrum(&coeffs),
            Err(Error::DegenerateRow { l: 1 })
        ));
    }

    #[test]
    fn y10_closed_form() {
        // Y_10(theta) = sqrt(3/4pi) cos(theta)
        let v = eval_spherical_harmonic(1, 0, 0.0, 0.3).unwrap();
        assert_abs_diff_eq!(v.re, 0.4886025119029199, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0);
        let eq = eval_spherical_harmonic(1, 0, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert_abs_diff_eq!(eq.re, 0.0, epsilon = 1e-16);
    }

    #[test]
    fn eval_rejects_bad_domain() {
        assert!(eval_spherical_harmonic(2, 3, 0.5, 0.0).is_err());
        assert!(eval_spherical_harmonic(2, 1, -0.1, 0.0).is_err());
    }

    #[test]
    fn synthesis_of_single_coefficient() {
        // only a_{1,0} = 1 -> T = sqrt(3/4pi) cos(theta) everywhere
        let rows = vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]];
        let coeffs = HarmonicCoefficients::new(rows).unwrap();
        let grid = SphereGrid::gauss_legendre(6, 9).unwrap();
        let map = synthesize_map(&coeffs, &grid);
        for (i, &theta) in grid.theta_nodes().iter().enumerate() {
            for j in 0..grid.nphi() {
                assert_abs_diff_eq!(
                    map.sample(i, j),
                    0.4886025119029199 * theta.cos(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn zero_coeffs_give_zero_map_and_back() {
        let rows = vec![
            vec![Complex64::new(0.0, 0.0); 2],
            vec![Complex64::new(0.0, 0.0); 3],
        ];
        let coeffs = HarmonicCoefficients::new(rows).unwrap();
        let grid = SphereGrid::gauss_legendre(4, 7).unwrap();
        let map = synthesize_map(&coeffs, &grid);
        assert!(map.samples().iter().all(|&t| t == 0.0));
        let back = analyze_map(&map, 2).unwrap();
        for l in 1..=2 {
            for a in back.row(l) {
                assert_eq!(a.re, 0.0);
                assert_eq!(a.im, 0.0);
            }
        }
    }

    #[test]
    fn analyze_rejects_coarse_grid() {
        let grid = SphereGrid::gauss_legendre(8, 40).unwrap();
        let map = FieldMap::new(grid, vec![0.0; 8 * 40]).unwrap();
        assert!(matches!(
            analyze_map(&map, 16),
            Err(Error::UnderResolvedQuadrature { .. })
        ));
    }

    #[test]
    fn roundtrip_small() {
        let sp = AngularPowerSpectrum::flat(10);
        let coeffs = simulate_gaussian_coeffs_seeded(&sp, 11);
        let grid = SphereGrid::gauss_legendre(11, 21).unwrap();
        let map = synthesize_map(&coeffs, &grid);
        let back = analyze_map(&map, 10).unwrap();
        for l in 1..=10u32 {
            for m in 0..=l as usize {
                let d = back.row(l)[m] - coeffs.row(l)[m];
                assert!(d.norm() < 1e-11, "l={l} m={m} err={}", d.norm());
            }
        }
    }
}
