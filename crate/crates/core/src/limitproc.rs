//! Sampling the limiting Gaussian field from its covariance, and estimating
//! quantiles of its sup-functional.
//!
//! The grid covariance factorizes as `min(r_1, r_2) * g(alpha_1, alpha_2)`,
//! a tensor product of the Brownian `min` kernel in `r` and the
//! spacings-limit kernel in `alpha`. The sampler therefore factors the two
//! axis matrices separately; the Kronecker product of their lower-triangular
//! Cholesky factors is itself a lower-triangular square root of the full
//! grid covariance (in `r`-major index order), and one field draw is just
//! `L_r Z L_alpha^T` with `Z` standard normal. This keeps the 2x-refined
//! calibration grids tractable where a dense factorization of the full
//! `(n_alpha n_r)^2` covariance would not be.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::calibration::{CalibrationKind, CalibrationTable};
use crate::empirical::{limit_covariance, ProcessField, ProcessGrid};
use crate::error::{Error, Result};
use crate::seed;

/// Jitter escalation used when the alpha-axis factorization fails outright.
const JITTER_FLOOR: f64 = 1e-12;
const JITTER_CAP: f64 = 1e-6;

/// Factorized sampler for the limiting field on a fixed grid.
#[derive(Debug, Clone)]
pub struct GaussianFieldSampler {
    grid: ProcessGrid,
    /// Lower-triangular factor of `g(alpha_i, alpha_j)` (+ jitter ridge).
    alpha_factor: DMatrix<f64>,
    /// Lower-triangular factor of `min(r_i, r_j)`.
    r_factor: DMatrix<f64>,
    jitter: f64,
}

/// Build a sampler for `grid`; `jitter` is the starting ridge (0 tries the
/// exact factorization first), escalated tenfold up to `1e-6` on failure.
pub fn build_sampler(grid: &ProcessGrid, jitter: f64) -> Result<GaussianFieldSampler> {
    let alphas = grid.alphas();
    if alphas[0] <= 0.0 || *alphas.last().unwrap() >= 1.0 {
        return Err(Error::Domain(
            "limit sampler grid must have alpha strictly inside (0, 1): \
             covariance rows vanish at the boundary"
                .into(),
        ));
    }
    let na = alphas.len();
    let base = DMatrix::from_fn(na, na, |i, j| {
        limit_covariance(alphas[i], 1.0, alphas[j], 1.0)
    });
    let mut ridge = jitter.max(0.0);
    let (alpha_factor, used) = loop {
        let mut a = base.clone();
        for i in 0..na {
            a[(i, i)] += ridge;
        }
        if let Some(chol) = a.cholesky() {
            break (chol.unpack(), ridge);
        }
        ridge = if ridge == 0.0 {
            JITTER_FLOOR
        } else {
            ridge * 10.0
        };
        if ridge > JITTER_CAP {
            return Err(Error::CovarianceNotPsd { cap: JITTER_CAP });
        }
    };
    let rs = grid.rs();
    let nr = rs.len();
    let rmat = DMatrix::from_fn(nr, nr, |i, j| rs[i].min(rs[j]));
    let r_factor = rmat
        .cholesky()
        .ok_or(Error::CovarianceNotPsd { cap: JITTER_CAP })?
        .unpack();
    Ok(GaussianFieldSampler {
        grid: grid.clone(),
        alpha_factor,
        r_factor,
        jitter: used,
    })
}

impl GaussianFieldSampler {
    pub fn grid(&self) -> &ProcessGrid {
        &self.grid
    }

    /// Ridge actually added to the alpha-axis diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// One mean-zero draw with the target covariance.
    pub fn sample_field<R: Rng + ?Sized>(&self, rng: &mut R) -> ProcessField {
        let na = self.grid.alphas().len();
        let nr = self.grid.rs().len();
        let z = DMatrix::from_fn(nr, na, |_, _| rng.sample::<f64, _>(StandardNormal));
        let field = &self.r_factor * z * self.alpha_factor.transpose();
        let mut values = Vec::with_capacity(na * nr);
        for ir in 0..nr {
            for ia in 0..na {
                values.push(field[(ir, ia)]);
            }
        }
        ProcessField::new(self.grid.clone(), values).expect("shape by construction")
    }

    /// Seeded draw; `index` separates replications.
    pub fn sample_field_seeded(&self, master_seed: u64, index: u64) -> ProcessField {
        let mut rng = seed::stream(master_seed, "limit-sample", &[index]);
        self.sample_field(&mut rng)
    }

    /// Materialize the full lower-triangular factor of the grid covariance
    /// (`r`-major ordering). Intended for verification on small grids.
    pub fn dense_factor(&self) -> DMatrix<f64> {
        let na = self.grid.alphas().len();
        let nr = self.grid.rs().len();
        let n = na * nr;
        DMatrix::from_fn(n, n, |row, col| {
            let (ir, ia) = (row / na, row % na);
            let (jr, ja) = (col / na, col % na);
            self.r_factor[(ir, jr)] * self.alpha_factor[(ia, ja)]
        })
    }
}

/// The default calibration grid: 128 interior alphas by 64 r-steps.
pub fn default_limit_grid() -> ProcessGrid {
    ProcessGrid::regular(128, 64).expect("static grid is valid")
}

/// Empirical upper quantiles of `sup |field|` over `n_reps` seeded draws.
pub fn limit_quantiles(
    grid: &ProcessGrid,
    n_reps: usize,
    levels: &[f64],
    master_seed: u64,
) -> Result<CalibrationTable> {
    if n_reps == 0 {
        return Err(Error::invalid("n_reps", "must be at least 1"));
    }
    let sampler = build_sampler(grid, 0.0)?;
    let mut sups: Vec<f64> = (0..n_reps)
        .into_par_iter()
        .map(|i| sampler.sample_field_seeded(master_seed, i as u64).sup_abs())
        .collect();
    sups.sort_unstable_by(f64::total_cmp);
    CalibrationTable::from_sorted_samples(
        CalibrationKind::Limit {
            n_alpha: grid.alphas().len(),
            n_r: grid.rs().len(),
        },
        levels.to_vec(),
        sups,
        n_reps,
        master_seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scalar_grid_factor_is_plain_square_root() {
        let grid = ProcessGrid::new(vec![0.5], vec![1.0]).unwrap();
        let s = build_sampler(&grid, 0.0).unwrap();
        let f = s.dense_factor();
        assert_abs_diff_eq!(f[(0, 0)], 0.12988674652044965f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(f[(0, 0)], 0.360398, epsilon = 1e-6);
    }

    #[test]
    fn dense_factor_reconstructs_covariance() {
        let grid = ProcessGrid::new(vec![0.2, 0.5, 0.8], vec![0.25, 0.7, 1.0]).unwrap();
        let s = build_sampler(&grid, 0.0).unwrap();
        let f = s.dense_factor();
        let c = &f * f.transpose();
        let alphas = grid.alphas();
        let rs = grid.rs();
        for (row, cr) in c.row_iter().enumerate() {
            for (col, v) in cr.iter().enumerate() {
                let (ir, ia) = (row / 3, row % 3);
                let (jr, ja) = (col / 3, col % 3);
                let want = limit_covariance(alphas[ia], rs[ir], alphas[ja], rs[jr])
                    + if row == col { s.jitter() * rs[ir] } else { 0.0 };
                assert_abs_diff_eq!(*v, want, epsilon = 1e-8);
            }
        }
        // lower triangular
        for row in 0..9 {
            for col in (row + 1)..9 {
                assert_eq!(f[(row, col)], 0.0);
            }
        }
    }

    #[test]
    fn boundary_alpha_is_rejected() {
        let grid = ProcessGrid::new(vec![0.0, 0.5], vec![1.0]).unwrap();
        assert!(matches!(build_sampler(&grid, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let grid = ProcessGrid::regular(16, 8).unwrap();
        let s = build_sampler(&grid, 0.0).unwrap();
        let a = s.sample_field_seeded(5, 0);
        let b = s.sample_field_seeded(5, 0);
        assert_eq!(a.values(), b.values());
        let c = s.sample_field_seeded(5, 1);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn quantiles_monotone_and_warned() {
        let grid = ProcessGrid::regular(12, 6).unwrap();
        let t = limit_quantiles(&grid, 150, &[0.10, 0.05, 0.01], 3).unwrap();
        let th = t.thresholds();
        assert!(th[0] <= th[1] && th[1] <= th[2]);

        let small = limit_quantiles(&grid, 10, &[0.01], 3).unwrap();
        assert!(small
            .warnings()
            .iter()
            .any(|w| w.contains("outside resolvable range")));
    }
}
