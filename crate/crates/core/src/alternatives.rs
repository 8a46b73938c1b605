//! Non-Gaussian generators for power studies.
//!
//! The main family superimposes a map of Poisson-distributed great-circle
//! segments (random pole, orientation, length, and level) on an independent
//! Gaussian map, with the mixture weight expressed as the fraction of
//! population field energy contributed by the segment component. A
//! heavy-tail family (per-coefficient Gaussian scale mixtures) is provided
//! as an extra convenience alternative.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{ChiSquared, Normal, Poisson, Uniform, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{
    analyze_map, simulate_gaussian_coeffs, AngularPowerSpectrum, FieldMap, HarmonicCoefficients,
    SphereGrid,
};
use crate::seed;

/// Poisson-segment contaminant parameters. Lengths are great-circle arc
/// lengths in radians; a node is affected when its angular distance to the
/// arc is at most `half_width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentParams {
    /// Mean of the Poisson segment count.
    pub count_mean: f64,
    /// Arc length drawn uniformly from this range (radians).
    pub length_min: f64,
    pub length_max: f64,
    /// Gaussian level added along each segment.
    pub level_mean: f64,
    pub level_sd: f64,
    /// Angular half-width of the painted band (radians).
    pub half_width: f64,
}

impl Default for SegmentParams {
    /// Few bright narrow segments. A superposition of many segments is
    /// itself close to Gaussian by the central limit theorem, so low counts
    /// carry far more detectable non-Gaussianity per unit energy.
    fn default() -> Self {
        SegmentParams {
            count_mean: 4.0,
            length_min: 0.3,
            length_max: 1.0,
            level_mean: 0.0,
            level_sd: 1.0,
            half_width: 0.03,
        }
    }
}

impl SegmentParams {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid("segment parameters", msg));
        if !(self.count_mean.is_finite() && self.count_mean >= 0.0) {
            return bad(format!("count_mean {} must be >= 0", self.count_mean));
        }
        if !(0.0 <= self.length_min
            && self.length_min <= self.length_max
            && self.length_max <= 2.0 * std::f64::consts::PI)
        {
            return bad(format!(
                "length range [{}, {}] invalid",
                self.length_min, self.length_max
            ));
        }
        if !(self.half_width > 0.0 && self.half_width < std::f64::consts::FRAC_PI_2) {
            return bad(format!("half_width {} outside (0, pi/2)", self.half_width));
        }
        if !(self.level_sd >= 0.0 && self.level_mean.is_finite()) {
            return bad("level distribution parameters invalid".into());
        }
        Ok(())
    }
}

/// Which alternative family to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlternativeSpec {
    /// The null itself (flat spectrum).
    Gaussian,
    /// Gaussian map plus segment map, scaled so the segment component
    /// carries the fraction `png` of population field energy.
    Mixture { png: f64, segments: SegmentParams },
    /// Pure segment map.
    Segments { segments: SegmentParams },
    /// Per-coefficient Gaussian scale mixture with `nu / chi^2_nu` variance
    /// multipliers (Student-like marginals); `nu > 2`.
    HeavyTail { nu: f64 },
}

impl AlternativeSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            AlternativeSpec::Gaussian => Ok(()),
            AlternativeSpec::Mixture { png, segments } => {
                if !(0.0..1.0).contains(png) {
                    return Err(Error::invalid("png", format!("{png} outside [0, 1)")));
                }
                segments.validate()?;
                if *png > 0.0 {
                    if segments.count_mean <= 0.0 {
                        return Err(Error::invalid(
                            "segment parameters",
                            "count_mean must be positive when png > 0",
                        ));
                    }
                    if segments.level_mean == 0.0 && segments.level_sd == 0.0 {
                        return Err(Error::invalid(
                            "segment parameters",
                            "level distribution is identically zero",
                        ));
                    }
                }
                Ok(())
            }
            AlternativeSpec::Segments { segments } => {
                segments.validate()?;
                if segments.count_mean <= 0.0 {
                    return Err(Error::invalid(
                        "segment parameters",
                        "count_mean must be positive",
                    ));
                }
                Ok(())
            }
            AlternativeSpec::HeavyTail { nu } => {
                if *nu <= 2.0 || nu.is_nan() {
                    return Err(Error::invalid("nu", format!("{nu} must exceed 2")));
                }
                Ok(())
            }
        }
    }

    /// A copy with the mixture weight replaced; only meaningful for the
    /// mixture family (a zero weight is accepted everywhere it is a no-op).
    pub fn with_png(&self, png: f64) -> Result<Self> {
        match self {
            AlternativeSpec::Mixture { segments, .. } => {
                let spec = AlternativeSpec::Mixture {
                    png,
                    segments: *segments,
                };
                spec.validate()?;
                Ok(spec)
            }
            other if png == 0.0 => Ok(*other),
            _ => Err(Error::invalid(
                "alternative",
                "png sweep requires the mixture family",
            )),
        }
    }
}

/// Draw one coefficient array under `spec` at degree `lmax`.
///
/// The Gaussian component always consumes the same derived stream, so the
/// mixture at `png = 0` reproduces the Gaussian generator coefficient for
/// coefficient.
pub fn generate_alternative(
    spec: &AlternativeSpec,
    lmax: u32,
    master_seed: u64,
) -> Result<HarmonicCoefficients> {
    spec.validate()?;
    if lmax == 0 {
        return Err(Error::invalid("lmax", "must be at least 1"));
    }
    let flat = AngularPowerSpectrum::flat(lmax);
    let mut g_rng = seed::stream(master_seed, "alt-gaussian", &[]);
    match spec {
        AlternativeSpec::Gaussian => Ok(simulate_gaussian_coeffs(&flat, &mut g_rng)),
        AlternativeSpec::HeavyTail { nu } => {
            let gauss = simulate_gaussian_coeffs(&flat, &mut g_rng);
            let mut t_rng = seed::stream(master_seed, "alt-heavytail", &[]);
            let chi = ChiSquared::new(*nu).expect("validated nu");
            let rows = gauss
                .rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|a| {
                            let q: f64 = t_rng.sample(chi);
                            a * (nu / q).sqrt()
                        })
                        .collect()
                })
                .collect();
            HarmonicCoefficients::new(rows)
        }
        AlternativeSpec::Mixture { png, segments } => {
            let gauss = simulate_gaussian_coeffs(&flat, &mut g_rng);
            if *png == 0.0 {
                return Ok(gauss);
            }
            let mut s_rng = seed::stream(master_seed, "alt-segments", &[]);
            let grid = analysis_grid(lmax)?;
            let map = segment_map(segments, &grid, &mut s_rng);
            let seg_coeffs = analyze_map(&map, lmax)?;
            let e_gauss = (f64::from(lmax)) * (f64::from(lmax) + 2.0);
            let e_seg = segment_energy(segments, lmax)?;
            let scale = (png * e_gauss / ((1.0 - png) * e_seg)).sqrt();
            let rows = gauss
                .rows()
                .iter()
                .zip(seg_coeffs.rows())
                .map(|(g, s)| g.iter().zip(s).map(|(a, b)| a + scale * b).collect())
                .collect();
            HarmonicCoefficients::new(rows)
        }
        AlternativeSpec::Segments { segments } => {
            let mut s_rng = seed::stream(master_seed, "alt-segments", &[]);
            let grid = analysis_grid(lmax)?;
            let map = segment_map(segments, &grid, &mut s_rng);
            analyze_map(&map, lmax)
        }
    }
}

fn analysis_grid(lmax: u32) -> Result<SphereGrid> {
    SphereGrid::gauss_legendre(lmax as usize + 1, 2 * lmax as usize + 1)
}

/// Total coefficient power including the implied negative orders:
/// `sum_l (|a_l0|^2 + 2 sum_{m>=1} |a_lm|^2)`.
pub fn coefficient_power(coeffs: &HarmonicCoefficients) -> f64 {
    coeffs
        .rows()
        .iter()
        .map(|row| row[0].norm_sqr() + 2.0 * row[1..].iter().map(|a| a.norm_sqr()).sum::<f64>())
        .sum()
}

/// Population energy of the segment generator at `lmax`, estimated once per
/// parameter set by a fixed-seed pre-run and memoized. Using a constant
/// internal seed keeps the mixture weight a stable function of the
/// parameters rather than of the caller's seed.
pub fn segment_energy(params: &SegmentParams, lmax: u32) -> Result<f64> {
    const ENERGY_CAL_SEED: u64 = 0x7365675f63616c; // independent of user seeds
    const ENERGY_CAL_REPS: usize = 48;

    type EnergyKey = (u64, [u64; 6]);
    static CACHE: OnceLock<Mutex<HashMap<EnergyKey, f64>>> = OnceLock::new();
    let key = (
        u64::from(lmax),
        [
            params.count_mean.to_bits(),
            params.length_min.to_bits(),
            params.length_max.to_bits(),
            params.level_mean.to_bits(),
            params.level_sd.to_bits(),
            params.half_width.to_bits(),
        ],
    );
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&e) = cache.lock().unwrap().get(&key) {
        return Ok(e);
    }
    let grid = analysis_grid(lmax)?;
    let mut total = 0.0;
    for rep in 0..ENERGY_CAL_REPS {
        let mut rng = seed::stream(ENERGY_CAL_SEED, "alt-energy", &[rep as u64]);
        let map = segment_map(params, &grid, &mut rng);
        let coeffs = analyze_map(&map, lmax)?;
        total += coefficient_power(&coeffs);
    }
    let energy = total / ENERGY_CAL_REPS as f64;
    if energy <= 0.0 || energy.is_nan() {
        return Err(Error::invalid(
            "segment parameters",
            "population energy is zero; nothing to superimpose",
        ));
    }
    cache.lock().unwrap().insert(key, energy);
    Ok(energy)
}

/// Draw a map of Poisson-distributed great-circle segments.
///
/// Each segment has a uniform random start point and tangent direction, an
/// arc length uniform in the configured range, and a constant Gaussian
/// level added to every grid sample within `half_width` of the arc.
pub fn segment_map<R: Rng + ?Sized>(
    params: &SegmentParams,
    grid: &SphereGrid,
    rng: &mut R,
) -> FieldMap {
    let nphi = grid.nphi();
    let mut map =
        FieldMap::new(grid.clone(), vec![0.0; grid.ntheta() * nphi]).expect("matching dimensions");

    let n_segments = if params.count_mean > 0.0 {
        let pois = Poisson::new(params.count_mean).expect("positive mean");
        rng.sample(pois) as usize
    } else {
        0
    };
    if n_segments == 0 {
        return map;
    }

    // unit vectors of all grid nodes
    let nodes: Vec<[f64; 3]> = grid
        .theta_nodes()
        .iter()
        .flat_map(|&theta| {
            let (st, ct) = (theta.sin(), theta.cos());
            grid.phi_nodes()
                .iter()
                .map(move |&phi| [st * phi.cos(), st * phi.sin(), ct])
                .collect::<Vec<_>>()
        })
        .collect();

    let length_dist = Uniform::new_inclusive(params.length_min, params.length_max);
    let level_dist = Normal::new(params.level_mean, params.level_sd).expect("validated sd");
    let cos_w = params.half_width.cos();
    let samples = map.samples_mut();
    for _ in 0..n_segments {
        let start: [f64; 3] = rng.sample(UnitSphere);
        let tangent = loop {
            let v: [f64; 3] = rng.sample(UnitSphere);
            let dot = v[0] * start[0] + v[1] * start[1] + v[2] * start[2];
            let t = [
                v[0] - dot * start[0],
                v[1] - dot * start[1],
                v[2] - dot * start[2],
            ];
            let norm2 = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
            if norm2 > 1e-12 {
                let n = norm2.sqrt();
                break [t[0] / n, t[1] / n, t[2] / n];
            }
        };
        let length: f64 = rng.sample(length_dist);
        let level: f64 = rng.sample(level_dist);
        // any point within the band lies within half_width of the great
        // circle itself, so the plane distance prefilters the exact test
        let normal = [
            start[1] * tangent[2] - start[2] * tangent[1],
            start[2] * tangent[0] - start[0] * tangent[2],
            start[0] * tangent[1] - start[1] * tangent[0],
        ];
        let sin_w = params.half_width.sin();
        for (node, sample) in nodes.iter().zip(samples.iter_mut()) {
            let plane = node[0] * normal[0] + node[1] * normal[1] + node[2] * normal[2];
            if plane.abs() > sin_w {
                continue;
            }
            if arc_cos_distance(node, &start, &tangent, length) >= cos_w {
                *sample += level;
            }
        }
    }
    map
}

/// Cosine of the angular distance from `p` to the arc
/// `s -> cos(s) u + sin(s) t`, `s` in `[0, length]`.
///
/// The cosine to a point on the arc is `rho cos(s - psi)` where
/// `(rho, psi)` are the polar coordinates of `p` in the `(u, t)` plane, so
/// the closest point is at `s = psi` when that lies inside the arc and at
/// an endpoint otherwise.
pub fn arc_cos_distance(p: &[f64; 3], u: &[f64; 3], t: &[f64; 3], length: f64) -> f64 {
    let x = p[0] * u[0] + p[1] * u[1] + p[2] * u[2];
    let y = p[0] * t[0] + p[1] * t[1] + p[2] * t[2];
    let rho = (x * x + y * y).sqrt();
    let psi = y.atan2(x);
    if psi >= 0.0 && psi <= length {
        rho
    } else {
        rho * (psi.cos()).max((psi - length).cos())
    }
}
