//! Harmonic-space Gaussianity testing for isotropic spherical random fields.
//!
//! The pipeline: simulate (or load) spherical-harmonic coefficients `a_lm`,
//! normalize each degree's row into uniform spacings so the unknown angular
//! power spectrum cancels exactly, build the bias-corrected integrated
//! empirical process over the triangular array, and compare sup-type test
//! statistics against Monte Carlo critical values — either from finite-`L`
//! null replications or from direct sampling of the limiting Gaussian field.
//!
//! Modules follow the pipeline stages:
//!
//! - [`harmonics`]: coefficient arrays, Gaussian simulation, map synthesis
//!   and quadrature analysis on Gauss–Legendre sphere grids.
//! - [`empirical`]: Smirnov and spacings transforms, row processes, the
//!   integrated process and its bias correction, closed-form limit
//!   covariances.
//! - [`limitproc`]: sampling the limiting Gaussian field from its covariance
//!   and estimating quantiles of its sup-functional.
//! - [`testing`]: sup/integral statistics, null calibration, the test
//!   decision, and power studies.
//! - [`alternatives`]: non-Gaussian generators (segment superpositions,
//!   heavy-tail families) for power studies.
//! - [`oracles`]: exact spacings laws and bound checks used as independent
//!   test oracles, also driving the `verify` command.
//! - [`calibration`], [`io`], [`seed`]: calibration tables, file formats,
//!   and reproducible stream derivation.

pub mod alternatives;
pub mod calibration;
pub mod empirical;
mod error;
pub mod harmonics;
pub mod io;
pub mod limitproc;
pub mod oracles;
pub mod seed;
pub mod testing;

pub use error::{Error, Result};

pub use calibration::{CalibrationKind, CalibrationTable};
pub use empirical::{ProcessField, ProcessGrid, SimplexArray, TriangularUnitArray};
pub use harmonics::{AngularPowerSpectrum, FieldMap, HarmonicCoefficients, SphereGrid};
pub use testing::TestReport;
