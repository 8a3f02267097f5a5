//! Uniform inference for functionals estimated on a finite grid.
//!
//! A functional `F: X ⊂ R^d → R` is estimated at the nodes of an equally
//! spaced tensor grid, bootstrapped there, and turned into a continuous
//! estimate and sup-t confidence band by multilinear interpolation of the
//! node values. The grid should grow faster than `r_n^{1/4}` so that the
//! deterministic interpolation error vanishes relative to the sampling error.
//!
//! Modules, bottom up:
//!
//! - [`numerics`]: normal/bivariate normal distribution functions, quantiles,
//!   root finding, trapezoid quadrature.
//! - [`grid`]: tensor grids, cell location, the grid-size rule.
//! - [`interp`]: multilinear interpolation, error measurement and bounds.
//! - [`estimators`]: group empirical CDFs and difference-in-differences targets.
//! - [`bootstrap`]: multinomial bootstrap, robust scale, sup-t critical value.
//! - [`bands`]: interpolated uniform bands, coverage and rejection checks.
//! - [`mc`]: Monte Carlo harness for coverage and L2-error studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod interp;
pub mod mc;
pub mod numerics;
pub mod seed;

pub use bands::{band_at, build_band, build_bands, covers, rejects_zero, BandPoint, UniformBand};
pub use bootstrap::{BootstrapConfig, BootstrapDraws, WeightScheme};
pub use error::{Error, ErrorKind, Result};
pub use estimators::{DidSample, Observation, TargetKind};
pub use grid::{grid_rule, CellLocation, TensorGrid};
pub use interp::GridField;
pub use numerics::ProbeGrid;
