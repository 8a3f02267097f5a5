//! Sup-t uniform confidence bands for an interpolated functional.
//!
//! The pipeline is: estimate on the grid, bootstrap the grid-point process,
//! take a robust per-node scale, form the sup-t critical value, build
//! node-wise intervals `F̂ ± σ̂ t / √r_n`, and interpolate the three node
//! fields multilinearly to get a band that is continuous on the whole domain.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_fields, critical_value, sigma_hat, sup_t_stats, BootstrapConfig, BootstrapDraws};
use crate::error::{Error, Result};
use crate::estimators::{DidSample, TargetKind};
use crate::grid::{GridSpec, TensorGrid};
use crate::interp::{format_f64, GridField};
use crate::numerics::ProbeGrid;

#[derive(Debug, Clone)]
pub struct UniformBand {
    pub grid: Arc<TensorGrid>,
    pub center: GridField,
    pub lower: GridField,
    pub upper: GridField,
    pub sigma: GridField,
    pub critical_value: f64,
    pub alpha: f64,
    pub r_n: f64,
    /// Nodes whose scale estimate was raised to the positivity floor.
    pub floored_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub lower: f64,
    pub center: f64,
    pub upper: f64,
}

impl UniformBand {
    /// Interpolated `(lower, center, upper)` at `x`.
    pub fn at(&self, x: &[f64]) -> Result<BandPoint> {
        let cell = self.grid.locate(x)?;
        Ok(BandPoint {
            lower: self.lower.eval_located(&cell),
            center: self.center.eval_located(&cell),
            upper: self.upper.eval_located(&cell),
        })
    }

    /// Half-width implied by the interpolated scale, `σ̂_L(x) t / √r_n`.
    pub fn scale_half_width(&self, x: &[f64]) -> Result<f64> {
        Ok(self.sigma.eval(x)? * self.critical_value / self.r_n.sqrt())
    }

    /// Writes `x1..xd, lower, center, upper` on a lattice with
    /// `points_per_axis` points per axis spanning the band's domain.
    pub fn write_csv<W: Write>(&self, points_per_axis: usize, out: W) -> Result<()> {
        let probe = ProbeGrid::uniform(points_per_axis, self.grid.lo().to_vec(), self.grid.hi().to_vec())?;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.grid.dim()).map(|k| format!("x{k}")).collect();
        header.extend(["lower", "center", "upper"].map(String::from));
        w.write_record(&header)?;
        for x in probe.points() {
            let p = self.at(&x)?;
            let mut row: Vec<String> = x.iter().map(|v| format_f64(*v)).collect();
            row.extend([p.lower, p.center, p.upper].map(format_f64));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> BandSummary {
        BandSummary {
            alpha: self.alpha,
            critical_value: self.critical_value,
            floored_nodes: self.floored_nodes,
        }
    }
}

/// Per-level part of the band metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub alpha: f64,
    #[serde(rename = "t")]
    pub critical_value: f64,
    pub floored_nodes: usize,
}

/// Metadata block accompanying exported bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMetadata {
    pub target: TargetKind,
    pub grid: GridSpec,
    #[serde(rename = "L")]
    pub nodes_per_axis: usize,
    pub r_n: f64,
    pub seed: u64,
    pub draws: usize,
    pub n: usize,
    pub bands: Vec<BandSummary>,
}

/// Bands at several levels from one set of bootstrap draws.
pub fn bands_from_draws(draws: &BootstrapDraws, alphas: &[f64]) -> Result<Vec<UniformBand>> {
    let scale = sigma_hat(draws)?;
    let stats = sup_t_stats(draws, &scale.sigma)?;
    let root_r = draws.r_n.sqrt();
    alphas
        .iter()
        .map(|&alpha| {
            let t = critical_value(&stats, alpha)?;
            let half: Vec<f64> = scale.sigma.values().iter().map(|s| s * t / root_r).collect();
            let c = draws.center.values();
            let lower = c.iter().zip(&half).map(|(c, h)| c - h).collect();
            let upper = c.iter().zip(&half).map(|(c, h)| c + h).collect();
            Ok(UniformBand {
                grid: draws.grid.clone(),
                center: draws.center.clone(),
                lower: GridField::new(draws.grid.clone(), lower)?,
                upper: GridField::new(draws.grid.clone(), upper)?,
                sigma: scale.sigma.clone(),
                critical_value: t,
                alpha,
                r_n: draws.r_n,
                floored_nodes: scale.floored_nodes,
            })
        })
        .collect()
}

/// Bands at every level in `alphas`, sharing one bootstrap run. `r_n`
/// defaults to the sample size.
pub fn build_bands(
    sample: &DidSample,
    target: TargetKind,
    grid: &Arc<TensorGrid>,
    config: &BootstrapConfig,
    alphas: &[f64],
    r_n: Option<f64>,
) -> Result<Vec<UniformBand>> {
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {a}")));
    }
    let r_n = r_n.unwrap_or(sample.len() as f64);
    let draws = bootstrap_fields(sample, target, grid, config, r_n)?;
    bands_from_draws(&draws, alphas)
}

/// Single-level [`build_bands`].
pub fn build_band(
    sample: &DidSample,
    target: TargetKind,
    grid: &Arc<TensorGrid>,
    config: &BootstrapConfig,
    alpha: f64,
    r_n: Option<f64>,
) -> Result<UniformBand> {
    Ok(build_bands(sample, target, grid, config, &[alpha], r_n)?.remove(0))
}

pub fn band_at(band: &UniformBand, x: &[f64]) -> Result<BandPoint> {
    band.at(x)
}

/// Whether `lower ≤ truth ≤ upper` at every probe point.
pub fn covers<F: Fn(&[f64]) -> f64>(band: &UniformBand, truth: F, probe: &ProbeGrid) -> Result<bool> {
    if probe.dim() != band.grid.dim() {
        return Err(Error::Shape("probe dimension does not match the band".into()));
    }
    let mut covered = true;
    let mut failure = None;
    probe.for_each_weighted(|x, _| {
        if !covered || failure.is_some() {
            return;
        }
        match band.at(x) {
            Ok(p) => {
                let v = truth(x);
                if !(p.lower <= v && v <= p.upper) {
                    covered = false;
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    failure.map_or(Ok(covered), Err)
}

/// Whether the band excludes zero somewhere. Checking the nodes suffices:
/// the interpolated endpoints are multilinear on each cell, so their cell
/// extrema sit at the vertices.
pub fn rejects_zero(band: &UniformBand) -> bool {
    band.lower.values().iter().any(|&l| l > 0.0) || band.upper.values().iter().any(|&u| u < 0.0)
}
