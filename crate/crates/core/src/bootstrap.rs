//! Weighted bootstrap of the grid-point process, robust scale estimation and
//! the sup-t critical value.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{DidSample, GridEstimator, TargetKind};
use crate::grid::TensorGrid;
use crate::interp::{format_f64, GridField};
use crate::numerics::{ceil_index, quantile_of_sorted, std_normal_quantile};
use crate::seed::stream_rng;

/// How bootstrap frequency weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// Multinomial(n, 1/n) counts, i.e. the nonparametric bootstrap.
    Multinomial,
    /// Every weight equal to one. Degenerate; reproduces the point estimate
    /// in every draw.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub draws: usize,
    pub scheme: WeightScheme,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn multinomial(draws: usize, seed: u64) -> Self {
        Self {
            draws,
            scheme: WeightScheme::Multinomial,
            seed,
        }
    }
}

/// Point estimate and bootstrap replicates on a common grid.
#[derive(Debug, Clone)]
pub struct BootstrapDraws {
    pub grid: Arc<TensorGrid>,
    pub center: GridField,
    pub draws: Vec<GridField>,
    pub r_n: f64,
}

impl BootstrapDraws {
    /// `√r_n (F* − F̂)` of draw `b` at lexicographic node `node`.
    pub fn scaled_deviation(&self, b: usize, node: usize) -> f64 {
        self.r_n.sqrt() * (self.draws[b].values()[node] - self.center.values()[node])
    }

    /// Dumps the `B × L^d` matrix of draws, one row per draw.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["draw".to_string()];
        header.extend((0..self.grid.len()).map(|i| format!("node{i}")));
        w.write_record(&header)?;
        for (b, field) in self.draws.iter().enumerate() {
            let mut row = vec![b.to_string()];
            row.extend(field.values().iter().map(|v| format_f64(*v)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Multinomial(n, 1/n) counts from `n` independent uniform category draws.
pub fn multinomial_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u32> {
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    counts
}

/// Generates `B` reweighted estimates of `target` on `grid`. Draw `b` uses
/// stream `b` under `config.seed`, so the output does not depend on how the
/// draws are scheduled.
pub fn bootstrap_fields(
    sample: &DidSample,
    target: TargetKind,
    grid: &Arc<TensorGrid>,
    config: &BootstrapConfig,
    r_n: f64,
) -> Result<BootstrapDraws> {
    if config.draws == 0 {
        return Err(Error::Domain("bootstrap needs at least one draw".into()));
    }
    if !(r_n > 0.0) {
        return Err(Error::Domain(format!("r_n must be positive, got {r_n}")));
    }
    let estimator = GridEstimator::new(sample, grid.clone())?;
    let center = estimator.estimate(target, sample.weights())?;
    let base = sample.weights();
    let draws = (0..config.draws)
        .into_par_iter()
        .map(|b| {
            let weights: Vec<f64> = match config.scheme {
                WeightScheme::Unit => base.to_vec(),
                WeightScheme::Multinomial => {
                    let mut rng = stream_rng(config.seed, b as u64);
                    multinomial_weights(sample.len(), &mut rng)
                        .into_iter()
                        .zip(base)
                        .map(|(c, w)| c as f64 * w)
                        .collect()
                }
            };
            estimator.estimate(target, &weights)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BootstrapDraws {
        grid: grid.clone(),
        center,
        draws,
        r_n,
    })
}

/// Grid-point scale estimate and how many nodes hit the positivity floor.
#[derive(Debug, Clone)]
pub struct ScaleEstimate {
    pub sigma: GridField,
    pub floor: f64,
    pub floored_nodes: usize,
}

/// `Φ⁻¹(0.75) − Φ⁻¹(0.25)`.
pub fn normal_iqr() -> f64 {
    std_normal_quantile(0.75).unwrap() - std_normal_quantile(0.25).unwrap()
}

/// Robust per-node scale: interquartile range of the scaled bootstrap
/// deviations over the normal IQR, floored at `1e-6 (1 + max |center|)`.
pub fn sigma_hat(draws: &BootstrapDraws) -> Result<ScaleEstimate> {
    let b = draws.draws.len();
    if b < 4 {
        return Err(Error::Domain(format!("scale estimate needs B >= 4, got {b}")));
    }
    let iqr_const = normal_iqr();
    let floor = 1e-6
        * (1.0
            + draws
                .center
                .values()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())));
    let nodes = draws.grid.len();
    let raw: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|node| {
            let mut dev: Vec<f64> = (0..b).map(|j| draws.scaled_deviation(j, node)).collect();
            dev.sort_by(f64::total_cmp);
            (quantile_of_sorted(&dev, 0.75) - quantile_of_sorted(&dev, 0.25)) / iqr_const
        })
        .collect();
    let floored_nodes = raw.iter().filter(|&&s| !(s >= floor)).count();
    let values = raw.into_iter().map(|s| if s >= floor { s } else { floor }).collect();
    Ok(ScaleEstimate {
        sigma: GridField::new(draws.grid.clone(), values)?,
        floor,
        floored_nodes,
    })
}

/// `T^(b) = max_nodes |√r_n (F*^(b) − F̂)| / σ̂` for every draw.
pub fn sup_t_stats(draws: &BootstrapDraws, sigma: &GridField) -> Result<Vec<f64>> {
    if sigma.values().len() != draws.grid.len() {
        return Err(Error::Shape("scale field does not match the draws' grid".into()));
    }
    if let Some(i) = sigma.values().iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Domain(format!("scale estimate is not positive at node {i}")));
    }
    let s = sigma.values();
    Ok((0..draws.draws.len())
        .into_par_iter()
        .map(|b| {
            (0..s.len())
                .map(|node| draws.scaled_deviation(b, node).abs() / s[node])
                .fold(0.0f64, f64::max)
        })
        .collect())
}

/// The `k`-th order statistic of `stats`, `k = min(⌈(1−α)(B+1)⌉, B)`.
pub fn critical_value(stats: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if stats.is_empty() {
        return Err(Error::Domain("critical value of an empty statistic set".into()));
    }
    let b = stats.len();
    let k = (ceil_index((1.0 - alpha) * (b + 1) as f64) as usize).clamp(1, b);
    let mut sorted = stats.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[k - 1])
}
