//! Empirical lower-orthant distribution functions by treatment/period group
//! and the identity-link difference-in-differences functionals
//!
//! ```text
//! CF(x)  = F₁₀(x) + F₀₁(x) − F₀₀(x)
//! DTT(x) = F₁₁(x) − CF(x)
//! ```
//!
//! No clamping or rearrangement is applied to either combination.

use std::fmt;
use std::io::Read;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TensorGrid;
use crate::interp::GridField;

/// Which difference-in-differences functional to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetKind {
    /// Distribution treatment effect on the treated.
    #[serde(rename = "DTT")]
    Dtt,
    /// Counterfactual untreated CDF of the treated group.
    #[serde(rename = "CF")]
    Cf,
}

impl TargetKind {
    pub const ALL: [TargetKind; 2] = [TargetKind::Dtt, TargetKind::Cf];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetKind::Dtt => "DTT",
            TargetKind::Cf => "CF",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DTT" => Ok(TargetKind::Dtt),
            "CF" => Ok(TargetKind::Cf),
            _ => Err(Error::Config {
                field: "target".into(),
                message: format!("unknown target `{s}` (expected DTT or CF)"),
            }),
        }
    }
}

/// One observation of a two-period, two-group design.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<f64>,
    pub treated: bool,
    pub period: bool,
    pub weight: f64,
}

impl Observation {
    pub fn new(y: Vec<f64>, treated: bool, period: bool) -> Self {
        Self {
            y,
            treated,
            period,
            weight: 1.0,
        }
    }
}

/// Column-major storage of a difference-in-differences sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DidSample {
    dim: usize,
    y: Vec<f64>,
    group: Vec<u8>,
    weight: Vec<f64>,
}

/// Group code `2·treated + period`, so `F₀₀, F₀₁, F₁₀, F₁₁` map to 0..4.
fn group_code(treated: bool, period: bool) -> u8 {
    (treated as u8) << 1 | period as u8
}

impl DidSample {
    pub fn new(dim: usize, observations: Vec<Observation>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("outcome dimension must be positive".into()));
        }
        let mut y = Vec::with_capacity(dim * observations.len());
        let mut group = Vec::with_capacity(observations.len());
        let mut weight = Vec::with_capacity(observations.len());
        for (i, obs) in observations.into_iter().enumerate() {
            if obs.y.len() != dim {
                return Err(Error::Data {
                    row: i + 1,
                    message: format!("outcome has dimension {}, expected {dim}", obs.y.len()),
                });
            }
            if obs.y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Data {
                    row: i + 1,
                    message: "non-finite outcome".into(),
                });
            }
            if !(obs.weight >= 0.0) || !obs.weight.is_finite() {
                return Err(Error::Data {
                    row: i + 1,
                    message: format!("weight must be finite and nonnegative, got {}", obs.weight),
                });
            }
            y.extend_from_slice(&obs.y);
            group.push(group_code(obs.treated, obs.period));
            weight.push(obs.weight);
        }
        Ok(Self { dim, y, group, weight })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.group.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group.is_empty()
    }

    pub fn outcome(&self, i: usize) -> &[f64] {
        &self.y[i * self.dim..(i + 1) * self.dim]
    }

    pub fn treated(&self, i: usize) -> bool {
        self.group[i] & 2 != 0
    }

    pub fn period(&self, i: usize) -> bool {
        self.group[i] & 1 != 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// All outcome vectors, flattened row-major.
    pub fn outcomes(&self) -> &[f64] {
        &self.y
    }

    /// Same data with the frequency weights replaced.
    pub fn with_weights(&self, weight: Vec<f64>) -> Result<Self> {
        if weight.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} observations",
                weight.len(),
                self.len()
            )));
        }
        if weight.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Shape("weights must be finite and nonnegative".into()));
        }
        Ok(Self {
            weight,
            ..self.clone()
        })
    }

    /// Reads the CSV schema `y1..yd, d, t[, w]` (header required).
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = r.headers()?.clone();
        let find = |name: &str| headers.iter().position(|h| h == name);
        let mut y_cols = Vec::new();
        while let Some(c) = find(&format!("y{}", y_cols.len() + 1)) {
            y_cols.push(c);
        }
        let missing = |name: &str| Error::Data {
            row: 0,
            message: format!("header is missing column `{name}`"),
        };
        if y_cols.is_empty() {
            return Err(missing("y1"));
        }
        let d_col = find("d").ok_or_else(|| missing("d"))?;
        let t_col = find("t").ok_or_else(|| missing("t"))?;
        let w_col = find("w");

        let mut observations = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let row = i + 1;
            let rec = rec?;
            let cell = |c: usize, name: &str| -> Result<f64> {
                let raw = rec.get(c).unwrap_or("");
                if raw.is_empty() {
                    return Err(Error::Data {
                        row,
                        message: format!("missing value in column `{name}`"),
                    });
                }
                let v: f64 = raw.parse().map_err(|_| Error::Data {
                    row,
                    message: format!("cannot parse `{raw}` in column `{name}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Data {
                        row,
                        message: format!("non-finite value in column `{name}`"),
                    });
                }
                Ok(v)
            };
            let flag = |c: usize, name: &str| -> Result<bool> {
                match cell(c, name)? {
                    0.0 => Ok(false),
                    1.0 => Ok(true),
                    v => Err(Error::Data {
                        row,
                        message: format!("column `{name}` must be 0 or 1, got {v}"),
                    }),
                }
            };
            let y = y_cols
                .iter()
                .enumerate()
                .map(|(k, &c)| cell(c, &format!("y{}", k + 1)))
                .collect::<Result<Vec<_>>>()?;
            let weight = match w_col {
                Some(c) => cell(c, "w")?,
                None => 1.0,
            };
            observations.push(Observation {
                y,
                treated: flag(d_col, "d")?,
                period: flag(t_col, "t")?,
                weight,
            });
        }
        Self::new(y_cols.len(), observations)
    }
}

/// Weighted lower-orthant empirical CDF of the points in `coords` (row-major,
/// `dim` coordinates each) at `x`.
pub fn ecdf_orthant(dim: usize, coords: &[f64], weights: Option<&[f64]>, x: &[f64]) -> Result<f64> {
    if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
        return Err(Error::Domain("empirical CDF of an empty point set".into()));
    }
    let n = coords.len() / dim;
    let mut below = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        let w = weights.map_or(1.0, |w| w[i]);
        total += w;
        if coords[i * dim..(i + 1) * dim].iter().zip(x).all(|(y, t)| y <= t) {
            below += w;
        }
    }
    if !(total > 0.0) {
        return Err(Error::Domain("empirical CDF with zero total weight".into()));
    }
    Ok(below / total)
}

/// Empirical CDF of group `(treated, period)` at `x`.
pub fn group_ecdf(sample: &DidSample, treated: bool, period: bool, x: &[f64]) -> Result<f64> {
    let code = group_code(treated, period);
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for i in 0..sample.len() {
        if sample.group[i] == code {
            coords.extend_from_slice(sample.outcome(i));
            weights.push(sample.weight[i]);
        }
    }
    ecdf_orthant(sample.dim, &coords, Some(&weights), x).map_err(|_| Error::EmptyGroup {
        treated: treated as u8,
        period: period as u8,
    })
}

/// Combines the four group CDFs `[F₀₀, F₀₁, F₁₀, F₁₁]` into the target.
#[inline]
pub fn combine(target: TargetKind, f: [f64; 4]) -> f64 {
    let cf = f[2] + f[1] - f[0];
    match target {
        TargetKind::Cf => cf,
        TargetKind::Dtt => f[3] - cf,
    }
}

/// Point estimate of the target at `x`.
pub fn estimate_target(sample: &DidSample, target: TargetKind, x: &[f64]) -> Result<f64> {
    let f = [
        group_ecdf(sample, false, false, x)?,
        group_ecdf(sample, false, true, x)?,
        group_ecdf(sample, true, false, x)?,
        group_ecdf(sample, true, true, x)?,
    ];
    Ok(combine(target, f))
}

/// Evaluates the target on every node of `grid`.
pub fn estimate_on_grid(sample: &DidSample, target: TargetKind, grid: &Arc<TensorGrid>) -> Result<GridField> {
    GridEstimator::new(sample, grid.clone())?.estimate(target, sample.weights())
}

/// Precomputed node buckets for repeated reweighted evaluation of the group
/// CDFs on a fixed grid.
///
/// An observation lies below node `j` on axis `k` iff `j ≥ b_k`, where `b_k`
/// is the number of axis nodes strictly below `y_k`. Each observation's weight
/// is dropped into the histogram cell `(b_1, …, b_d)` of its group and a
/// cumulative sum along every axis then yields the orthant counts at all nodes
/// at once: `O(n·d·log L + d·L^d)` per weight vector.
#[derive(Debug, Clone)]
pub struct GridEstimator {
    grid: Arc<TensorGrid>,
    group: Vec<u8>,
    /// Flat histogram slot of each observation, `None` when it exceeds the
    /// grid on some axis.
    slot: Vec<Option<usize>>,
}

impl GridEstimator {
    pub fn new(sample: &DidSample, grid: Arc<TensorGrid>) -> Result<Self> {
        if grid.dim() != sample.dim() {
            return Err(Error::Shape(format!(
                "grid dimension {} does not match sample dimension {}",
                grid.dim(),
                sample.dim()
            )));
        }
        let l = grid.nodes_per_axis();
        let slot = (0..sample.len())
            .map(|i| {
                let mut flat = 0;
                for (k, &y) in sample.outcome(i).iter().enumerate() {
                    let b = grid.axis(k).partition_point(|&node| node < y);
                    if b == l {
                        return None;
                    }
                    flat = flat * l + b;
                }
                Some(flat)
            })
            .collect();
        Ok(Self {
            grid,
            group: sample.group.clone(),
            slot,
        })
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    /// Group CDFs at every node under frequency weights `weights`.
    pub fn group_cdfs(&self, weights: &[f64]) -> Result<[Vec<f64>; 4]> {
        let nodes = self.grid.len();
        let mut hist: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; nodes]);
        let mut totals = [0.0f64; 4];
        for ((&g, slot), &w) in self.group.iter().zip(&self.slot).zip(weights) {
            totals[g as usize] += w;
            if let Some(s) = slot {
                hist[g as usize][*s] += w;
            }
        }
        for (g, total) in totals.iter().enumerate() {
            if !(*total > 0.0) {
                return Err(Error::EmptyGroup {
                    treated: (g >> 1) as u8,
                    period: (g & 1) as u8,
                });
            }
        }
        let l = self.grid.nodes_per_axis();
        let d = self.grid.dim();
        for (h, total) in hist.iter_mut().zip(totals) {
            let mut stride = 1;
            for _ in 0..d {
                for i in 0..nodes {
                    if (i / stride) % l != 0 {
                        h[i] += h[i - stride];
                    }
                }
                stride *= l;
            }
            for v in h.iter_mut() {
                *v /= total;
            }
        }
        Ok(hist)
    }

    /// Target field under frequency weights `weights`.
    pub fn estimate(&self, target: TargetKind, weights: &[f64]) -> Result<GridField> {
        let [f00, f01, f10, f11] = self.group_cdfs(weights)?;
        let values = (0..self.grid.len())
            .map(|i| combine(target, [f00[i], f01[i], f10[i], f11[i]]))
            .collect();
        GridField::new(self.grid.clone(), values)
    }
}
