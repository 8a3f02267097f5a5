//! Equally spaced tensor grids on hyper-rectangles.
//!
//! Node and cell indices are 0-based: a grid with `L` nodes per axis has node
//! indices `0..L` and cell indices `0..L-1`. A coordinate equal to an interior
//! node belongs to the cell on its right; the right endpoint belongs to the
//! last cell with local coordinate exactly 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::smooth_bound;
use crate::numerics::ProbeGrid;

/// Equally spaced lattice with the same number of nodes on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    nodes_per_axis: usize,
    mesh: Vec<f64>,
    axes: Vec<Vec<f64>>,
}

/// Serialized form `{lo: [...], hi: [...], L: int}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(rename = "L")]
    pub nodes_per_axis: usize,
}

impl TensorGrid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, nodes_per_axis: usize) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Shape(format!(
                "grid bounds must be nonempty and of equal length (lo: {}, hi: {})",
                lo.len(),
                hi.len()
            )));
        }
        if nodes_per_axis < 2 {
            return Err(Error::Shape(format!(
                "a grid needs at least 2 nodes per axis, got {nodes_per_axis}"
            )));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Shape(format!(
                "grid requires finite lo < hi on every axis ({lo:?}, {hi:?})"
            )));
        }
        let cells = (nodes_per_axis - 1) as f64;
        let mesh: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / cells).collect();
        let axes = (0..lo.len())
            .map(|k| {
                (0..nodes_per_axis)
                    .map(|i| {
                        if i + 1 == nodes_per_axis {
                            hi[k]
                        } else {
                            lo[k] + i as f64 * mesh[k]
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            lo,
            hi,
            nodes_per_axis,
            mesh,
            axes,
        })
    }

    /// Same interval on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, nodes_per_axis: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], nodes_per_axis)
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(spec.lo.clone(), spec.hi.clone(), spec.nodes_per_axis)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            nodes_per_axis: self.nodes_per_axis,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    /// Node coordinates along one axis.
    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    /// Total number of nodes, `L^d`.
    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lebesgue measure of the hyper-rectangle.
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Coordinates of the node with multi-index `index`.
    pub fn node(&self, index: &[usize]) -> Result<Vec<f64>> {
        if index.len() != self.dim() || index.iter().any(|&i| i >= self.nodes_per_axis) {
            return Err(Error::IndexOutOfRange {
                index: index.to_vec(),
                nodes: self.nodes_per_axis,
            });
        }
        Ok(index.iter().enumerate().map(|(k, &i)| self.axes[k][i]).collect())
    }

    /// Lexicographic position of a node multi-index (last axis fastest).
    pub fn flat_index(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.nodes_per_axis + i)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.nodes_per_axis;
            flat /= self.nodes_per_axis;
        }
        idx
    }

    /// Coordinates of the node at lexicographic position `flat`.
    pub fn node_at(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .into_iter()
            .enumerate()
            .map(|(k, i)| self.axes[k][i])
            .collect()
    }

    /// All nodes in lexicographic order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|f| self.node_at(f)).collect()
    }

    /// Cell index and local coordinates of `x`.
    pub fn locate(&self, x: &[f64]) -> Result<CellLocation> {
        if !self.contains(x) {
            return Err(self.out_of_domain(x));
        }
        let last_cell = self.nodes_per_axis - 2;
        let mut cell = Vec::with_capacity(self.dim());
        let mut delta = Vec::with_capacity(self.dim());
        for (k, &xk) in x.iter().enumerate() {
            let axis = &self.axes[k];
            if xk == self.hi[k] {
                cell.push(last_cell);
                delta.push(1.0);
                continue;
            }
            let guess = ((xk - self.lo[k]) / self.mesh[k]).floor();
            let mut i = if guess < 0.0 { 0 } else { (guess as usize).min(last_cell) };
            // repair rounding at cell boundaries
            while i > 0 && xk < axis[i] {
                i -= 1;
            }
            while i < last_cell && xk >= axis[i + 1] {
                i += 1;
            }
            let d = ((xk - axis[i]) / (axis[i + 1] - axis[i])).clamp(0.0, 1.0);
            cell.push(i);
            delta.push(d);
        }
        Ok(CellLocation { cell, delta })
    }

    /// A probe lattice with `per_cell` intervals per cell on every axis, so
    /// that all grid nodes are probe points.
    pub fn probe(&self, per_cell: usize) -> Result<ProbeGrid> {
        if per_cell == 0 {
            return Err(Error::Shape("probe density must be positive".into()));
        }
        ProbeGrid::uniform(
            (self.nodes_per_axis - 1) * per_cell + 1,
            self.lo.clone(),
            self.hi.clone(),
        )
    }

    pub(crate) fn out_of_domain(&self, x: &[f64]) -> Error {
        Error::OutOfDomain {
            point: x.to_vec(),
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
    }
}

/// Position of a point relative to the grid: the cell it falls in and its
/// local coordinates within that cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellLocation {
    /// 0-based cell index per axis, in `0..L-1`.
    pub cell: Vec<usize>,
    /// Local coordinates in `[0, 1]`.
    pub delta: Vec<f64>,
}

/// Nodes per axis from the rule `max(⌈a · width · n^b⌉, 2)`.
pub fn grid_rule(a: f64, b: f64, width: f64, n: usize) -> usize {
    let raw = (a * width * (n as f64).powf(b)).ceil();
    if raw.is_finite() && raw > 2.0 {
        raw as usize
    } else {
        2
    }
}

/// Rate diagnostic for a grid size: the ratio `L / r_n^{1/4}` together with
/// the interpolation error bound `r_n^{1/2} d C² / (8 (L−1)²)`.
pub fn rate_diagnostic(nodes_per_axis: usize, r_n: f64, dim: usize, c: f64) -> Result<(f64, f64)> {
    let bound = smooth_bound(r_n, dim, c, nodes_per_axis)?;
    Ok((nodes_per_axis as f64 * r_n.powf(-0.25), bound))
}
