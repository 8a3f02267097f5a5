//! Multilinear interpolation of node values on a [`TensorGrid`], error
//! measurement against a known function, the smooth and Hölder error bounds,
//! and piecewise-linear inversion of monotone one-dimensional fields.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{CellLocation, TensorGrid};
use crate::numerics::{trapezoid_integral, ProbeGrid};

/// Values of a functional at every node of a grid, stored lexicographically
/// with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: Arc<TensorGrid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<TensorGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Arc<TensorGrid>, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.node_at(i))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Multilinear interpolant at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let cell = self.grid.locate(x)?;
        Ok(self.eval_located(&cell))
    }

    pub(crate) fn eval_located(&self, cell: &CellLocation) -> f64 {
        let d = cell.cell.len();
        let l = self.grid.nodes_per_axis();
        let mut acc = 0.0;
        for iota in 0..1usize << d {
            let mut w = 1.0;
            let mut flat = 0;
            for k in 0..d {
                let bit = (iota >> (d - 1 - k)) & 1;
                w *= if bit == 1 { cell.delta[k] } else { 1.0 - cell.delta[k] };
                flat = flat * l + cell.cell[k] + bit;
            }
            acc += w * self.values[flat];
        }
        acc
    }

    /// Elementwise [`eval`](Self::eval), order preserved.
    pub fn eval_batch(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.par_iter()
            .enumerate()
            .map(|(index, x)| {
                self.eval(x).map_err(|e| Error::BatchPoint {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// Minimum and maximum over the vertices of the cell containing `x`.
    pub fn cell_vertex_range(&self, cell: &CellLocation) -> (f64, f64) {
        let weights = weights(cell);
        weights
            .vertex_indices(self.grid.nodes_per_axis())
            .map(|flat| self.values[flat])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Writes one row per node: coordinates `x1..xd` then `value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.grid.dim();
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (flat, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = self.grid.node_at(flat).iter().map(|c| format_f64(*c)).collect();
            row.push(format_f64(*v));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`write_csv`](Self::write_csv). The grid is
    /// recovered from the first and last node and the row count.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let d = r.headers()?.len().checked_sub(1).filter(|&d| d > 0).ok_or_else(|| Error::Data {
            row: 0,
            message: "expected columns x1..xd,value".into(),
        })?;
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let parsed: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Data {
                    row: i + 1,
                    message: e.to_string(),
                })?;
            coords.push(parsed[..d].to_vec());
            values.push(parsed[d]);
        }
        let n = values.len();
        let l = (n as f64).powf(1.0 / d as f64).round() as usize;
        if l < 2 || l.pow(d as u32) != n {
            return Err(Error::Shape(format!("{n} rows is not L^{d} for any L >= 2")));
        }
        let grid = TensorGrid::new(coords[0].clone(), coords[n - 1].clone(), l)?;
        GridField::new(Arc::new(grid), values)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Vertex weights of a cell: one weight per `ι ∈ {0,1}^d`, enumerated as a
/// binary counter with the last axis least significant.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexWeights {
    pub cell: Vec<usize>,
    pub weights: Vec<f64>,
}

impl VertexWeights {
    pub fn dim(&self) -> usize {
        self.cell.len()
    }

    /// Node multi-index of vertex number `iota`.
    pub fn vertex(&self, iota: usize) -> Vec<usize> {
        let d = self.dim();
        (0..d).map(|k| self.cell[k] + ((iota >> (d - 1 - k)) & 1)).collect()
    }

    /// Lexicographic node positions of all vertices, in weight order.
    pub fn vertex_indices(&self, nodes_per_axis: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.weights.len()).map(move |iota| {
            self.vertex(iota)
                .into_iter()
                .fold(0, |acc, i| acc * nodes_per_axis + i)
        })
    }
}

/// `w(ι) = ∏_k (1 − δ_k)^{1−ι_k} δ_k^{ι_k}`.
pub fn weights(cell: &CellLocation) -> VertexWeights {
    let d = cell.cell.len();
    let weights = (0..1usize << d)
        .map(|iota| {
            (0..d)
                .map(|k| {
                    if (iota >> (d - 1 - k)) & 1 == 1 {
                        cell.delta[k]
                    } else {
                        1.0 - cell.delta[k]
                    }
                })
                .product()
        })
        .collect();
    VertexWeights {
        cell: cell.cell.clone(),
        weights,
    }
}

fn check_probe(field: &GridField, probe: &ProbeGrid) -> Result<()> {
    let g = field.grid();
    if probe.dim() != g.dim() {
        return Err(Error::Shape(format!(
            "probe dimension {} does not match grid dimension {}",
            probe.dim(),
            g.dim()
        )));
    }
    if !g.contains(probe.lo()) || !g.contains(probe.hi()) {
        return Err(g.out_of_domain(probe.lo()));
    }
    Ok(())
}

/// Maximum of `|F_L − f|` over the probe points.
pub fn sup_abs_error<F: Fn(&[f64]) -> f64>(field: &GridField, f: F, probe: &ProbeGrid) -> Result<f64> {
    check_probe(field, probe)?;
    let mut worst: f64 = 0.0;
    let mut failure = None;
    probe.for_each_weighted(|x, _| match field.eval(x) {
        Ok(v) => worst = worst.max((v - f(x)).abs()),
        Err(e) => failure = Some(e),
    });
    failure.map_or(Ok(worst), Err)
}

/// Trapezoid approximation of `∫ |F_L − f|` over the probe region.
pub fn integrated_abs_error<F: Fn(&[f64]) -> f64>(
    field: &GridField,
    f: F,
    probe: &ProbeGrid,
) -> Result<f64> {
    check_probe(field, probe)?;
    let mut failure = None;
    let total = trapezoid_integral(
        |x| match field.eval(x) {
            Ok(v) => (v - f(x)).abs(),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        probe,
    );
    failure.map_or(Ok(total), Err)
}

/// Uniform bound on the scaled interpolation error of a twice continuously
/// differentiable target: `r_n^{1/2} d C² / (8 (L−1)²)`, where `C` dominates
/// both the second partial derivatives and the squared axis widths.
pub fn smooth_bound(r_n: f64, dim: usize, c: f64, nodes_per_axis: usize) -> Result<f64> {
    if nodes_per_axis < 2 {
        return Err(Error::Domain(format!("need L >= 2, got {nodes_per_axis}")));
    }
    if !(r_n > 0.0) || !(c >= 0.0) || dim == 0 {
        return Err(Error::Domain(format!(
            "need r_n > 0, C >= 0, d >= 1 (r_n={r_n}, C={c}, d={dim})"
        )));
    }
    let cells = (nodes_per_axis - 1) as f64;
    Ok(r_n.sqrt() * dim as f64 * c * c / (8.0 * cells * cells))
}

/// Bound for α-Hölder targets: `r_n^{1/2} C̃ C^{α/2} / (L−1)^α`.
pub fn holder_bound(r_n: f64, c_tilde: f64, c: f64, alpha: f64, nodes_per_axis: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    if nodes_per_axis < 2 {
        return Err(Error::Domain(format!("need L >= 2, got {nodes_per_axis}")));
    }
    if !(r_n > 0.0) || !(c_tilde >= 0.0) || !(c >= 0.0) {
        return Err(Error::Domain("r_n must be positive and constants nonnegative".into()));
    }
    let cells = (nodes_per_axis - 1) as f64;
    Ok(r_n.sqrt() * c_tilde * c.powf(alpha / 2.0) / cells.powf(alpha))
}

/// Smallest `L ≥ 2` with `bound(L) ≤ tol` for a bound nonincreasing in `L`.
/// `guess` seeds the search, typically the closed-form inverse.
pub fn min_nodes_for<F: Fn(usize) -> Result<f64>>(bound: F, tol: f64, guess: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !guess.is_finite() || guess > 1e15 {
        return Err(Error::Domain(format!("tolerance {tol} needs an unrepresentable grid")));
    }
    let mut l = (guess.ceil() as usize).max(2);
    while bound(l)? > tol {
        l += 1;
    }
    while l > 2 && bound(l - 1)? <= tol {
        l -= 1;
    }
    Ok(l)
}

/// Smallest `L` with [`smooth_bound`] at most `tol`.
pub fn smooth_min_nodes(r_n: f64, dim: usize, c: f64, tol: f64) -> Result<usize> {
    let guess = 1.0 + (r_n.sqrt() * dim as f64 * c * c / (8.0 * tol)).sqrt();
    min_nodes_for(|l| smooth_bound(r_n, dim, c, l), tol, guess)
}

/// Smallest `L` with [`holder_bound`] at most `tol`.
pub fn holder_min_nodes(r_n: f64, c_tilde: f64, c: f64, alpha: f64, tol: f64) -> Result<usize> {
    let guess = 1.0 + (r_n.sqrt() * c_tilde * c.powf(alpha / 2.0) / tol).powf(1.0 / alpha);
    min_nodes_for(|l| holder_bound(r_n, c_tilde, c, alpha, l), tol, guess)
}

/// Smallest `x` with `F_L(x) ≥ tau` for a nondecreasing one-dimensional field.
pub fn invert_monotone(field: &GridField, tau: f64) -> Result<f64> {
    let g = field.grid();
    if g.dim() != 1 {
        return Err(Error::Precondition(format!(
            "inversion needs a one-dimensional field, got d = {}",
            g.dim()
        )));
    }
    let v = field.values();
    if let Some(i) = v.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Precondition(format!(
            "field values decrease between nodes {i} and {}",
            i + 1
        )));
    }
    let (min, max) = (v[0], v[v.len() - 1]);
    if !(tau >= min && tau <= max) {
        return Err(Error::Range { level: tau, min, max });
    }
    let j = v.partition_point(|&y| y < tau);
    let x = g.axis(0);
    if j == 0 {
        return Ok(x[0]);
    }
    if v[j] == tau {
        return Ok(x[j]);
    }
    let t = (tau - v[j - 1]) / (v[j] - v[j - 1]);
    Ok(x[j - 1] + t * (x[j] - x[j - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(lo: f64, hi: f64, l: usize) -> Arc<TensorGrid> {
        Arc::new(TensorGrid::new(vec![lo], vec![hi], l).unwrap())
    }

    #[test]
    fn weights_examples() {
        let w = weights(&CellLocation { cell: vec![0, 0], delta: vec![0.5, 0.5] });
        assert_eq!(w.weights, vec![0.25; 4]);
        let w = weights(&CellLocation { cell: vec![3], delta: vec![0.0] });
        assert_eq!(w.weights, vec![1.0, 0.0]);
        let w = weights(&CellLocation { cell: vec![0, 0, 0], delta: vec![1.0; 3] });
        assert_eq!(w.weights[7], 1.0);
        assert!(w.weights[..7].iter().all(|&x| x == 0.0));
        assert_eq!(w.vertex(0b101), vec![1, 0, 1]);
    }

    #[test]
    fn eval_examples() {
        let f = GridField::from_fn(grid1(0.0, 5.0, 4), |x| 3.0 * x[0] - 1.0).unwrap();
        assert!((f.eval(&[2.3]).unwrap() - 5.9).abs() < 1e-12);

        let g = Arc::new(TensorGrid::cube(2, 0.0, 1.0, 2).unwrap());
        let f = GridField::from_fn(g, |x| x[0] * x[1]).unwrap();
        assert!((f.eval(&[0.3, 0.7]).unwrap() - 0.21).abs() < 1e-15);

        let g = Arc::new(TensorGrid::new(vec![-1.0, 2.0], vec![3.0, 2.5], 5).unwrap());
        let f = GridField::from_fn(g.clone(), |x| (x[0] * 7.1).sin() + x[1]).unwrap();
        for flat in 0..g.len() {
            assert_eq!(f.eval(&g.node_at(flat)).unwrap().to_bits(), f.values()[flat].to_bits());
        }
        assert!(matches!(f.eval(&[3.5, 2.2]), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn eval_batch_examples() {
        let g = Arc::new(TensorGrid::cube(2, 0.0, 1.0, 3).unwrap());
        let f = GridField::from_fn(g.clone(), |x| x[0] - 2.0 * x[1] * x[0]).unwrap();
        assert!(f.eval_batch(&[]).unwrap().is_empty());
        assert_eq!(f.eval_batch(&g.nodes()).unwrap(), f.values());
        assert_eq!(f.eval_batch(&[vec![0.3, 0.4]]).unwrap(), vec![f.eval(&[0.3, 0.4]).unwrap()]);
        match f.eval_batch(&[vec![0.3, 0.4], vec![0.1, 1.2]]) {
            Err(Error::BatchPoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_rejects_bad_shapes() {
        let g = grid1(0.0, 1.0, 3);
        assert!(GridField::new(g.clone(), vec![0.0; 2]).is_err());
        assert!(GridField::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn affine_error_is_zero() {
        let f = GridField::from_fn(grid1(-2.0, 3.0, 6), |x| 0.5 - 1.5 * x[0]).unwrap();
        let probe = ProbeGrid::uniform(10_001, vec![-2.0], vec![3.0]).unwrap();
        assert!(sup_abs_error(&f, |x| 0.5 - 1.5 * x[0], &probe).unwrap() < 1e-12);
        assert!(integrated_abs_error(&f, |x| 0.5 - 1.5 * x[0], &probe).unwrap() < 1e-10);
    }

    #[test]
    fn cos_sqrt_errors() {
        let target = |x: &[f64]| (5.0 * x[0]).cos() + x[0].sqrt();
        let probe = ProbeGrid::uniform(1_000_001, vec![0.0], vec![5.0]).unwrap();
        for (l, area, max) in [(4, 3.441, 1.542), (8, 2.608, 1.215), (10, 1.720, 0.820)] {
            let f = GridField::from_fn(grid1(0.0, 5.0, l), target).unwrap();
            let m = sup_abs_error(&f, target, &probe).unwrap();
            let a = integrated_abs_error(&f, target, &probe).unwrap();
            assert!((m - max).abs() <= 0.01, "L={l}: m.x={m}");
            assert!((a - area).abs() <= 0.01, "L={l}: a.x={a}");
        }
    }

    #[test]
    fn smooth_bound_examples() {
        assert_eq!(smooth_bound(1.0, 1, 1.0, 2).unwrap(), 0.125);
        assert!((smooth_bound(1e4, 1, 25.0, 10).unwrap() - 100.0 * 625.0 / 648.0).abs() < 1e-10);
        assert_eq!(smooth_bound(123.0, 2, 0.0, 7).unwrap(), 0.0);
        assert!(smooth_bound(1.0, 1, 1.0, 1).is_err());
        // doubling L−1 divides by 4 exactly
        assert_eq!(smooth_bound(9.0, 2, 3.0, 5).unwrap(), 4.0 * smooth_bound(9.0, 2, 3.0, 9).unwrap());
    }

    #[test]
    fn min_nodes_examples() {
        assert_eq!(smooth_min_nodes(1e4, 1, 1.0, 0.01).unwrap(), 37);
        assert!(smooth_bound(1e4, 1, 1.0, 36).unwrap() > 0.01);
        assert_eq!(smooth_min_nodes(1.0, 1, 1.0, 1.0).unwrap(), 2);
        let l = holder_min_nodes(100.0, 2.0, 4.0, 0.5, 1.0).unwrap();
        assert!(holder_bound(100.0, 2.0, 4.0, 0.5, l).unwrap() <= 1.0);
        assert!(holder_bound(100.0, 2.0, 4.0, 0.5, l - 1).unwrap() > 1.0);
        assert!(smooth_min_nodes(1.0, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn holder_examples() {
        assert!((holder_bound(1.0, 1.0, 1.0, 1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((holder_bound(100.0, 2.0, 4.0, 0.5, 5).unwrap() - 10.0 * 2.0_f64.sqrt()).abs() < 1e-12);
        let coarse = holder_bound(10.0, 1.0, 2.0, 0.7, 100).unwrap();
        let fine = holder_bound(10.0, 1.0, 2.0, 0.7, 10_000).unwrap();
        assert!(fine < coarse && fine > 0.0);
        assert!(holder_bound(1.0, 1.0, 1.0, 0.0, 3).is_err());
        assert!(holder_bound(1.0, 1.0, 1.0, 1.5, 3).is_err());
    }

    #[test]
    fn sine_error_within_conditioned_bound() {
        // sin on [0, π]: |f''| ≤ 1 and width² = π², so C = π² satisfies both conditions.
        let c = std::f64::consts::PI.powi(2);
        let probe = ProbeGrid::uniform(200_001, vec![0.0], vec![std::f64::consts::PI]).unwrap();
        for l in [3, 5, 9, 17, 33] {
            let f = GridField::from_fn(grid1(0.0, std::f64::consts::PI, l), |x| x[0].sin()).unwrap();
            let err = sup_abs_error(&f, |x| x[0].sin(), &probe).unwrap();
            assert!(err <= smooth_bound(1.0, 1, c, l).unwrap());
        }
    }

    #[test]
    fn invert_examples() {
        let g = Arc::new(TensorGrid::new(vec![0.0], vec![2.0], 3).unwrap());
        let f = GridField::new(g, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(invert_monotone(&f, 0.25).unwrap(), 0.5);
        assert_eq!(invert_monotone(&f, 0.5).unwrap(), 1.0);
        assert_eq!(invert_monotone(&f, 0.0).unwrap(), 0.0);
        assert_eq!(invert_monotone(&f, 1.0).unwrap(), 2.0);
        assert!(matches!(invert_monotone(&f, 1.1), Err(Error::Range { .. })));

        let bad = GridField::new(grid1(0.0, 2.0, 3), vec![0.0, 0.6, 0.5]).unwrap();
        assert!(matches!(invert_monotone(&bad, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn invert_flat_segment_takes_left_end() {
        let g = grid1(0.0, 3.0, 4);
        let f = GridField::new(g, vec![0.0, 0.5, 0.5, 1.0]).unwrap();
        let x = invert_monotone(&f, 0.5).unwrap();
        // brute force: first probe point where F_L reaches the level
        let n = 300_001;
        let brute = (0..n)
            .map(|i| 3.0 * i as f64 / (n - 1) as f64)
            .find(|&t| f.eval(&[t]).unwrap() >= 0.5)
            .unwrap();
        assert_eq!(x, 1.0);
        assert!((x - brute).abs() < 1e-4);
    }

    #[test]
    fn csv_round_trip() {
        let g = Arc::new(TensorGrid::new(vec![-1.0, 0.5], vec![1.0, 0.75], 4).unwrap());
        let f = GridField::from_fn(g, |x| x[0].exp() * x[1] + 1.0 / 3.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,value\n"));
        let back = GridField::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().lo(), f.grid().lo());
        assert_eq!(back.grid().hi(), f.grid().hi());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cell_strategy() -> impl Strategy<Value = CellLocation> {
            (1usize..=4).prop_flat_map(|d| {
                (
                    proptest::collection::vec(0usize..5, d),
                    proptest::collection::vec(0.0f64..=1.0, d),
                )
                    .prop_map(|(cell, delta)| CellLocation { cell, delta })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]

            #[test]
            fn weights_form_a_simplex(cell in cell_strategy()) {
                let w = weights(&cell);
                prop_assert_eq!(w.weights.len(), 1 << cell.cell.len());
                prop_assert!(w.weights.iter().all(|&x| x >= 0.0));
                prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }
}
