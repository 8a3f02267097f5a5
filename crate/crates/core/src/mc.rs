//! Monte Carlo harness for the two-period difference-in-differences design:
//! data generation, evaluation regions, continuous L2 error, replication
//! loops and table emission.
//!
//! Outcomes follow `Y = α + βD + γt + δDt + E` with `D ~ Bernoulli(1/2)`, the
//! first half of the sample in period 0 and `E` standard normal (d = 1) or
//! bivariate normal with unit variances and correlation `ρ` (d = 2, both
//! coordinates share the same mean).

use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{build_bands, covers, rejects_zero};
use crate::bootstrap::BootstrapConfig;
use crate::error::{Error, Result};
use crate::estimators::{DidSample, Observation, TargetKind};
use crate::grid::{grid_rule, TensorGrid};
use crate::interp::GridField;
use crate::numerics::{
    binormal_lower_cdf, bisect, empirical_quantile, std_normal_cdf, std_normal_quantile, trapezoid_integral,
    ProbeGrid,
};
use crate::seed::{derive_seed, stream_rng};

/// Location and dependence parameters of the outcome equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dgp {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Error correlation between the two outcome coordinates (d = 2).
    pub rho: f64,
}

impl Default for Dgp {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.2,
            gamma: -0.1,
            delta: 0.0,
            rho: 0.5,
        }
    }
}

impl Dgp {
    /// Mean outcome of group `(treated, period)`.
    pub fn mean(&self, treated: bool, period: bool) -> f64 {
        let (d, t) = (treated as u8 as f64, period as u8 as f64);
        self.alpha + self.beta * d + self.gamma * t + self.delta * d * t
    }

    /// Mean of the untreated potential outcome of the treated in period 1.
    pub fn counterfactual_mean(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }
}

/// One cell of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McDesign {
    pub dim: usize,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub replications: usize,
    pub draws: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub dgp: Dgp,
    pub tau_lb: f64,
    pub tau_ub: f64,
    /// Probe intervals per grid cell and axis for the coverage and L2 checks.
    pub probe_per_cell: usize,
}

impl McDesign {
    pub fn new(dim: usize, n: usize, a: f64, b: f64) -> Self {
        Self {
            dim,
            n,
            a,
            b,
            replications: 1000,
            draws: 499,
            alphas: vec![0.10, 0.05, 0.01],
            seed: 0,
            dgp: Dgp::default(),
            tau_lb: 0.05,
            tau_ub: 0.95,
            probe_per_cell: if dim == 1 { 8 } else { 4 },
        }
    }

    pub fn with_scale(mut self, replications: usize, draws: usize) -> Self {
        self.replications = replications;
        self.draws = draws;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Config {
                field: field.into(),
                message,
            })
        };
        if !(self.dim == 1 || self.dim == 2) {
            return bad("dim", format!("must be 1 or 2, got {}", self.dim));
        }
        if self.n < 4 {
            return bad("n", format!("must be at least 4, got {}", self.n));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return bad("a", format!("must be positive, got {}", self.a));
        }
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return bad("b", format!("must be nonnegative, got {}", self.b));
        }
        if self.replications == 0 {
            return bad("replications", "must be positive".into());
        }
        if self.draws < 4 {
            return bad("draws", format!("must be at least 4, got {}", self.draws));
        }
        if self.alphas.is_empty() {
            return bad("alphas", "must not be empty".into());
        }
        if let Some((i, a)) = self.alphas.iter().enumerate().find(|(_, a)| !(**a > 0.0 && **a < 1.0)) {
            return bad(&format!("alphas[{i}]"), format!("must lie in (0, 1), got {a}"));
        }
        if !(self.tau_lb > 0.0 && self.tau_lb < self.tau_ub && self.tau_ub < 1.0) {
            return bad("tau_lb", format!("need 0 < tau_lb < tau_ub < 1 (got {}, {})", self.tau_lb, self.tau_ub));
        }
        if !(self.dgp.rho > -1.0 && self.dgp.rho < 1.0) {
            return bad("dgp.rho", format!("must lie in (-1, 1), got {}", self.dgp.rho));
        }
        if self.probe_per_cell == 0 {
            return bad("probe_per_cell", "must be positive".into());
        }
        Ok(())
    }
}

/// Axis-aligned evaluation region.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.lo.len()).map(|k| self.width(k)).product()
    }
}

/// Draws one sample of size `n` from the design.
pub fn simulate_sample<R: Rng + ?Sized>(design: &McDesign, rng: &mut R) -> Result<DidSample> {
    if design.n < 4 {
        return Err(Error::Domain(format!("sample size must be at least 4, got {}", design.n)));
    }
    let dgp = &design.dgp;
    let half = design.n / 2;
    let cross = (1.0 - dgp.rho * dgp.rho).sqrt();
    let observations = (0..design.n)
        .map(|i| {
            let period = i >= half;
            let treated: bool = rng.random();
            let mu = dgp.mean(treated, period);
            let y = if design.dim == 1 {
                let e: f64 = StandardNormal.sample(rng);
                vec![mu + e]
            } else {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                vec![mu + z1, mu + dgp.rho * z1 + cross * z2]
            };
            Observation::new(y, treated, period)
        })
        .collect();
    DidSample::new(design.dim, observations)
}

/// Population value of the target at `x` (requires `δ = 0`).
pub fn truth(target: TargetKind, design: &McDesign, x: &[f64]) -> Result<f64> {
    if design.dgp.delta != 0.0 {
        return Err(Error::UnsupportedTruth { delta: design.dgp.delta });
    }
    match target {
        TargetKind::Dtt => Ok(0.0),
        TargetKind::Cf => {
            let mu = design.dgp.counterfactual_mean();
            if design.dim == 1 {
                Ok(std_normal_cdf(x[0] - mu))
            } else {
                binormal_lower_cdf(x[0] - mu, x[1] - mu, design.dgp.rho)
            }
        }
    }
}

/// Evaluation region of a target.
///
/// * d = 1, DTT: empirical `τ_lb`/`τ_ub` quantiles of the pooled outcomes.
/// * d = 1, CF: population counterfactual quantiles.
/// * d = 2, DTT: `[−c, c]²` with mass 0.9 under the equal mixture of the four
///   group distributions.
/// * d = 2, CF: diagonal points with counterfactual orthant probability
///   `τ_lb` and `τ_ub`.
pub fn select_region(target: TargetKind, design: &McDesign, sample: &DidSample) -> Result<Region> {
    let mu = design.dgp.counterfactual_mean();
    let (lo, hi) = match (design.dim, target) {
        (1, TargetKind::Dtt) => (
            empirical_quantile(sample.outcomes(), design.tau_lb)?,
            empirical_quantile(sample.outcomes(), design.tau_ub)?,
        ),
        (1, TargetKind::Cf) => (
            mu + std_normal_quantile(design.tau_lb)?,
            mu + std_normal_quantile(design.tau_ub)?,
        ),
        (2, TargetKind::Dtt) => {
            let c = mixture_half_width(design)?;
            (-c, c)
        }
        (2, TargetKind::Cf) => {
            let rho = design.dgp.rho;
            let solve = |p: f64| {
                bisect(
                    |q| binormal_lower_cdf(q - mu, q - mu, rho).unwrap_or(f64::NAN) - p,
                    mu - 20.0,
                    mu + 20.0,
                    1e-12,
                )
            };
            (solve(design.tau_lb)?, solve(design.tau_ub)?)
        }
        (d, _) => return Err(Error::Domain(format!("unsupported dimension {d}"))),
    };
    Ok(Region {
        lo: vec![lo; design.dim],
        hi: vec![hi; design.dim],
    })
}

/// `c > 0` with `F(c, c) − F(−c, −c) = τ_ub − τ_lb` for the mixture CDF `F`.
fn mixture_half_width(design: &McDesign) -> Result<f64> {
    let dgp = design.dgp;
    let mass = design.tau_ub - design.tau_lb;
    let mixture = |x: f64| -> f64 {
        let mut total = 0.0;
        for treated in [false, true] {
            for period in [false, true] {
                let m = dgp.mean(treated, period);
                total += binormal_lower_cdf(x - m, x - m, dgp.rho).unwrap_or(f64::NAN);
            }
        }
        total / 4.0
    };
    bisect(|c| mixture(c) - mixture(-c) - mass, 1e-9, 20.0, 1e-12)
}

/// Normalised continuous L2 error `(|X|⁻¹ ∫_X (F_L − F)²)^{1/2}` by trapezoid
/// quadrature on `probe`, which must span `region` exactly.
pub fn l2_error<F: Fn(&[f64]) -> f64>(field: &GridField, truth_fn: F, region: &Region, probe: &ProbeGrid) -> Result<f64> {
    let volume = region.volume();
    if !(volume > 0.0) {
        return Err(Error::Domain("degenerate evaluation region".into()));
    }
    if probe.lo() != region.lo.as_slice() || probe.hi() != region.hi.as_slice() {
        return Err(Error::Shape("probe does not span the evaluation region".into()));
    }
    let mut failure = None;
    let integral = trapezoid_integral(
        |x| match field.eval(x) {
            Ok(v) => (v - truth_fn(x)).powi(2),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        probe,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok((integral / volume).sqrt()),
    }
}

/// Outcome of one target in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub target: TargetKind,
    pub region_lo: f64,
    pub region_hi: f64,
    pub grid_size: usize,
    pub l2: f64,
    /// Coverage indicator per level, in the order of `McDesign::alphas`.
    pub covered: Vec<bool>,
    /// Whether the band excludes zero somewhere, per level.
    pub rejects_zero: Vec<bool>,
    pub critical_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub targets: Vec<TargetRecord>,
}

/// Aggregated results of one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    /// Median realised grid size (lower median for even R).
    pub grid_size: usize,
    pub l2: f64,
    /// Coverage frequency per level, in the order of `McDesign::alphas`.
    pub coverage: Vec<f64>,
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    /// Nominal coverage levels `1 − α`, aligned with the coverage vectors.
    pub levels: Vec<f64>,
    pub dtt: TargetSummary,
    pub cf: TargetSummary,
}

#[derive(Debug, Clone)]
pub struct McReport {
    pub row: McRow,
    pub replications: Vec<ReplicationRecord>,
}

impl McReport {
    /// Per-replication audit log as CSV.
    pub fn write_audit_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "replication".to_string(),
            "target".into(),
            "lo".into(),
            "hi".into(),
            "L".into(),
            "l2".into(),
        ];
        for level in &self.row.levels {
            header.push(format!("covered{}", level_tag(*level)));
            header.push(format!("t{}", level_tag(*level)));
        }
        w.write_record(&header)?;
        for rep in &self.replications {
            for t in &rep.targets {
                let mut row = vec![
                    rep.replication.to_string(),
                    t.target.to_string(),
                    format!("{:?}", t.region_lo),
                    format!("{:?}", t.region_hi),
                    t.grid_size.to_string(),
                    format!("{:?}", t.l2),
                ];
                for (c, cv) in t.covered.iter().zip(&t.critical_values) {
                    row.push((*c as u8).to_string());
                    row.push(format!("{cv:?}"));
                }
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn run_replication(design: &McDesign, r: usize) -> Result<ReplicationRecord> {
    let rep_seed = derive_seed(design.seed, r as u64);
    let sample = simulate_sample(design, &mut stream_rng(rep_seed, 0))?;
    let mut targets = Vec::with_capacity(2);
    for (m, target) in TargetKind::ALL.into_iter().enumerate() {
        let region = select_region(target, design, &sample)?;
        let size = grid_rule(design.a, design.b, region.width(0), design.n);
        let grid = Arc::new(TensorGrid::new(region.lo.clone(), region.hi.clone(), size)?);
        let config = BootstrapConfig::multinomial(design.draws, derive_seed(rep_seed, 1 + m as u64));
        let bands = build_bands(&sample, target, &grid, &config, &design.alphas, None)?;
        let probe = grid.probe(design.probe_per_cell)?;
        let truth_fn = |x: &[f64]| truth(target, design, x).unwrap_or(f64::NAN);
        let covered = bands
            .iter()
            .map(|band| covers(band, truth_fn, &probe))
            .collect::<Result<Vec<_>>>()?;
        let l2 = l2_error(&bands[0].center, truth_fn, &region, &probe)?;
        targets.push(TargetRecord {
            target,
            region_lo: region.lo[0],
            region_hi: region.hi[0],
            grid_size: size,
            l2,
            covered,
            rejects_zero: bands.iter().map(rejects_zero).collect(),
            critical_values: bands.iter().map(|b| b.critical_value).collect(),
        });
    }
    Ok(ReplicationRecord { replication: r, targets })
}

/// Runs all replications of a design. Each replication draws from its own
/// seed stream and the aggregation is in replication order, so the result is
/// independent of the thread count.
pub fn run_design(design: &McDesign) -> Result<McReport> {
    design.validate()?;
    truth(TargetKind::Cf, design, &vec![0.0; design.dim])?;
    let replications = (0..design.replications)
        .into_par_iter()
        .map(|r| {
            run_replication(design, r).map_err(|e| Error::Replication {
                index: r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summarize = |m: usize| {
        let recs: Vec<&TargetRecord> = replications.iter().map(|r| &r.targets[m]).collect();
        let count = recs.len() as f64;
        let mut sizes: Vec<usize> = recs.iter().map(|t| t.grid_size).collect();
        sizes.sort_unstable();
        TargetSummary {
            grid_size: sizes[(sizes.len() - 1) / 2],
            l2: recs.iter().map(|t| t.l2).sum::<f64>() / count,
            coverage: (0..design.alphas.len())
                .map(|j| recs.iter().filter(|t| t.covered[j]).count() as f64 / count)
                .collect(),
        }
    };
    let row = McRow {
        n: design.n,
        a: design.a,
        b: design.b,
        levels: design.alphas.iter().map(|a| 1.0 - a).collect(),
        dtt: summarize(0),
        cf: summarize(1),
    };
    Ok(McReport { row, replications })
}

/// A collection of designs sharing everything but `(n, a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McStudy {
    pub dim: usize,
    pub ns: Vec<usize>,
    /// `(a, b)` grid-rule pairs.
    pub rules: Vec<(f64, f64)>,
    pub replications: usize,
    pub draws: usize,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub dgp: Dgp,
    #[serde(default = "default_tau_lb")]
    pub tau_lb: f64,
    #[serde(default = "default_tau_ub")]
    pub tau_ub: f64,
    #[serde(default)]
    pub probe_per_cell: Option<usize>,
}

fn default_alphas() -> Vec<f64> {
    vec![0.10, 0.05, 0.01]
}

fn default_tau_lb() -> f64 {
    0.05
}

fn default_tau_ub() -> f64 {
    0.95
}

impl McStudy {
    /// Named presets: `uni-desk`, `biv-desk` (desk scale) and `uni-full`,
    /// `biv-full` (the complete 36-cell sweeps at R = 1000, B = 499).
    pub fn preset(name: &str) -> Option<Self> {
        let desk = |dim| McStudy {
            dim,
            ns: if dim == 1 { vec![250, 500] } else { vec![250] },
            rules: vec![(1.0, 0.3)],
            replications: if dim == 1 { 200 } else { 100 },
            draws: 199,
            alphas: default_alphas(),
            seed: 20_240_501,
            dgp: Dgp::default(),
            tau_lb: 0.05,
            tau_ub: 0.95,
            probe_per_cell: None,
        };
        let full = |dim| McStudy {
            ns: vec![250, 500, 1000, 1500],
            rules: [0.30, 0.35, 0.40]
                .iter()
                .flat_map(|&b| [1.0, 2.0, 4.0].map(|a| (a, b)))
                .collect(),
            replications: 1000,
            draws: 499,
            ..desk(dim)
        };
        match name {
            "uni-desk" => Some(desk(1)),
            "biv-desk" => Some(desk(2)),
            "uni-full" => Some(full(1)),
            "biv-full" => Some(full(2)),
            _ => None,
        }
    }

    /// Number of bootstrap estimates the study performs, a crude cost measure.
    pub fn workload(&self) -> usize {
        self.ns.len() * self.rules.len() * self.replications * self.draws
    }

    /// Expands into validated designs, `n` outermost then rules in order.
    pub fn designs(&self) -> Result<Vec<McDesign>> {
        if self.ns.is_empty() {
            return Err(Error::Config {
                field: "ns".into(),
                message: "must list at least one sample size".into(),
            });
        }
        if self.rules.is_empty() {
            return Err(Error::Config {
                field: "rules".into(),
                message: "must list at least one (a, b) pair".into(),
            });
        }
        let mut out = Vec::new();
        for (i, &n) in self.ns.iter().enumerate() {
            for (j, &(a, b)) in self.rules.iter().enumerate() {
                let mut d = McDesign::new(self.dim, n, a, b).with_scale(self.replications, self.draws).with_seed(self.seed);
                d.alphas = self.alphas.clone();
                d.dgp = self.dgp;
                d.tau_lb = self.tau_lb;
                d.tau_ub = self.tau_ub;
                if let Some(p) = self.probe_per_cell {
                    d.probe_per_cell = p;
                }
                d.validate().map_err(|e| match e {
                    Error::Config { field, message } => {
                        let field = match field.as_str() {
                            "n" => format!("ns[{i}]"),
                            "a" => format!("rules[{j}].a"),
                            "b" => format!("rules[{j}].b"),
                            _ => field,
                        };
                        Error::Config { field, message }
                    }
                    other => other,
                })?;
                out.push(d);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

fn level_tag(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}")
    }
}

/// Table header: `n, a, b, L_DTT, L2_DTT, cov.., L_CF, L2_CF, cov..`.
pub fn table_header(levels: &[f64]) -> Vec<String> {
    let mut h = vec!["n".to_string(), "a".into(), "b".into()];
    for m in TargetKind::ALL {
        h.push(format!("L_{m}"));
        h.push(format!("L2_{m}"));
        h.extend(levels.iter().map(|l| format!("cov{}", level_tag(*l))));
    }
    h
}

fn table_cells(row: &McRow) -> Vec<String> {
    let mut c = vec![row.n.to_string(), format!("{:.2}", row.a), format!("{:.2}", row.b)];
    for s in [&row.dtt, &row.cf] {
        c.push(s.grid_size.to_string());
        c.push(format!("{:.3}", s.l2));
        c.extend(s.coverage.iter().map(|v| format!("{v:.3}")));
    }
    c
}

/// Renders result rows as CSV or a markdown table.
pub fn emit_table(rows: &[McRow], format: TableFormat) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Domain("cannot emit an empty table".into()))?;
    if rows.iter().any(|r| r.levels != first.levels) {
        return Err(Error::Shape("rows disagree on coverage levels".into()));
    }
    let header = table_header(&first.levels);
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            writeln!(out, "{}", header.join(",")).unwrap();
            for row in rows {
                writeln!(out, "{}", table_cells(row).join(",")).unwrap();
            }
        }
        TableFormat::Markdown => {
            writeln!(out, "| {} |", header.join(" | ")).unwrap();
            writeln!(out, "|{}", "---:|".repeat(header.len())).unwrap();
            for row in rows {
                writeln!(out, "| {} |", table_cells(row).join(" | ")).unwrap();
            }
        }
    }
    Ok(out)
}

/// Parses a table produced by [`emit_table`] in CSV format.
pub fn parse_table_csv(text: &str) -> Result<Vec<McRow>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or(Error::Data {
            row: 0,
            message: "empty table".into(),
        })?
        .split(',')
        .collect();
    let per_target = (header.len().saturating_sub(3)) / 2;
    if header.len() < 7 || !(header.len() - 3).is_multiple_of(2) || header[..3] != ["n", "a", "b"] {
        return Err(Error::Data {
            row: 0,
            message: "unexpected table header".into(),
        });
    }
    let levels: Vec<f64> = header[5..3 + per_target]
        .iter()
        .map(|h| {
            h.strip_prefix("cov")
                .and_then(|p| p.parse::<f64>().ok())
                .map(|p| p / 100.0)
                .ok_or_else(|| Error::Data {
                    row: 0,
                    message: format!("bad coverage column `{h}`"),
                })
        })
        .collect::<Result<_>>()?;
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |message: String| Error::Data { row: i + 1, message };
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(bad(format!("expected {} cells, got {}", header.len(), cells.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
            let int = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("`{s}`: {e}")));
            let target = |off: usize| -> Result<TargetSummary> {
                Ok(TargetSummary {
                    grid_size: int(cells[off])?,
                    l2: num(cells[off + 1])?,
                    coverage: cells[off + 2..off + per_target].iter().map(|s| num(s)).collect::<Result<_>>()?,
                })
            };
            Ok(McRow {
                n: int(cells[0])?,
                a: num(cells[1])?,
                b: num(cells[2])?,
                levels: levels.clone(),
                dtt: target(3)?,
                cf: target(3 + per_target)?,
            })
        })
        .collect()
}
