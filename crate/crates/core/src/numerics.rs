//! Scalar numerics shared by the rest of the crate: normal and bivariate
//! normal distribution functions, order-statistic quantiles, bracketing root
//! finding and tensor-product trapezoid quadrature.
//!
//! Everything here is a pure function of its inputs.

#![allow(clippy::excessive_precision)]

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const FRAC_1_2PI: f64 = 1.0 / (2.0 * PI);
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Standard normal distribution function, via the complementary error
/// function so that the lower tail keeps full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

// Acklam's rational approximation, relative error ~1.15e-9 before refinement.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Quantile function of the standard normal distribution.
///
/// A rational first guess is polished by one Halley step against
/// [`std_normal_cdf`], which brings `|Φ(q) − p|` down to rounding level.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    const P_LOW: f64 = 0.02425;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement.
    let e = std_normal_cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

// Gauss-Legendre half-rules (weight, abscissa) from Genz's BVND.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705e+00, -0.9324695142031522e+00),
    (0.3607615730481384e+00, -0.6612093864662647e+00),
    (0.4679139345726904e+00, -0.2386191860831970e+00),
];
const GL12: [(f64, f64); 6] = [
    (0.4717533638651177e-01, -0.9815606342467191e+00),
    (0.1069393259953183e+00, -0.9041172563704750e+00),
    (0.1600783285433464e+00, -0.7699026741943050e+00),
    (0.2031674267230659e+00, -0.5873179542866171e+00),
    (0.2334925365383547e+00, -0.3678314989981802e+00),
    (0.2491470458134029e+00, -0.1252334085114692e+00),
];
const GL20: [(f64, f64); 10] = [
    (0.1761400713915212e-01, -0.9931285991850949e+00),
    (0.4060142980038694e-01, -0.9639719272779138e+00),
    (0.6267204833410906e-01, -0.9122344282513259e+00),
    (0.8327674157670475e-01, -0.8391169718222188e+00),
    (0.1019301198172404e+00, -0.7463319064601508e+00),
    (0.1181945319615184e+00, -0.6360536807265150e+00),
    (0.1316886384491766e+00, -0.5108670019508271e+00),
    (0.1420961093183821e+00, -0.3737060887154196e+00),
    (0.1491729864726037e+00, -0.2277858511416451e+00),
    (0.1527533871307259e+00, -0.7652652113349733e-01),
];

/// `P(Z1 > h, Z2 > k)` for a standard bivariate normal with correlation `r`
/// (Drezner-Wesolowsky single-integral reduction, Genz's double precision
/// variant).
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r != 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for &(w, x) in quad {
                for s in [-1.0, 1.0] {
                    let sn = (asr * (s * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (4.0 * PI);
        }
        return bvn + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    let mut k = k;
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * SQRT_2PI
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for s in [-1.0, 1.0] {
                let xs = (a * (s * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn *= -FRAC_1_2PI;
    }
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-k)).max(0.0)
    }
}

/// Lower-orthant probability `P(Z1 ≤ x1, Z2 ≤ x2)` of a standard bivariate
/// normal with correlation `rho`. Infinite limits are allowed.
pub fn binormal_lower_cdf(x1: f64, x2: f64, rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::Domain(format!(
            "correlation must lie in (-1, 1), got {rho}"
        )));
    }
    if x1.is_nan() || x2.is_nan() {
        return Err(Error::Domain("NaN limit".into()));
    }
    if x1 == f64::NEG_INFINITY || x2 == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if x1 == f64::INFINITY {
        return Ok(std_normal_cdf(x2));
    }
    if x2 == f64::INFINITY {
        return Ok(std_normal_cdf(x1));
    }
    Ok(bvn_upper(-x1, -x2, rho).clamp(0.0, 1.0))
}

/// `⌈x⌉` with a relative slack so that products like `0.95 * 500` that land a
/// few ulp above an integer are not bumped to the next one.
pub(crate) fn ceil_index(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// Empirical quantile as the `⌈p·m⌉`-th order statistic (left-continuous
/// inverse of the empirical distribution function).
pub fn empirical_quantile(sample: &[f64], p: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Domain("empirical quantile of an empty sample".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0, 1), got {p}"
        )));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_of_sorted(&sorted, p))
}

/// Same convention as [`empirical_quantile`] on already sorted data.
pub(crate) fn quantile_of_sorted(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    let k = (ceil_index(p * m as f64) as usize).clamp(1, m);
    sorted[k - 1]
}

/// Bisection on a bracket with a sign change. Stops when the bracket is no
/// wider than `tol` and returns its midpoint.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(Error::Domain(format!(
            "bisection needs lo <= hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A tensor lattice of quadrature / probe points over a hyper-rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    counts: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ProbeGrid {
    pub fn new(counts: Vec<usize>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if counts.is_empty() || counts.len() != lo.len() || lo.len() != hi.len() {
            return Err(Error::Shape(
                "probe counts and bounds must be nonempty and of equal length".into(),
            ));
        }
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::Shape("probe needs at least 2 points per axis".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::Shape(format!(
                "probe region requires finite lo < hi on every axis ({lo:?}, {hi:?})"
            )));
        }
        Ok(Self { counts, lo, hi })
    }

    /// Same number of points on every axis.
    pub fn uniform(points: usize, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(vec![points; lo.len()], lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate `i` (0-based) on `axis`; the last point equals `hi` exactly.
    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let n = self.counts[axis];
        if i + 1 == n {
            self.hi[axis]
        } else {
            let h = (self.hi[axis] - self.lo[axis]) / (n - 1) as f64;
            self.lo[axis] + i as f64 * h
        }
    }

    /// Per-axis coordinate vectors.
    pub fn axes(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|k| (0..self.counts[k]).map(|i| self.coordinate(k, i)).collect())
            .collect()
    }

    /// Visits every point in lexicographic order (last axis fastest) together
    /// with its tensor trapezoid weight.
    pub fn for_each_weighted<F: FnMut(&[f64], f64)>(&self, mut visit: F) {
        let axes = self.axes();
        let axis_weights: Vec<Vec<f64>> = axes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let h = (self.hi[k] - self.lo[k]) / (a.len() - 1) as f64;
                (0..a.len())
                    .map(|i| if i == 0 || i + 1 == a.len() { 0.5 * h } else { h })
                    .collect()
            })
            .collect();
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut point: Vec<f64> = axes.iter().map(|a| a[0]).collect();
        loop {
            let w: f64 = (0..d).map(|k| axis_weights[k][idx[k]]).product();
            visit(&point, w);
            // odometer increment, last axis fastest
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.counts[k] {
                    point[k] = axes[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                point[k] = axes[k][0];
            }
        }
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each_weighted(|p, _| out.push(p.to_vec()));
        out
    }
}

/// Composite tensor-product trapezoid rule over the probe's hyper-rectangle.
pub fn trapezoid_integral<F>(mut f: F, probe: &ProbeGrid) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut total = 0.0;
    probe.for_each_weighted(|p, w| total += w * f(p));
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route to Φ₂: one-dimensional integral of φ(x)·Φ((k−ρx)/√(1−ρ²))
    /// over (−∞, h] by adaptive Simpson.
    fn binormal_oracle(h: f64, k: f64, rho: f64) -> f64 {
        let s = (1.0 - rho * rho).sqrt();
        let g = |x: f64| std_normal_pdf(x) * std_normal_cdf((k - rho * x) / s);
        #[allow(clippy::too_many_arguments)]
        fn simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = g(lm);
            let frm = g(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 1e-13 {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(g, a, m, fa, flm, fm, left, depth - 1) + simpson(g, m, b, fm, frm, fb, right, depth - 1)
        }
        let a = -12.0f64;
        let b = h.min(12.0);
        if b <= a {
            return 0.0;
        }
        let (fa, fb, fm) = (g(a), g(b), g(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson(&g, a, b, fa, fm, fb, whole, 40)
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        // Oracle: bisection of the erfc-based cdf to 1e-14.
        for (p, frozen) in [(0.75, 0.6744898), (0.975, 1.9599640)] {
            let oracle = bisect(|x| std_normal_cdf(x) - p, 0.0, 5.0, 1e-14).unwrap();
            let q = std_normal_quantile(p).unwrap();
            assert!((q - oracle).abs() < 1e-12, "{p}: {q} vs {oracle}");
            assert!((q - frozen).abs() < 5e-8);
        }
    }

    #[test]
    fn quantile_rejects_outside_unit_interval() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(std_normal_quantile(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn quantile_inverts_cdf_tightly() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..100_000 {
            let p = i as f64 / 100_000.0;
            let q = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(q) - p).abs() <= 1e-12, "p={p}");
            assert!(q > prev);
            prev = q;
        }
        for p in [1e-300, 1e-20, 1e-10, 1.0 - 1e-10] {
            let q = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(q) - p).abs() <= 1e-12);
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.6448536) - 0.95).abs() < 1e-8);
        // erfc(8/√2)/2 = 6.220960574271785e-16
        let tail = std_normal_cdf(-8.0);
        assert!((tail - 6.220960574271785e-16).abs() < 1e-25, "{tail:e}");
        for i in -400..=400 {
            let x = i as f64 / 50.0;
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn binormal_examples() {
        assert!((binormal_lower_cdf(0.0, 0.0, 0.0).unwrap() - 0.25).abs() < 1e-15);
        // Sheppard: 1/4 + asin(ρ)/(2π)
        for rho in [-0.95, -0.5, 0.3, 0.5, 0.8, 0.95, 0.99] {
            let sheppard = 0.25 + f64::asin(rho) / (2.0 * PI);
            let v = binormal_lower_cdf(0.0, 0.0, rho).unwrap();
            assert!((v - sheppard).abs() < 1e-12, "rho={rho}: {v} vs {sheppard}");
        }
        assert!((binormal_lower_cdf(0.0, 0.0, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((binormal_lower_cdf(1e9, 1e9, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(binormal_lower_cdf(f64::NEG_INFINITY, 2.0, 0.5).unwrap(), 0.0);
        assert_eq!(binormal_lower_cdf(f64::INFINITY, 0.0, 0.5).unwrap(), 0.5);
    }

    #[test]
    fn binormal_rejects_degenerate_correlation() {
        for rho in [1.0, -1.0, 2.0, f64::NAN] {
            assert!(binormal_lower_cdf(0.0, 0.0, rho).is_err());
        }
    }

    #[test]
    fn binormal_matches_quadrature_oracle() {
        for &rho in &[-0.97, -0.93, -0.6, -0.2, 0.0, 0.1, 0.5, 0.74, 0.8, 0.93, 0.97] {
            for &h in &[-2.5, -1.0, -0.3, 0.0, 0.4, 1.7, 3.0] {
                for &k in &[-2.0, -0.5, 0.0, 0.6, 2.2] {
                    let v = binormal_lower_cdf(h, k, rho).unwrap();
                    let o = binormal_oracle(h, k, rho);
                    assert!((v - o).abs() < 1e-7, "({h},{k},{rho}): {v} vs {o}");
                }
            }
        }
    }

    #[test]
    fn binormal_independence_factorises() {
        for i in 0..21 {
            for j in 0..21 {
                let x1 = -3.0 + 0.3 * i as f64;
                let x2 = -3.0 + 0.3 * j as f64;
                let v = binormal_lower_cdf(x1, x2, 0.0).unwrap();
                assert!((v - std_normal_cdf(x1) * std_normal_cdf(x2)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn binormal_nondecreasing_on_lattice() {
        for rho in [-0.8, 0.0, 0.5, 0.95] {
            let vals: Vec<Vec<f64>> = (0..25)
                .map(|i| {
                    (0..25)
                        .map(|j| {
                            binormal_lower_cdf(-4.0 + i as f64 / 3.0, -4.0 + j as f64 / 3.0, rho)
                                .unwrap()
                        })
                        .collect()
                })
                .collect();
            for i in 0..25 {
                for j in 0..25 {
                    if i > 0 {
                        assert!(vals[i][j] + 1e-12 >= vals[i - 1][j]);
                    }
                    if j > 0 {
                        assert!(vals[i][j] + 1e-12 >= vals[i][j - 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn empirical_quantile_examples() {
        assert_eq!(empirical_quantile(&[4.0, 2.0, 3.0, 1.0], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[7.0], 0.95).unwrap(), 7.0);
        let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_quantile(&hundred, 0.95).unwrap(), 95.0);
        // 0.7 * 10 is 7.000000000000001 in binary floating point
        let ten: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(empirical_quantile(&ten, 0.7).unwrap(), 7.0);
        assert!(empirical_quantile(&[], 0.5).is_err());
    }

    #[test]
    fn bisect_examples() {
        assert!((bisect(|x| x - 1.0, 0.0, 2.0, 1e-10).unwrap() - 1.0).abs() < 1e-10);
        let r2 = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-10).unwrap();
        assert!((r2 - 2f64.sqrt()).abs() < 1e-10);
        let z = bisect(|x| std_normal_cdf(x) - 0.95, 0.0, 5.0, 1e-10).unwrap();
        assert!((z - 1.6448536).abs() < 1e-7);
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn trapezoid_examples() {
        let p = ProbeGrid::uniform(1001, vec![0.0], vec![5.0]).unwrap();
        assert!((trapezoid_integral(|_| 1.0, &p) - 5.0).abs() < 1e-12);
        let p = ProbeGrid::uniform(3, vec![0.0], vec![1.0]).unwrap();
        assert!((trapezoid_integral(|x| x[0], &p) - 0.5).abs() < 1e-15);
        let p = ProbeGrid::uniform(100_001, vec![0.0], vec![1.0]).unwrap();
        assert!((trapezoid_integral(|x| x[0] * x[0], &p) - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_exact_on_multiaffine_and_quadratic_convergence() {
        let p = ProbeGrid::new(vec![3, 4], vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        // ∫∫ (1 + x)(2 − y) over [0,2]×[−1,1] = 4 · 4 = 16
        let v = trapezoid_integral(|x| (1.0 + x[0]) * (2.0 - x[1]), &p);
        assert!((v - 16.0).abs() < 1e-12);

        let exact = 1.0 - 1f64.cos();
        let err = |n: usize| {
            let p = ProbeGrid::uniform(n, vec![0.0], vec![1.0]).unwrap();
            (trapezoid_integral(|x| x[0].sin(), &p) - exact).abs()
        };
        for n in [11, 21, 41] {
            let ratio = err(n) / err(2 * n - 1);
            assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        }
    }

    #[test]
    fn probe_validation() {
        assert!(ProbeGrid::uniform(1, vec![0.0], vec![1.0]).is_err());
        assert!(ProbeGrid::uniform(3, vec![1.0], vec![1.0]).is_err());
        assert!(ProbeGrid::new(vec![3], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        let p = ProbeGrid::uniform(7, vec![0.1], vec![0.3]).unwrap();
        assert_eq!(p.coordinate(0, 6), 0.3);
        assert_eq!(p.points().len(), 7);
    }
}
