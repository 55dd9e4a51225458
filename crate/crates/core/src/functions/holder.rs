//! Empirical Hölder exponent from the upper envelope of pair increments.

use rand::Rng;
use serde::Serialize;

use crate::dimension::least_squares;
use crate::error::{FracError, FracResult};
use crate::geometry::SampledMeasure;
use crate::rng;
use crate::tree::CellTree;

const DEFAULT_PAIRS: usize = 100_000;
const MIN_BIN: usize = 30;
const BIN_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub s_hat: f64,
    pub c_hat: f64,
    pub pair_count: usize,
    pub scale_range: (f64, f64),
    pub degenerate: bool,
}

/// [`estimate_holder_exponent_with`] using 10⁵ pairs.
pub fn estimate_holder_exponent<F>(f: F, points: &SampledMeasure, seed: u64) -> FracResult<HolderReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    estimate_holder_exponent_with(f, points, DEFAULT_PAIRS, seed)
}

/// Fits `log₂|f(x) − f(y)|` against `log₂|x − y|` through the 95th
/// percentile of each half-octave distance bin.
///
/// Partners are taken at log-uniform offsets along a locality-preserving
/// order of the points, so every scale from the sample spacing up to a
/// quarter of the diameter is populated.
pub fn estimate_holder_exponent_with<F>(
    f: F,
    points: &SampledMeasure,
    pairs: usize,
    seed: u64,
) -> FracResult<HolderReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = points.len();
    if n < 100 {
        return Err(FracError::InvalidParameter(format!("need ≥ 100 points, got {n}")));
    }
    let values: Vec<f64> = points.points().map(&f).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FracError::InvalidParameter("function returned a non-finite value".into()));
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Ok(HolderReport {
            s_hat: 1.0,
            c_hat: 0.0,
            pair_count: 0,
            scale_range: (0.0, 0.0),
            degenerate: true,
        });
    }
    let tree = CellTree::morton(points.dim(), points.coords());
    let order: Vec<usize> = (0..n).map(|p| tree.point_at(p)).collect();
    let max_dist = points.bbox_diameter() / 4.0;
    let mut rng = rng::stream(seed, 0x686f);
    let log_n = (n as f64).log2();
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let p = rng.gen_range(0..n);
        let k = (2f64.powf(rng.gen::<f64>() * log_n) as usize).max(1);
        let q = if p + k < n { p + k } else if p >= k { p - k } else { continue };
        let (a, b) = (order[p], order[q]);
        let dx = points
            .point(a)
            .iter()
            .zip(points.point(b))
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        if dx <= 0.0 || dx > max_dist {
            continue;
        }
        let df = (values[a] - values[b]).abs();
        samples.push((dx.log2(), if df > 0.0 { df.log2() } else { f64::NEG_INFINITY }));
    }
    let mut bins: std::collections::BTreeMap<i64, Vec<(f64, f64)>> = Default::default();
    for &(lx, ly) in &samples {
        bins.entry((lx / BIN_WIDTH).floor() as i64).or_default().push((lx, ly));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (_, mut bin) in bins {
        if bin.len() < MIN_BIN {
            continue;
        }
        bin.sort_by(|a, b| a.1.total_cmp(&b.1));
        let q = bin[((bin.len() as f64) * 0.95).floor() as usize].1;
        if !q.is_finite() {
            continue;
        }
        xs.push(bin.iter().map(|p| p.0).sum::<f64>() / bin.len() as f64);
        ys.push(q);
    }
    if xs.len() < 3 {
        return Err(FracError::InvalidParameter("too few populated distance bins".into()));
    }
    let (slope, intercept, _) = least_squares(&xs, &ys);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(HolderReport {
        s_hat: slope.clamp(f64::MIN_POSITIVE, 1.0),
        c_hat: 2f64.powf(intercept),
        pair_count: samples.len(),
        scale_range: (2f64.powf(lo), 2f64.powf(hi)),
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::WeierstrassParams;
    use crate::geometry::{generate_attractor, IfsSpec};

    #[test]
    fn constant_is_degenerate() {
        let mu = generate_attractor(&IfsSpec::unit_interval(), 10).unwrap();
        let rep = estimate_holder_exponent(|_| 3.0, &mu, 1).unwrap();
        assert!(rep.degenerate);
        assert_eq!((rep.s_hat, rep.c_hat), (1.0, 0.0));
    }

    #[test]
    fn identity_is_lipschitz() {
        let mu = generate_attractor(&IfsSpec::unit_interval(), 14).unwrap();
        let rep = estimate_holder_exponent(|x| x[0], &mu, 1).unwrap();
        assert!((rep.s_hat - 1.0).abs() <= 0.05, "{rep:?}");
    }

    #[test]
    fn weierstrass_half() {
        let mu = generate_attractor(&IfsSpec::unit_interval(), 16).unwrap();
        let w = WeierstrassParams::random(1, 0.5, 2.0, 40, 42).unwrap();
        let rep = estimate_holder_exponent(|x| w.value(x), &mu, 5).unwrap();
        assert!(rep.s_hat >= 0.45 && rep.s_hat <= 0.60, "{rep:?}");
    }

    #[test]
    fn too_few_points() {
        let mu = generate_attractor(&IfsSpec::unit_interval(), 5).unwrap();
        assert!(estimate_holder_exponent(|x| x[0], &mu, 1).is_err());
    }
}
