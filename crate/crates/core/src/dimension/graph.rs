//! Graph clouds `(x, f(x))` and their box counts.
//!
//! A finite graph sample is far sparser than the graph it represents: over
//! one grid column of side `2^{-j}` the true graph of a continuous function
//! fills the whole vertical range between its extreme values, while a
//! tally of the sample only sees isolated points. The counter here walks
//! the cell hierarchy of the base sample and, once a cell fits in a single
//! column, counts the vertical cubes spanned by its values. A cell is split
//! further while its children's vertical ranges leave gaps, so disconnected
//! pieces of the base set are not bridged.

use rayon::prelude::*;
use serde::Serialize;

use crate::dimension::{cell_index, least_squares, DimensionEstimate};
use crate::error::{FracError, FracResult};
use crate::geometry::SampledMeasure;
use crate::tree::CellTree;

/// Sample `(x, f(x))` of a graph over a sampled base measure.
#[derive(Debug, Clone)]
pub struct GraphCloud {
    base_dim: usize,
    lifted: SampledMeasure,
}

impl GraphCloud {
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn len(&self) -> usize {
        self.lifted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifted.is_empty()
    }

    /// Point in `R^{n+1}`.
    pub fn point(&self, i: usize) -> &[f64] {
        self.lifted.point(i)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lifted.point(i)[self.base_dim]
    }

    pub fn base_point(&self, i: usize) -> &[f64] {
        &self.lifted.point(i)[..self.base_dim]
    }

    /// The graph sample as a measure on `R^{n+1}`, carrying the base weights.
    pub fn as_measure(&self) -> &SampledMeasure {
        &self.lifted
    }

    /// Base coordinates, flat.
    pub fn projection(&self) -> Vec<f64> {
        (0..self.len()).flat_map(|i| self.base_point(i).to_vec()).collect()
    }
}

pub fn graph_cloud<F>(mu: &SampledMeasure, f: F) -> FracResult<GraphCloud>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    graph_cloud_try(mu, |x| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FracError::InvalidParameter(format!("non-finite value at {x:?}")))
        }
    })
}

/// Like [`graph_cloud`] for fallible functions; the first error is returned.
pub fn graph_cloud_try<F>(mu: &SampledMeasure, f: F) -> FracResult<GraphCloud>
where
    F: Fn(&[f64]) -> FracResult<f64> + Sync,
{
    let n = mu.dim();
    let values: Vec<f64> =
        (0..mu.len()).into_par_iter().map(|i| f(mu.point(i))).collect::<FracResult<_>>()?;
    let mut coords = Vec::with_capacity(mu.len() * (n + 1));
    for (p, v) in mu.points().zip(&values) {
        coords.extend_from_slice(p);
        coords.push(*v);
    }
    Ok(GraphCloud { base_dim: n, lifted: mu.with_coords(n + 1, coords) })
}

/// Per-cell bounding boxes of base coordinates and values.
struct Pyramid {
    n: usize,
    xlo: Vec<Vec<f64>>,
    xhi: Vec<Vec<f64>>,
    flo: Vec<Vec<f64>>,
    fhi: Vec<Vec<f64>>,
}

impl Pyramid {
    fn build(cloud: &GraphCloud, tree: &CellTree) -> Pyramid {
        let n = cloud.base_dim;
        let depth = tree.depth();
        let mut p = Pyramid {
            n,
            xlo: vec![vec![]; depth + 1],
            xhi: vec![vec![]; depth + 1],
            flo: vec![vec![]; depth + 1],
            fhi: vec![vec![]; depth + 1],
        };
        let cells = tree.cell_count(depth);
        let mut xlo = vec![f64::INFINITY; cells * n];
        let mut xhi = vec![f64::NEG_INFINITY; cells * n];
        let mut flo = vec![f64::INFINITY; cells];
        let mut fhi = vec![f64::NEG_INFINITY; cells];
        for c in 0..cells {
            for pos in tree.range(depth, c) {
                let q = cloud.point(tree.point_at(pos));
                for k in 0..n {
                    xlo[c * n + k] = xlo[c * n + k].min(q[k]);
                    xhi[c * n + k] = xhi[c * n + k].max(q[k]);
                }
                flo[c] = flo[c].min(q[n]);
                fhi[c] = fhi[c].max(q[n]);
            }
        }
        p.xlo[depth] = xlo;
        p.xhi[depth] = xhi;
        p.flo[depth] = flo;
        p.fhi[depth] = fhi;
        for lev in (0..depth).rev() {
            let cells = tree.cell_count(lev);
            let mut xlo = vec![f64::INFINITY; cells * n];
            let mut xhi = vec![f64::NEG_INFINITY; cells * n];
            let mut flo = vec![f64::INFINITY; cells];
            let mut fhi = vec![f64::NEG_INFINITY; cells];
            for c in 0..cells {
                for ch in tree.children(lev, c) {
                    for k in 0..n {
                        xlo[c * n + k] = xlo[c * n + k].min(p.xlo[lev + 1][ch * n + k]);
                        xhi[c * n + k] = xhi[c * n + k].max(p.xhi[lev + 1][ch * n + k]);
                    }
                    flo[c] = flo[c].min(p.flo[lev + 1][ch]);
                    fhi[c] = fhi[c].max(p.fhi[lev + 1][ch]);
                }
            }
            p.xlo[lev] = xlo;
            p.xhi[lev] = xhi;
            p.flo[lev] = flo;
            p.fhi[lev] = fhi;
        }
        p
    }

    fn columns(&self, lev: usize, c: usize, scale: f64) -> (Vec<i64>, Vec<i64>) {
        let n = self.n;
        let lo = (0..n).map(|k| cell_index(self.xlo[lev][c * n + k], scale)).collect();
        let hi = (0..n).map(|k| cell_index(self.xhi[lev][c * n + k], scale)).collect();
        (lo, hi)
    }

    fn rows(&self, lev: usize, c: usize, scale: f64) -> (i64, i64) {
        (cell_index(self.flo[lev][c], scale), cell_index(self.fhi[lev][c], scale))
    }
}

/// Vertical cube count of a graph at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphBoxCount {
    pub j: u32,
    pub count: u64,
    /// Cubes contributed by cells that ran out of samples before resolving.
    pub unresolved: u64,
}

impl GraphBoxCount {
    pub fn unresolved_share(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.unresolved as f64 / self.count as f64).min(1.0)
        }
    }
}

struct ColumnKey {
    lo: Vec<i64>,
    widths: Vec<u32>,
}

impl ColumnKey {
    fn new(cloud: &GraphCloud, scale: f64) -> FracResult<ColumnKey> {
        let (lo, hi) = cloud.as_measure().bbox();
        let n = cloud.base_dim;
        let lo_idx: Vec<i64> = (0..n).map(|k| cell_index(lo[k], scale)).collect();
        let widths: Vec<u32> = (0..n)
            .map(|k| 64 - ((cell_index(hi[k], scale) - lo_idx[k]) as u64).leading_zeros())
            .collect();
        if widths.iter().sum::<u32>() > 128 {
            return Err(FracError::InvalidParameter("grid too fine for column keys".into()));
        }
        Ok(ColumnKey { lo: lo_idx, widths })
    }

    fn key(&self, col: &[i64]) -> u128 {
        let mut key = 0u128;
        for k in 0..col.len() {
            key = (key << self.widths[k]) | (col[k] - self.lo[k]) as u128;
        }
        key
    }
}

fn count_level(
    cloud: &GraphCloud,
    tree: &CellTree,
    pyr: &Pyramid,
    j: u32,
    min_samples: usize,
) -> FracResult<GraphBoxCount> {
    let scale = 2f64.powi(j as i32);
    let keys = ColumnKey::new(cloud, scale)?;
    let n = cloud.base_dim;
    let depth = tree.depth();
    let mut intervals: Vec<(u128, i64, i64)> = Vec::new();
    let mut unresolved = 0u64;
    let mut stack = vec![(0usize, 0usize)];
    while let Some((lev, c)) = stack.pop() {
        let (c0, c1) = pyr.columns(lev, c, scale);
        let (v0, v1) = pyr.rows(lev, c, scale);
        let samples = tree.range(lev, c).len();
        let leaf = lev == depth;
        if c0 == c1 {
            let key = keys.key(&c0);
            if v1 - v0 <= 1 {
                intervals.push((key, v0, v1));
                continue;
            }
            if leaf || samples <= min_samples {
                intervals.push((key, v0, v1));
                unresolved += (v1 - v0 + 1) as u64;
                continue;
            }
            let mut child: Vec<(i64, i64)> =
                tree.children(lev, c).map(|ch| pyr.rows(lev + 1, ch, scale)).collect();
            child.sort_unstable();
            let mut reach = child[0].1;
            let mut gap = false;
            for &(a, b) in &child[1..] {
                if a > reach + 1 {
                    gap = true;
                    break;
                }
                reach = reach.max(b);
            }
            if !gap {
                intervals.push((key, v0, v1));
                continue;
            }
        } else if leaf || samples <= min_samples {
            let mut cols: Vec<u128> = tree
                .range(lev, c)
                .map(|pos| {
                    let q = cloud.base_point(tree.point_at(pos));
                    let col: Vec<i64> = (0..n).map(|k| cell_index(q[k], scale)).collect();
                    keys.key(&col)
                })
                .collect();
            cols.sort_unstable();
            cols.dedup();
            for key in cols {
                intervals.push((key, v0, v1));
                unresolved += (v1 - v0 + 1) as u64;
            }
            continue;
        }
        for ch in tree.children(lev, c) {
            stack.push((lev + 1, ch));
        }
    }
    intervals.sort_unstable();
    let mut count = 0u64;
    let mut cur: Option<(u128, i64, i64)> = None;
    for (key, a, b) in intervals {
        match cur {
            Some((k, lo, hi)) if k == key && a <= hi + 1 => cur = Some((k, lo, hi.max(b))),
            _ => {
                if let Some((_, lo, hi)) = cur {
                    count += (hi - lo + 1) as u64;
                }
                cur = Some((key, a, b));
            }
        }
    }
    if let Some((_, lo, hi)) = cur {
        count += (hi - lo + 1) as u64;
    }
    Ok(GraphBoxCount { j, count, unresolved: unresolved.min(count) })
}

/// Box counts of the graph at each requested level.
pub fn graph_box_counts(cloud: &GraphCloud, levels: &[u32], min_samples: usize) -> FracResult<Vec<GraphBoxCount>> {
    if cloud.is_empty() {
        return Err(FracError::EmptyInput("empty graph cloud".into()));
    }
    let tree = CellTree::for_measure(cloud.as_measure());
    let pyr = Pyramid::build(cloud, &tree);
    levels.iter().map(|&j| count_level(cloud, &tree, &pyr, j, min_samples)).collect()
}

/// Fit-range policy for graph box counts.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GraphFitPolicy {
    /// Cells with at most this many samples are not split further.
    pub min_samples: usize,
    /// Largest tolerated share of unresolved cubes at a fitted level.
    pub unresolved_limit: f64,
    /// Fixed lower end; default drops levels 0 and 1.
    pub j_lo: Option<u32>,
    /// Fixed upper end; default is the last level within `unresolved_limit`.
    pub j_hi: Option<u32>,
    /// Hard ceiling on the levels examined.
    pub j_max: u32,
}

impl Default for GraphFitPolicy {
    fn default() -> Self {
        GraphFitPolicy { min_samples: 64, unresolved_limit: 0.1, j_lo: None, j_hi: None, j_max: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDimension {
    pub estimate: DimensionEstimate,
    pub counts: Vec<GraphBoxCount>,
}

/// Box-dimension estimate of a graph cloud under a fit policy.
pub fn boxdim_graph(cloud: &GraphCloud, policy: &GraphFitPolicy) -> FracResult<GraphDimension> {
    if cloud.is_empty() {
        return Err(FracError::EmptyInput("empty graph cloud".into()));
    }
    let tree = CellTree::for_measure(cloud.as_measure());
    let pyr = Pyramid::build(cloud, &tree);
    let j_lo = policy.j_lo.unwrap_or(2);
    let ceiling = policy.j_hi.unwrap_or(policy.j_max);
    let mut counts = Vec::new();
    let mut j_hi = None;
    for j in 0..=ceiling {
        let c = count_level(cloud, &tree, &pyr, j, policy.min_samples)?;
        counts.push(c);
        if policy.j_hi.is_none() && j >= j_lo && c.unresolved_share() > policy.unresolved_limit {
            break;
        }
        j_hi = Some(j);
    }
    let j_hi = policy.j_hi.unwrap_or(j_hi.unwrap_or(0));
    let picked: Vec<&GraphBoxCount> = counts.iter().filter(|c| c.j >= j_lo && c.j <= j_hi).collect();
    if picked.len() < 3 {
        return Err(FracError::TooFewLevels(picked.len()));
    }
    let xs: Vec<f64> = picked.iter().map(|c| c.j as f64).collect();
    let ys: Vec<f64> = picked.iter().map(|c| (c.count as f64).log2()).collect();
    let (slope, intercept, residual_rms) = least_squares(&xs, &ys);
    let ambient = (cloud.base_dim + 1) as f64;
    Ok(GraphDimension {
        estimate: DimensionEstimate {
            slope,
            intercept,
            residual_rms,
            j_range: (j_lo, j_hi),
            valid: slope >= 0.0 && slope <= ambient + 0.2,
        },
        counts,
    })
}
