//! Correlation integrals `∬ |x − y|^{-t} dμ dμ` and radial profiles.
//!
//! Pairs of dyadic cubes are split until they are well separated, meaning
//! their gap is at least their diameter. Over such a pair the integrand
//! varies by a factor of at most `3^t`, so Monte Carlo draws inside it have
//! bounded spread. Well separated pairs are grouped by level and sampled in
//! proportion to their pair mass; pairs that never separate are summed
//! exactly.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::dimension::least_squares;
use crate::error::{FracError, FracResult};
use crate::geometry::SampledMeasure;
use crate::rng;

/// Largest growth of a sum per halving of the resolution still counted as stable.
pub const STABLE_GROWTH: f64 = 1.1;

/// Cube pairs with at most this many point pairs are summed exactly.
const EXACT_PAIRS: usize = 64;
/// Work items handed to the thread pool.
const FRONTIER: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    pub t_values: Vec<f64>,
    pub sums: Vec<f64>,
    /// Point pairs evaluated, sampled or enumerated.
    pub pair_count: usize,
    pub seed: u64,
    /// Generation depth of the measure the curve was computed on.
    pub level: u32,
    /// Resolution of that measure.
    pub resolution: f64,
}

impl CorrelationCurve {
    /// Writes `t,sum,pair_count` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,sum,pair_count")?;
        for (t, s) in self.t_values.iter().zip(&self.sums) {
            writeln!(out, "{t},{s:.12e},{}", self.pair_count)?;
        }
        Ok(())
    }
}

/// A contiguous run of the Morton order.
type Span = (usize, usize);

#[derive(Debug, Clone, Copy)]
enum Item {
    /// Pairs inside one cube.
    Own(u32, Span),
    /// Pairs between two distinct cubes of the same level.
    Cross(u32, Span, Span),
}

#[derive(Clone, Copy, PartialEq)]
enum Pass {
    Census,
    Sample,
}

/// Points sorted along a Morton curve of their bounding cube.
struct Morton<'a> {
    mu: &'a SampledMeasure,
    dim: usize,
    bits: u32,
    keys: Vec<u128>,
    /// Quantised coordinates, `dim` per position.
    grid: Vec<u64>,
    order: Vec<usize>,
    prefix: Vec<f64>,
}

impl<'a> Morton<'a> {
    fn new(mu: &'a SampledMeasure) -> Option<Self> {
        let dim = mu.dim();
        let bits = (126 / dim).min(52) as u32;
        let (lo, hi) = mu.bbox();
        let side = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        if side <= 0.0 {
            return None;
        }
        let top = (1u64 << bits) as f64;
        let quant: Vec<u64> = mu
            .coords()
            .chunks_exact(dim)
            .flat_map(|p| p.iter().zip(&lo).map(|(x, l)| (((x - l) / side) * top).floor().clamp(0.0, top - 1.0) as u64))
            .collect();
        let raw: Vec<u128> = quant
            .chunks_exact(dim)
            .map(|q| {
                let mut key = 0u128;
                for b in (0..bits).rev() {
                    for qk in q {
                        key = (key << 1) | ((qk >> b) & 1) as u128;
                    }
                }
                key
            })
            .collect();
        let mut order: Vec<usize> = (0..mu.len()).collect();
        order.par_sort_unstable_by_key(|&i| (raw[i], i));
        let keys = order.iter().map(|&i| raw[i]).collect();
        let grid = order.iter().flat_map(|&i| quant[i * dim..(i + 1) * dim].to_vec()).collect();
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &i in &order {
            acc += mu.weights()[i];
            prefix.push(acc);
        }
        Some(Morton { mu, dim, bits, keys, grid, order, prefix })
    }

    fn point(&self, pos: usize) -> &[f64] {
        self.mu.point(self.order[pos])
    }

    fn weight(&self, pos: usize) -> f64 {
        self.mu.weights()[self.order[pos]]
    }

    fn mass(&self, s: Span) -> f64 {
        self.prefix[s.1] - self.prefix[s.0]
    }

    /// Occupied sub-cubes of a cube at `level`.
    fn children(&self, level: u32, s: Span) -> Vec<Span> {
        let shift = self.dim as u32 * (self.bits - level - 1);
        let mut out = Vec::new();
        let mut pos = s.0;
        while pos < s.1 {
            let key = self.keys[pos] >> shift;
            let end = pos + self.keys[pos..s.1].partition_point(|k| k >> shift == key);
            out.push((pos, end));
            pos = end;
        }
        out
    }

    /// Whether the gap between two cubes is at least their diameter.
    fn separated(&self, level: u32, a: Span, b: Span) -> bool {
        let shift = self.bits - level;
        let mut gap2 = 0u128;
        for k in 0..self.dim {
            let ca = self.grid[a.0 * self.dim + k] >> shift;
            let cb = self.grid[b.0 * self.dim + k] >> shift;
            let g = ca.abs_diff(cb).saturating_sub(1) as u128;
            gap2 += g * g;
        }
        gap2 >= self.dim as u128
    }

    fn all_equal(&self, s: Span) -> bool {
        let first = self.point(s.0);
        (s.0 + 1..s.1).all(|p| self.point(p) == first)
    }

    /// Weighted position inside a span.
    fn pick<R: Rng>(&self, s: Span, rng: &mut R) -> usize {
        if s.1 - s.0 == 1 {
            return s.0;
        }
        let lo = self.prefix[s.0];
        let target = lo + rng.gen::<f64>() * (self.prefix[s.1] - lo);
        let k = self.prefix[s.0 + 1..=s.1].partition_point(|&c| c <= target);
        s.0 + k.min(s.1 - s.0 - 1)
    }

    /// Replaces a splittable item by its sub-items; `None` when terminal.
    fn split(&self, item: Item) -> Option<Vec<Item>> {
        match item {
            Item::Own(level, s) => {
                let n = s.1 - s.0;
                if n * (n - 1) / 2 <= EXACT_PAIRS || level == self.bits {
                    return None;
                }
                let kids = self.children(level, s);
                let mut out = Vec::with_capacity(kids.len() * (kids.len() + 1) / 2);
                for (i, &a) in kids.iter().enumerate() {
                    out.push(Item::Own(level + 1, a));
                    for &b in &kids[i + 1..] {
                        out.push(Item::Cross(level + 1, a, b));
                    }
                }
                Some(out)
            }
            Item::Cross(level, a, b) => {
                if (a.1 - a.0) * (b.1 - b.0) <= EXACT_PAIRS || level == self.bits || self.separated(level, a, b) {
                    return None;
                }
                let ka = self.children(level, a);
                let kb = self.children(level, b);
                Some(ka.iter().flat_map(|&x| kb.iter().map(move |&y| Item::Cross(level + 1, x, y))).collect())
            }
        }
    }
}

#[derive(Clone)]
struct Partial {
    exact: Vec<f64>,
    exact_mass: f64,
    exact_pairs: usize,
    far_mass: Vec<f64>,
    sampled: Vec<Vec<f64>>,
    counts: Vec<usize>,
}

impl Partial {
    fn new(levels: usize, nt: usize) -> Self {
        Partial {
            exact: vec![0.0; nt],
            exact_mass: 0.0,
            exact_pairs: 0,
            far_mass: vec![0.0; levels],
            sampled: vec![vec![0.0; nt]; levels],
            counts: vec![0; levels],
        }
    }

    fn absorb(&mut self, other: &Partial) {
        for (a, b) in self.exact.iter_mut().zip(&other.exact) {
            *a += b;
        }
        self.exact_mass += other.exact_mass;
        self.exact_pairs += other.exact_pairs;
        for l in 0..self.far_mass.len() {
            self.far_mass[l] += other.far_mass[l];
            for (a, b) in self.sampled[l].iter_mut().zip(&other.sampled[l]) {
                *a += b;
            }
            self.counts[l] += other.counts[l];
        }
    }
}

struct Walk<'a, 'b> {
    tree: &'b Morton<'a>,
    t_values: &'b [f64],
    pass: Pass,
    seed: u64,
    /// Census totals and per-level sample budgets, used by the sampling pass.
    far_total: Vec<f64>,
    budget: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn add_powers(acc: &mut [f64], t_values: &[f64], weight: f64, dist: f64) {
    let ln = dist.ln();
    for (s, t) in acc.iter_mut().zip(t_values) {
        *s += weight * (-t * ln).exp();
    }
}

fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

impl Walk<'_, '_> {
    fn exact_pair(&self, out: &mut Partial, i: usize, k: usize) {
        let dist = distance(self.tree.point(i), self.tree.point(k));
        if dist > 0.0 {
            let w = 2.0 * self.tree.weight(i) * self.tree.weight(k);
            out.exact_mass += w;
            out.exact_pairs += 1;
            add_powers(&mut out.exact, self.t_values, w, dist);
        }
    }

    fn terminal(&self, item: Item, out: &mut Partial) {
        match item {
            Item::Own(_, s) => {
                if self.pass == Pass::Sample || self.tree.all_equal(s) {
                    return;
                }
                for i in s.0..s.1 {
                    for k in i + 1..s.1 {
                        self.exact_pair(out, i, k);
                    }
                }
            }
            Item::Cross(level, a, b) => {
                let far = (a.1 - a.0) * (b.1 - b.0) > EXACT_PAIRS
                    && level < self.tree.bits
                    && self.tree.separated(level, a, b);
                let l = level as usize;
                match (far, self.pass) {
                    (false, Pass::Census) => {
                        for i in a.0..a.1 {
                            for k in b.0..b.1 {
                                self.exact_pair(out, i, k);
                            }
                        }
                    }
                    (true, Pass::Census) => out.far_mass[l] += 2.0 * self.tree.mass(a) * self.tree.mass(b),
                    (true, Pass::Sample) => self.sample(l, a, b, out),
                    (false, Pass::Sample) => {}
                }
            }
        }
    }

    /// Draws about `budget · share` pairs, rounded stochastically.
    fn sample(&self, l: usize, a: Span, b: Span, out: &mut Partial) {
        let share = 2.0 * self.tree.mass(a) * self.tree.mass(b) / self.far_total[l];
        let expected = self.budget[l] * share;
        let id = rng::derive_seed(rng::derive_seed(l as u64, a.0 as u64), b.0 as u64);
        let coin = unit(rng::derive_seed(self.seed, id));
        let count = expected.floor() as usize + usize::from(coin < expected.fract());
        if count == 0 {
            return;
        }
        let mut r = rng::stream(self.seed, id);
        for _ in 0..count {
            let i = self.tree.pick(a, &mut r);
            let k = self.tree.pick(b, &mut r);
            add_powers(&mut out.sampled[l], self.t_values, 1.0, distance(self.tree.point(i), self.tree.point(k)));
        }
        out.counts[l] += count;
    }

    fn run(&self, root: Item, out: &mut Partial) {
        let mut stack = vec![root];
        while let Some(item) = stack.pop() {
            match self.tree.split(item) {
                Some(kids) => stack.extend(kids.into_iter().rev()),
                None => self.terminal(item, out),
            }
        }
    }

    fn run_all(&self, frontier: &[Item]) -> Partial {
        let levels = self.tree.bits as usize + 1;
        let nt = self.t_values.len();
        let parts: Vec<Partial> = frontier
            .par_iter()
            .map(|&item| {
                let mut p = Partial::new(levels, nt);
                self.run(item, &mut p);
                p
            })
            .collect();
        let mut total = Partial::new(levels, nt);
        for p in &parts {
            total.absorb(p);
        }
        total
    }
}

/// Splits from the root until enough independent items exist.
fn frontier(tree: &Morton) -> Vec<Item> {
    let mut items = vec![Item::Own(0, (0, tree.keys.len()))];
    loop {
        let mut next = Vec::with_capacity(items.len() * 2);
        let mut grew = false;
        for &item in &items {
            match tree.split(item) {
                Some(kids) => {
                    grew = true;
                    next.extend(kids);
                }
                None => next.push(item),
            }
        }
        items = next;
        if !grew || items.len() >= FRONTIER {
            return items;
        }
    }
}

/// Monte Carlo estimate of `∬ |x − y|^{-t} dμ(x) dμ(y)` over `x ≠ y`,
/// scaled to the full product mass.
///
/// `pair_count` draws are split evenly over the levels holding well
/// separated cube pairs.
pub fn correlation_integral(
    mu: &SampledMeasure,
    t_values: &[f64],
    pair_count: usize,
    seed: u64,
) -> FracResult<CorrelationCurve> {
    if pair_count < 10_000 {
        return Err(FracError::InvalidParameter(format!("pair_count {pair_count} below 10⁴")));
    }
    if t_values.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(FracError::InvalidParameter("t values must be finite and ≥ 0".into()));
    }
    let tree = Morton::new(mu).ok_or(FracError::DegenerateMeasure)?;
    let items = frontier(&tree);
    let mut walk = Walk { tree: &tree, t_values, pass: Pass::Census, seed, far_total: vec![], budget: vec![] };
    let census = walk.run_all(&items);

    let active = census.far_mass.iter().filter(|&&m| m > 0.0).count();
    let per_level = if active == 0 { 0.0 } else { pair_count as f64 / active as f64 };
    walk.pass = Pass::Sample;
    walk.budget = census.far_mass.iter().map(|&m| if m > 0.0 { per_level } else { 0.0 }).collect();
    walk.far_total = census.far_mass.clone();
    let drawn = walk.run_all(&items);

    let mut numer = census.exact.clone();
    let mut denom = census.exact_mass;
    let mut pairs = census.exact_pairs;
    for l in 0..census.far_mass.len() {
        let n = drawn.counts[l];
        if n == 0 {
            continue;
        }
        let m = census.far_mass[l];
        denom += m;
        for (acc, s) in numer.iter_mut().zip(&drawn.sampled[l]) {
            *acc += m * (s / n as f64);
        }
        pairs += n;
    }
    if denom <= 0.0 {
        return Err(FracError::DegenerateMeasure);
    }
    let m2 = mu.total_mass() * mu.total_mass();
    Ok(CorrelationCurve {
        t_values: t_values.to_vec(),
        sums: numer.iter().map(|v| m2 * v / denom).collect(),
        pair_count: pairs,
        seed,
        level: mu.level(),
        resolution: mu.resolution(),
    })
}

/// Largest `t` whose sums settle as resolution increases.
///
/// Curves must share `t_values` and be ordered from coarse to fine. A sum is
/// stable when its last step grows by less than [`STABLE_GROWTH`] per halving
/// of the resolution and its successive increments shrink geometrically (or
/// vanish).
pub fn lower_bound_dimension(curves: &[CorrelationCurve]) -> FracResult<f64> {
    if curves.len() < 3 {
        return Err(FracError::InvalidParameter(format!(
            "need ≥ 3 resolutions, got {}",
            curves.len()
        )));
    }
    let ts = &curves[0].t_values;
    if curves.iter().any(|c| &c.t_values != ts) {
        return Err(FracError::InvalidParameter("curves use different t grids".into()));
    }
    let mut best = 0.0f64;
    for (k, &t) in ts.iter().enumerate() {
        let s: Vec<f64> = curves.iter().map(|c| c.sums[k]).collect();
        let halvings = halvings(&curves[curves.len() - 2], &curves[curves.len() - 1]);
        if stable(&s, halvings) {
            best = best.max(t);
        }
    }
    Ok(best)
}

/// Number of resolution halvings between two curves; one step when unknown.
fn halvings(coarse: &CorrelationCurve, fine: &CorrelationCurve) -> f64 {
    let h = (coarse.resolution / fine.resolution).log2();
    if h.is_finite() && h > 0.0 {
        h
    } else {
        1.0
    }
}

fn stable(s: &[f64], halvings: f64) -> bool {
    let last = s[s.len() - 1];
    let prev = s[s.len() - 2];
    if !(last.is_finite() && prev > 0.0) || (last / prev).powf(1.0 / halvings) >= STABLE_GROWTH {
        return false;
    }
    let deltas: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = s.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-9 * scale;
    if deltas.iter().all(|d| d.abs() <= 1e-3 * scale) {
        return true;
    }
    let xs: Vec<f64> = (0..deltas.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = deltas.iter().map(|d| d.max(floor).ln()).collect();
    let (slope, _, _) = least_squares(&xs, &ys);
    slope < 0.0
}

/// Correlation curves of a family of measures (coarse to fine), reduced by
/// [`lower_bound_dimension`]; a degenerate member yields 0.
pub fn lower_bound_from_measures(
    measures: &[SampledMeasure],
    t_values: &[f64],
    pair_count: usize,
    seed: u64,
) -> FracResult<f64> {
    let mut curves = Vec::with_capacity(measures.len());
    for mu in measures {
        match correlation_integral(mu, t_values, pair_count, seed) {
            Ok(c) => curves.push(c),
            Err(FracError::DegenerateMeasure) => return Ok(0.0),
            Err(e) => return Err(e),
        }
    }
    lower_bound_dimension(&curves)
}

/// `[min_y I(y)/R, max_y I(y)/R]` with `I(y) = Σ_x w_x |x − y|^{-u}` and
/// `R = diam^{d−u} / (d − u)`.
pub fn radial_profile_check(
    mu: &SampledMeasure,
    d: f64,
    u: f64,
    probe_count: usize,
    seed: u64,
) -> FracResult<(f64, f64)> {
    if u >= d {
        return Err(FracError::DivergentIntegral { u, d });
    }
    if u < 0.0 || probe_count == 0 {
        return Err(FracError::InvalidParameter("need u ≥ 0 and at least one probe".into()));
    }
    let diam = mu.bbox_diameter();
    if diam <= 0.0 {
        return Err(FracError::DegenerateMeasure);
    }
    let reference = diam.powf(d - u) / (d - u);
    let mut rng = rng::stream(seed, 0x7261);
    let probes: Vec<usize> = (0..probe_count).map(|_| rng.gen_range(0..mu.len())).collect();
    let ratios: Vec<f64> = probes
        .par_iter()
        .map(|&i| {
            let y = mu.point(i);
            let total: f64 = mu
                .points()
                .zip(mu.weights())
                .filter_map(|(x, w)| {
                    let r = distance(x, y);
                    if u == 0.0 {
                        Some(*w)
                    } else if r > 0.0 {
                        Some(w * r.powf(-u))
                    } else {
                        None
                    }
                })
                .sum();
            total / reference
        })
        .collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}
