//! Self-similar sets and their natural measures.
//!
//! An [`IfsSpec`] describes `m` similitudes `x ↦ r·x + t_k` of the unit cube.
//! The attractor is a d-set with `d = log m / log(1/r)`; its natural measure
//! gives mass `m^-L` to every level-`L` cell. [`generate_attractor`] samples
//! that measure by one point per cell, at the cell centre, in lexicographic
//! word order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{FracError, FracResult};
use crate::rng;

/// Largest number of points any generator will materialise by default.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 24;

const OSC_TOL: f64 = 1e-12;

#[derive(Debug, Deserialize)]
struct RawIfsSpec {
    n: usize,
    m: usize,
    r: f64,
    translations: Vec<Vec<f64>>,
}

/// Equal-ratio iterated function system on `[0,1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIfsSpec")]
pub struct IfsSpec {
    n: usize,
    m: usize,
    r: f64,
    translations: Vec<Vec<f64>>,
}

impl TryFrom<RawIfsSpec> for IfsSpec {
    type Error = FracError;

    fn try_from(raw: RawIfsSpec) -> FracResult<Self> {
        IfsSpec::new(raw.n, raw.r, raw.translations)
            .and_then(|s| {
                if s.m == raw.m {
                    Ok(s)
                } else {
                    Err(FracError::InvalidSpec(format!(
                        "m = {} but {} translations given",
                        raw.m, s.m
                    )))
                }
            })
    }
}

impl IfsSpec {
    /// Builds and validates a spec; `m` is the number of translations.
    pub fn new(n: usize, r: f64, translations: Vec<Vec<f64>>) -> FracResult<Self> {
        let m = translations.len();
        if n == 0 {
            return Err(FracError::InvalidSpec("ambient dimension must be ≥ 1".into()));
        }
        if m == 0 {
            return Err(FracError::InvalidSpec("at least one map is required".into()));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(FracError::InvalidSpec(format!("ratio {r} not in (0,1)")));
        }
        for (k, t) in translations.iter().enumerate() {
            if t.len() != n {
                return Err(FracError::InvalidSpec(format!(
                    "translation {k} has {} coordinates, expected {n}",
                    t.len()
                )));
            }
            if t.iter().any(|&c| !c.is_finite() || c < -OSC_TOL || c + r > 1.0 + OSC_TOL) {
                return Err(FracError::InvalidSpec(format!(
                    "image of map {k} leaves the unit cube"
                )));
            }
        }
        // Open set condition for cube images: interiors are disjoint iff
        // some coordinate separates the two translations by at least r.
        for a in 0..m {
            for b in a + 1..m {
                let separated = translations[a]
                    .iter()
                    .zip(&translations[b])
                    .any(|(x, y)| (x - y).abs() >= r - OSC_TOL);
                if !separated {
                    return Err(FracError::InvalidSpec(format!(
                        "images of maps {a} and {b} overlap"
                    )));
                }
            }
        }
        let spec = IfsSpec { n, m, r, translations };
        let d = spec.raw_dimension();
        if d > n as f64 + 1e-12 {
            return Err(FracError::DimensionTooLarge { d, n });
        }
        Ok(spec)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn branch_count(&self) -> usize {
        self.m
    }

    pub fn ratio(&self) -> f64 {
        self.r
    }

    pub fn translations(&self) -> &[Vec<f64>] {
        &self.translations
    }

    fn raw_dimension(&self) -> f64 {
        (self.m as f64).ln() / (1.0 / self.r).ln()
    }

    /// Similarity dimension `log m / log(1/r)`.
    pub fn dimension(&self) -> f64 {
        self.raw_dimension()
    }

    /// `[0,1]` split into two halves.
    pub fn unit_interval() -> Self {
        IfsSpec::new(1, 0.5, vec![vec![0.0], vec![0.5]]).expect("valid spec")
    }

    /// Unit square split into four quarters.
    pub fn unit_square() -> Self {
        IfsSpec::new(
            2,
            0.5,
            vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5], vec![0.5, 0.5]],
        )
        .expect("valid spec")
    }

    /// Middle-thirds Cantor set.
    pub fn cantor() -> Self {
        IfsSpec::new(1, 1.0 / 3.0, vec![vec![0.0], vec![2.0 / 3.0]]).expect("valid spec")
    }

    /// Two maps of ratio `r` placed at both ends of `[0,1]`; `d = log 2 / log(1/r)`.
    pub fn two_ended(r: f64) -> FracResult<Self> {
        IfsSpec::new(1, r, vec![vec![0.0], vec![1.0 - r]])
    }

    /// Sierpinski carpet.
    pub fn carpet() -> Self {
        let mut t = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                if a != 1 || b != 1 {
                    t.push(vec![a as f64 / 3.0, b as f64 / 3.0]);
                }
            }
        }
        IfsSpec::new(2, 1.0 / 3.0, t).expect("valid spec")
    }

    /// Applies the composition `S_{w_1} ∘ … ∘ S_{w_k}` to `x`.
    pub fn apply_word(&self, word: &[usize], x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for &k in word.iter().rev() {
            for (c, t) in y.iter_mut().zip(&self.translations[k]) {
                *c = self.r * *c + t;
            }
        }
        y
    }
}

/// `log m / log(1/r)`, validated against the ambient dimension.
pub fn ifs_dimension(spec: &IfsSpec) -> FracResult<f64> {
    let d = spec.dimension();
    if d > spec.ambient_dim() as f64 + 1e-12 {
        return Err(FracError::DimensionTooLarge { d, n: spec.ambient_dim() });
    }
    Ok(d)
}

/// Weighted point cloud approximating a finite measure.
#[derive(Debug, Clone)]
pub struct SampledMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    level: u32,
    total_mass: f64,
    resolution: f64,
    source: Option<IfsSpec>,
    branching: Option<usize>,
}

impl SampledMeasure {
    /// Generic measure from flat coordinates (`dim` values per point).
    pub fn from_points(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> FracResult<Self> {
        if dim == 0 {
            return Err(FracError::InvalidParameter("dimension must be ≥ 1".into()));
        }
        if coords.is_empty() {
            return Err(FracError::EmptyInput("no points".into()));
        }
        if coords.len() % dim != 0 || coords.len() / dim != weights.len() {
            return Err(FracError::InvalidParameter(
                "coordinate and weight counts disagree".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(FracError::InvalidParameter("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(FracError::InvalidParameter("weights must be finite and ≥ 0".into()));
        }
        let total_mass: f64 = weights.iter().sum();
        if total_mass <= 0.0 {
            return Err(FracError::InvalidParameter("total mass must be positive".into()));
        }
        let count = weights.len();
        let resolution = if count == 1 { 0.0 } else { (count as f64).powf(-1.0 / dim as f64) };
        Ok(SampledMeasure {
            dim,
            coords,
            weights,
            level: 0,
            total_mass,
            resolution,
            source: None,
            branching: None,
        })
    }

    /// Unit mass at a single point.
    pub fn point_mass(point: &[f64]) -> FracResult<Self> {
        let mut mu = Self::from_points(point.len(), point.to_vec(), vec![1.0])?;
        mu.resolution = 0.0;
        Ok(mu)
    }

    /// `count` i.i.d. uniform points in `[0,1]^dim`, equal weights.
    pub fn uniform_random(dim: usize, count: usize, seed: u64) -> FracResult<Self> {
        if count == 0 {
            return Err(FracError::EmptyInput("no points requested".into()));
        }
        let mut rng = rng::stream(seed, 0);
        let coords: Vec<f64> = (0..count * dim).map(|_| rng.gen::<f64>()).collect();
        Self::from_points(dim, coords, vec![1.0 / count as f64; count])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Discretisation scale: cell side for attractor samples, typical
    /// spacing for random samples, 0 for a single atom.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// The system this measure was generated from, if any.
    pub fn source(&self) -> Option<&IfsSpec> {
        self.source.as_ref()
    }

    /// Branching factor of the word hierarchy, when points are in word order.
    pub fn branching(&self) -> Option<usize> {
        self.branching
    }

    /// Same hierarchy and weights, new coordinates (used for graph lifts).
    pub(crate) fn with_coords(&self, dim: usize, coords: Vec<f64>) -> SampledMeasure {
        debug_assert_eq!(coords.len(), dim * self.len());
        SampledMeasure {
            dim,
            coords,
            weights: self.weights.clone(),
            level: self.level,
            total_mass: self.total_mass,
            resolution: self.resolution,
            source: None,
            branching: self.branching,
        }
    }

    /// Euclidean diameter of the bounding box of the sample.
    pub fn bbox_diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Writes `x_1..x_n,weight` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|k| format!("x_{k}")).collect();
        writeln!(out, "{},weight", header.join(","))?;
        for (p, w) in self.points().zip(&self.weights) {
            let cols: Vec<String> = p.iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(out, "{},{w:.17e}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Level-`level` cell centres of the attractor, one per word, equal weights.
pub fn generate_attractor(spec: &IfsSpec, level: u32) -> FracResult<SampledMeasure> {
    generate_attractor_with_budget(spec, level, DEFAULT_POINT_BUDGET)
}

pub fn generate_attractor_with_budget(
    spec: &IfsSpec,
    level: u32,
    budget: usize,
) -> FracResult<SampledMeasure> {
    let m = spec.m;
    let requested = (m as u128).checked_pow(level).unwrap_or(u128::MAX);
    if requested > budget as u128 {
        return Err(FracError::BudgetExceeded { requested, budget });
    }
    let n = spec.n;
    let count = requested as usize;
    // Offsets t_{w_1} + r t_{w_2} + … built level by level; pushing the
    // children of each word contiguously keeps lexicographic order.
    let mut offsets = vec![0.0; n];
    let mut scale = 1.0;
    for _ in 0..level {
        let mut next = Vec::with_capacity(offsets.len() * m);
        for p in offsets.chunks_exact(n) {
            for t in &spec.translations {
                next.extend(p.iter().zip(t).map(|(a, b)| a + scale * b));
            }
        }
        offsets = next;
        scale *= spec.r;
    }
    let half = 0.5 * scale;
    for c in offsets.iter_mut() {
        *c += half;
    }
    let weight = 1.0 / count as f64;
    Ok(SampledMeasure {
        dim: n,
        coords: offsets,
        weights: vec![weight; count],
        level,
        total_mass: 1.0,
        resolution: scale,
        source: Some(spec.clone()),
        branching: if m >= 2 { Some(m) } else { None },
    })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Mass of the closed ball `B(center, radius)`.
pub fn mass_of_ball(mu: &SampledMeasure, center: &[f64], radius: f64) -> f64 {
    let r2 = radius * radius;
    match (&mu.source, mu.branching) {
        (Some(spec), Some(m)) if center.len() == mu.dim => {
            ball_mass_by_words(mu, spec, m, center, radius)
        }
        _ => mu
            .points()
            .zip(&mu.weights)
            .filter(|(p, _)| dist2(p, center) <= r2)
            .map(|(_, w)| *w)
            .sum(),
    }
}

/// Descends the word tree: cells whose cube misses the ball are skipped,
/// cells whose cube lies inside are added whole, leaves are tested directly.
fn ball_mass_by_words(
    mu: &SampledMeasure,
    spec: &IfsSpec,
    m: usize,
    center: &[f64],
    radius: f64,
) -> f64 {
    let n = mu.dim;
    let r2 = radius * radius;
    let depth = mu.level as usize;
    let weight = mu.weights[0];
    let mut hits = 0usize;
    // (level, index, origin of the cell cube, side)
    let mut stack: Vec<(usize, usize, Vec<f64>, f64)> = vec![(0, 0, vec![0.0; n], 1.0)];
    while let Some((lev, idx, origin, side)) = stack.pop() {
        if lev == depth {
            if dist2(mu.point(idx), center) <= r2 {
                hits += 1;
            }
            continue;
        }
        let mut near = 0.0;
        let mut far = 0.0;
        for k in 0..n {
            let lo = origin[k];
            let hi = lo + side;
            let c = center[k];
            let dn = if c < lo { lo - c } else if c > hi { c - hi } else { 0.0 };
            let df = (c - lo).abs().max((hi - c).abs());
            near += dn * dn;
            far += df * df;
        }
        if near > r2 * (1.0 + 1e-12) + 1e-300 {
            continue;
        }
        if far < r2 * (1.0 - 1e-12) {
            hits += m.pow((depth - lev) as u32);
            continue;
        }
        let child_side = side * spec.r;
        for (k, t) in spec.translations.iter().enumerate() {
            let o: Vec<f64> = origin.iter().zip(t).map(|(a, b)| a + side * b).collect();
            stack.push((lev + 1, idx * m + k, o, child_side));
        }
    }
    hits as f64 * weight
}

/// Empirical regularity constants of a sampled measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub d: f64,
    pub radii: Vec<f64>,
    /// `min μ(B_ρ(x)) / ρ^d` over probes and radii.
    pub c1_hat: f64,
    /// `max μ(B_ρ(x)) / ρ^d` over probes and radii.
    pub c2_hat: f64,
    /// `c1_hat` divided by the median ratio.
    pub worst_ratio_low: f64,
    /// `c2_hat` divided by the median ratio.
    pub worst_ratio_high: f64,
}

impl RegularityReport {
    pub fn spread(&self) -> f64 {
        self.c2_hat / self.c1_hat
    }
}

pub fn check_regularity(
    mu: &SampledMeasure,
    d: f64,
    radii: &[f64],
    probes: usize,
    seed: u64,
) -> FracResult<RegularityReport> {
    if radii.is_empty() || probes == 0 {
        return Err(FracError::InvalidParameter("need radii and probes".into()));
    }
    for &rad in radii {
        if !(rad > 0.0 && rad <= 1.0) {
            return Err(FracError::InvalidParameter(format!("radius {rad} not in (0,1]")));
        }
        if rad < mu.resolution() {
            return Err(FracError::RadiusBelowResolution {
                radius: rad,
                resolution: mu.resolution(),
            });
        }
    }
    let mut rng = rng::stream(seed, 0);
    let picks: Vec<usize> = (0..probes).map(|_| rng.gen_range(0..mu.len())).collect();
    let ratios: Vec<f64> = picks
        .par_iter()
        .flat_map_iter(|&i| {
            let x = mu.point(i);
            radii.iter().map(move |&rad| mass_of_ball(mu, x, rad) / rad.powf(d))
        })
        .collect();
    let c1_hat = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let c2_hat = ratios.iter().cloned().fold(0.0, f64::max);
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let median = sorted[sorted.len() / 2];
    Ok(RegularityReport {
        d,
        radii: radii.to_vec(),
        c1_hat,
        c2_hat,
        worst_ratio_low: c1_hat / median,
        worst_ratio_high: c2_hat / median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimensions_of_standard_systems() {
        assert!((ifs_dimension(&IfsSpec::cantor()).unwrap() - 0.6309297536).abs() < 1e-10);
        assert_eq!(ifs_dimension(&IfsSpec::unit_interval()).unwrap(), 1.0);
        let s = IfsSpec::new(2, 0.25, vec![vec![0.0, 0.0], vec![0.75, 0.0], vec![0.0, 0.75], vec![0.75, 0.75]])
            .unwrap();
        assert!((ifs_dimension(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(IfsSpec::new(1, 0.5, vec![]).is_err());
        assert!(IfsSpec::new(1, 1.0, vec![vec![0.0]]).is_err());
        assert!(IfsSpec::new(1, 0.6, vec![vec![0.0], vec![0.4]]).is_err());
        let json = r#"{"n":1,"m":3,"r":0.5,"translations":[[0.0],[0.5]]}"#;
        assert!(serde_json::from_str::<IfsSpec>(json).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = IfsSpec::cantor();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"m\":2"));
        let back: IfsSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn first_level_cantor_centres() {
        let mu = generate_attractor(&IfsSpec::cantor(), 1).unwrap();
        assert!((mu.point(0)[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((mu.point(1)[0] - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(mu.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn level_zero_is_cube_centre() {
        let mu = generate_attractor(&IfsSpec::unit_square(), 0).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.point(0), &[0.5, 0.5]);
        assert_eq!(mu.weights(), &[1.0]);
    }

    #[test]
    fn budget_is_enforced() {
        let err = generate_attractor_with_budget(&IfsSpec::carpet(), 5, 1000).unwrap_err();
        assert!(matches!(err, FracError::BudgetExceeded { .. }));
    }

    #[test]
    fn children_are_word_images_of_first_level() {
        let spec = IfsSpec::carpet();
        let l2 = generate_attractor(&spec, 2).unwrap();
        let l3 = generate_attractor(&spec, 3).unwrap();
        let l1 = generate_attractor(&spec, 1).unwrap();
        let m = spec.branch_count();
        for idx in 0..l2.len() {
            let word = [idx / m, idx % m];
            let parent = spec.apply_word(&word, &[0.5, 0.5]);
            for (a, b) in parent.iter().zip(l2.point(idx)) {
                assert!((a - b).abs() < 1e-14);
            }
            for k in 0..m {
                let child = spec.apply_word(&word, l1.point(k));
                for (a, b) in child.iter().zip(l3.point(idx * m + k)) {
                    assert!((a - b).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn each_first_level_image_carries_mass_one_over_m() {
        let spec = IfsSpec::cantor();
        let mu = generate_attractor(&spec, 10).unwrap();
        let block = mu.len() / 2;
        let left: f64 = mu.weights()[..block].iter().sum();
        assert_eq!(left, 0.5);
        assert!(mu.points().take(block).all(|p| p[0] <= 1.0 / 3.0));
    }

    #[test]
    fn cantor_left_third_has_half_the_mass() {
        let mu = generate_attractor(&IfsSpec::cantor(), 10).unwrap();
        let c = mu.point(0).to_vec();
        let mass = mass_of_ball(&mu, &c, 1.0 / 3.0);
        assert!((mass - 0.5).abs() < 1e-3);
        assert_eq!(mass_of_ball(&mu, &[0.5], 2.0), 1.0);
        assert_eq!(mass_of_ball(&mu, &[0.5], 1e-6), 0.0);
    }

    #[test]
    fn word_descent_matches_brute_force() {
        let spec = IfsSpec::carpet();
        let mu = generate_attractor(&spec, 4).unwrap();
        let plain = SampledMeasure::from_points(2, mu.coords().to_vec(), mu.weights().to_vec()).unwrap();
        for (cx, cy, rad) in [(0.3, 0.4, 0.2), (0.5, 0.5, 0.17), (0.01, 0.99, 0.5), (0.2, 0.2, 0.013)] {
            let a = mass_of_ball(&mu, &[cx, cy], rad);
            let b = mass_of_ball(&plain, &[cx, cy], rad);
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn uniform_interval_regularity() {
        let mu = generate_attractor(&IfsSpec::unit_interval(), 12).unwrap();
        let radii: Vec<f64> = (0..=6).map(|k| 2f64.powi(-k)).collect();
        let rep = check_regularity(&mu, 1.0, &radii, 64, 3).unwrap();
        assert!(rep.c1_hat >= 0.5 && rep.c2_hat <= 2.5, "{rep:?}");
        assert!(rep.c1_hat <= rep.c2_hat);
    }

    #[test]
    fn point_mass_fails_regularity() {
        let mu = SampledMeasure::point_mass(&[0.5]).unwrap();
        let radii: Vec<f64> = (0..=20).map(|k| 2f64.powi(-k)).collect();
        let rep = check_regularity(&mu, 0.5, &radii, 4, 1).unwrap();
        assert!(rep.spread() > 1000.0);
    }

    #[test]
    fn radii_below_resolution_are_rejected() {
        let mu = generate_attractor(&IfsSpec::cantor(), 4).unwrap();
        let err = check_regularity(&mu, 0.63, &[1e-4], 4, 1).unwrap_err();
        assert!(matches!(err, FracError::RadiusBelowResolution { .. }));
    }

    proptest! {
        #[test]
        fn ball_mass_is_monotone(x in 0.0f64..1.0, r1 in 0.001f64..1.0, r2 in 0.001f64..1.0) {
            let mu = generate_attractor(&IfsSpec::cantor(), 8).unwrap();
            let (a, b) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(mass_of_ball(&mu, &[x], a) <= mass_of_ball(&mu, &[x], b));
        }

        #[test]
        fn weights_sum_to_total_mass(level in 0u32..9, pick in 0usize..3) {
            let spec = [IfsSpec::cantor(), IfsSpec::unit_square(), IfsSpec::two_ended(0.2).unwrap()][pick].clone();
            let mu = generate_attractor(&spec, level).unwrap();
            let sum: f64 = mu.weights().iter().sum();
            prop_assert!((sum - mu.total_mass()).abs() <= 1e-12 * mu.total_mass());
            prop_assert_eq!(mu.len(), spec.branch_count().pow(level));
        }
    }
}
