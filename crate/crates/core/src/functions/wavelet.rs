//! Bump series `h(x) = Σ_j Σ_m λ_jm ψ(2^{j-1} x − m)`.
//!
//! The mother bump is the tensor product of `(1 − u²)³` on `[−1, 1]`: C²,
//! supported in the cube of half-width 1, with `sup ψ = 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::dimension::occupied_cells;
use crate::error::{FracError, FracResult};
use crate::geometry::{generate_attractor_with_budget, IfsSpec, DEFAULT_POINT_BUDGET};
use crate::rng;

/// `max |d/du (1 − u²)³| = 96 / (25 √5)`, attained at `u² = 1/5`.
pub const BUMP_GRADIENT_BOUND: f64 = 1.717_300_206_719_838_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotherBump {
    /// `Π_i (1 − u_i²)³` on `[−1, 1]^n`.
    CubicBump,
}

impl MotherBump {
    pub fn support_radius(&self) -> f64 {
        1.0
    }

    pub fn sup(&self) -> f64 {
        1.0
    }

    /// Bound on `|∇ψ|` in dimension `n`.
    pub fn gradient_bound(&self, n: usize) -> f64 {
        BUMP_GRADIENT_BOUND * (n as f64).sqrt()
    }
}

/// `ψ(u)` for the cubic bump.
pub fn mother_bump(u: &[f64]) -> f64 {
    let mut v = 1.0;
    for &c in u {
        if c.abs() >= 1.0 {
            return 0.0;
        }
        let a = 1.0 - c * c;
        v *= a * a * a;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientMode {
    Deterministic,
    SignedRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletTerm {
    pub m: Vec<i64>,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletLevel {
    pub j: u32,
    pub terms: Vec<WaveletTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletSeries {
    pub mother: MotherBump,
    pub dim: usize,
    pub target_s: f64,
    pub target_d: f64,
    /// `C` in `Σ_m |λ_jm| ≤ C 2^{-j(s−d)}`.
    pub level_constant: f64,
    levels: Vec<WaveletLevel>,
    #[serde(skip)]
    index: Vec<BTreeMap<Vec<i64>, f64>>,
}

impl WaveletSeries {
    /// Builds a series; duplicate `(j, m)` entries are summed.
    pub fn new(dim: usize, target_s: f64, target_d: f64, levels: Vec<WaveletLevel>) -> FracResult<Self> {
        if dim == 0 {
            return Err(FracError::InvalidParameter("dimension must be ≥ 1".into()));
        }
        let mut merged: BTreeMap<u32, BTreeMap<Vec<i64>, f64>> = BTreeMap::new();
        for lev in levels {
            if lev.j == 0 {
                return Err(FracError::InvalidParameter("levels start at j = 1".into()));
            }
            let slot = merged.entry(lev.j).or_default();
            for t in lev.terms {
                if t.m.len() != dim || !t.lambda.is_finite() {
                    return Err(FracError::InvalidParameter(format!("bad term at level {}", lev.j)));
                }
                *slot.entry(t.m).or_insert(0.0) += t.lambda;
            }
        }
        let mut s = WaveletSeries {
            mother: MotherBump::CubicBump,
            dim,
            target_s,
            target_d,
            level_constant: 0.0,
            levels: merged
                .into_iter()
                .map(|(j, terms)| WaveletLevel {
                    j,
                    terms: terms.into_iter().map(|(m, lambda)| WaveletTerm { m, lambda }).collect(),
                })
                .collect(),
            index: vec![],
        };
        s.level_constant = s.measured_level_constant();
        s.rebuild_index();
        Ok(s)
    }

    pub fn zero(dim: usize, target_s: f64, target_d: f64) -> Self {
        Self::new(dim, target_s, target_d, vec![]).expect("empty series is valid")
    }

    /// Restores the lookup index after deserialisation.
    pub fn validated(self) -> FracResult<Self> {
        let (dim, s, d) = (self.dim, self.target_s, self.target_d);
        Self::new(dim, s, d, self.levels)
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .levels
            .iter()
            .map(|l| l.terms.iter().map(|t| (t.m.clone(), t.lambda)).collect())
            .collect();
    }

    pub fn levels(&self) -> &[WaveletLevel] {
        &self.levels
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().map(|l| l.j).max().unwrap_or(0)
    }

    /// `Σ_m |λ_jm|` at level `j`.
    pub fn level_sum(&self, j: u32) -> f64 {
        self.levels
            .iter()
            .filter(|l| l.j == j)
            .flat_map(|l| l.terms.iter())
            .map(|t| t.lambda.abs())
            .sum()
    }

    /// `sup_j 2^{j(s−d)} Σ_m |λ_jm|`.
    pub fn measured_level_constant(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| 2f64.powf(l.j as f64 * (self.target_s - self.target_d)) * self.level_sum(l.j))
            .fold(0.0, f64::max)
    }

    /// Largest number of bumps of one level that are nonzero at a point.
    pub fn overlap_constant(&self) -> usize {
        1 << self.dim
    }

    /// Terms with `lo ≤ j ≤ hi`.
    pub fn restrict(&self, lo: u32, hi: u32) -> WaveletSeries {
        let levels = self.levels.iter().filter(|l| l.j >= lo && l.j <= hi).cloned().collect();
        let mut s = WaveletSeries::new(self.dim, self.target_s, self.target_d, levels)
            .expect("subset of a valid series");
        s.level_constant = self.level_constant;
        s
    }

    /// Pointwise `α·self + β·other`.
    pub fn combine(&self, alpha: f64, other: &WaveletSeries, beta: f64) -> FracResult<WaveletSeries> {
        if other.dim != self.dim {
            return Err(FracError::InvalidParameter("dimension mismatch".into()));
        }
        let scale = |src: &WaveletSeries, k: f64| -> Vec<WaveletLevel> {
            src.levels
                .iter()
                .map(|l| WaveletLevel {
                    j: l.j,
                    terms: l.terms.iter().map(|t| WaveletTerm { m: t.m.clone(), lambda: k * t.lambda }).collect(),
                })
                .collect()
        };
        let mut levels = scale(self, alpha);
        levels.extend(scale(other, beta));
        WaveletSeries::new(self.dim, self.target_s, self.target_d, levels)
    }

    /// `sup ψ · Σ_j Σ_m |λ_jm|`, a bound on `sup |h|`.
    pub fn sup_bound(&self) -> f64 {
        self.mother.sup() * self.levels.iter().map(|l| self.level_sum(l.j)).sum::<f64>()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series serialises")
    }

    pub fn from_json(text: &str) -> FracResult<Self> {
        let raw: WaveletSeries =
            serde_json::from_str(text).map_err(|e| FracError::Config(e.to_string()))?;
        raw.validated()
    }
}

/// Exact finite sum; only the `2^n` translates whose support contains `x`
/// are looked up on each level.
pub fn besov_synthesize(series: &WaveletSeries, x: &[f64]) -> f64 {
    let n = series.dim;
    let mut total = 0.0;
    let mut u = vec![0.0; n];
    let mut m = vec![0i64; n];
    for (lev, table) in series.levels.iter().zip(&series.index) {
        if table.is_empty() {
            continue;
        }
        let scale = 2f64.powi(lev.j as i32 - 1);
        let base: Vec<i64> = x.iter().map(|&c| (c * scale).floor() as i64).collect();
        for corner in 0..(1usize << n) {
            for k in 0..n {
                m[k] = base[k] + ((corner >> k) & 1) as i64;
                u[k] = x[k] * scale - m[k] as f64;
            }
            if let Some(lambda) = table.get(&m) {
                total += lambda * mother_bump(&u);
            }
        }
    }
    total
}

/// Admissible coefficients on the attractor of `spec`.
///
/// Level `j` activates every `m` whose grid cell of side `2^{-(j-1)}`
/// centred at `2^{-(j-1)} m` meets the attractor, found from an attractor
/// sample fine enough to resolve level `J`. Each active coefficient gets
/// magnitude `2^{-j(s−d)} / #active`.
pub fn make_besov_coefficients(
    spec: &IfsSpec,
    s: f64,
    levels: u32,
    mode: CoefficientMode,
    seed: u64,
) -> FracResult<WaveletSeries> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(FracError::InvalidParameter(format!("s = {s} not in (0,1]")));
    }
    if levels == 0 {
        return Err(FracError::InvalidParameter("need at least one level".into()));
    }
    let d = spec.dimension();
    let finest = 2f64.powi(-(levels as i32 - 1)) / 4.0;
    let depth = (finest.ln() / spec.ratio().ln()).ceil().max(0.0) as u32;
    let mu = generate_attractor_with_budget(spec, depth, DEFAULT_POINT_BUDGET)?;
    let mut out = Vec::with_capacity(levels as usize);
    for j in 1..=levels {
        let cells = occupied_cells(mu.coords(), mu.dim(), j - 1);
        let magnitude = 2f64.powf(-(j as f64) * (s - d)) / cells.len() as f64;
        let mut rng = rng::stream(seed, j as u64);
        let terms = cells
            .into_iter()
            .map(|m| {
                let sign = match mode {
                    CoefficientMode::Deterministic => 1.0,
                    CoefficientMode::SignedRandom => {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                WaveletTerm { m, lambda: sign * magnitude }
            })
            .collect();
        out.push(WaveletLevel { j, terms });
    }
    WaveletSeries::new(spec.ambient_dim(), s, d, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gradient_constant() {
        let exact = 96.0 / (25.0 * 5f64.sqrt());
        assert!((BUMP_GRADIENT_BOUND - exact).abs() < 1e-15);
        let numeric = (0..=100_000)
            .map(|k| {
                let u = k as f64 / 100_000.0;
                6.0 * u * (1.0 - u * u).powi(2)
            })
            .fold(0.0, f64::max);
        assert!(numeric <= BUMP_GRADIENT_BOUND && numeric > BUMP_GRADIENT_BOUND - 1e-8);
    }

    #[test]
    fn zero_and_single_term() {
        let z = WaveletSeries::zero(1, 0.5, 1.0);
        assert_eq!(besov_synthesize(&z, &[0.3]), 0.0);
        let one = WaveletSeries::new(
            1,
            0.5,
            1.0,
            vec![WaveletLevel { j: 1, terms: vec![WaveletTerm { m: vec![0], lambda: 1.0 }] }],
        )
        .unwrap();
        for x in [-0.9, -0.2, 0.0, 0.4, 0.99, 1.3] {
            assert!((besov_synthesize(&one, &[x]) - mother_bump(&[x])).abs() < 1e-15);
        }
    }

    #[test]
    fn interval_first_level_sum() {
        let series =
            make_besov_coefficients(&IfsSpec::unit_interval(), 0.5, 1, CoefficientMode::Deterministic, 0).unwrap();
        assert!((series.level_sum(1) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cantor_level_sums_are_normalised() {
        let series =
            make_besov_coefficients(&IfsSpec::cantor(), 0.5, 10, CoefficientMode::SignedRandom, 4).unwrap();
        assert!((series.measured_level_constant() - 1.0).abs() < 1e-12);
        let d = IfsSpec::cantor().dimension();
        for j in 1..=10 {
            let expect = 2f64.powf(-(j as f64) * (0.5 - d));
            assert!((series.level_sum(j) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn deterministic_mode_repeats() {
        let a = make_besov_coefficients(&IfsSpec::cantor(), 0.5, 6, CoefficientMode::Deterministic, 1).unwrap();
        let b = make_besov_coefficients(&IfsSpec::cantor(), 0.5, 6, CoefficientMode::Deterministic, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip() {
        let a = make_besov_coefficients(&IfsSpec::cantor(), 0.7, 4, CoefficientMode::SignedRandom, 9).unwrap();
        let b = WaveletSeries::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        assert_eq!(besov_synthesize(&a, &[0.21]), besov_synthesize(&b, &[0.21]));
    }

    #[test]
    fn uniform_bound_and_cauchy_tails() {
        let spec = IfsSpec::cantor();
        let series = make_besov_coefficients(&spec, 0.9, 14, CoefficientMode::SignedRandom, 3).unwrap();
        let d = spec.dimension();
        let bound: f64 = (1..=14).map(|j| 2f64.powf(-(j as f64) * (0.9 - d))).sum();
        let mu = crate::geometry::generate_attractor(&spec, 9).unwrap();
        for k in [4u32, 7, 10] {
            let head = series.restrict(1, k);
            let gap = mu
                .points()
                .map(|x| (besov_synthesize(&series, x) - besov_synthesize(&head, x)).abs())
                .fold(0.0, f64::max);
            let tail: f64 = (k + 1..=14).map(|j| 2f64.powf(-(j as f64) * (0.9 - d))).sum();
            assert!(gap <= tail + 1e-12);
        }
        for x in mu.points() {
            assert!(besov_synthesize(&series, x).abs() <= bound + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn synthesis_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, x in -0.5f64..1.5, seed in 0u64..50) {
            let spec = IfsSpec::cantor();
            let a = make_besov_coefficients(&spec, 0.5, 6, CoefficientMode::SignedRandom, seed).unwrap();
            let b = make_besov_coefficients(&spec, 0.8, 6, CoefficientMode::SignedRandom, seed + 1).unwrap();
            let c = a.combine(alpha, &b, beta).unwrap();
            let lhs = besov_synthesize(&c, &[x]);
            let rhs = alpha * besov_synthesize(&a, &[x]) + beta * besov_synthesize(&b, &[x]);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }
}
