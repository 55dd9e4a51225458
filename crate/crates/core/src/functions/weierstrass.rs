//! `W(x) = Σ_i Σ_j ρ^{-js} cos(ρ^j x_i + θ_ij)` with a certified tail.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{FracError, FracResult};
use crate::rng;

pub const DEFAULT_RHO: f64 = 2.0;
pub const DEFAULT_TRUNCATION: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeierstrassParams {
    s: f64,
    rho: f64,
    /// `phases[i][j]` is θ_ij, one row per coordinate.
    phases: Vec<Vec<f64>>,
    truncation: usize,
    #[serde(skip)]
    freq: Vec<f64>,
    #[serde(skip)]
    amp: Vec<f64>,
}

impl WeierstrassParams {
    pub fn new(s: f64, rho: f64, phases: Vec<Vec<f64>>, truncation: usize) -> FracResult<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(FracError::InvalidParameter(format!("s = {s} not in (0,1)")));
        }
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(FracError::InvalidParameter(format!("rho = {rho} must exceed 1")));
        }
        if phases.is_empty() {
            return Err(FracError::InvalidParameter("phase matrix has no rows".into()));
        }
        if truncation == 0 || phases.iter().any(|row| row.len() < truncation) {
            return Err(FracError::InvalidParameter(format!(
                "truncation {truncation} exceeds the phase matrix width"
            )));
        }
        let freq = (0..truncation).map(|j| rho.powi(j as i32)).collect();
        let amp = (0..truncation).map(|j| rho.powf(-(j as f64) * s)).collect();
        Ok(WeierstrassParams { s, rho, phases, truncation, freq, amp })
    }

    /// Phases drawn by [`random_phases`] with `J_max = truncation`.
    pub fn random(n: usize, s: f64, rho: f64, truncation: usize, seed: u64) -> FracResult<Self> {
        Self::new(s, rho, random_phases(n, truncation, seed), truncation)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn phases(&self) -> &[Vec<f64>] {
        &self.phases
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// Same phases, different number of terms.
    pub fn with_truncation(&self, truncation: usize) -> FracResult<Self> {
        Self::new(self.s, self.rho, self.phases.clone(), truncation)
    }

    /// `n ρ^{-Js} / (1 − ρ^{-s})`.
    pub fn tail_bound(&self) -> f64 {
        let n = self.dim() as f64;
        n * self.rho.powf(-(self.truncation as f64) * self.s) / (1.0 - self.rho.powf(-self.s))
    }

    /// Deserialised params lose their cached tables; this restores them.
    pub fn validated(self) -> FracResult<Self> {
        Self::new(self.s, self.rho, self.phases, self.truncation)
    }

    /// Truncated sum at `x`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (xi, row) in x.iter().zip(&self.phases) {
            for j in 0..self.truncation {
                total += self.amp[j] * (self.freq[j] * xi + row[j]).cos();
            }
        }
        total
    }
}

/// Truncated value and the bound on its distance to the full series.
pub fn weierstrass_eval(params: &WeierstrassParams, x: &[f64]) -> (f64, f64) {
    (params.value(x), params.tail_bound())
}

/// I.i.d. uniform phases in `[0, 2π)`, `n` rows of `j_max` entries.
pub fn random_phases(n: usize, j_max: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, 0x7068_6173);
    (0..n).map(|_| (0..j_max).map(|_| rng.gen_range(0.0..TAU)).collect()).collect()
}

/// A phase-free constant `C` with `|W(x) − W(y)| ≤ C |x − y|^s` for
/// `|x − y| ≤ 1`, from `|cos a − cos b| ≤ min(|a − b|, 2)` termwise.
pub fn weierstrass_holder_constant(rho: f64, s: f64, n: usize) -> f64 {
    let low = rho.powf(1.0 - s) / (rho.powf(1.0 - s) - 1.0);
    let high = 2.0 / (1.0 - rho.powf(-s));
    n as f64 * (low + high)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn zero_phase_series_at_origin() {
        let p = WeierstrassParams::new(0.5, 2.0, vec![vec![0.0; 80]], 80).unwrap();
        let (v, tail) = weierstrass_eval(&p, &[0.0]);
        let closed = 1.0 / (1.0 - 2f64.powf(-0.5));
        assert!((v - closed).abs() <= tail + 1e-12);
        assert!((v - 3.414213562).abs() < 1e-9);
    }

    #[test]
    fn phases_are_deterministic_and_seed_dependent() {
        let a = random_phases(2, 50, 1);
        assert_eq!(a, random_phases(2, 50, 1));
        let b = random_phases(2, 50, 2);
        let same = a.iter().flatten().zip(b.iter().flatten()).filter(|(x, y)| x == y).count();
        assert!(same * 100 <= 2 * 50);
        assert!(a.iter().flatten().all(|&t| (0.0..TAU).contains(&t)));
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(WeierstrassParams::new(1.0, 2.0, vec![vec![0.0]], 1).is_err());
        assert!(WeierstrassParams::new(0.5, 1.0, vec![vec![0.0]], 1).is_err());
        assert!(WeierstrassParams::new(0.5, 2.0, vec![vec![0.0]], 2).is_err());
    }

    #[test]
    fn holder_constant_is_phase_free() {
        let c = weierstrass_holder_constant(2.0, 0.5, 1);
        for seed in 0..20u64 {
            let p = WeierstrassParams::random(1, 0.5, 2.0, 40, seed).unwrap();
            let mut rng = crate::rng::stream(seed, 9);
            for _ in 0..10_000 {
                let x: f64 = rng.gen();
                let y: f64 = rng.gen();
                let lhs = (p.value(&[x]) - p.value(&[y])).abs();
                assert!(lhs <= c * (x - y).abs().powf(0.5) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn truncation_error_within_tail(x in -3.0f64..3.0, s in 0.05f64..0.95, seed in 0u64..1000, j in 1usize..30, extra in 1usize..30) {
            let p = WeierstrassParams::random(1, s, 2.0, j + extra, seed).unwrap();
            let short = p.with_truncation(j).unwrap();
            let (a, tail) = weierstrass_eval(&short, &[x]);
            let (b, _) = weierstrass_eval(&p, &[x]);
            prop_assert!((a - b).abs() <= tail * (1.0 + 1e-12) + 1e-12);
        }
    }
}
