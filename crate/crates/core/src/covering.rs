//! Covering counts for graphs built level by level.
//!
//! Oscillations are taken over sample points, so every count here certifies
//! a cover of the sampled graph, not of the full one.

use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use crate::dimension::cell_keys;
use crate::error::{FracError, FracResult};
use crate::functions::{besov_synthesize, WaveletSeries};
use crate::geometry::SampledMeasure;

/// Per-cell data at one grid level, cells in index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFunctionView {
    pub level: u32,
    pub cells: Vec<u128>,
    /// `max |h₁|` over the sample points of each cell.
    pub sup_abs: Vec<f64>,
    /// `max − min` of the target over the sample points of each cell.
    pub osc: Vec<f64>,
}

impl CellFunctionView {
    pub fn new(level: u32, cells: Vec<u128>, sup_abs: Vec<f64>, osc: Vec<f64>) -> FracResult<Self> {
        if sup_abs.len() != cells.len() || osc.len() != cells.len() {
            return Err(FracError::InvalidParameter("view columns differ in length".into()));
        }
        if sup_abs.iter().chain(&osc).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(FracError::InvalidParameter("view values must be finite and ≥ 0".into()));
        }
        Ok(CellFunctionView { level, cells, sup_abs, osc })
    }

    /// View of `h₁` and a target function sampled on `mu`.
    pub fn from_samples<F, G>(mu: &SampledMeasure, level: u32, h1: F, target: G) -> FracResult<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
        G: Fn(&[f64]) -> f64 + Sync,
    {
        let h: Vec<f64> = (0..mu.len()).into_par_iter().map(|i| h1(mu.point(i))).collect();
        let g: Vec<f64> = (0..mu.len()).into_par_iter().map(|i| target(mu.point(i))).collect();
        let groups = group_by_cell(mu, level)?;
        let mut cells = Vec::with_capacity(groups.len());
        let mut sup_abs = Vec::with_capacity(groups.len());
        let mut osc = Vec::with_capacity(groups.len());
        for (key, members) in groups {
            cells.push(key);
            sup_abs.push(members.iter().map(|&i| h[i].abs()).fold(0.0, f64::max));
            let lo = members.iter().map(|&i| g[i]).fold(f64::INFINITY, f64::min);
            let hi = members.iter().map(|&i| g[i]).fold(f64::NEG_INFINITY, f64::max);
            osc.push(hi - lo);
        }
        Self::new(level, cells, sup_abs, osc)
    }
}

/// Sample indices grouped by grid cell, in cell order.
fn group_by_cell(mu: &SampledMeasure, level: u32) -> FracResult<Vec<(u128, Vec<usize>)>> {
    if mu.is_empty() {
        return Err(FracError::EmptyInput("no sample points".into()));
    }
    let keys = cell_keys(mu.coords(), mu.dim(), level)
        .ok_or_else(|| FracError::InvalidParameter(format!("level {level} too fine for cell keys")))?;
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| (keys[i], i));
    let mut out: Vec<(u128, Vec<usize>)> = Vec::new();
    for i in order {
        match out.last_mut() {
            Some((k, members)) if *k == keys[i] => members.push(i),
            _ => out.push((keys[i], vec![i])),
        }
    }
    Ok(out)
}

fn check_resolves(mu: &SampledMeasure, level: u32) -> FracResult<()> {
    let side = 2f64.powi(-(level as i32));
    if side < mu.resolution() {
        return Err(FracError::InvalidParameter(format!(
            "grid side {side} is finer than the sample resolution {}",
            mu.resolution()
        )));
    }
    Ok(())
}

/// `⌈Σ_cells (2^{l+1} sup|h₁| + 2)⌉`: cubes of side `2^{-l}` that suffice to
/// extend a cover of the graph of `h₀` to one of `h₀ + h₁`.
pub fn aggregation_added_count(view: &CellFunctionView) -> u64 {
    let scale = 2f64.powi(view.level as i32 + 1);
    let total: f64 = view.sup_abs.iter().map(|s| scale * s + 2.0).sum();
    total.ceil() as u64
}

fn cell_oscillations(values: &[f64], mu: &SampledMeasure, level: u32) -> FracResult<Vec<f64>> {
    let groups = group_by_cell(mu, level)?;
    Ok(groups
        .iter()
        .map(|(_, members)| {
            let lo = members.iter().map(|&i| values[i]).fold(f64::INFINITY, f64::min);
            let hi = members.iter().map(|&i| values[i]).fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .collect())
}

fn sample_values<F>(f: F, mu: &SampledMeasure) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    (0..mu.len()).into_par_iter().map(|i| f(mu.point(i))).collect()
}

/// `Σ_Q (max_Q f − min_Q f)` over occupied grid cells of side `2^{-level}`.
pub fn oscillation_sum<F>(f: F, mu: &SampledMeasure, level: u32) -> FracResult<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_resolves(mu, level)?;
    let values = sample_values(f, mu);
    Ok(cell_oscillations(&values, mu, level)?.iter().sum())
}

/// Cubes of side `2^{-level}` covering the sampled graph.
///
/// Base cells have side `2^{-⌈level/σ⌉}`; over each, a stack of
/// `⌈2^{level} osc⌉ + 1` boxes of height `2^{-level}` covers the graph.
/// For `σ < 1` those boxes are thinner than a cube and each one is charged
/// `2^{n+1}` cubes.
pub fn cover_count_graph<F>(f: F, mu: &SampledMeasure, level: u32, sigma: f64) -> FracResult<u64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(FracError::InvalidParameter(format!("anisotropy {sigma} not in (0,1]")));
    }
    let base = (level as f64 / sigma - 1e-9).ceil().max(0.0) as u32;
    check_resolves(mu, base)?;
    let values = sample_values(f, mu);
    let scale = 2f64.powi(level as i32);
    let per_box: u64 = if sigma < 1.0 { 1 << (mu.dim() + 1) } else { 1 };
    let total: u64 = cell_oscillations(&values, mu, base)?
        .iter()
        .map(|o| ((scale * o).ceil() as u64 + 1) * per_box)
        .sum();
    Ok(total)
}

/// The three summands of the Hausdorff pre-measure estimate at scale
/// `√(n+1) 2^{-j₁+1}`, with all implicit constants set to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PremeasureBound {
    pub t: f64,
    pub j1: u32,
    pub j2: u32,
    /// `Σ_{j₁ ≤ j < j₂} 2^{-j(t−d)}`.
    pub geometry_term: f64,
    /// `2^{-j₁(t−1)} Σ_Q osc_Q h₀` over cells of side `2^{-(j₁−1)}`.
    pub oscillation_term: f64,
    /// `Σ_{j₁ ≤ j < j₂} 2^{-j(t−1)} Σ_m |λ_jm|`.
    pub coefficient_term: f64,
    pub total: f64,
    /// `max |Σ_{j ≥ j₂} h_j|` over the sample.
    pub tail_sup: f64,
    /// `tail_sup · 2^{j₁}`; the cover is valid when this is at most 1.
    pub tail_check: f64,
    /// Generation depth of the sample the oscillations were taken on.
    pub sampling_level: u32,
    /// Value used for every implicit constant.
    pub constant: f64,
}

impl PremeasureBound {
    pub fn csv_header() -> &'static str {
        "t,j1,j2,term1,term2,term3,total"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.t, self.j1, self.j2, self.geometry_term, self.oscillation_term, self.coefficient_term, self.total
        )
    }
}

pub fn write_premeasure_csv<W: Write>(bounds: &[PremeasureBound], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", PremeasureBound::csv_header())?;
    for b in bounds {
        writeln!(out, "{}", b.csv_row())?;
    }
    Ok(())
}

pub fn premeasure_upper_bound(
    series: &WaveletSeries,
    mu: &SampledMeasure,
    t: f64,
    j1: u32,
    j2: u32,
) -> FracResult<PremeasureBound> {
    if j1 < 2 || j2 <= j1 {
        return Err(FracError::InvalidParameter(format!("need j2 > j1 ≥ 2, got j1={j1}, j2={j2}")));
    }
    let d = series.target_d;
    if t <= d {
        return Err(FracError::VacuousBound { t, d });
    }
    let geometry_term: f64 = (j1..j2).map(|j| 2f64.powf(-(j as f64) * (t - d))).sum();
    let head = series.restrict(1, j1 - 1);
    let osc = oscillation_sum(|x| besov_synthesize(&head, x), mu, j1 - 1)?;
    let oscillation_term = 2f64.powf(-(j1 as f64) * (t - 1.0)) * osc;
    let coefficient_term: f64 =
        (j1..j2).map(|j| 2f64.powf(-(j as f64) * (t - 1.0)) * series.level_sum(j)).sum();
    let tail = series.restrict(j2, u32::MAX);
    let tail_sup = sample_values(|x| besov_synthesize(&tail, x).abs(), mu).into_iter().fold(0.0, f64::max);
    Ok(PremeasureBound {
        t,
        j1,
        j2,
        geometry_term,
        oscillation_term,
        coefficient_term,
        total: geometry_term + oscillation_term + coefficient_term,
        tail_sup,
        tail_check: tail_sup * 2f64.powi(j1 as i32),
        sampling_level: mu.level(),
        constant: 1.0,
    })
}
