//! End-to-end experiments: sweeps over sets, smoothness values and seeds,
//! breakpoint detection and table/plot output.

mod config;
mod output;

pub use config::{Estimators, ExperimentConfig, FunctionKind, SetEntry, SetInput};
pub use output::{csv_string, emit_csv, emit_summary_csv, emit_svg, fmt_g, summary_csv_string, svg_string, CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::premeasure_upper_bound;
use crate::dimension::{boxdim_graph, graph_cloud, lower_bound_from_measures, GraphCloud, GraphFitPolicy};
use crate::error::{FracError, FracResult};
use crate::functions::{besov_synthesize, make_besov_coefficients, CoefficientMode, WeierstrassParams};
use crate::geometry::{generate_attractor_with_budget, IfsSpec, SampledMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "d+1-s")]
    Rough,
    #[serde(rename = "d/s")]
    Smooth,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Rough => "d+1-s",
            Branch::Smooth => "d/s",
        }
    }
}

/// `min{d+1−s, d/s}` and the branch attaining it (`d/s` from `s = d` on).
pub fn h_theory(d: f64, s: f64) -> FracResult<(f64, Branch)> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(FracError::InvalidParameter(format!("d = {d} must be positive")));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(FracError::InvalidParameter(format!("s = {s} not in (0,1]")));
    }
    if s < d {
        Ok((d + 1.0 - s, Branch::Rough))
    } else {
        Ok((d / s, Branch::Smooth))
    }
}

/// Outcome of one (set, s, seed) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub d: f64,
    pub s: f64,
    pub seed: u64,
    pub boxdim_graph: Option<f64>,
    pub corrdim_graph: Option<f64>,
    #[serde(rename = "H_theory")]
    pub h_theory: Option<f64>,
    pub branch: Option<Branch>,
    pub j_lo: Option<u32>,
    pub j_hi: Option<u32>,
    pub residual: Option<f64>,
    /// Pre-measure total at `t = H + 0.1`, `j₁ = 3`, for synthesized series.
    pub premeasure_total: Option<f64>,
    pub sample_level: u32,
    pub error: Option<String>,
}

impl ResultRow {
    fn failed(d: f64, s: f64, seed: u64, level: u32, err: &FracError) -> Self {
        let (h, b) = h_theory(d, s).map(|(h, b)| (Some(h), Some(b))).unwrap_or((None, None));
        ResultRow {
            d,
            s,
            seed,
            boxdim_graph: None,
            corrdim_graph: None,
            h_theory: h,
            branch: b,
            j_lo: None,
            j_hi: None,
            residual: None,
            premeasure_total: None,
            sample_level: level,
            error: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.s.total_cmp(&b.s)).then(a.seed.cmp(&b.seed)));
}

/// Runs every (set, s, seed) combination; failures stay inside their row.
pub fn run_sweep(config: &ExperimentConfig) -> Vec<ResultRow> {
    let jobs: Vec<(&SetEntry, f64, u64)> = config
        .sets
        .iter()
        .flat_map(|e| config.s_values.iter().flat_map(move |&s| config.seeds.iter().map(move |&seed| (e, s, seed))))
        .collect();
    let mut rows: Vec<ResultRow> = jobs.into_par_iter().map(|(e, s, seed)| run_row(config, e, s, seed)).collect();
    sort_rows(&mut rows);
    rows
}

fn run_row(config: &ExperimentConfig, entry: &SetEntry, s: f64, seed: u64) -> ResultRow {
    let spec = match entry.set.build() {
        Ok(spec) => spec,
        Err(e) => return ResultRow::failed(f64::NAN, s, seed, entry.level, &e),
    };
    let d = spec.dimension();
    compute_row(config, &spec, entry.level, s, seed).unwrap_or_else(|e| ResultRow::failed(d, s, seed, entry.level, &e))
}

enum Sampled {
    Weierstrass(WeierstrassParams),
    Series(crate::functions::WaveletSeries),
}

impl Sampled {
    fn cloud(&self, mu: &SampledMeasure) -> FracResult<GraphCloud> {
        match self {
            Sampled::Weierstrass(w) => graph_cloud(mu, |x| w.value(x)),
            Sampled::Series(series) => graph_cloud(mu, |x| besov_synthesize(series, x)),
        }
    }
}

fn compute_row(config: &ExperimentConfig, spec: &IfsSpec, level: u32, s: f64, seed: u64) -> FracResult<ResultRow> {
    let d = spec.dimension();
    let (h, branch) = h_theory(d, s)?;
    let n = spec.ambient_dim();
    let mu = generate_attractor_with_budget(spec, level, config.point_budget)?;
    let f = match config.function_kind {
        FunctionKind::Weierstrass => {
            Sampled::Weierstrass(WeierstrassParams::random(n, s, config.rho, config.truncation, seed)?)
        }
        FunctionKind::BesovSynth => Sampled::Series(make_besov_coefficients(
            spec,
            s,
            config.besov_levels,
            CoefficientMode::SignedRandom,
            seed,
        )?),
    };
    let mut row = ResultRow {
        d,
        s,
        seed,
        boxdim_graph: None,
        corrdim_graph: None,
        h_theory: Some(h),
        branch: Some(branch),
        j_lo: None,
        j_hi: None,
        residual: None,
        premeasure_total: None,
        sample_level: level,
        error: None,
    };
    if config.estimators.boxdim {
        let cloud = f.cloud(&mu)?;
        let mut policy = GraphFitPolicy::default();
        if let Some((lo, hi)) = config.j_range {
            policy.j_lo = Some(lo);
            policy.j_hi = Some(hi);
        }
        let fit = boxdim_graph(&cloud, &policy)?;
        row.boxdim_graph = Some(fit.estimate.slope);
        row.j_lo = Some(fit.estimate.j_range.0);
        row.j_hi = Some(fit.estimate.j_range.1);
        row.residual = Some(fit.estimate.residual_rms);
    }
    if config.estimators.corrdim {
        let levels: Vec<u32> = [level.saturating_sub(4), level.saturating_sub(2), level]
            .into_iter()
            .map(|l| l.max(1))
            .collect();
        let mut clouds = Vec::with_capacity(levels.len());
        for &l in &levels {
            let m = generate_attractor_with_budget(spec, l, config.point_budget)?;
            clouds.push(f.cloud(&m)?.as_measure().clone());
        }
        let top = (n + 1) as f64;
        let t_values: Vec<f64> = (0..=((top * 20.0) as usize)).map(|k| k as f64 * 0.05).collect();
        row.corrdim_graph = Some(lower_bound_from_measures(&clouds, &t_values, config.corr_pairs, seed)?);
    }
    if config.estimators.premeasure {
        if let Sampled::Series(series) = &f {
            let t = d + 1.0 - s + 0.1;
            let bound = premeasure_upper_bound(series, &mu, t, 3, config.besov_levels.max(4))?;
            row.premeasure_total = Some(bound.total);
        }
    }
    Ok(row)
}

/// Mean and standard deviation over the successful seeds of one (d, s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub d: f64,
    pub s: f64,
    pub count: usize,
    pub boxdim_mean: Option<f64>,
    pub boxdim_std: Option<f64>,
    pub corrdim_mean: Option<f64>,
    pub corrdim_std: Option<f64>,
    #[serde(rename = "H_theory")]
    pub h_theory: Option<f64>,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    (Some(mean), Some(var.sqrt()))
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut sorted: Vec<&ResultRow> = rows.iter().filter(|r| r.is_ok()).collect();
    sorted.sort_by(|a, b| a.d.total_cmp(&b.d).then(a.s.total_cmp(&b.s)));
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| a.d == b.d && a.s == b.s) {
        let boxes: Vec<f64> = group.iter().filter_map(|r| r.boxdim_graph).collect();
        let corrs: Vec<f64> = group.iter().filter_map(|r| r.corrdim_graph).collect();
        let (boxdim_mean, boxdim_std) = mean_std(&boxes);
        let (corrdim_mean, corrdim_std) = mean_std(&corrs);
        out.push(SummaryRow {
            d: group[0].d,
            s: group[0].s,
            count: group.len(),
            boxdim_mean,
            boxdim_std,
            corrdim_mean,
            corrdim_std,
            h_theory: h_theory(group[0].d, group[0].s).ok().map(|h| h.0),
        });
    }
    out
}

const TRANSITION_STEP: f64 = 0.001;

/// Breakpoint `b` of the curve `s ↦ min{b+1−s, b/s}` closest, in squared
/// error, to the graph estimates of rows sharing one `d`.
pub fn detect_transition(rows: &[ResultRow]) -> FracResult<f64> {
    let used: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.is_ok()).filter_map(|r| r.boxdim_graph.map(|b| (r.s, b))).collect();
    let first = rows.iter().find(|r| r.is_ok()).ok_or_else(|| FracError::EmptyInput("no usable rows".into()))?;
    let d = first.d;
    if rows.iter().filter(|r| r.is_ok()).any(|r| (r.d - d).abs() > 1e-12) {
        return Err(FracError::InvalidParameter("rows mix several values of d".into()));
    }
    let mut distinct: Vec<f64> = used.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(FracError::InvalidParameter(format!("need 5 distinct s values, got {}", distinct.len())));
    }
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    if !(lo < d && d < hi) {
        return Err(FracError::NoStraddle(format!("s in [{lo}, {hi}] with d = {d}")));
    }
    let steps = ((hi - lo) / TRANSITION_STEP).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for k in 1..steps {
        let b = lo + k as f64 * TRANSITION_STEP;
        let err: f64 = used.iter().map(|&(s, y)| (y - (b + 1.0 - s).min(b / s)).powi(2)).sum();
        if err < best.0 {
            best = (err, b);
        }
    }
    Ok(best.1)
}
