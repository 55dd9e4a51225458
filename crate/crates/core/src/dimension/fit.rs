//! Least-squares slopes of `log₂ N_j` against `j`.

use serde::Serialize;

use crate::dimension::DyadicTally;
use crate::error::{FracError, FracResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub j_range: (u32, u32),
    /// Slope inside `[0, ambient_dim + 0.2]`.
    pub valid: bool,
}

/// Ordinary least squares; returns slope, intercept and residual RMS.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

pub fn fit_dimension(tally: &DyadicTally, j_range: (u32, u32)) -> FracResult<DimensionEstimate> {
    let (lo, hi) = j_range;
    let picked: Vec<(f64, f64)> = tally
        .levels
        .iter()
        .zip(&tally.counts)
        .filter(|(j, _)| **j >= lo && **j <= hi)
        .map(|(&j, &c)| (j as f64, (c as f64).log2()))
        .collect();
    if picked.len() < 3 {
        return Err(FracError::TooFewLevels(picked.len()));
    }
    let xs: Vec<f64> = picked.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = picked.iter().map(|p| p.1).collect();
    let (slope, intercept, residual_rms) = least_squares(&xs, &ys);
    Ok(DimensionEstimate {
        slope,
        intercept,
        residual_rms,
        j_range,
        valid: slope >= 0.0 && slope <= tally.ambient_dim as f64 + 0.2,
    })
}

/// Drops the two coarsest levels and every level whose cell side `2^{-j}`
/// is below four times the sample resolution.
pub fn default_fit_range(tally: &DyadicTally, resolution: f64) -> FracResult<(u32, u32)> {
    let first = *tally.levels.first().ok_or(FracError::TooFewLevels(0))?;
    let last = *tally.levels.last().unwrap();
    let lo = first + 2;
    let mut hi = last;
    if resolution > 0.0 {
        let limit = (1.0 / (4.0 * resolution)).log2().floor();
        if limit < hi as f64 {
            hi = limit.max(0.0) as u32;
        }
    }
    if hi < lo + 2 {
        return Err(FracError::TooFewLevels(hi.saturating_sub(lo) as usize + 1));
    }
    Ok((lo, hi))
}
