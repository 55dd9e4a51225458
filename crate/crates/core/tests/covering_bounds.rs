//! Covering counts against brute-force covers and scaling oracles.

use fracdim::covering::{
    aggregation_added_count, cover_count_graph, oscillation_sum, premeasure_upper_bound, CellFunctionView,
};
use fracdim::dimension::{graph_cloud, least_squares, tally_boxes};
use fracdim::functions::{make_besov_coefficients, CoefficientMode, WaveletSeries, WeierstrassParams};
use fracdim::geometry::{generate_attractor, IfsSpec};
use proptest::prelude::*;

fn slope(levels: &[u32], values: &[f64]) -> f64 {
    let xs: Vec<f64> = levels.iter().map(|&j| j as f64).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    least_squares(&xs, &ys).0
}

/// Slabs `[k, k+1)·2^{-l}` met by a finite set of values.
fn slabs(level: u32, values: &[f64]) -> u64 {
    let scale = 2f64.powi(level as i32);
    let mut ks: Vec<i64> = values.iter().map(|v| (v * scale).floor() as i64).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.len() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn aggregation_bound_dominates_brute_force(
        level in 0u32..=8,
        cells in prop::collection::vec(
            (-1.0f64..1.0, prop::collection::vec(-1.0f64..1.0, 1..30)),
            50,
        ),
    ) {
        let mut exact = 0;
        let mut sup_abs = Vec::new();
        for (base, h1) in &cells {
            let sup = h1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let summed: Vec<f64> = h1.iter().map(|v| base + v).collect();
            exact += slabs(level, &summed);
            sup_abs.push(sup);
        }
        let osc = sup_abs.iter().map(|s| 2.0 * s).collect();
        let view = CellFunctionView::new(level, (0..50).collect(), sup_abs, osc).unwrap();
        prop_assert!(aggregation_added_count(&view) >= exact);
    }
}

#[test]
fn unit_cover_agrees_with_tally() {
    let spec = IfsSpec::unit_interval();
    let mu = generate_attractor(&spec, 14).unwrap();
    let w = WeierstrassParams::random(1, 0.5, 2.0, 40, 3).unwrap();
    let cloud = graph_cloud(&mu, |x| w.value(x)).unwrap();
    let tally = tally_boxes(cloud.as_measure().coords(), 2, 2, 8).unwrap();
    let factor = 2f64.powi(1 + 2);
    for j in 2..=8 {
        let cover = cover_count_graph(|x| w.value(x), &mu, j, 1.0).unwrap() as f64;
        let direct = tally.count_at(j).unwrap() as f64;
        assert!(cover <= factor * direct && direct <= factor * cover, "level {j}: {cover} vs {direct}");
    }
}

#[test]
fn weierstrass_half_oscillation_scaling() {
    let mu = generate_attractor(&IfsSpec::unit_interval(), 16).unwrap();
    let w = WeierstrassParams::random(1, 0.5, 2.0, 40, 11).unwrap();
    let levels: Vec<u32> = (4..=9).collect();
    let sums: Vec<f64> = levels.iter().map(|&l| oscillation_sum(|x| w.value(x), &mu, l).unwrap()).collect();
    let k = slope(&levels, &sums);
    assert!((0.4..=0.6).contains(&k), "slope {k}");
}

#[test]
fn identity_oscillation_tiles_the_range() {
    let mu = generate_attractor(&IfsSpec::unit_interval(), 12).unwrap();
    for l in [0, 3, 7, 11] {
        let sum = oscillation_sum(|x| x[0], &mu, l).unwrap();
        // each of the 2^l + 1 cells falls one sample spacing short of its width
        let cells = 2f64.powi(l as i32) + 1.0;
        assert!(sum <= 1.0 && 1.0 - sum <= cells * mu.resolution(), "level {l}: {sum}");
    }
}

#[test]
fn anisotropic_cover_scales_like_d_over_sigma() {
    let mu = generate_attractor(&IfsSpec::unit_interval(), 18).unwrap();
    let w = WeierstrassParams::random(1, 0.5, 2.0, 40, 5).unwrap();
    let levels: Vec<u32> = (3..=8).collect();
    let counts: Vec<f64> =
        levels.iter().map(|&l| cover_count_graph(|x| w.value(x), &mu, l, 0.5).unwrap() as f64).collect();
    let k = slope(&levels, &counts);
    assert!((k - 2.0).abs() <= 0.15, "slope {k}");
}

#[test]
fn premeasure_decays_above_the_threshold() {
    let spec = IfsSpec::cantor();
    let d = spec.dimension();
    let s = 0.5;
    let series = make_besov_coefficients(&spec, s, 20, CoefficientMode::SignedRandom, 8).unwrap();
    let mu = generate_attractor(&spec, 12).unwrap();
    let eps = 0.2;
    let t = d + 1.0 - s + eps;
    let totals: Vec<f64> = (3..=8)
        .map(|j1| premeasure_upper_bound(&series, &mu, t, j1, (j1 + 12).min(20)).unwrap().total)
        .collect();
    for w in totals.windows(2) {
        assert!(w[1] / w[0] <= 2f64.powf(-eps / 2.0), "{totals:?}");
    }
    let normalised: Vec<f64> = totals
        .iter()
        .zip(3..=8)
        .map(|(b, j1)| b * 2f64.powf(j1 as f64 * (t - d + s - 1.0)) / j1 as f64)
        .collect();
    let max = normalised.iter().cloned().fold(0.0, f64::max);
    assert!(max <= 2.0 * normalised[0], "{normalised:?}");
}

#[test]
fn zero_series_premeasure_is_geometric() {
    let spec = IfsSpec::two_ended(0.25).unwrap();
    let d = spec.dimension();
    let mu = generate_attractor(&spec, 8).unwrap();
    let zero = WaveletSeries::zero(1, 0.7, d);
    let b = premeasure_upper_bound(&zero, &mu, 1.2, 3, 9).unwrap();
    let geometric: f64 = (3..9).map(|j| 2f64.powf(-(j as f64) * (1.2 - d))).sum();
    assert!((b.total - geometric).abs() < 1e-12);
    assert_eq!(b.oscillation_term, 0.0);
    assert_eq!(b.coefficient_term, 0.0);
    assert!(premeasure_upper_bound(&zero, &mu, d, 3, 9).is_err());
}
