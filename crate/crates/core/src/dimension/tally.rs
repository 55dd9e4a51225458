//! Exact occupancy counts on the grid of cubes centred at `2^{-j} m`.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;
use std::io::Write;

use crate::error::{FracError, FracResult};

/// `round(2^j x)`, halves going to the larger index.
#[inline]
pub fn cell_index(x: f64, scale: f64) -> i64 {
    (x * scale + 0.5).floor() as i64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicTally {
    pub levels: Vec<u32>,
    pub counts: Vec<u64>,
    pub ambient_dim: usize,
}

impl DyadicTally {
    pub fn count_at(&self, j: u32) -> Option<u64> {
        self.levels.iter().position(|&l| l == j).map(|i| self.counts[i])
    }

    /// Writes `j,N_j` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "j,N_j")?;
        for (j, c) in self.levels.iter().zip(&self.counts) {
            writeln!(out, "{j},{c}")?;
        }
        Ok(())
    }
}

/// Distinct cells hit at one level, sorted.
pub fn occupied_cells(coords: &[f64], dim: usize, level: u32) -> Vec<Vec<i64>> {
    let scale = 2f64.powi(level as i32);
    let set: BTreeSet<Vec<i64>> =
        coords.chunks_exact(dim).map(|p| p.iter().map(|&c| cell_index(c, scale)).collect()).collect();
    set.into_iter().collect()
}

/// Packed cell keys, one per point, ordered like the index vectors; `None`
/// when the index ranges do not fit in 128 bits.
pub(crate) fn cell_keys(coords: &[f64], dim: usize, level: u32) -> Option<Vec<u128>> {
    let scale = 2f64.powi(level as i32);
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for p in coords.chunks_exact(dim) {
        for k in 0..dim {
            let c = cell_index(p[k], scale);
            lo[k] = lo[k].min(c);
            hi[k] = hi[k].max(c);
        }
    }
    let widths: Vec<u32> = lo.iter().zip(&hi).map(|(a, b)| 64 - ((b - a) as u64).leading_zeros()).collect();
    if widths.iter().sum::<u32>() > 128 {
        return None;
    }
    Some(
        coords
            .par_chunks_exact(dim)
            .map(|p| {
                let mut key = 0u128;
                for k in 0..dim {
                    key = (key << widths[k]) | (cell_index(p[k], scale) - lo[k]) as u128;
                }
                key
            })
            .collect(),
    )
}

fn count_level(coords: &[f64], dim: usize, level: u32) -> u64 {
    match cell_keys(coords, dim, level) {
        Some(mut keys) => {
            keys.par_sort_unstable();
            keys.dedup();
            keys.len() as u64
        }
        None => occupied_cells(coords, dim, level).len() as u64,
    }
}

/// Counts of occupied grid cubes for `j_min ≤ j ≤ j_max`.
pub fn tally_boxes(coords: &[f64], dim: usize, j_min: u32, j_max: u32) -> FracResult<DyadicTally> {
    if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
        return Err(FracError::EmptyInput("no points to tally".into()));
    }
    if j_max < j_min + 2 {
        return Err(FracError::InvalidParameter("need j_max − j_min ≥ 2".into()));
    }
    let levels: Vec<u32> = (j_min..=j_max).collect();
    let counts = levels.iter().map(|&j| count_level(coords, dim, j)).collect();
    Ok(DyadicTally { levels, counts, ambient_dim: dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn single_point() {
        let t = tally_boxes(&[0.3, 0.7], 2, 0, 10).unwrap();
        assert!(t.counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn two_endpoints() {
        let t = tally_boxes(&[0.0, 1.0], 1, 1, 4).unwrap();
        assert_eq!(t.count_at(3), Some(2));
        assert_eq!(occupied_cells(&[0.0, 1.0], 1, 3), vec![vec![0], vec![8]]);
    }

    #[test]
    fn ties_go_up() {
        assert_eq!(cell_index(0.0625, 8.0), 1);
        assert_eq!(cell_index(-0.0625, 8.0), 0);
    }

    #[test]
    fn dense_interval_level_five() {
        let coords: Vec<f64> = (0..100_000).map(|i| i as f64 / 99_999.0).collect();
        let t = tally_boxes(&coords, 1, 3, 7).unwrap();
        assert_eq!(t.count_at(5), Some(33));
    }

    #[test]
    fn errors() {
        assert!(tally_boxes(&[], 1, 0, 4).is_err());
        assert!(tally_boxes(&[0.5], 1, 3, 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = tally_boxes(&[0.0, 1.0], 1, 0, 2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "j,N_j\n0,2\n1,2\n2,2\n");
    }

    proptest! {
        #[test]
        fn matches_brute_force(pts in prop::collection::vec((-0.5f64..1.5, -0.5f64..1.5), 1..400), j in 0u32..12) {
            let coords: Vec<f64> = pts.iter().flat_map(|&(a, b)| [a, b]).collect();
            let t = tally_boxes(&coords, 2, j, j + 2).unwrap();
            for (k, &lev) in t.levels.iter().enumerate() {
                let sc = 2f64.powi(lev as i32);
                let set: HashSet<(i64, i64)> = pts.iter().map(|&(a, b)| ((a * sc).round_ties_up(), (b * sc).round_ties_up())).collect();
                prop_assert_eq!(t.counts[k], set.len() as u64);
            }
            let diam = 2f64.sqrt() * 2.0;
            for (k, &lev) in t.levels.iter().enumerate() {
                prop_assert!(t.counts[k] as f64 <= (2f64.powi(lev as i32) * diam + 2.0).powi(2));
            }
        }
    }

    trait RoundUp {
        fn round_ties_up(self) -> i64;
    }

    impl RoundUp for f64 {
        fn round_ties_up(self) -> i64 {
            let f = self.floor();
            if self - f >= 0.5 { f as i64 + 1 } else { f as i64 }
        }
    }
}
