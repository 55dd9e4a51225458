//! Nested partitions of a sample into contiguous blocks.
//!
//! Attractor samples come in word order, so the cell of a word prefix is a
//! contiguous index range and the tree is implicit. Other samples are sorted
//! along a Morton curve of their bounding box and split into dyadic blocks.

use std::ops::Range;

use crate::geometry::SampledMeasure;

#[derive(Debug, Clone)]
struct Level {
    /// `starts[i]..starts[i+1]` is cell `i`, as positions into the order.
    starts: Vec<usize>,
    /// Children of cell `i` are `first_child[i]..first_child[i+1]` one level down.
    first_child: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Kind {
    Uniform { m: usize, depth: usize },
    Explicit { levels: Vec<Level> },
}

#[derive(Debug, Clone)]
pub struct CellTree {
    len: usize,
    order: Option<Vec<usize>>,
    kind: Kind,
}

impl CellTree {
    pub fn for_measure(mu: &SampledMeasure) -> CellTree {
        match mu.branching() {
            Some(m) if m.checked_pow(mu.level()) == Some(mu.len()) => {
                CellTree::uniform(m, mu.level() as usize)
            }
            _ => CellTree::morton(mu.dim(), mu.coords()),
        }
    }

    /// Complete `m`-ary tree of the given depth over `m^depth` points.
    pub fn uniform(m: usize, depth: usize) -> CellTree {
        CellTree { len: m.pow(depth as u32), order: None, kind: Kind::Uniform { m, depth } }
    }

    /// Dyadic tree of the bounding box, blocks found by sorting Morton keys.
    pub fn morton(dim: usize, coords: &[f64]) -> CellTree {
        let len = coords.len() / dim;
        let bits = (126 / dim).min(52);
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let top = ((1u64 << bits) - 1) as f64;
        let keys: Vec<u128> = coords
            .chunks_exact(dim)
            .map(|p| {
                let q: Vec<u64> = (0..dim)
                    .map(|k| {
                        let span = hi[k] - lo[k];
                        if span > 0.0 {
                            (((p[k] - lo[k]) / span) * top).round().clamp(0.0, top) as u64
                        } else {
                            0
                        }
                    })
                    .collect();
                let mut key = 0u128;
                for b in (0..bits).rev() {
                    for qk in &q {
                        key = (key << 1) | ((qk >> b) & 1) as u128;
                    }
                }
                key
            })
            .collect();
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by_key(|&i| (keys[i], i));
        let sorted: Vec<u128> = order.iter().map(|&i| keys[i]).collect();

        let mut levels = vec![Level { starts: vec![0, len], first_child: vec![] }];
        for lev in 1..=bits {
            let shift = dim * (bits - lev);
            let prev = levels.last().unwrap();
            let mut starts = vec![0];
            let mut first_child = vec![0];
            let mut split = false;
            for w in prev.starts.windows(2) {
                for p in w[0] + 1..w[1] {
                    if sorted[p] >> shift != sorted[p - 1] >> shift {
                        starts.push(p);
                        split = true;
                    }
                }
                starts.push(w[1]);
                first_child.push(starts.len() - 1);
            }
            if !split {
                continue;
            }
            let done = starts.len() - 1 == len;
            levels.last_mut().unwrap().first_child = first_child;
            levels.push(Level { starts, first_child: vec![] });
            if done {
                break;
            }
        }
        let last = levels.last_mut().unwrap();
        last.first_child = vec![0; last.starts.len()];
        CellTree { len, order: Some(order), kind: Kind::Explicit { levels } }
    }

    /// Number of points covered.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Index of the deepest level (the root is level 0).
    pub fn depth(&self) -> usize {
        match &self.kind {
            Kind::Uniform { depth, .. } => *depth,
            Kind::Explicit { levels } => levels.len() - 1,
        }
    }

    pub fn cell_count(&self, level: usize) -> usize {
        match &self.kind {
            Kind::Uniform { m, .. } => m.pow(level as u32),
            Kind::Explicit { levels } => levels[level].starts.len() - 1,
        }
    }

    /// Positions (into [`CellTree::point_at`]) covered by a cell.
    pub fn range(&self, level: usize, cell: usize) -> Range<usize> {
        match &self.kind {
            Kind::Uniform { m, depth } => {
                let size = m.pow((depth - level) as u32);
                cell * size..(cell + 1) * size
            }
            Kind::Explicit { levels } => {
                let s = &levels[level].starts;
                s[cell]..s[cell + 1]
            }
        }
    }

    /// Child cells, as indices on `level + 1`; empty at the deepest level.
    pub fn children(&self, level: usize, cell: usize) -> Range<usize> {
        if level >= self.depth() {
            return 0..0;
        }
        match &self.kind {
            Kind::Uniform { m, .. } => cell * m..(cell + 1) * m,
            Kind::Explicit { levels } => {
                let f = &levels[level].first_child;
                f[cell]..f[cell + 1]
            }
        }
    }

    /// Point index at a position of the tree order.
    #[inline]
    pub fn point_at(&self, pos: usize) -> usize {
        match &self.order {
            Some(o) => o[pos],
            None => pos,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_nesting(t: &CellTree) {
        assert_eq!(t.range(0, 0), 0..t.len());
        for lev in 0..t.depth() {
            for c in 0..t.cell_count(lev) {
                let r = t.range(lev, c);
                let ch = t.children(lev, c);
                assert!(!ch.is_empty());
                assert_eq!(t.range(lev + 1, ch.start).start, r.start);
                assert_eq!(t.range(lev + 1, ch.end - 1).end, r.end);
            }
        }
    }

    #[test]
    fn uniform_tree_blocks() {
        let t = CellTree::uniform(3, 4);
        assert_eq!(t.len(), 81);
        assert_eq!(t.range(2, 4), 36..45);
        assert_eq!(t.children(2, 4), 12..15);
        check_nesting(&t);
    }

    #[test]
    fn morton_tree_separates_points() {
        let coords = vec![0.1, 0.9, 0.11, 0.5, 0.5, 0.5, 0.3];
        let t = CellTree::morton(1, &coords);
        check_nesting(&t);
        let last = t.depth();
        // coincident points share the final leaf
        assert_eq!(t.cell_count(last), 5);
        let mut seen: Vec<usize> = (0..t.len()).map(|p| t.point_at(p)).collect();
        seen.sort();
        assert_eq!(seen, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn morton_tree_in_two_dimensions() {
        let coords: Vec<f64> = (0..200).flat_map(|i| [(i as f64 * 2f64.sqrt()).fract(), (i as f64 * 3f64.sqrt()).fract()]).collect();
        let t = CellTree::morton(2, &coords);
        check_nesting(&t);
        assert_eq!(t.cell_count(t.depth()), 200);
    }
}
