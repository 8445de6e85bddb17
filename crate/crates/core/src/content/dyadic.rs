//! Exact dyadic-cube content by bottom-up recursion over Morton keys.
//!
//! The frame is the dyadic tree whose leaves are grid cells and whose root is
//! the smallest power-of-two cube (in cells) holding the whole grid, anchored
//! at the corner of cell 0. For a cube `Q`:
//! `C(Q) = min(side(Q)^t, sum of C over children meeting E)`, with leaves
//! costing `side^t`. Ties keep the parent cube.

use serde::{Deserialize, Serialize};

use crate::gridspace::GridSpace;
use crate::real::Real;

/// A dyadic cube: `side_cells = 2^level`, lower corner in cell coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: u32,
    pub corner: [usize; 3],
}

impl DyadicCube {
    pub fn side_cells(&self) -> usize {
        1 << self.level
    }

    pub fn contains(&self, c: [usize; 3], dim: usize) -> bool {
        (0..dim).all(|a| c[a] >= self.corner[a] && c[a] < self.corner[a] + self.side_cells())
    }
}

/// Level of the root cube for a grid.
pub fn root_level<T: Real>(space: &GridSpace<T>) -> u32 {
    let ext = space.extent();
    let m = ext[..space.dim()].iter().copied().max().unwrap_or(1);
    m.next_power_of_two().trailing_zeros()
}

#[inline]
pub(crate) fn morton(c: [usize; 3], dim: usize) -> u64 {
    let mut key = 0u64;
    for bit in 0..21 {
        for a in 0..dim {
            key |= (((c[a] >> bit) & 1) as u64) << (bit * dim + a);
        }
    }
    key
}

#[inline]
pub(crate) fn demorton(key: u64, dim: usize) -> [usize; 3] {
    let mut c = [0usize; 3];
    for bit in 0..21 {
        for a in 0..dim {
            c[a] |= (((key >> (bit * dim + a)) & 1) as usize) << bit;
        }
    }
    c
}

struct Node<T> {
    key: u64,
    value: T,
    take_self: bool,
}

/// Level-by-level recursion state, kept for cover reconstruction.
pub struct DyadicTree<T> {
    dim: usize,
    min_level: u32,
    levels: Vec<Vec<Node<T>>>,
}

impl<T: Real> DyadicTree<T> {
    /// Runs the recursion for cube weight `side^exponent`, with cubes no
    /// smaller than `2^min_level` cells.
    pub fn build(space: &GridSpace<T>, cells: &[usize], exponent: T, min_level: u32) -> Self {
        let dim = space.dim();
        let top = root_level(space).max(min_level);
        let weight = |level: u32| (space.h() * T::count(1usize << level)).powf(exponent);
        let mut keys: Vec<u64> = cells
            .iter()
            .map(|&i| morton(space.coord(i), dim) >> (dim as u32 * min_level))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let leaf = weight(min_level);
        let mut levels = vec![keys
            .into_iter()
            .map(|key| Node { key, value: leaf, take_self: true })
            .collect::<Vec<_>>()];
        for level in min_level + 1..=top {
            let prev = levels.last().expect("at least one level");
            let own = weight(level);
            let mut next: Vec<Node<T>> = Vec::new();
            let mut k = 0;
            while k < prev.len() {
                let parent = prev[k].key >> dim;
                let mut sum = T::zero();
                while k < prev.len() && prev[k].key >> dim == parent {
                    sum += prev[k].value;
                    k += 1;
                }
                let take_self = own <= sum;
                next.push(Node { key: parent, value: if take_self { own } else { sum }, take_self });
            }
            levels.push(next);
        }
        Self { dim, min_level, levels }
    }

    /// Content of the whole set (0 for the empty set).
    pub fn value(&self) -> T {
        self.levels.last().and_then(|l| l.first()).map_or(T::zero(), |n| n.value)
    }

    /// The cubes realizing [`Self::value`].
    pub fn cover(&self) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        let top = self.levels.len() - 1;
        if let Some(root) = self.levels[top].first() {
            self.collect(top, root.key, &mut out);
        }
        out
    }

    fn collect(&self, depth: usize, key: u64, out: &mut Vec<DyadicCube>) {
        let nodes = &self.levels[depth];
        let at = nodes.binary_search_by_key(&key, |n| n.key).expect("key present");
        let level = self.min_level + depth as u32;
        if nodes[at].take_self {
            let c = demorton(key, self.dim);
            let mut corner = [0usize; 3];
            for a in 0..self.dim {
                corner[a] = c[a] << level;
            }
            out.push(DyadicCube { level, corner });
            return;
        }
        let below = &self.levels[depth - 1];
        let lo = key << self.dim;
        let hi = (key + 1) << self.dim;
        let start = below.partition_point(|n| n.key < lo);
        for n in below[start..].iter().take_while(|n| n.key < hi) {
            self.collect(depth - 1, n.key, out);
        }
    }
}

/// Dyadic `t`-content of a cell set at cell resolution.
pub fn dyadic_content<T: Real>(space: &GridSpace<T>, cells: &[usize], t: T) -> T {
    DyadicTree::build(space, cells, t, 0).value()
}

/// Dyadic content together with a realizing cube cover.
pub fn dyadic_content_cover<T: Real>(space: &GridSpace<T>, cells: &[usize], t: T) -> (T, Vec<DyadicCube>) {
    let tree = DyadicTree::build(space, cells, t, 0);
    (tree.value(), tree.cover())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Top-down recursion over explicit cube coordinates, independent of the Morton engine.
    fn brute(space: &GridSpace<f64>, set: &[bool], corner: [usize; 2], side: usize, t: f64) -> f64 {
        let [nx, ny, _] = space.extent();
        let mut any = false;
        for y in corner[1]..(corner[1] + side).min(ny) {
            for x in corner[0]..(corner[0] + side).min(nx) {
                any |= set[space.index([x, y, 0])];
            }
        }
        if !any {
            return 0.0;
        }
        let own = (side as f64 * space.h()).powf(t);
        if side == 1 {
            return own;
        }
        let half = side / 2;
        let mut sum = 0.0;
        for dy in [0, half] {
            for dx in [0, half] {
                sum += brute(space, set, [corner[0] + dx, corner[1] + dy], half, t);
            }
        }
        own.min(sum)
    }

    fn unit(n: usize) -> GridSpace<f64> {
        GridSpace::new(2, &[n, n], 1.0 / n as f64, &[0.5 / n as f64; 2]).unwrap()
    }

    #[test]
    fn full_square_and_segment_and_cell() {
        let s = unit(64);
        let all: Vec<usize> = (0..s.len()).collect();
        assert!((dyadic_content(&s, &all, 2.0) - 1.0).abs() < 1e-12);
        let row: Vec<usize> = (0..64).map(|x| s.index([x, 17, 0])).collect();
        assert!((dyadic_content(&s, &row, 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(dyadic_content(&s, &[5], 1.0), 1.0 / 64.0);
        assert_eq!(dyadic_content(&s, &[], 1.0), 0.0);
    }

    #[test]
    fn opposite_corner_cantor_set() {
        for depth in 2..=6u32 {
            let n = 1usize << depth;
            let s = unit(n);
            let cells: Vec<usize> = (0..s.len())
                .filter(|&i| {
                    let c = s.coord(i);
                    (0..depth).all(|b| ((c[0] >> b) & 1) == ((c[1] >> b) & 1))
                })
                .collect();
            let mut set = vec![false; s.len()];
            cells.iter().for_each(|&i| set[i] = true);
            let v = dyadic_content(&s, &cells, 0.5);
            assert!((v - 1.0).abs() < 1e-12, "depth {depth}: {v}");
            assert!((brute(&s, &set, [0, 0], n, 0.5) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cover_reproduces_value() {
        let s = unit(32);
        let cells: Vec<usize> = (0..s.len()).filter(|i| i % 7 == 0 || i % 11 == 3).collect();
        let (v, cover) = dyadic_content_cover(&s, &cells, 1.3);
        let sum: f64 = cover.iter().map(|c| (c.side_cells() as f64 * s.h()).powf(1.3)).sum();
        assert!((sum - v).abs() < 1e-12);
        for &i in &cells {
            assert!(cover.iter().any(|c| c.contains(s.coord(i), 2)));
        }
    }

    #[test]
    fn zero_exponent_gives_one() {
        let s = unit(16);
        assert_eq!(dyadic_content(&s, &[3, 40, 200], 0.0), 1.0);
    }

    proptest! {
        #[test]
        fn matches_top_down_recursion(bits in prop::collection::vec(prop::bool::weighted(0.15), 24 * 20), t in 0.0f64..2.0) {
            let s = GridSpace::new(2, &[24, 20], 0.25, &[0.0, 0.0]).unwrap();
            let cells: Vec<usize> = (0..s.len()).filter(|&i| bits[i]).collect();
            let v = dyadic_content(&s, &cells, t);
            let b = brute(&s, &bits, [0, 0], 32, t);
            prop_assert!((v - b).abs() <= 1e-12 * b.max(1.0));
        }

        #[test]
        fn monotone_and_subadditive(a in prop::collection::vec(prop::bool::weighted(0.1), 256),
                                    b in prop::collection::vec(prop::bool::weighted(0.1), 256),
                                    t in 0.2f64..2.0) {
            let s = unit(16);
            let ea: Vec<usize> = (0..256).filter(|&i| a[i]).collect();
            let eb: Vec<usize> = (0..256).filter(|&i| b[i]).collect();
            let union: Vec<usize> = (0..256).filter(|&i| a[i] || b[i]).collect();
            let ca = dyadic_content(&s, &ea, t);
            let cb = dyadic_content(&s, &eb, t);
            let cu = dyadic_content(&s, &union, t);
            prop_assert!(ca <= cu + 1e-12);
            prop_assert!(cu <= ca + cb + 1e-12);
        }

        #[test]
        fn halving_h_scales_by_two_to_the_t(bits in prop::collection::vec(prop::bool::weighted(0.2), 256), t in 0.0f64..2.0) {
            let coarse = unit(16);
            let fine = GridSpace::new(2, &[32, 32], 1.0 / 32.0, &[0.0, 0.0]).unwrap();
            let ec: Vec<usize> = (0..256).filter(|&i| bits[i]).collect();
            let ef: Vec<usize> = ec.iter().flat_map(|&i| {
                let c = coarse.coord(i);
                let f = &fine;
                [[0, 0], [1, 0], [0, 1], [1, 1]].map(move |d| f.index([2 * c[0] + d[0], 2 * c[1] + d[1], 0]))
            }).collect();
            let big = GridSpace::new(2, &[16, 16], 2.0 / 16.0, &[0.0, 0.0]).unwrap();
            let cf = dyadic_content(&fine, &ef, t);
            let cc = dyadic_content(&coarse, &ec, t);
            let cb = dyadic_content(&big, &ec, t);
            prop_assert!((cf - cc).abs() <= 1e-12 * cc.max(1.0));
            prop_assert!((cb - 2f64.powf(t) * cc).abs() <= 1e-12 * cb.max(1.0));
        }
    }
}
