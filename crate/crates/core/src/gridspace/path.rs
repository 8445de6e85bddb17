use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::gridspace::search::{MinEntry, Scratch};
use crate::gridspace::GridSpace;
use crate::real::Real;

/// A stencil path with its arclength and per-vertex remaining length.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath<T> {
    cells: Vec<usize>,
    length: T,
    remaining: Vec<T>,
}

impl<T: Real> GridPath<T> {
    /// Builds a path, requiring consecutive cells to be stencil neighbors.
    pub fn from_cells(space: &GridSpace<T>, cells: Vec<usize>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidParameter("empty path".into()));
        }
        let mut steps = Vec::with_capacity(cells.len());
        for w in cells.windows(2) {
            let step = space.edge_weight(w[0], w[1]).ok_or_else(|| {
                Error::InvalidParameter(format!("cells {} and {} are not adjacent", w[0], w[1]))
            })?;
            steps.push(step);
        }
        let mut remaining = vec![T::zero(); cells.len()];
        let mut acc = T::zero();
        for k in (0..steps.len()).rev() {
            acc += steps[k];
            remaining[k] = acc;
        }
        Ok(Self { cells, length: acc, remaining })
    }

    pub fn single(cell: usize) -> Self {
        Self { cells: vec![cell], length: T::zero(), remaining: vec![T::zero()] }
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Arclength from each vertex to the terminal vertex.
    pub fn remaining(&self) -> &[T] {
        &self.remaining
    }

    pub fn start(&self) -> usize {
        self.cells[0]
    }

    pub fn end(&self) -> usize {
        *self.cells.last().expect("nonempty path")
    }

    /// Appends `next`, which must start where `self` ends.
    pub fn concat(&self, space: &GridSpace<T>, next: &GridPath<T>) -> Result<Self> {
        if self.end() != next.start() {
            return Err(Error::InvalidParameter(format!(
                "path ends at {} but next starts at {}",
                self.end(),
                next.start()
            )));
        }
        let mut cells = self.cells.clone();
        cells.extend_from_slice(&next.cells[1..]);
        Self::from_cells(space, cells)
    }

    pub fn reversed(&self, space: &GridSpace<T>) -> Self {
        let mut cells = self.cells.clone();
        cells.reverse();
        Self::from_cells(space, cells).expect("reversal keeps adjacency")
    }
}

/// Reusable A* engine; owns grid-sized scratch so repeated queries do not allocate.
pub struct Router<'a, T> {
    space: &'a GridSpace<T>,
    scratch: Scratch<T>,
    heap: BinaryHeap<MinEntry<T>>,
}

impl<'a, T: Real> Router<'a, T> {
    pub fn new(space: &'a GridSpace<T>) -> Self {
        Self { space, scratch: Scratch::new(space.len()), heap: BinaryHeap::new() }
    }

    /// Shortest stencil path from `a` to `b` whose intermediate cells satisfy
    /// `passable`; the endpoints themselves are always allowed.
    ///
    /// The heuristic is the free-space metric, which is consistent, so the
    /// first time `b` is popped its label is optimal.
    pub fn route(&mut self, a: usize, b: usize, passable: impl Fn(usize) -> bool) -> Option<GridPath<T>> {
        if a == b {
            return Some(GridPath::single(a));
        }
        let space = self.space;
        self.scratch.reset();
        self.heap.clear();
        self.scratch.set(a, T::zero(), u32::MAX as usize);
        self.heap.push(MinEntry { key: space.distance(a, b), cell: a });
        while let Some(MinEntry { cell, .. }) = self.heap.pop() {
            if self.scratch.is_closed(cell) {
                continue;
            }
            self.scratch.close(cell);
            if cell == b {
                break;
            }
            let g = self.scratch.g(cell);
            let scratch = &mut self.scratch;
            let heap = &mut self.heap;
            space.for_each_neighbor(cell, |j, w| {
                if scratch.is_closed(j) || !(j == b || passable(j)) {
                    return;
                }
                let nd = g + w;
                if nd < scratch.g(j) {
                    scratch.set(j, nd, cell);
                    heap.push(MinEntry { key: nd + space.distance(j, b), cell: j });
                }
            });
        }
        if !self.scratch.is_closed(b) {
            return None;
        }
        let mut cells = vec![b];
        let mut cur = b;
        while let Some(p) = self.scratch.pred(cur) {
            cells.push(p);
            cur = p;
        }
        cells.reverse();
        Some(GridPath::from_cells(space, cells).expect("search emits adjacent cells"))
    }
}

/// Shortest path through inside cells; either endpoint may be a complement cell.
pub fn geodesic<T: Real>(mask: &DomainMask<T>, a: usize, b: usize) -> Result<GridPath<T>> {
    Router::new(mask.space())
        .route(a, b, |i| mask.is_inside(i))
        .ok_or(Error::NoPath { from: a, to: b })
}

/// Shortest path over the whole box (the free-space metric realized by cells).
pub fn free_path<T: Real>(space: &GridSpace<T>, a: usize, b: usize) -> GridPath<T> {
    Router::new(space).route(a, b, |_| true).expect("the box is connected")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridspace::field::multi_source_distance;
    use proptest::prelude::*;

    fn open_mask(n: usize) -> DomainMask<f64> {
        let s = GridSpace::new(2, &[n, n], 1.0, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        DomainMask::new(s, inside).unwrap()
    }

    #[test]
    fn trivial_and_straight_paths() {
        let m = open_mask(16);
        let s = m.space();
        let a = s.index([3, 3, 0]);
        let p = geodesic(&m, a, a).unwrap();
        assert_eq!(p.length(), 0.0);
        assert_eq!(p.cells(), &[a]);
        let b = s.index([10, 3, 0]);
        assert_eq!(geodesic(&m, a, b).unwrap().length(), 7.0);
    }

    #[test]
    fn diagonal_matches_closed_form_and_dijkstra() {
        let m = open_mask(16);
        let s = m.space();
        for k in 1..12 {
            let a = s.index([2, 2, 0]);
            let b = s.index([2 + k, 2 + k, 0]);
            let p = geodesic(&m, a, b).unwrap();
            let dj = multi_source_distance(s, &[(a, 0.0)], |i| m.is_inside(i), f64::INFINITY);
            assert!((p.length() - k as f64 * 2f64.sqrt()).abs() < 1e-12);
            assert!((p.length() - dj[b]).abs() < 1e-12);
        }
    }

    #[test]
    fn disconnected_pair_has_no_path() {
        let s = GridSpace::new(2, &[8, 8], 1.0, &[0.0, 0.0]).unwrap();
        let a = s.index([1, 1, 0]);
        let b = s.index([6, 6, 0]);
        let r = Router::new(&s).route(a, b, |i| s.coord(i)[0] < 4);
        assert!(r.is_none());
    }

    #[test]
    fn remaining_is_strictly_decreasing() {
        let m = open_mask(16);
        let s = m.space();
        let p = geodesic(&m, s.index([1, 1, 0]), s.index([14, 9, 0])).unwrap();
        assert_eq!(p.remaining()[0], p.length());
        assert_eq!(*p.remaining().last().unwrap(), 0.0);
        assert!(p.remaining().windows(2).all(|w| w[0] > w[1]));
    }

    fn comb_mask() -> DomainMask<f64> {
        let s = GridSpace::new(2, &[20, 20], 0.5, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len())
            .map(|i| {
                let c = s.coord(i);
                !s.is_world_boundary(i) && !(c[0] % 5 == 0 && c[1] < 15)
            })
            .collect();
        DomainMask::new(s, inside).unwrap()
    }

    proptest! {
        #[test]
        fn metric_symmetry_and_triangle(a in 0usize..400, b in 0usize..400, c in 0usize..400) {
            let m = comb_mask();
            prop_assume!(m.is_inside(a) && m.is_inside(b) && m.is_inside(c));
            let ab = geodesic(&m, a, b).unwrap().length();
            let ba = geodesic(&m, b, a).unwrap().length();
            let bc = geodesic(&m, b, c).unwrap().length();
            let ac = geodesic(&m, a, c).unwrap().length();
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!(ac <= ab + bc + 1e-9);
        }
    }
}
