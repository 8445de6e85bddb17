//! The boundary visible from a base point: cells reachable by a discrete
//! John path, found by a search rooted at each boundary cell.
//!
//! A path from `z0` to `w` qualifies at constant `c` when every vertex `v`
//! other than `w` has `remaining(v) <= c d(v) + kappa h`. Searching backwards
//! from `w`, the label of `v` is exactly its remaining length, so the
//! constraint becomes a pruning rule on labels. Feasible prefixes are closed
//! under shortening, hence the pruned label-setting search returns the
//! shortest feasible path and is exact.

use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::john::john_constant_of_path;
use crate::construction::tree::GenerationTree;
use crate::error::{Error, Result};
use crate::gridspace::field::DistanceField;
use crate::gridspace::mask::DomainMask;
use crate::gridspace::path::GridPath;
use crate::gridspace::search::{MinEntry, Scratch};
use crate::real::Real;

/// Which boundary cells to test.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets {
    #[default]
    All,
    /// Every `n`-th boundary cell in index order.
    Strided(usize),
    Cells(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisibilityConfig {
    pub kappa: f64,
    pub targets: Targets,
    /// Upper end of the bisection in [`min_john_constant`].
    pub c_max: f64,
    /// Relative tolerance of the bisection.
    pub rel_tol: f64,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        Self { kappa: 4.0, targets: Targets::All, c_max: 1e3, rel_tol: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub z0: usize,
    pub c: f64,
    pub kappa: f64,
    /// Boundary cells tested, ascending.
    pub tested: Vec<usize>,
    /// Visible boundary cells, ascending.
    pub visible: Vec<usize>,
    /// Length of the shortest admissible path, per visible cell.
    pub feasible_length: Vec<f64>,
}

impl VisibilityResult {
    pub fn is_visible(&self, cell: usize) -> bool {
        self.visible.binary_search(&cell).is_ok()
    }

    pub fn fraction(&self) -> f64 {
        if self.tested.is_empty() {
            1.0
        } else {
            self.visible.len() as f64 / self.tested.len() as f64
        }
    }
}

/// Reusable per-thread search state.
pub struct VisibilitySearch<'a, T> {
    mask: &'a DomainMask<T>,
    dfield: &'a DistanceField<T>,
    scratch: Scratch<T>,
    heap: BinaryHeap<MinEntry<T>>,
}

impl<'a, T: Real> VisibilitySearch<'a, T> {
    pub fn new(mask: &'a DomainMask<T>, dfield: &'a DistanceField<T>) -> Self {
        Self { mask, dfield, scratch: Scratch::new(mask.space().len()), heap: BinaryHeap::new() }
    }

    /// Shortest admissible length from `z0` to `omega`, if any.
    ///
    /// The heuristic `d(v, z0)` is consistent; any label whose lower bound on
    /// the final length exceeds the budget at `z0` is discarded.
    pub fn search(&mut self, z0: usize, omega: usize, c: T, kappa: T) -> Option<T> {
        let space = self.mask.space();
        let slack = kappa * space.h();
        let budget = |v: usize, dfield: &DistanceField<T>| c * dfield.get(v) + slack;
        let goal = budget(z0, self.dfield) + space.tol();
        self.scratch.reset();
        self.heap.clear();
        let (mask, dfield, scratch, heap) = (self.mask, self.dfield, &mut self.scratch, &mut self.heap);
        space.for_each_neighbor(omega, |v, w| {
            if mask.is_inside(v) && w <= budget(v, dfield) + space.tol() && w < scratch.g(v) {
                scratch.set(v, w, omega);
                heap.push(MinEntry { key: w + space.distance(v, z0), cell: v });
            }
        });
        while let Some(MinEntry { key, cell }) = heap.pop() {
            if key > goal {
                return None;
            }
            if scratch.is_closed(cell) {
                continue;
            }
            scratch.close(cell);
            let g = scratch.g(cell);
            if cell == z0 {
                return Some(g);
            }
            space.for_each_neighbor(cell, |v, w| {
                if !mask.is_inside(v) || scratch.is_closed(v) {
                    return;
                }
                let nd = g + w;
                if nd <= budget(v, dfield) + space.tol() && nd < scratch.g(v) {
                    scratch.set(v, nd, cell);
                    heap.push(MinEntry { key: nd + space.distance(v, z0), cell: v });
                }
            });
        }
        None
    }

    /// The path found by the last successful [`Self::search`], from `z0` to `omega`.
    pub fn witness(&self, z0: usize, omega: usize) -> Option<GridPath<T>> {
        if !self.scratch.is_closed(z0) {
            return None;
        }
        let mut cells = vec![z0];
        let mut cur = z0;
        while cur != omega {
            cur = self.scratch.pred(cur)?;
            cells.push(cur);
        }
        GridPath::from_cells(self.mask.space(), cells).ok()
    }
}

fn targets_of<T: Real>(mask: &DomainMask<T>, targets: &Targets) -> Vec<usize> {
    let mut out = match targets {
        Targets::All => mask.boundary_cells(),
        Targets::Strided(n) => mask.boundary_cells().into_iter().step_by((*n).max(1)).collect(),
        Targets::Cells(v) => v.iter().copied().filter(|&i| i < mask.space().len() && mask.is_boundary(i)).collect(),
    };
    out.sort_unstable();
    out.dedup();
    out
}

/// Visible boundary cells at constant `c`.
pub fn visible_set<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    z0: usize,
    c: f64,
    cfg: &VisibilityConfig,
) -> Result<VisibilityResult> {
    if z0 >= mask.space().len() || !mask.is_inside(z0) {
        return Err(Error::InvalidParameter(format!("z0 = {z0} is not an inside cell")));
    }
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter(format!("c = {c} must be at least 1")));
    }
    let tested = targets_of(mask, &cfg.targets);
    let (ct, kt) = (T::of(c), T::of(cfg.kappa));
    let found: Vec<Option<T>> = tested
        .par_iter()
        .map_init(|| VisibilitySearch::new(mask, dfield), |s, &w| s.search(z0, w, ct, kt))
        .collect();
    let mut visible = Vec::new();
    let mut feasible_length = Vec::new();
    for (&w, len) in tested.iter().zip(found) {
        if let Some(l) = len {
            visible.push(w);
            feasible_length.push(l.f64());
        }
    }
    Ok(VisibilityResult { z0, c, kappa: cfg.kappa, tested, visible, feasible_length })
}

/// Witness path for one boundary cell at constant `c`.
pub fn witness_path<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    z0: usize,
    omega: usize,
    c: f64,
    kappa: f64,
) -> Option<GridPath<T>> {
    let mut s = VisibilitySearch::new(mask, dfield);
    s.search(z0, omega, T::of(c), T::of(kappa))?;
    s.witness(z0, omega)
}

fn min_c_with<T: Real>(s: &mut VisibilitySearch<'_, T>, z0: usize, omega: usize, cfg: &VisibilityConfig) -> f64 {
    let kappa = T::of(cfg.kappa);
    let mut ok = |c: f64| s.search(z0, omega, T::of(c), kappa).is_some();
    if !ok(cfg.c_max) {
        return f64::INFINITY;
    }
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (1.0f64, cfg.c_max);
    while hi > lo * (1.0 + cfg.rel_tol) {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest `c` (to relative tolerance) at which `omega` is visible; `+inf`
/// when it is invisible at `c_max`.
pub fn min_john_constant<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    z0: usize,
    omega: usize,
    cfg: &VisibilityConfig,
) -> f64 {
    min_c_with(&mut VisibilitySearch::new(mask, dfield), z0, omega, cfg)
}

/// [`min_john_constant`] for many cells in parallel.
pub fn min_john_constants<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    z0: usize,
    cells: &[usize],
    cfg: &VisibilityConfig,
) -> Vec<f64> {
    cells
        .par_iter()
        .map_init(|| VisibilitySearch::new(mask, dfield), |s, &w| min_c_with(s, z0, w, cfg))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub points: usize,
    pub contained: usize,
    pub fraction: f64,
    /// Boundary points outside the visible set, with their minimal constant.
    pub violations: Vec<(usize, f64)>,
}

/// Fraction of the tree's boundary points (all levels) in `vis.visible`.
pub fn containment_report<T: Real>(
    tree: &GenerationTree,
    vis: &VisibilityResult,
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    cfg: &VisibilityConfig,
) -> ContainmentReport {
    let points = tree.boundary_points();
    let missing: Vec<usize> = points.iter().copied().filter(|&w| !vis.is_visible(w)).collect();
    let cs = min_john_constants(mask, dfield, vis.z0, &missing, cfg);
    let contained = points.len() - missing.len();
    ContainmentReport {
        points: points.len(),
        contained,
        fraction: if points.is_empty() { 1.0 } else { contained as f64 / points.len() as f64 },
        violations: missing.into_iter().zip(cs).collect(),
    }
}

/// Checks a witness against the discretized John condition: returns its
/// empirical constant, which must not exceed `c + kappa h / d_min`.
pub fn witness_constant<T: Real>(path: &GridPath<T>, mask: &DomainMask<T>, dfield: &DistanceField<T>) -> Result<f64> {
    john_constant_of_path(path, mask, dfield).map(|c| c.f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::measure::tests::synthetic;
    use crate::domaingen::{generate, DomainKind, DomainSpec};
    use crate::gridspace::field::distance_to_complement;
    use crate::gridspace::GridSpace;

    fn disk(h: f64) -> DomainMask<f64> {
        generate(&DomainSpec { kind: DomainKind::Disk { radius: 1.0 }, h }).unwrap()
    }

    #[test]
    fn disk_boundary_is_visible_from_center() {
        let m = disk(1.0 / 64.0);
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.0, 0.0]).unwrap();
        let v = visible_set(&m, &d, z0, 1.1, &VisibilityConfig::default()).unwrap();
        assert_eq!(v.fraction(), 1.0);
        assert_eq!(v.visible, m.boundary_cells());
        let w = v.visible[7];
        let c = min_john_constant(&m, &d, z0, w, &VisibilityConfig::default());
        assert!((1.0..=1.2).contains(&c), "{c}");
    }

    #[test]
    fn witnesses_pass_the_john_check() {
        let m: DomainMask<f64> =
            generate(&DomainSpec { kind: DomainKind::Comb { teeth: 3, tooth_width: 0.05, corridor_width: 0.3 }, h: 1.0 / 128.0 })
                .unwrap();
        let d = distance_to_complement(&m);
        let s = m.space();
        let z0 = s.locate(&[0.5, 0.85]).unwrap();
        let c = 4.0;
        let v = visible_set(&m, &d, z0, c, &VisibilityConfig::default()).unwrap();
        assert!(!v.visible.is_empty());
        let h = s.h();
        for (k, &w) in v.visible.iter().enumerate().step_by(17) {
            let p = witness_path(&m, &d, z0, w, c, 4.0).unwrap();
            assert!((p.length() - v.feasible_length[k]).abs() < 1e-9);
            let d_min = p.cells()[..p.cells().len() - 1].iter().map(|&i| d.get(i)).fold(f64::INFINITY, f64::min);
            assert!(witness_constant(&p, &m, &d).unwrap() <= c + 4.0 * h / d_min + 1e-9);
        }
    }

    #[test]
    fn comb_visibility_grows_with_c() {
        let m: DomainMask<f64> =
            generate(&DomainSpec { kind: DomainKind::Comb { teeth: 4, tooth_width: 0.04, corridor_width: 0.2 }, h: 1.0 / 256.0 })
                .unwrap();
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.5, 0.9]).unwrap();
        let cfg = VisibilityConfig::default();
        let ladder = [1.0, 2.0, 4.0, 8.0, 16.0];
        let sets: Vec<VisibilityResult> = ladder.iter().map(|&c| visible_set(&m, &d, z0, c, &cfg).unwrap()).collect();
        for w in sets.windows(2) {
            assert!(w[0].visible.iter().all(|&x| w[1].is_visible(x)));
        }
        // Deep room corners: y just above 0, invisible at small c, visible at large c.
        let low = &sets[1];
        let high = &sets[4];
        let deep: Vec<usize> = m.boundary_cells().into_iter().filter(|&i| m.space().center(i)[1] < 0.05).collect();
        assert!(deep.iter().any(|&x| !low.is_visible(x)));
        assert!(high.visible.len() > low.visible.len());
    }

    #[test]
    fn corridor_constant_bracket() {
        // Corridor 8 x 64 (inside rows 1..=6), z0 near one end, omega at the far end wall.
        let s = GridSpace::new(2, &[64, 8], 1.0, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        let m = DomainMask::new(s.clone(), inside).unwrap();
        let d = distance_to_complement(&m);
        let z0 = s.index([3, 3, 0]);
        let omega = s.index([63, 3, 0]);
        let cfg = VisibilityConfig { kappa: 0.0, ..Default::default() };
        let c = min_john_constant(&m, &d, z0, omega, &cfg);
        let (l, w) = (60.0, 6.0);
        assert!(c >= l / w && c <= 4.0 * l / w, "{c}");
        // Brute force: the straight path along row 3 is optimal and its constant is the
        // max of remaining / d over its vertices.
        let cells: Vec<usize> = (3..=63).map(|x| s.index([x, 3, 0])).collect();
        let p = GridPath::from_cells(&s, cells).unwrap();
        let exact = john_constant_of_path(&p, &m, &d).unwrap();
        assert!(c >= exact * 0.99 && c <= exact * 1.02, "{c} vs {exact}");
    }

    #[test]
    fn empty_tree_is_vacuously_contained() {
        let s = GridSpace::new(2, &[8, 8], 1.0, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        let m = DomainMask::new(s, inside).unwrap();
        let d = distance_to_complement(&m);
        let mut t = synthetic(0, &[]);
        t.nodes.clear();
        let v = VisibilityResult { z0: 27, c: 1.0, kappa: 4.0, tested: vec![], visible: vec![], feasible_length: vec![] };
        let r = containment_report(&t, &v, &m, &d, &VisibilityConfig::default());
        assert_eq!(r.fraction, 1.0);
    }
}
