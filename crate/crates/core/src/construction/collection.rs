//! Candidate centers, maximal chainable collections and well-placed subcollections.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridspace::field::DistanceField;
use crate::gridspace::mask::DomainMask;
use crate::gridspace::GridSpace;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectionKind {
    Chainable,
    WellPlaced,
}

/// The ball `B(center, radius)` a collection must live in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: usize,
    pub radius: f64,
}

/// Same-radius balls, identified by their center cells (sorted ascending for
/// chainable collections, in selection order for well-placed ones).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCollection {
    pub radius: f64,
    pub centers: Vec<usize>,
    pub kind: CollectionKind,
    pub region: Option<Region>,
}

/// Inside cells `z` with `d(z) >= radius - kappa h` and
/// `d(z, region.center) <= region.radius - radius + kappa h`, in index order.
pub fn admissible_centers<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    region: Region,
    radius: T,
    kappa: T,
) -> Result<Vec<usize>> {
    let space = mask.space();
    let floor = space.h() * T::of(3.0);
    if radius + space.tol() < floor {
        return Err(Error::BelowResolution { radius: radius.f64(), floor: floor.f64() });
    }
    let slack = kappa * space.h();
    let depth = radius - slack - space.tol();
    let reach = T::of(region.radius) - radius + slack;
    let mut out = Vec::new();
    if reach >= T::zero() {
        space.for_each_in_ball(region.center, reach, |i, _| {
            if mask.is_inside(i) && dfield.get(i) >= depth {
                out.push(i);
            }
        });
    }
    out.sort_unstable();
    if out.is_empty() {
        return Err(Error::EmptyCandidates { radius: radius.f64() });
    }
    Ok(out)
}

/// The graph on candidate centers with an edge whenever `d(x, y) < radius`.
///
/// Stencil-adjacent candidates are always joined (a stencil step is shorter
/// than any admissible radius). Longer edges only matter between different
/// stencil components, and any such edge can be replaced by one leaving from a
/// candidate with a non-candidate stencil neighbor, so only those are scanned.
pub struct ChainGraph<'a, T> {
    space: &'a GridSpace<T>,
    radius: T,
    cells: Vec<usize>,
    index: HashMap<usize, u32>,
    bridges: Vec<Vec<(u32, T)>>,
    component: Vec<u32>,
}

struct UnionFind(Vec<u32>);

impl UnionFind {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let p = self.0[x as usize];
            self.0[x as usize] = self.0[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi as usize] = lo;
        true
    }
}

impl<'a, T: Real> ChainGraph<'a, T> {
    pub fn new(space: &'a GridSpace<T>, candidates: &[usize], radius: T) -> Self {
        let mut cells = candidates.to_vec();
        cells.sort_unstable();
        cells.dedup();
        let index: HashMap<usize, u32> = cells.iter().enumerate().map(|(k, &c)| (c, k as u32)).collect();
        let n = cells.len();
        let mut uf = UnionFind((0..n as u32).collect());
        let mut components = n;
        let mut frontier = Vec::new();
        for (k, &c) in cells.iter().enumerate() {
            let mut open = false;
            space.for_each_neighbor(c, |j, _| match index.get(&j) {
                Some(&m) => {
                    if uf.union(k as u32, m) {
                        components -= 1;
                    }
                }
                None => open = true,
            });
            if open {
                frontier.push(k as u32);
            }
        }
        let mut bridges = vec![Vec::new(); n];
        if components > 1 {
            let stencil_root: Vec<u32> = (0..n as u32).map(|k| uf.find(k)).collect();
            let limit = radius - space.tol();
            for &k in &frontier {
                let own = stencil_root[k as usize];
                let mut nearest: HashMap<u32, (T, u32)> = HashMap::new();
                space.for_each_in_ball(cells[k as usize], radius, |j, d| {
                    if d >= limit {
                        return;
                    }
                    if let Some(&m) = index.get(&j) {
                        let root = stencil_root[m as usize];
                        if root != own {
                            let e = nearest.entry(root).or_insert((d, m));
                            if (d, m) < *e {
                                *e = (d, m);
                            }
                        }
                    }
                });
                let mut found: Vec<(u32, T)> = nearest.into_values().map(|(d, m)| (m, d)).collect();
                found.sort_by_key(|e| e.0);
                for (m, d) in found {
                    uf.union(k, m);
                    bridges[k as usize].push((m, d));
                    bridges[m as usize].push((k, d));
                }
            }
        }
        let component = (0..n as u32).map(|k| uf.find(k)).collect();
        Self { space, radius, cells, index, bridges, component }
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.index.contains_key(&cell)
    }

    /// Sorted cells of the component containing `seed`.
    pub fn component_of(&self, seed: usize) -> Result<Vec<usize>> {
        let &k = self.index.get(&seed).ok_or(Error::SeedNotAdmissible(seed))?;
        let root = self.component[k as usize];
        Ok(self
            .cells
            .iter()
            .zip(&self.component)
            .filter(|(_, &c)| c == root)
            .map(|(&cell, _)| cell)
            .collect())
    }

    pub(crate) fn local(&self, cell: usize) -> Option<u32> {
        self.index.get(&cell).copied()
    }

    pub(crate) fn cell(&self, k: u32) -> usize {
        self.cells[k as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.cells.len()
    }

    /// Calls `f(neighbor, weight)` for stencil and bridge edges of local node `k`.
    pub(crate) fn for_each_edge(&self, k: u32, mut f: impl FnMut(u32, T)) {
        self.space.for_each_neighbor(self.cells[k as usize], |j, w| {
            if let Some(&m) = self.index.get(&j) {
                f(m, w);
            }
        });
        for &(m, d) in &self.bridges[k as usize] {
            f(m, d);
        }
    }
}

/// The unique maximal chainable collection containing `seed`.
pub fn chainable_component<T: Real>(
    space: &GridSpace<T>,
    candidates: &[usize],
    radius: T,
    seed: usize,
    region: Option<Region>,
) -> Result<BallCollection> {
    let graph = ChainGraph::new(space, candidates, radius);
    Ok(BallCollection {
        radius: radius.f64(),
        centers: graph.component_of(seed)?,
        kind: CollectionKind::Chainable,
        region,
    })
}

/// `|d(x) - radius| <= kappa h`.
pub fn touches_boundary<T: Real>(dfield: &DistanceField<T>, x: usize, radius: T, slack: T) -> bool {
    (dfield.get(x) - radius).abs() <= slack
}

/// Greedy maximal subset of boundary-touching balls with pairwise center
/// distance `>= 8 radius`, scanned by distance to the region center, then index.
/// `forced` is placed first when given.
pub fn well_placed_subcollection<T: Real>(
    space: &GridSpace<T>,
    chainable: &BallCollection,
    dfield: &DistanceField<T>,
    kappa: T,
    forced: Option<usize>,
) -> Result<BallCollection> {
    let radius = T::of(chainable.radius);
    let slack = kappa * space.h() + space.tol();
    let mut touching: Vec<usize> = chainable
        .centers
        .iter()
        .copied()
        .filter(|&x| touches_boundary(dfield, x, radius, slack))
        .collect();
    if touching.is_empty() {
        return Err(Error::NoBoundaryTouching);
    }
    if let Some(center) = chainable.region.map(|r| r.center) {
        touching.sort_by(|&a, &b| {
            space
                .distance(a, center)
                .partial_cmp(&space.distance(b, center))
                .expect("finite distances")
                .then(a.cmp(&b))
        });
    }
    let sep = radius * T::of(8.0) - space.tol();
    let mut picked: Vec<usize> = Vec::new();
    let order = forced.into_iter().chain(touching.iter().copied());
    for x in order {
        if picked.iter().all(|&y| y != x && space.distance(x, y) >= sep) {
            picked.push(x);
        }
    }
    Ok(BallCollection {
        radius: chainable.radius,
        centers: picked,
        kind: CollectionKind::WellPlaced,
        region: chainable.region,
    })
}

/// Greedy net with pairwise distance `>= min_sep`: `mandatory` first, then
/// `cells` in the given order. Mandatory cells are kept even when closer.
pub fn separated_net<T: Real>(space: &GridSpace<T>, cells: &[usize], min_sep: T, mandatory: &[usize]) -> Vec<usize> {
    let bucket = (min_sep / space.h()).ceil().to_usize().unwrap_or(1).max(1);
    let key = |i: usize| {
        let c = space.coord(i);
        [c[0] / bucket, c[1] / bucket, c[2] / bucket]
    };
    let mut grid: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
    let mut out = Vec::new();
    let limit = min_sep - space.tol();
    let place = |i: usize, force: bool, grid: &mut HashMap<[usize; 3], Vec<usize>>, out: &mut Vec<usize>| {
        let k = key(i);
        if !force {
            for dz in 0..3usize {
                for dy in 0..3usize {
                    for dx in 0..3usize {
                        if (k[0] + dx < 1) || (k[1] + dy < 1) || (k[2] + dz < 1) {
                            continue;
                        }
                        let nk = [k[0] + dx - 1, k[1] + dy - 1, k[2] + dz - 1];
                        if let Some(list) = grid.get(&nk) {
                            if list.iter().any(|&j| j == i || space.distance(i, j) < limit) {
                                return;
                            }
                        }
                    }
                }
            }
        } else if grid.get(&k).is_some_and(|l| l.contains(&i)) {
            return;
        }
        grid.entry(k).or_default().push(i);
        out.push(i);
    };
    for &m in mandatory {
        place(m, true, &mut grid, &mut out);
    }
    for &c in cells {
        place(c, false, &mut grid, &mut out);
    }
    out
}
