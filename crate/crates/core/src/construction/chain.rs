//! Paths through chainable collections with length and clearance certificates.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::construction::collection::{BallCollection, ChainGraph};
use crate::error::{Error, Result};
use crate::gridspace::field::DistanceField;
use crate::gridspace::mask::DomainMask;
use crate::gridspace::path::{GridPath, Router};
use crate::gridspace::search::MinEntry;
use crate::real::Real;

/// A chain path and its certificate data.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainPath<T> {
    pub path: GridPath<T>,
    /// Centers visited, consecutive ones at distance `< radius`.
    pub hops: Vec<usize>,
    /// Lower bound on the distance from the path to the complement of the
    /// union of the hop balls, from center distances.
    pub union_clearance: T,
}

impl<T: Real> ChainPath<T> {
    /// `length <= S (radius + kappa h)` and `union_clearance >= radius/2 - kappa h`,
    /// with `S` the number of hop balls.
    pub fn certified(&self, radius: T, slack: T) -> bool {
        let s = T::count(self.hops.len());
        self.path.length() <= s * (radius + slack) && self.union_clearance >= radius / T::of(2.0) - slack
    }

    pub fn record(&self, dfield: &DistanceField<T>) -> ChainRecord {
        let cells = self.path.cells().to_vec();
        let clearance = cells.iter().map(|&c| dfield.get(c).f64()).fold(f64::INFINITY, f64::min);
        ChainRecord {
            length: self.path.length().f64(),
            union_clearance: self.union_clearance.f64(),
            domain_clearance: clearance,
            hops: self.hops.clone(),
            cells,
        }
    }
}

/// Serializable form of a [`ChainPath`], plus the minimum of `d` along it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub cells: Vec<usize>,
    pub hops: Vec<usize>,
    pub length: f64,
    pub union_clearance: f64,
    pub domain_clearance: f64,
}

/// Chain path from `x` to `y` inside a chainable collection.
pub fn chain_path<T: Real>(mask: &DomainMask<T>, collection: &BallCollection, x: usize, y: usize) -> Result<ChainPath<T>> {
    let graph = ChainGraph::new(mask.space(), &collection.centers, T::of(collection.radius));
    let mut router = Router::new(mask.space());
    let mut out = chain_paths_from(&graph, mask, &mut router, x, &[y])?;
    Ok(out.pop().expect("one target"))
}

/// Chain paths from `source` to each target, sharing one graph search.
///
/// The center sequence is a shortest path in the chain graph; it is compressed
/// greedily into hops (farthest later center within `radius`), and each hop is
/// realized by a geodesic through the domain.
pub fn chain_paths_from<T: Real>(
    graph: &ChainGraph<'_, T>,
    mask: &DomainMask<T>,
    router: &mut Router<'_, T>,
    source: usize,
    targets: &[usize],
) -> Result<Vec<ChainPath<T>>> {
    let src = graph.local(source).ok_or(Error::NotInCollection(source))?;
    for &t in targets {
        graph.local(t).ok_or(Error::NotInCollection(t))?;
    }
    let n = graph.len();
    let mut dist = vec![T::infinity(); n];
    let mut pred = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = T::zero();
    heap.push(MinEntry { key: T::zero(), cell: src as usize });
    while let Some(MinEntry { key, cell }) = heap.pop() {
        if key > dist[cell] {
            continue;
        }
        graph.for_each_edge(cell as u32, |m, w| {
            let nd = key + w;
            if nd < dist[m as usize] {
                dist[m as usize] = nd;
                pred[m as usize] = cell as u32;
                heap.push(MinEntry { key: nd, cell: m as usize });
            }
        });
    }
    let space = mask.space();
    let radius = graph.radius();
    let limit = radius - space.tol();
    let mut out = Vec::with_capacity(targets.len());
    for &t in targets {
        let mut k = graph.local(t).expect("checked above");
        if !dist[k as usize].is_finite() {
            return Err(Error::NoPath { from: source, to: t });
        }
        let mut seq = vec![graph.cell(k)];
        while pred[k as usize] != u32::MAX {
            k = pred[k as usize];
            seq.push(graph.cell(k));
        }
        seq.reverse();

        let mut hops = vec![seq[0]];
        let mut at = 0;
        while at + 1 < seq.len() {
            let next = (at + 1..seq.len())
                .rev()
                .find(|&j| space.distance(seq[at], seq[j]) < limit)
                .unwrap_or(at + 1);
            hops.push(seq[next]);
            at = next;
        }

        let mut path = GridPath::single(hops[0]);
        let mut clearance = radius;
        for w in hops.windows(2) {
            let leg = router
                .route(w[0], w[1], |i| mask.is_inside(i))
                .ok_or(Error::NoPath { from: w[0], to: w[1] })?;
            for &v in leg.cells() {
                let near = space.distance(v, w[0]).min(space.distance(v, w[1]));
                clearance = clearance.min(radius - near);
            }
            path = path.concat(space, &leg)?;
        }
        if hops.len() == 1 {
            clearance = radius;
        }
        out.push(ChainPath { path, hops, union_clearance: clearance });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::collection::CollectionKind;
    use crate::gridspace::GridSpace;

    fn corridor(len: usize, width: usize) -> DomainMask<f64> {
        let s = GridSpace::new(2, &[len, width], 1.0, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        DomainMask::new(s, inside).unwrap()
    }

    fn collection(centers: Vec<usize>, radius: f64) -> BallCollection {
        BallCollection { radius, centers, kind: CollectionKind::Chainable, region: None }
    }

    #[test]
    fn same_endpoint_is_zero_length() {
        let m = corridor(40, 9);
        let c = m.space().index([10, 4, 0]);
        let p = chain_path(&m, &collection(vec![c], 4.0), c, c).unwrap();
        assert_eq!(p.path.length(), 0.0);
        assert_eq!(p.hops, vec![c]);
    }

    #[test]
    fn two_close_balls_use_one_geodesic() {
        let m = corridor(40, 9);
        let s = m.space();
        let (a, b) = (s.index([10, 4, 0]), s.index([13, 4, 0]));
        let p = chain_path(&m, &collection(vec![a, b], 4.0), a, b).unwrap();
        assert_eq!(p.hops, vec![a, b]);
        assert!(p.path.length() < 4.0 + 4.0);
        assert!(p.certified(4.0, 4.0));
        assert!(matches!(chain_path(&m, &collection(vec![a, b], 4.0), a, 7), Err(Error::NotInCollection(7))));
    }

    #[test]
    fn corridor_chain_is_certified_pointwise() {
        let m = corridor(130, 11);
        let s = m.space();
        let radius = 8.0;
        // Centers spaced radius/2 along the midline.
        let centers: Vec<usize> = (0..31).map(|k| s.index([5 + 4 * k, 5, 0])).collect();
        let coll = collection(centers.clone(), radius);
        let p = chain_path(&m, &coll, centers[0], centers[30]).unwrap();
        let length = s.distance(centers[0], centers[30]);
        // Consecutive hops are radius/2 apart; hop count = length / (radius/2).
        let expected = (length / (radius / 2.0)).ceil() as usize;
        assert!((p.hops.len() - 1).abs_diff(expected) <= 1, "{} vs {expected}", p.hops.len() - 1);
        assert!(p.path.length() <= 31.0 * radius);
        // Exhaustive clearance: distance to the complement of the union of all balls.
        for &v in p.path.cells() {
            let d_union = centers.iter().map(|&c| radius - s.distance(v, c)).fold(f64::MIN, f64::max);
            assert!(d_union >= radius / 2.0 - 4.0);
        }
        assert!(p.certified(radius, 4.0));
        assert!(p.path.cells().iter().all(|&c| m.is_inside(c)));
    }
}
