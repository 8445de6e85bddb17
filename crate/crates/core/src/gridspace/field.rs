use std::collections::BinaryHeap;

use crate::gridspace::mask::DomainMask;
use crate::gridspace::search::MinEntry;
use crate::gridspace::GridSpace;
use crate::real::Real;

/// Per-cell distance to the complement of a domain (0 on the complement).
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField<T> {
    values: Vec<T>,
}

impl<T: Real> DistanceField<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest value and the lowest index attaining it.
    pub fn max(&self) -> (usize, T) {
        let mut best = (0, T::neg_infinity());
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }
}

/// Multi-source Dijkstra from the complement into the domain.
///
/// Complement cells with an inside stencil neighbor are seeded at 0; relaxation
/// only enters inside cells, which is exact because a shortest path to the
/// complement never needs to cross it first.
pub fn distance_to_complement<T: Real>(mask: &DomainMask<T>) -> DistanceField<T> {
    let space = mask.space();
    let mut dist = vec![T::infinity(); space.len()];
    let mut heap = BinaryHeap::new();
    for i in 0..space.len() {
        if mask.is_inside(i) {
            continue;
        }
        dist[i] = T::zero();
        let mut front = false;
        space.for_each_neighbor(i, |j, _| front |= mask.is_inside(j));
        if front {
            heap.push(MinEntry { key: T::zero(), cell: i });
        }
    }
    while let Some(MinEntry { key, cell }) = heap.pop() {
        if key > dist[cell] {
            continue;
        }
        space.for_each_neighbor(cell, |j, w| {
            if mask.is_inside(j) {
                let nd = key + w;
                if nd < dist[j] {
                    dist[j] = nd;
                    heap.push(MinEntry { key: nd, cell: j });
                }
            }
        });
    }
    DistanceField { values: dist }
}

/// Dijkstra from weighted sources through cells accepted by `passable`,
/// truncated at `cutoff`. Unreached cells hold `+inf`.
pub fn multi_source_distance<T: Real>(
    space: &GridSpace<T>,
    sources: &[(usize, T)],
    passable: impl Fn(usize) -> bool,
    cutoff: T,
) -> Vec<T> {
    let mut dist = vec![T::infinity(); space.len()];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in sources {
        if d0 < dist[s] {
            dist[s] = d0;
            heap.push(MinEntry { key: d0, cell: s });
        }
    }
    while let Some(MinEntry { key, cell }) = heap.pop() {
        if key > dist[cell] {
            continue;
        }
        space.for_each_neighbor(cell, |j, w| {
            let nd = key + w;
            if nd <= cutoff && nd < dist[j] && passable(j) {
                dist[j] = nd;
                heap.push(MinEntry { key: nd, cell: j });
            }
        });
    }
    dist
}

/// Stencil edges `(u, v)` with `|f(u) - f(v)| > lip * w(u, v) + tol`.
pub fn lipschitz_violations<T: Real>(
    space: &GridSpace<T>,
    values: &[T],
    lip: T,
    tol: T,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..space.len() {
        space.for_each_neighbor(u, |v, w| {
            if u < v && (values[u] - values[v]).abs() > lip * w + tol {
                out.push((u, v));
            }
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(nx: usize, ny: usize, h: f64) -> GridSpace<f64> {
        GridSpace::new(2, &[nx, ny], h, &[0.0, 0.0]).unwrap()
    }

    #[test]
    fn corridor_center_is_one_hop() {
        let s = space(9, 5, 1.0);
        let inside = (0..s.len())
            .map(|i| {
                let c = s.coord(i);
                c[1] == 2 && (2..=6).contains(&c[0])
            })
            .collect();
        let mask = DomainMask::new(s.clone(), inside).unwrap();
        let d = distance_to_complement(&mask);
        assert_eq!(d.get(s.index([4, 2, 0])), 1.0);
        assert_eq!(d.get(0), 0.0);
    }

    #[test]
    fn disk_center_distance_matches_radius() {
        let n = 64;
        let h = 1.0 / n as f64;
        let s = space(n, n, h);
        let c = 31.5 * h;
        let radius = 0.45;
        let mask = DomainMask::from_fn(s.clone(), |p| {
            ((p[0] - c).powi(2) + (p[1] - c).powi(2)).sqrt() < radius
        })
        .unwrap();
        let d = distance_to_complement(&mask);
        let center = s.index([31, 31, 0]);
        let exact = radius - ((s.center(center)[0] - c).powi(2) * 2.0).sqrt();
        assert!((d.get(center) - exact).abs() <= 2.0 * h, "{} vs {exact}", d.get(center));
    }

    fn random_mask(bits: &[bool]) -> Option<DomainMask<f64>> {
        let s = space(12, 12, 0.5);
        DomainMask::new(s, bits.to_vec()).ok()
    }

    proptest! {
        #[test]
        fn field_is_lipschitz_and_bracketed(bits in prop::collection::vec(prop::bool::weighted(0.8), 144)) {
            if let Some(mask) = random_mask(&bits) {
                let s = mask.space();
                let d = distance_to_complement(&mask);
                prop_assert!(lipschitz_violations(s, d.as_slice(), 1.0, s.tol()).is_empty());
                let hops = mask.hop_distances();
                for i in 0..s.len() {
                    let lo = s.h() * hops[i] as f64;
                    let hi = lo * (s.dim() as f64).sqrt();
                    prop_assert!(d.get(i) + s.tol() >= lo && d.get(i) <= hi + s.tol());
                }
            }
        }
    }
}
