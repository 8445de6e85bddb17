//! Greedy weighted set cover of a cell set by metric balls.
//!
//! Sequential and order-dependent: candidates are popped by efficiency
//! (newly covered cells per unit cost) with lazy re-evaluation, ties broken
//! by candidate order (radius index, then cell index).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::gridspace::ahlfors::ball_measure;
use crate::gridspace::GridSpace;
use crate::real::{compensated_sum, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    pub center: usize,
    pub radius: f64,
}

/// Cost of one ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BallCost<T> {
    /// `r^t`.
    Power(T),
    /// `mu(B) / r^alpha`.
    Codimension(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyCover<T> {
    pub upper: T,
    pub balls: Vec<CoverBall>,
}

struct Candidate<T> {
    score: T,
    id: usize,
}

impl<T: Real> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Candidate<T> {}
impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .partial_cmp(&other.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Radii `h * 2^(k/2)` up to the diameter of the box.
pub fn default_ladder<T: Real>(space: &GridSpace<T>) -> Vec<T> {
    let mut out = Vec::new();
    let mut r = space.h();
    let step = T::of(2f64.sqrt());
    let diam = space.diameter().max(space.h());
    while r <= diam * step {
        out.push(r);
        r *= step;
    }
    out.reverse();
    out
}

/// Greedy cover of `cells` by balls centered at cells of the set.
///
/// The set is read as a union of closed cells, so a ball `B(x, r)` covers the
/// cells whose centers lie within `r - h/2`.
///
/// For radius `r` the centers are one cell per block of stride
/// `max(1, floor(r / 2h))` (the lowest-index member), so the candidate count
/// stays proportional to the set size; the smallest radius always uses every
/// cell, which guarantees a cover exists.
pub fn greedy_cover<T: Real>(space: &GridSpace<T>, cells: &[usize], ladder: &[T], cost: BallCost<T>) -> GreedyCover<T> {
    if cells.is_empty() || ladder.is_empty() {
        return GreedyCover { upper: T::zero(), balls: Vec::new() };
    }
    let mut member = vec![false; space.len()];
    for &i in cells {
        member[i] = true;
    }
    let smallest = ladder
        .iter()
        .copied()
        .fold(T::infinity(), |a, b| a.min(b));
    let mut sorted_cells = cells.to_vec();
    sorted_cells.sort_unstable();
    sorted_cells.dedup();

    let mut cands: Vec<(usize, T, T)> = Vec::new();
    for &r in ladder {
        let stride = if r == smallest {
            1
        } else {
            (r / (space.h() * T::of(2.0))).floor().to_usize().unwrap_or(1).max(1)
        };
        let mut seen = std::collections::HashSet::new();
        for &i in &sorted_cells {
            let c = space.coord(i);
            let block = [c[0] / stride, c[1] / stride, c[2] / stride];
            if seen.insert(block) {
                let w = match cost {
                    BallCost::Power(t) => r.powf(t),
                    BallCost::Codimension(alpha) => ball_measure(space, None, i, r) / r.powf(alpha),
                };
                cands.push((i, r, w));
            }
        }
    }

    let half = space.h() / T::of(2.0);
    let gain = |covered: &[bool], center: usize, r: T| {
        let mut n = 0usize;
        space.for_each_in_ball(center, r - half, |j, _| {
            if member[j] && !covered[j] {
                n += 1;
            }
        });
        n
    };
    let mut covered = vec![false; space.len()];
    let mut heap: BinaryHeap<Candidate<T>> = cands
        .iter()
        .enumerate()
        .map(|(id, &(c, r, w))| Candidate { score: T::count(gain(&covered, c, r)) / w, id })
        .collect();
    let mut remaining = sorted_cells.len();
    let mut balls = Vec::new();
    let mut costs = Vec::new();
    while remaining > 0 {
        let Some(top) = heap.pop() else { break };
        let (c, r, w) = cands[top.id];
        let g = gain(&covered, c, r);
        if g == 0 {
            continue;
        }
        let score = T::count(g) / w;
        if heap.peek().is_some_and(|next| score < next.score) {
            heap.push(Candidate { score, id: top.id });
            continue;
        }
        space.for_each_in_ball(c, r - half, |j, _| {
            if member[j] && !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        });
        balls.push(CoverBall { center: c, radius: r.f64() });
        costs.push(w);
    }
    GreedyCover { upper: compensated_sum(costs), balls }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::dyadic::dyadic_content;

    fn unit(n: usize) -> GridSpace<f64> {
        GridSpace::new(2, &[n, n], 1.0 / n as f64, &[0.5 / n as f64; 2]).unwrap()
    }

    #[test]
    fn single_cell_uses_smallest_radius() {
        let s = unit(32);
        let ladder = default_ladder(&s);
        let g = greedy_cover(&s, &[100], &ladder, BallCost::Power(1.0));
        assert_eq!(g.balls.len(), 1);
        assert!((g.upper - s.h()).abs() < 1e-15);
    }

    #[test]
    fn segment_cover_is_comparable_to_length() {
        let s = unit(128);
        let row: Vec<usize> = (10..110).map(|x| s.index([x, 40, 0])).collect();
        let len = 100.0 * s.h();
        let g = greedy_cover(&s, &row, &default_ladder(&s), BallCost::Power(1.0));
        assert!(g.upper >= len / 2.0 && g.upper <= 2.0 * len, "{} vs {len} {:?}", g.upper, g.balls);
        let d = dyadic_content(&s, &row, 1.0);
        assert!(d <= g.upper * 8f64.sqrt());
    }

    #[test]
    fn two_far_cells_use_two_small_balls() {
        let s = unit(64);
        let a = s.index([5, 5, 0]);
        let b = s.index([50, 5, 0]);
        let t = 0.5;
        let big = 45.0 * s.h();
        let ladder = vec![big, s.h()];
        // Enumerate the options: one ball of radius D or two of radius h.
        let two: f64 = 2.0 * s.h().powf(t);
        let one: f64 = big.powf(t);
        assert!(two < one);
        let g = greedy_cover(&s, &[a, b], &ladder, BallCost::Power(t));
        assert_eq!(g.balls.len(), 2);
        assert!((g.upper - two).abs() < 1e-12);
    }
}
