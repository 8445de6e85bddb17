//! The necessity counterexample: `B(0, 2)` with thin radial tubes removed.
//!
//! Tube tips sit on the 3/2-sphere at the points of a cap cover with cap
//! radius `1 / (4c)`, so every point of that sphere has `c d(z) <= 1/4` while
//! it is still at least `1/2` away from the outer sphere.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::domaingen::{box_space, GenerationInfo, Generated};
use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::real::Real;

pub const INNER_RADIUS: f64 = 1.5;
pub const OUTER_RADIUS: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tentacle {
    /// Tip on the inner sphere.
    pub point: [f64; 3],
    /// Unit radial direction.
    pub direction: [f64; 3],
    /// Complement cells forming the tube.
    pub cells: Vec<usize>,
}

fn fibonacci(n: usize) -> impl Iterator<Item = [f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n).map(move |k| {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
        let rho = (1.0 - z * z).sqrt();
        let phi = golden * k as f64;
        [rho * phi.cos(), rho * phi.sin(), z]
    })
}

fn chord(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Unit directions whose points on the sphere of radius `radius` cover it by
/// Euclidean caps of radius `cap`.
///
/// The six axis directions come first; Fibonacci points closer than `cap` to
/// an axis point are dropped. The Fibonacci count grows until a sphere sample
/// twenty times denser is covered.
pub fn cap_cover(radius: f64, cap: f64) -> Vec<[f64; 3]> {
    let axes = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let unit_cap = cap / radius;
    let area = 4.0 * std::f64::consts::PI;
    let mut n = ((area / (std::f64::consts::PI * unit_cap * unit_cap)).ceil() as usize).max(6);
    loop {
        let mut dirs: Vec<[f64; 3]> = axes.to_vec();
        dirs.extend(fibonacci(n).filter(|p| axes.iter().all(|a| chord(a, p) >= unit_cap)));
        let covered = fibonacci(20 * n).all(|q| dirs.iter().any(|d| chord(d, &q) <= unit_cap));
        if covered {
            return dirs;
        }
        n = n + n / 20 + 1;
    }
}

pub(crate) fn generate<T: Real>(c: f64, tentacle_radius: f64, half_width: f64, h: f64) -> Result<Generated<T>> {
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter(format!("John constant must be >= 1, got {c}")));
    }
    if !(tentacle_radius >= h) {
        return Err(Error::InvalidParameter(format!("tentacle radius {tentacle_radius} below h")));
    }
    if half_width < OUTER_RADIUS + h {
        return Err(Error::InvalidParameter("world box must contain the outer sphere".into()));
    }
    let cap = 1.0 / (4.0 * c);
    let dirs = cap_cover(INNER_RADIUS, cap);
    let mut sep = f64::INFINITY;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            sep = sep.min(INNER_RADIUS * chord(&dirs[i], &dirs[j]));
        }
    }
    let gap = 2.0 * 3f64.sqrt();
    let min_feasible_h = (sep - 2.0 * tentacle_radius) / gap;
    if sep < 2.0 * tentacle_radius + gap * h {
        return Err(Error::GenerationFailed {
            reason: format!("tubes of radius {tentacle_radius} at spacing {sep:.4} collide"),
            min_feasible_h: (min_feasible_h > 0.0).then_some(min_feasible_h),
        });
    }

    let space = box_space::<T>(&[-half_width; 3], &[half_width; 3], h)?;
    let outer_tube = OUTER_RADIUS + 2.0 * h;
    let mut label = vec![u32::MAX; space.len()];
    let mut inside = vec![false; space.len()];
    for (i, slot) in inside.iter_mut().enumerate() {
        let p = space.center(i);
        let p = [p[0].f64(), p[1].f64(), p[2].f64()];
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if norm >= INNER_RADIUS && norm <= outer_tube {
            for (k, d) in dirs.iter().enumerate() {
                let t = p[0] * d[0] + p[1] * d[1] + p[2] * d[2];
                if t <= 0.0 {
                    continue;
                }
                let off = (norm * norm - t * t).max(0.0).sqrt();
                if off <= tentacle_radius {
                    label[i] = k as u32;
                    break;
                }
            }
        }
        *slot = norm < OUTER_RADIUS && label[i] == u32::MAX;
    }

    let mut tubes: Vec<Vec<usize>> = vec![Vec::new(); dirs.len()];
    for (i, &l) in label.iter().enumerate() {
        if l != u32::MAX {
            tubes[l as usize].push(i);
        }
    }
    for (k, cells) in tubes.iter().enumerate() {
        let mut clash = false;
        for &i in cells {
            space.for_each_neighbor(i, |j, _| clash |= label[j] != u32::MAX && label[j] != k as u32);
        }
        if clash {
            return Err(Error::GenerationFailed {
                reason: format!("tube {k} touches another tube"),
                min_feasible_h: (min_feasible_h > 0.0).then_some(min_feasible_h),
            });
        }
        if cells.is_empty() || !tube_connected(&space, &label, k as u32, cells[0], cells.len()) {
            return Err(Error::GenerationFailed {
                reason: format!("tube {k} is not a connected voxel tube"),
                min_feasible_h: Some(tentacle_radius / 2.0),
            });
        }
    }

    let mask = DomainMask::new(space, inside).map_err(|e| match e {
        Error::InvalidMask(m) => Error::ConnectivityFailed(m),
        other => other,
    })?;
    let tentacles = dirs
        .iter()
        .zip(tubes)
        .map(|(d, cells)| Tentacle {
            point: [INNER_RADIUS * d[0], INNER_RADIUS * d[1], INNER_RADIUS * d[2]],
            direction: *d,
            cells,
        })
        .collect();
    Ok(Generated {
        mask,
        info: GenerationInfo { center: vec![0.0; 3], tentacles, cap_radius: Some(cap) },
    })
}

fn tube_connected<T: Real>(
    space: &crate::gridspace::GridSpace<T>,
    label: &[u32],
    k: u32,
    start: usize,
    size: usize,
) -> bool {
    let mut seen = std::collections::HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        space.for_each_neighbor(u, |v, _| {
            if label[v] == k && seen.insert(v) {
                queue.push_back(v);
            }
        });
    }
    seen.len() == size
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_reaches_every_sample_point() {
        let dirs = cap_cover(1.5, 0.25);
        let unit = 0.25 / 1.5;
        for q in fibonacci(5000) {
            assert!(dirs.iter().any(|d| chord(d, &q) <= unit * 1.05));
        }
    }

    #[test]
    fn coarse_tubes_are_rejected_with_a_hint() {
        match generate::<f64>(1.0, 0.3, 2.1, 4.2 / 80.0) {
            Err(Error::GenerationFailed { .. }) => {}
            other => panic!("expected failure, got {:?}", other.map(|g| g.info.cap_radius)),
        }
    }
}
