//! Mass-distribution lower bounds.
//!
//! If `nu(Q) <= A side(Q)^t` for every dyadic cube `Q`, any dyadic cover of
//! the support costs at least `nu.total / A`.

use serde::{Deserialize, Serialize};

use crate::content::dyadic::{morton, root_level};
use crate::error::{Error, Result};
use crate::gridspace::GridSpace;
use crate::real::{compensated_sum, Real};

/// A finite atomic measure on grid cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMeasureView<T> {
    pub atoms: Vec<(usize, T)>,
    pub total: T,
}

impl<T: Real> TreeMeasureView<T> {
    /// Drops non-positive weights and recomputes the total.
    pub fn new(atoms: Vec<(usize, T)>) -> Self {
        let atoms: Vec<(usize, T)> = atoms.into_iter().filter(|a| a.1 > T::zero()).collect();
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        Self { atoms, total }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanBound {
    /// `total / cube_constant`: certified lower bound for the dyadic content of the support.
    pub lower: f64,
    /// `max nu(Q) / side(Q)^t` over dyadic cubes at the scanned levels.
    pub cube_constant: f64,
    /// Level and corner (cells) of the maximizing cube.
    pub cube_witness: (u32, [usize; 3]),
    /// `max nu(B(x, r)) / r^t` over atoms `x` and scanned radii.
    pub ball_constant: f64,
}

/// Scans dyadic cubes with sides in `[scale_lo, scale_hi]` and metric balls of
/// those radii around atoms.
pub fn frostman_lower_bound<T: Real>(
    space: &GridSpace<T>,
    nu: &TreeMeasureView<T>,
    t: T,
    scales: (T, T),
) -> Result<FrostmanBound> {
    if !(nu.total > T::zero()) {
        return Err(Error::DegenerateMeasure);
    }
    let dim = space.dim();
    let top = root_level(space);
    let levels: Vec<u32> = (0..=top)
        .filter(|&l| {
            let side = space.h() * T::count(1usize << l);
            side >= scales.0 - space.tol() && side <= scales.1 + space.tol()
        })
        .collect();
    let mut keyed: Vec<(u64, T)> = nu.atoms.iter().map(|&(i, w)| (morton(space.coord(i), dim), w)).collect();
    keyed.sort_unstable_by_key(|a| a.0);

    let mut cube_constant = T::zero();
    let mut cube_witness = (0u32, [0usize; 3]);
    for &level in &levels {
        let side = (space.h() * T::count(1usize << level)).powf(t);
        let shift = dim as u32 * level;
        let mut k = 0;
        while k < keyed.len() {
            let key = keyed[k].0 >> shift;
            let mut mass = T::zero();
            let first = keyed[k].0;
            while k < keyed.len() && keyed[k].0 >> shift == key {
                mass += keyed[k].1;
                k += 1;
            }
            let ratio = mass / side;
            if ratio > cube_constant {
                cube_constant = ratio;
                let c = crate::content::dyadic::demorton(first, dim);
                let mut corner = [0usize; 3];
                for a in 0..dim {
                    corner[a] = (c[a] >> level) << level;
                }
                cube_witness = (level, corner);
            }
        }
    }

    let radii: Vec<T> = levels.iter().map(|&l| space.h() * T::count(1usize << l)).collect();
    let ball_constant = ball_scan(space, &nu.atoms, &radii, t);
    Ok(FrostmanBound {
        lower: (nu.total / cube_constant).f64(),
        cube_constant: cube_constant.f64(),
        cube_witness,
        ball_constant: ball_constant.f64(),
    })
}

/// `max nu(B(x, r)) / r^t` over atoms `x` and the given radii.
pub fn ball_scan<T: Real>(space: &GridSpace<T>, atoms: &[(usize, T)], radii: &[T], t: T) -> T {
    let mut best = T::zero();
    for &r in radii {
        let mass = ball_masses(space, atoms, r);
        let denom = r.powf(t);
        for m in mass {
            best = best.max(m / denom);
        }
    }
    best
}

/// `nu(B(x, r))` for every atom `x`, via a sweep over atoms sorted by x-coordinate.
pub fn ball_masses<T: Real>(space: &GridSpace<T>, atoms: &[(usize, T)], r: T) -> Vec<T> {
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by_key(|&k| (space.coord(atoms[k].0)[0], atoms[k].0));
    let xs: Vec<usize> = order.iter().map(|&k| space.coord(atoms[k].0)[0]).collect();
    let reach = (r / space.h() + T::of(T::SLACK)).floor().to_usize().unwrap_or(0);
    let limit = r + space.tol();
    let mut out = vec![T::zero(); atoms.len()];
    for (pos, &k) in order.iter().enumerate() {
        let x = xs[pos];
        let lo = xs.partition_point(|&v| v + reach < x);
        let mut parts = Vec::new();
        for q in lo..order.len() {
            if xs[q] > x + reach {
                break;
            }
            let j = order[q];
            if space.distance(atoms[k].0, atoms[j].0) <= limit {
                parts.push(atoms[j].1);
            }
        }
        out[k] = compensated_sum(parts);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_gives_cell_size() {
        let s = GridSpace::<f64>::new(2, &[16, 16], 1.0 / 16.0, &[0.0, 0.0]).unwrap();
        let nu = TreeMeasureView::new(vec![(37, 1.0)]);
        let b = frostman_lower_bound(&s, &nu, 1.0, (s.h(), 1.0)).unwrap();
        assert!((b.lower - s.h()).abs() < 1e-15);
        assert_eq!(b.cube_witness.0, 0);
    }

    #[test]
    fn uniform_segment_gives_one() {
        let s = GridSpace::<f64>::new(2, &[64, 64], 1.0 / 64.0, &[0.0, 0.0]).unwrap();
        let atoms = (0..64).map(|x| (s.index([x, 3, 0]), 1.0 / 64.0)).collect();
        let nu = TreeMeasureView::new(atoms);
        let b = frostman_lower_bound(&s, &nu, 1.0, (s.h(), 1.0)).unwrap();
        // Oracle: every dyadic cube meeting the row holds exactly side / 1 of the mass.
        assert!((b.cube_constant - 1.0).abs() < 1e-12);
        assert!((b.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_measure_is_rejected() {
        let s = GridSpace::<f64>::new(2, &[8, 8], 1.0, &[0.0, 0.0]).unwrap();
        let nu = TreeMeasureView::<f64>::new(vec![]);
        assert!(matches!(frostman_lower_bound(&s, &nu, 1.0, (1.0, 8.0)), Err(Error::DegenerateMeasure)));
    }

    #[test]
    fn ball_masses_match_brute_force() {
        let s = GridSpace::<f64>::new(2, &[20, 20], 1.0, &[0.0, 0.0]).unwrap();
        let atoms: Vec<(usize, f64)> = (0..400).filter(|i| i % 13 == 2).map(|i| (i, 1.0 + i as f64 * 0.01)).collect();
        for r in [1.0, 2.5, 7.0] {
            let fast = ball_masses(&s, &atoms, r);
            for (k, a) in atoms.iter().enumerate() {
                let slow: f64 = atoms.iter().filter(|b| s.distance(a.0, b.0) <= r + 1e-9).map(|b| b.1).sum();
                assert!((fast[k] - slow).abs() < 1e-9);
            }
        }
    }
}
