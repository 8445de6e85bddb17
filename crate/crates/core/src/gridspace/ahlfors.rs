use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::gridspace::GridSpace;
use crate::real::Real;

/// Extremes of `mu(B(x, r)) / r^Q` over the sampled balls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsEstimate {
    pub c_lo: f64,
    pub c_hi: f64,
    /// `max(1 / c_lo, c_hi)`.
    pub c_a: f64,
}

/// Number of radii sampled geometrically across the requested range.
const LADDER: usize = 6;

/// Measure of `B(center, r)`, restricted to the mask when one is given.
pub fn ball_measure<T: Real>(
    space: &GridSpace<T>,
    mask: Option<&DomainMask<T>>,
    center: usize,
    r: T,
) -> T {
    let mut n = 0usize;
    space.for_each_in_ball(center, r, |i, _| {
        if mask.map_or(true, |m| m.is_inside(i)) {
            n += 1;
        }
    });
    T::count(n) * space.cell_measure()
}

/// Samples metric balls and reports the spread of `mu(B) / r^Q`.
///
/// Centers are drawn from the inside cells (or all cells) with a seeded RNG.
pub fn ahlfors_constants<T: Real>(
    space: &GridSpace<T>,
    mask: Option<&DomainMask<T>>,
    samples: usize,
    r_range: (T, T),
    seed: u64,
) -> Result<AhlforsEstimate> {
    let (r_lo, r_hi) = r_range;
    let floor = space.h() * T::of(2.0);
    if r_lo + space.tol() < floor {
        return Err(Error::BelowResolution { radius: r_lo.f64(), floor: floor.f64() });
    }
    if !(r_hi >= r_lo) || samples == 0 {
        return Err(Error::InvalidParameter("need samples > 0 and r_lo <= r_hi".into()));
    }
    let pool: Vec<usize> = match mask {
        Some(m) => m.inside_cells(),
        None => (0..space.len()).collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<usize> = pool.choose_multiple(&mut rng, samples.min(pool.len())).copied().collect();
    let radii: Vec<T> = if r_hi == r_lo {
        vec![r_lo]
    } else {
        let q = (r_hi / r_lo).powf(T::one() / T::count(LADDER - 1));
        (0..LADDER).map(|k| r_lo * q.powi(k as i32)).collect()
    };
    let q = space.dim() as i32;
    let mut c_lo = f64::INFINITY;
    let mut c_hi = 0.0f64;
    for &x in &centers {
        for &r in &radii {
            let ratio = (ball_measure(space, mask, x, r) / r.powi(q)).f64();
            c_lo = c_lo.min(ratio);
            c_hi = c_hi.max(ratio);
        }
    }
    Ok(AhlforsEstimate { c_lo, c_hi, c_a: (1.0 / c_lo).max(c_hi) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_count(s: &GridSpace<f64>, center: usize, r: f64) -> usize {
        (0..s.len()).filter(|&i| s.distance(center, i) <= r + s.tol()).count()
    }

    #[test]
    fn large_ball_ratio_is_octagon_area() {
        let s = GridSpace::<f64>::new(2, &[96, 96], 1.0, &[0.0, 0.0]).unwrap();
        let c = s.index([48, 48, 0]);
        let n = brute_count(&s, c, 32.0);
        let ratio = n as f64 / 32.0f64.powi(2);
        assert!((2.0..=4.0).contains(&ratio));
        assert_eq!(ball_measure(&s, None, c, 32.0), n as f64);
    }

    #[test]
    fn half_diameter_ball_from_center() {
        let s = GridSpace::<f64>::new(2, &[33, 33], 1.0, &[0.0, 0.0]).unwrap();
        let c = s.index([16, 16, 0]);
        let r = s.diameter() / 2.0;
        let ratio = brute_count(&s, c, r) as f64 / (r * r);
        assert!(ratio >= 1.0);
        assert_eq!(ball_measure(&s, None, c, r) / (r * r), ratio);
    }

    #[test]
    fn two_cell_radius_has_thirteen_cells() {
        let s = GridSpace::<f64>::new(2, &[16, 16], 1.0, &[0.0, 0.0]).unwrap();
        let c = s.index([8, 8, 0]);
        assert_eq!(brute_count(&s, c, 2.0), 13);
        let ratio = ball_measure(&s, None, c, 2.0) / 4.0;
        assert!((1.0..=13.0).contains(&ratio));
    }

    #[test]
    fn rejects_sub_resolution_radius() {
        let s = GridSpace::<f64>::new(2, &[16, 16], 1.0, &[0.0, 0.0]).unwrap();
        assert!(matches!(
            ahlfors_constants(&s, None, 4, (1.5, 4.0), 0),
            Err(Error::BelowResolution { .. })
        ));
    }

    #[test]
    fn regularity_spread_is_bounded() {
        let s = GridSpace::<f64>::new(2, &[64, 64], 1.0, &[0.0, 0.0]).unwrap();
        let diam = s.diameter();
        let est = ahlfors_constants(&s, None, 24, (4.0, diam / 4.0), 7).unwrap();
        assert!(est.c_hi / est.c_lo <= 4.0, "{est:?}");
    }
}
