//! Hausdorff content estimation on grid sets.
//!
//! The dyadic recursion is the canonical value. Ball-form content relates to
//! it within the comparability factor `(2 sqrt(dim))^t`, reported with every
//! result.

pub mod dyadic;
pub mod frostman;
pub mod greedy;
pub mod thickness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridspace::GridSpace;
use crate::real::Real;

pub use dyadic::{dyadic_content, dyadic_content_cover, DyadicCube, DyadicTree};
pub use frostman::{frostman_lower_bound, FrostmanBound, TreeMeasureView};
pub use greedy::{default_ladder, greedy_cover, BallCost, CoverBall, GreedyCover};
pub use thickness::{thickness_check, thickness_ladder, CenterSampling, ThicknessReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentMode {
    /// Cost `r^t`.
    Dimension,
    /// Cost `mu(B) / r^alpha`; dyadic cubes cost `side^(Q - alpha)`.
    Codimension,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContentQuery<T> {
    pub target: Vec<usize>,
    pub exponent: T,
    pub mode: ContentMode,
    /// Smallest admissible cover size, at least `h`.
    pub scale_floor: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CoverElement {
    Ball { center: usize, radius: f64 },
    Cube { level: u32, corner: [usize; 3], side: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentResult {
    /// `dyadic / comparability_factor`.
    pub lower: f64,
    /// Cost of the greedy ball cover in `cover`.
    pub upper: f64,
    /// Exact dyadic content at the scale floor.
    pub dyadic: f64,
    pub comparability_factor: f64,
    pub cover: Vec<CoverElement>,
    pub dyadic_cover: Vec<CoverElement>,
}

/// `(2 sqrt(dim))^t`.
pub fn comparability_factor(dim: usize, t: f64) -> f64 {
    (2.0 * (dim as f64).sqrt()).powf(t)
}

pub fn evaluate<T: Real>(space: &GridSpace<T>, query: &ContentQuery<T>) -> Result<ContentResult> {
    let q = T::count(space.dim());
    if !(query.exponent >= T::zero() && query.exponent <= q) {
        return Err(Error::InvalidParameter(format!("exponent {} outside [0, Q]", query.exponent)));
    }
    if query.scale_floor + space.tol() < space.h() {
        return Err(Error::BelowResolution { radius: query.scale_floor.f64(), floor: space.h().f64() });
    }
    let cube_exponent = match query.mode {
        ContentMode::Dimension => query.exponent,
        ContentMode::Codimension => q - query.exponent,
    };
    let mut min_level = 0u32;
    while space.h() * T::count(1usize << min_level) + space.tol() < query.scale_floor {
        min_level += 1;
    }
    let tree = DyadicTree::build(space, &query.target, cube_exponent, min_level);
    let dyadic = tree.value().f64();
    let factor = comparability_factor(space.dim(), cube_exponent.f64());
    let ladder: Vec<T> = default_ladder(space)
        .into_iter()
        .filter(|&r| r + space.tol() >= query.scale_floor)
        .collect();
    let cost = match query.mode {
        ContentMode::Dimension => BallCost::Power(query.exponent),
        ContentMode::Codimension => BallCost::Codimension(query.exponent),
    };
    let greedy = greedy_cover(space, &query.target, &ladder, cost);
    let h = space.h().f64();
    Ok(ContentResult {
        lower: dyadic / factor,
        upper: greedy.upper.f64(),
        dyadic,
        comparability_factor: factor,
        cover: greedy
            .balls
            .iter()
            .map(|b| CoverElement::Ball { center: b.center, radius: b.radius })
            .collect(),
        dyadic_cover: tree
            .cover()
            .into_iter()
            .map(|c| CoverElement::Cube { level: c.level, corner: c.corner, side: h * c.side_cells() as f64 })
            .collect(),
    })
}
