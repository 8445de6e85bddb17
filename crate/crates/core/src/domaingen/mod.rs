//! Deterministic test-domain generators.
//!
//! Every generator rasterizes by cell-center membership and validates the
//! result as a [`DomainMask`]. Generation is a pure function of the
//! [`DomainSpec`]. Padding around each shape is a whole number of cells equal
//! to `max(size / 64, 2h)` rounded up, so the dyadic frame stays aligned when
//! `h` is halved.

mod shapes;
mod tentacle;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::gridspace::GridSpace;
use crate::real::Real;

pub use shapes::{comb_domain, koch_flake, koch_polygon};
pub use tentacle::{cap_cover, Tentacle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    /// Disk of the given radius centered at the origin; a cell sits at the center.
    Disk { radius: f64 },
    /// Axis-aligned square `(0, side)^2`.
    Square { side: f64 },
    /// `{y > 0}` seen through the window `[0, width] x [.., height]`.
    HalfPlane { width: f64, height: f64 },
    /// Quadratic Koch flake over a square of the given side.
    KochFlake {
        level: u32,
        #[serde(default = "default_koch_side")]
        side: f64,
    },
    /// Unit square with `teeth` slits rising from the floor, leaving an open
    /// hall of height `corridor_width` at the top.
    Comb { teeth: usize, tooth_width: f64, corridor_width: f64 },
    /// Unit square with an `holes x holes` grid of square holes.
    Porous { holes: usize, hole_width: f64 },
    /// Unit square minus the level-`level` Sierpinski-carpet holes.
    CarpetComplement { level: u32 },
    /// `B(0, 2)` minus radial tubes from the 3/2-sphere outward (3D only).
    TentacleCounterexample {
        c: f64,
        tentacle_radius: f64,
        /// Half-width of the cubic world box.
        #[serde(default = "default_half_width")]
        half_width: f64,
    },
    /// A mask file (`.pbm` or raw with sidecar).
    Import { path: PathBuf },
}

fn default_koch_side() -> f64 {
    0.5
}

fn default_half_width() -> f64 {
    2.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    /// Cell size in world units (ignored for imports).
    #[serde(default)]
    pub h: f64,
}

/// Side products of generation that later stages need.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationInfo {
    /// A natural center point of the shape (world coordinates).
    pub center: Vec<f64>,
    /// Counterexample tubes.
    pub tentacles: Vec<Tentacle>,
    /// Cap radius of the counterexample sphere cover.
    pub cap_radius: Option<f64>,
}

pub struct Generated<T> {
    pub mask: DomainMask<T>,
    pub info: GenerationInfo,
}

pub fn generate<T: Real>(spec: &DomainSpec) -> Result<DomainMask<T>> {
    generate_with_info(spec).map(|g| g.mask)
}

pub fn generate_with_info<T: Real>(spec: &DomainSpec) -> Result<Generated<T>> {
    if !matches!(spec.kind, DomainKind::Import { .. }) && !(spec.h > 0.0 && spec.h.is_finite()) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {}", spec.h)));
    }
    let h = spec.h;
    match &spec.kind {
        DomainKind::Disk { radius } => shapes::disk(*radius, h),
        DomainKind::Square { side } => shapes::square(*side, h),
        DomainKind::HalfPlane { width, height } => shapes::half_plane(*width, *height, h),
        DomainKind::KochFlake { level, side } => shapes::koch(*level, *side, h),
        DomainKind::Comb { teeth, tooth_width, corridor_width } => {
            shapes::comb(*teeth, *tooth_width, *corridor_width, h)
        }
        DomainKind::Porous { holes, hole_width } => shapes::porous(*holes, *hole_width, h),
        DomainKind::CarpetComplement { level } => shapes::carpet(*level, h),
        DomainKind::TentacleCounterexample { c, tentacle_radius, half_width } => {
            tentacle::generate(*c, *tentacle_radius, *half_width, h)
        }
        DomainKind::Import { path } => {
            let mask: DomainMask<T> = crate::io::read_mask(path)?;
            let (i, _) = crate::gridspace::field::distance_to_complement(&mask).max();
            let center = mask.space().center(i)[..mask.space().dim()].iter().map(|v| v.f64()).collect();
            Ok(Generated { mask, info: GenerationInfo { center, ..Default::default() } })
        }
    }
}

/// Padding in whole cells: `max(size / 64, 2h)` rounded up to a multiple of `h`.
pub(crate) fn pad_cells(size: f64, h: f64) -> usize {
    ((size / 64.0).max(2.0 * h) / h - 1e-9).ceil() as usize
}

/// A space whose cells tile `[lo, lo + n h]` per axis, `n = ceil(span / h)`.
pub(crate) fn box_space<T: Real>(lo: &[f64], hi: &[f64], h: f64) -> Result<GridSpace<T>> {
    let extent: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| ((b - a) / h - 1e-9).ceil() as usize).collect();
    let origin: Vec<T> = lo.iter().map(|a| T::of(a + h / 2.0)).collect();
    GridSpace::new(lo.len(), &extent, T::of(h), &origin)
}

/// Rasterizes a membership predicate; a disconnected result is a generation failure.
pub(crate) fn rasterize<T: Real>(
    space: GridSpace<T>,
    member: impl Fn(&[f64]) -> bool,
) -> Result<DomainMask<T>> {
    let dim = space.dim();
    let inside = (0..space.len())
        .map(|i| {
            let c = space.center(i);
            let p = [c[0].f64(), c[1].f64(), c[2].f64()];
            member(&p[..dim])
        })
        .collect();
    DomainMask::new(space, inside).map_err(|e| match e {
        Error::InvalidMask(m) => Error::ConnectivityFailed(m),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_shape() {
        let spec: DomainSpec = serde_json::from_str(
            r#"{"kind":"comb","teeth":8,"tooth_width":0.03125,"corridor_width":0.25,"h":0.001953125}"#,
        )
        .unwrap();
        assert_eq!(
            spec.kind,
            DomainKind::Comb { teeth: 8, tooth_width: 0.03125, corridor_width: 0.25 }
        );
        let back: DomainSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = DomainSpec { kind: DomainKind::KochFlake { level: 2, side: 0.5 }, h: 1.0 / 256.0 };
        let a: DomainMask<f64> = generate(&spec).unwrap();
        let b: DomainMask<f64> = generate(&spec).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn pad_is_aligned_across_resolutions() {
        assert_eq!(pad_cells(1.0, 1.0 / 512.0), 8);
        assert_eq!(pad_cells(1.0, 1.0 / 1024.0), 16);
        assert_eq!(pad_cells(1.0, 1.0 / 16.0), 2);
    }
}
