//! Discretized metric measure space over a box in R^2 or R^3.
//!
//! Cells are indexed linearly with x fastest: `i = x + nx * (y + ny * z)`.
//! The metric is the shortest-path metric of the axis+diagonal stencil with
//! Euclidean edge weights. On the full box this metric has a closed form
//! (the chamfer/octile distance), which [`GridSpace::distance`] evaluates
//! directly; constrained searches live in [`path`] and [`field`].

pub mod ahlfors;
pub mod field;
pub mod mask;
pub mod path;
pub(crate) mod search;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Default cap on the number of cells a space may hold.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 27;

/// Worst-case ratio between the stencil metric and the Euclidean metric.
///
/// For the 8-neighbour stencil this is `sqrt(4 - 2 sqrt 2) ~ 1.0824`, for the
/// 26-neighbour stencil `~ 1.1281`. The stencil metric never undercuts the
/// Euclidean one, so these are the bi-Lipschitz constants.
pub fn metric_distortion(dim: usize) -> f64 {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    match dim {
        2 => (1.0 + (s2 - 1.0).powi(2)).sqrt(),
        _ => (1.0 + (s2 - 1.0).powi(2) + (s3 - s2).powi(2)).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<T> {
    pub offset: [isize; 3],
    pub weight: T,
}

/// Serializable description of a grid, used by the file formats.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridHeader {
    pub dim: usize,
    pub extent: Vec<usize>,
    pub h: f64,
    pub origin: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpace<T> {
    dim: usize,
    extent: [usize; 3],
    h: T,
    origin: [T; 3],
    stencil: Vec<Neighbor<T>>,
    sqrt2: T,
    sqrt3: T,
}

impl<T: Real> GridSpace<T> {
    /// Builds a space; `origin` is the world position of the center of cell 0.
    pub fn new(dim: usize, extent: &[usize], h: T, origin: &[T]) -> Result<Self> {
        Self::with_budget(dim, extent, h, origin, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(
        dim: usize,
        extent: &[usize],
        h: T,
        origin: &[T],
        budget: usize,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if extent.len() != dim || origin.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "extent and origin need {dim} components"
            )));
        }
        if extent.iter().any(|&n| n < 4) {
            return Err(Error::InvalidGrid(format!(
                "every axis needs at least 4 cells, got {extent:?}"
            )));
        }
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("cell size must be positive, got {h}")));
        }
        let cells = extent
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        if cells > budget {
            return Err(Error::CellBudget { cells, budget });
        }
        let mut ext = [1usize; 3];
        let mut org = [T::zero(); 3];
        ext[..dim].copy_from_slice(extent);
        org[..dim].copy_from_slice(origin);
        let sqrt2 = T::of(2f64.sqrt());
        let sqrt3 = T::of(3f64.sqrt());
        Ok(Self {
            dim,
            extent: ext,
            h,
            origin: org,
            stencil: build_stencil(dim, h),
            sqrt2,
            sqrt3,
        })
    }

    pub fn from_header(header: &GridHeader) -> Result<Self> {
        let origin: Vec<T> = header.origin.iter().map(|&v| T::of(v)).collect();
        Self::new(header.dim, &header.extent, T::of(header.h), &origin)
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            dim: self.dim,
            extent: self.extent[..self.dim].to_vec(),
            h: self.h.f64(),
            origin: self.origin[..self.dim].iter().map(|v| v.f64()).collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn extent(&self) -> [usize; 3] {
        self.extent
    }

    #[inline]
    pub fn h(&self) -> T {
        self.h
    }

    pub fn origin(&self) -> [T; 3] {
        self.origin
    }

    pub fn stencil(&self) -> &[Neighbor<T>] {
        &self.stencil
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.extent[0] * self.extent[1] * self.extent[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Measure of one cell, `h^Q`.
    pub fn cell_measure(&self) -> T {
        self.h.powi(self.dim as i32)
    }

    /// Slack applied to distance comparisons.
    #[inline]
    pub fn tol(&self) -> T {
        self.h * T::of(T::SLACK)
    }

    /// Euclidean diameter of the box of cell centers.
    pub fn diameter(&self) -> T {
        let sq: usize = (0..self.dim).map(|a| (self.extent[a] - 1).pow(2)).sum();
        self.h * T::count(sq).sqrt()
    }

    #[inline]
    pub fn coord(&self, i: usize) -> [usize; 3] {
        let nx = self.extent[0];
        let ny = self.extent[1];
        let x = i % nx;
        let r = i / nx;
        [x, r % ny, r / ny]
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.extent[0] * (c[1] + self.extent[1] * c[2])
    }

    #[inline]
    pub fn checked_index(&self, c: [isize; 3]) -> Option<usize> {
        for a in 0..3 {
            if c[a] < 0 || c[a] as usize >= self.extent[a] {
                return None;
            }
        }
        Some(self.index([c[0] as usize, c[1] as usize, c[2] as usize]))
    }

    /// World coordinates of a cell center (unused axes are zero).
    pub fn center(&self, i: usize) -> [T; 3] {
        let c = self.coord(i);
        let mut p = [T::zero(); 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + T::count(c[a]) * self.h;
        }
        p
    }

    /// The cell whose center is nearest to a world point, if inside the box.
    pub fn locate(&self, p: &[T]) -> Option<usize> {
        if p.len() < self.dim {
            return None;
        }
        let mut c = [0isize; 3];
        for a in 0..self.dim {
            let k = ((p[a] - self.origin[a]) / self.h).round();
            c[a] = k.to_isize()?;
        }
        self.checked_index(c)
    }

    /// True for cells on the outer face of the box.
    pub fn is_world_boundary(&self, i: usize) -> bool {
        let c = self.coord(i);
        (0..self.dim).any(|a| c[a] == 0 || c[a] + 1 == self.extent[a])
    }

    /// Calls `f(neighbor, weight)` for every stencil neighbor inside the box.
    #[inline]
    pub fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize, T)) {
        let c = self.coord(i);
        for nb in &self.stencil {
            if let Some(j) = self.shifted(c, nb.offset) {
                f(j, nb.weight);
            }
        }
    }

    /// Calls `f(neighbor)` for the axis (face) neighbors only.
    #[inline]
    pub fn for_each_face_neighbor(&self, i: usize, mut f: impl FnMut(usize)) {
        let c = self.coord(i);
        for nb in &self.stencil[..2 * self.dim] {
            if let Some(j) = self.shifted(c, nb.offset) {
                f(j);
            }
        }
    }

    #[inline]
    fn shifted(&self, c: [usize; 3], d: [isize; 3]) -> Option<usize> {
        let mut n = [0usize; 3];
        for a in 0..3 {
            let v = c[a] as isize + d[a];
            if v < 0 || v as usize >= self.extent[a] {
                return None;
            }
            n[a] = v as usize;
        }
        Some(self.index(n))
    }

    /// Edge weight between two stencil-adjacent cells, `None` otherwise.
    pub fn edge_weight(&self, a: usize, b: usize) -> Option<T> {
        let ca = self.coord(a);
        let cb = self.coord(b);
        let mut nonzero = 0;
        for k in 0..3 {
            match ca[k].abs_diff(cb[k]) {
                0 => {}
                1 => nonzero += 1,
                _ => return None,
            }
        }
        match nonzero {
            0 => None,
            1 => Some(self.h),
            2 => Some(self.h * self.sqrt2),
            _ => Some(self.h * self.sqrt3),
        }
    }

    /// Length of the shortest stencil path for per-axis cell offsets.
    #[inline]
    pub fn offset_length(&self, d: [usize; 3]) -> T {
        let mut v = d;
        v.sort_unstable_by(|a, b| b.cmp(a));
        let straight = T::count(v[0] - v[1]);
        let planar = T::count(v[1] - v[2]);
        let diagonal = T::count(v[2]);
        self.h * (straight + self.sqrt2 * planar + self.sqrt3 * diagonal)
    }

    /// Path-metric distance between two cells of the full box.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> T {
        let ca = self.coord(a);
        let cb = self.coord(b);
        self.offset_length([
            ca[0].abs_diff(cb[0]),
            ca[1].abs_diff(cb[1]),
            ca[2].abs_diff(cb[2]),
        ])
    }

    /// Euclidean distance between cell centers.
    pub fn euclidean(&self, a: usize, b: usize) -> T {
        let ca = self.coord(a);
        let cb = self.coord(b);
        let sq: usize = (0..3).map(|k| ca[k].abs_diff(cb[k]).pow(2)).sum();
        self.h * T::count(sq).sqrt()
    }

    /// Inclusive cell-coordinate bounding box of the metric ball `B(center, radius)`.
    pub fn ball_box(&self, center: usize, radius: T) -> ([usize; 3], [usize; 3]) {
        let c = self.coord(center);
        let r = (radius / self.h + T::of(T::SLACK)).floor().to_usize().unwrap_or(0);
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            lo[a] = c[a].saturating_sub(r);
            hi[a] = (c[a] + r).min(self.extent[a] - 1);
        }
        (lo, hi)
    }

    /// Calls `f(cell, distance)` for every cell of the closed metric ball.
    pub fn for_each_in_ball(&self, center: usize, radius: T, mut f: impl FnMut(usize, T)) {
        let c = self.coord(center);
        let (lo, hi) = self.ball_box(center, radius);
        let limit = radius + self.tol();
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let d = self.offset_length([x.abs_diff(c[0]), y.abs_diff(c[1]), z.abs_diff(c[2])]);
                    if d <= limit {
                        f(self.index([x, y, z]), d);
                    }
                }
            }
        }
    }

    /// Cells of the closed metric ball with their distances to the center.
    pub fn ball_cells(&self, center: usize, radius: T) -> Vec<(usize, T)> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, radius, |i, d| out.push((i, d)));
        out
    }
}

fn build_stencil<T: Real>(dim: usize, h: T) -> Vec<Neighbor<T>> {
    let mut out = Vec::new();
    let zr: &[isize] = if dim == 3 { &[-1, 0, 1] } else { &[0] };
    for dz in zr {
        for dy in [-1isize, 0, 1] {
            for dx in [-1isize, 0, 1] {
                let offset = [dx, dy, *dz];
                let nz = offset.iter().filter(|v| **v != 0).count();
                if nz == 0 {
                    continue;
                }
                let weight = h * T::count(nz).sqrt();
                out.push((nz, offset, weight));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    out.into_iter()
        .map(|(_, offset, weight)| Neighbor { offset, weight })
        .collect()
}
