//! Empirical boundary-thickness constant: the minimum over sampled boundary
//! points `w` and scales `l` of `dyadic_content(B(w, l) & boundary, s) / l^s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::content::dyadic::dyadic_content;
use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::real::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterSampling {
    /// Every boundary cell.
    All,
    /// Up to this many boundary cells, evenly strided through index order.
    Strided(usize),
    /// Explicit boundary cells.
    Cells(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessReport {
    pub c0: f64,
    pub witness_omega: usize,
    pub witness_lambda: f64,
    /// Minimum ratio per scale, in ladder order.
    pub per_scale: Vec<(f64, f64)>,
    pub centers: usize,
}

/// Scales `4h * 2^k` up to the box diameter.
pub fn thickness_ladder<T: Real>(mask: &DomainMask<T>) -> Vec<T> {
    let space = mask.space();
    let mut out = Vec::new();
    let mut l = space.h() * T::of(4.0);
    while l <= space.diameter() {
        out.push(l);
        l = l * T::of(2.0);
    }
    out
}

pub fn thickness_check<T: Real>(
    mask: &DomainMask<T>,
    s: T,
    scales: &[T],
    centers: &CenterSampling,
) -> Result<ThicknessReport> {
    let space = mask.space();
    let q = T::count(space.dim());
    if !(s > T::zero() && s <= q - T::one()) {
        return Err(Error::InvalidParameter(format!("thickness exponent {s} outside (0, Q-1]")));
    }
    let floor = space.h() * T::of(4.0);
    if let Some(&bad) = scales.iter().find(|&&l| l + space.tol() < floor) {
        return Err(Error::BelowResolution { radius: bad.f64(), floor: floor.f64() });
    }
    if scales.is_empty() {
        return Err(Error::InvalidParameter("empty scale ladder".into()));
    }
    let boundary = mask.boundary_cells();
    let omegas: Vec<usize> = match centers {
        CenterSampling::All => boundary.clone(),
        CenterSampling::Strided(n) => {
            let n = (*n).clamp(1, boundary.len());
            (0..n).map(|k| boundary[k * boundary.len() / n]).collect()
        }
        CenterSampling::Cells(cells) => {
            if let Some(&c) = cells.iter().find(|&&c| !mask.is_boundary(c)) {
                return Err(Error::InvalidParameter(format!("cell {c} is not a boundary cell")));
            }
            cells.clone()
        }
    };
    let ratios: Vec<Vec<T>> = omegas
        .par_iter()
        .map(|&w| {
            scales
                .iter()
                .map(|&l| {
                    let mut hit = Vec::new();
                    space.for_each_in_ball(w, l, |j, _| {
                        if mask.is_boundary(j) {
                            hit.push(j);
                        }
                    });
                    dyadic_content(space, &hit, s) / l.powf(s)
                })
                .collect()
        })
        .collect();
    let mut best = (T::infinity(), 0usize, T::zero());
    let mut per_scale = vec![T::infinity(); scales.len()];
    for (k, row) in ratios.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            per_scale[j] = per_scale[j].min(v);
            if v < best.0 {
                best = (v, omegas[k], scales[j]);
            }
        }
    }
    Ok(ThicknessReport {
        c0: best.0.f64(),
        witness_omega: best.1,
        witness_lambda: best.2.f64(),
        per_scale: scales.iter().zip(per_scale).map(|(l, v)| (l.f64(), v.f64())).collect(),
        centers: omegas.len(),
    })
}
