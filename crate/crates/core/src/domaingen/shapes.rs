use crate::domaingen::{box_space, pad_cells, rasterize, GenerationInfo, Generated};
use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::real::Real;

fn done<T>(mask: DomainMask<T>, center: Vec<f64>) -> Result<Generated<T>> {
    Ok(Generated { mask, info: GenerationInfo { center, ..Default::default() } })
}

fn need(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

pub(crate) fn disk<T: Real>(radius: f64, h: f64) -> Result<Generated<T>> {
    need(radius >= 4.0 * h, || format!("radius {radius} below 4h"))?;
    let m = (radius / h).ceil() + pad_cells(2.0 * radius, h) as f64;
    let lo = -(m + 0.5) * h;
    let space = box_space::<T>(&[lo, lo], &[-lo, -lo], h)?;
    let r2 = radius * radius;
    done(rasterize(space, |p| p[0] * p[0] + p[1] * p[1] < r2)?, vec![0.0, 0.0])
}

pub(crate) fn square<T: Real>(side: f64, h: f64) -> Result<Generated<T>> {
    need(side >= 4.0 * h, || format!("side {side} below 4h"))?;
    let p = pad_cells(side, h) as f64 * h;
    let space = box_space::<T>(&[-p, -p], &[side + p, side + p], h)?;
    let m = rasterize(space, |q| q[0] > 0.0 && q[0] < side && q[1] > 0.0 && q[1] < side)?;
    done(m, vec![side / 2.0, side / 2.0])
}

pub(crate) fn half_plane<T: Real>(width: f64, height: f64, h: f64) -> Result<Generated<T>> {
    need(width >= 4.0 * h && height >= 4.0 * h, || "half-plane window below 4h".into())?;
    let p = pad_cells(width.max(height), h) as f64 * h;
    let space = box_space::<T>(&[0.0, -p], &[width, height], h)?;
    done(rasterize(space, |q| q[0] > -1.0 && q[1] > 0.0)?, vec![width / 2.0, height / 2.0])
}

pub(crate) fn comb<T: Real>(teeth: usize, tooth_width: f64, corridor_width: f64, h: f64) -> Result<Generated<T>> {
    let floor = 3.0 * h;
    need(tooth_width >= floor, || format!("tooth width {tooth_width} below 3h = {floor}"))?;
    need(corridor_width >= floor, || format!("corridor width {corridor_width} below 3h = {floor}"))?;
    need(corridor_width <= 1.0 - floor, || "corridor leaves no room for teeth".into())?;
    let pitch = 1.0 / (teeth + 1) as f64;
    need(pitch - tooth_width >= floor, || format!("rooms narrower than 3h with {teeth} teeth"))?;
    let p = pad_cells(1.0, h) as f64 * h;
    let space = box_space::<T>(&[-p, -p], &[1.0 + p, 1.0 + p], h)?;
    let top = 1.0 - corridor_width;
    let m = rasterize(space, |q| {
        let (x, y) = (q[0], q[1]);
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return false;
        }
        if y >= top {
            return true;
        }
        !(1..=teeth).any(|j| (x - j as f64 * pitch).abs() < tooth_width / 2.0)
    })?;
    done(m, vec![0.5, 1.0 - corridor_width / 2.0])
}

/// Comb domain without the generation info.
pub fn comb_domain<T: Real>(teeth: usize, tooth_width: f64, corridor_width: f64, h: f64) -> Result<DomainMask<T>> {
    comb(teeth, tooth_width, corridor_width, h).map(|g| g.mask)
}

pub(crate) fn porous<T: Real>(holes: usize, hole_width: f64, h: f64) -> Result<Generated<T>> {
    need(holes >= 1, || "need at least one hole".into())?;
    need(hole_width >= 2.0 * h, || format!("hole width {hole_width} below 2h"))?;
    let pitch = 1.0 / holes as f64;
    need(pitch - hole_width >= 3.0 * h, || "holes leave walls thinner than 3h".into())?;
    let p = pad_cells(1.0, h) as f64 * h;
    let space = box_space::<T>(&[-p, -p], &[1.0 + p, 1.0 + p], h)?;
    let half = hole_width / 2.0;
    let m = rasterize(space, |q| {
        if !(q[0] > 0.0 && q[0] < 1.0 && q[1] > 0.0 && q[1] < 1.0) {
            return false;
        }
        let dx = (q[0] / pitch).fract() * pitch - pitch / 2.0;
        let dy = (q[1] / pitch).fract() * pitch - pitch / 2.0;
        !(dx.abs() < half && dy.abs() < half)
    })?;
    done(m, vec![0.5, 0.5])
}

pub(crate) fn carpet<T: Real>(level: u32, h: f64) -> Result<Generated<T>> {
    let finest = 3f64.powi(-(level as i32));
    if finest < 4.0 * h {
        let max = ((1.0 / (4.0 * h)).ln() / 3f64.ln()).floor().max(0.0) as u32;
        return Err(Error::LevelTooDeep { level, max });
    }
    let p = pad_cells(1.0, h) as f64 * h;
    let space = box_space::<T>(&[-p, -p], &[1.0 + p, 1.0 + p], h)?;
    let m = rasterize(space, |q| {
        let (x, y) = (q[0], q[1]);
        if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
            return false;
        }
        let mut scale = 1.0;
        for _ in 0..level {
            scale *= 3.0;
            let xi = (x * scale).floor() as i64 % 3;
            let yi = (y * scale).floor() as i64 % 3;
            if xi == 1 && yi == 1 {
                return false;
            }
        }
        true
    })?;
    done(m, vec![1.0 / 6.0, 1.0 / 6.0])
}

/// Quadratic Koch (Minkowski sausage) polygon on the square `[0, side]^2`.
///
/// Each edge is replaced by eight quarter-length edges, so the perimeter
/// doubles per level while the enclosed area is unchanged.
pub fn koch_polygon(level: u32, side: f64) -> Vec<[f64; 2]> {
    const PATTERN: [[f64; 2]; 9] = [
        [0.0, 0.0],
        [0.25, 0.0],
        [0.25, 0.25],
        [0.5, 0.25],
        [0.5, 0.0],
        [0.5, -0.25],
        [0.75, -0.25],
        [0.75, 0.0],
        [1.0, 0.0],
    ];
    let mut poly = vec![[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]];
    for _ in 0..level {
        let mut next = Vec::with_capacity(poly.len() * 8);
        for k in 0..poly.len() {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            let d = [b[0] - a[0], b[1] - a[1]];
            let n = [-d[1], d[0]];
            for q in &PATTERN[..8] {
                next.push([a[0] + q[0] * d[0] + q[1] * n[0], a[1] + q[0] * d[1] + q[1] * n[1]]);
            }
        }
        poly = next;
    }
    poly
}

pub(crate) fn koch<T: Real>(level: u32, side: f64, h: f64) -> Result<Generated<T>> {
    let feature = side / 4f64.powi(level as i32);
    if feature < 4.0 * h {
        let max = ((side / (4.0 * h)).ln() / 4f64.ln()).floor().max(0.0) as u32;
        return Err(Error::LevelTooDeep { level, max });
    }
    let margin = ((side / 3.0) / h - 1e-9).ceil() * h + pad_cells(side, h) as f64 * h;
    let space = box_space::<T>(&[-margin, -margin], &[side + margin, side + margin], h)?;
    let poly = koch_polygon(level, side);
    let [nx, ny, _] = space.extent();
    let mut inside = vec![false; space.len()];
    let mut crossings = Vec::new();
    for y in 0..ny {
        let yc = space.center(space.index([0, y, 0]))[1].f64();
        crossings.clear();
        for k in 0..poly.len() {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            if a[0] == b[0] && a[1].min(b[1]) <= yc && yc < a[1].max(b[1]) {
                crossings.push(a[0]);
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            for x in 0..nx {
                let i = space.index([x, y, 0]);
                let xc = space.center(i)[0].f64();
                if xc > pair[0] && xc < pair[1] {
                    inside[i] = true;
                }
            }
        }
    }
    let mask = DomainMask::new(space, inside).map_err(|e| match e {
        Error::InvalidMask(m) => Error::ConnectivityFailed(m),
        other => other,
    })?;
    done(mask, vec![side / 2.0, side / 2.0])
}

/// Koch flake with the default side.
pub fn koch_flake<T: Real>(level: u32, h: f64) -> Result<DomainMask<T>> {
    koch(level, super::default_koch_side(), h).map(|g| g.mask)
}
