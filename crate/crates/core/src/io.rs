//! Mask and field file formats.
//!
//! 2D masks: binary PBM (`P4`), 1 = inside, first row = largest y. Grid
//! geometry travels in an optional JSON sidecar (`<file>.json`).
//! Everything else: raw little-endian arrays (`u8` masks, `f64` fields) in
//! C order `[z][y][x]`, with a mandatory JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridspace::mask::DomainMask;
use crate::gridspace::{GridHeader, GridSpace};
use crate::real::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawHeader {
    pub dim: usize,
    pub extent: Vec<usize>,
    pub h: f64,
    pub origin: Vec<f64>,
    pub dtype: String,
    pub order: String,
}

impl RawHeader {
    fn new(grid: GridHeader, dtype: &str) -> Self {
        Self {
            dim: grid.dim,
            extent: grid.extent,
            h: grid.h,
            origin: grid.origin,
            dtype: dtype.into(),
            order: "C".into(),
        }
    }

    fn grid(&self) -> GridHeader {
        GridHeader { dim: self.dim, extent: self.extent.clone(), h: self.h, origin: self.origin.clone() }
    }
}

/// `<path>.json`, the sidecar location for a data file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode_pbm<T: Real>(mask: &DomainMask<T>) -> Result<Vec<u8>> {
    let space = mask.space();
    if space.dim() != 2 {
        return Err(Error::Format("PBM holds 2D masks only".into()));
    }
    let [nx, ny, _] = space.extent();
    let row_bytes = nx.div_ceil(8);
    let mut out = format!("P4\n{nx} {ny}\n").into_bytes();
    for row in 0..ny {
        let y = ny - 1 - row;
        let mut buf = vec![0u8; row_bytes];
        for x in 0..nx {
            if mask.is_inside(space.index([x, y, 0])) {
                buf[x / 8] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&buf);
    }
    Ok(out)
}

/// Parses a `P4` image into a per-cell inside vector plus extent.
pub fn decode_pbm_bits(bytes: &[u8]) -> Result<([usize; 2], Vec<bool>)> {
    let mut pos = 0usize;
    let mut tokens = Vec::new();
    while tokens.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PBM header".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if tokens[0] != "P4" {
        return Err(Error::Format(format!("expected P4 magic, got {}", tokens[0])));
    }
    let parse = |t: &str| t.parse::<usize>().map_err(|_| Error::Format(format!("bad PBM size {t}")));
    let nx = parse(&tokens[1])?;
    let ny = parse(&tokens[2])?;
    pos += 1;
    let row_bytes = nx.div_ceil(8);
    let data = bytes.get(pos..pos + row_bytes * ny).ok_or_else(|| Error::Format("truncated PBM raster".into()))?;
    let mut inside = vec![false; nx * ny];
    for row in 0..ny {
        let y = ny - 1 - row;
        for x in 0..nx {
            if data[row * row_bytes + x / 8] & (0x80 >> (x % 8)) != 0 {
                inside[x + nx * y] = true;
            }
        }
    }
    Ok(([nx, ny], inside))
}

/// Decodes a PBM mask; `geometry` supplies `h` and origin (defaults: `1/nx`, cell-centered unit box).
pub fn decode_pbm<T: Real>(bytes: &[u8], geometry: Option<&GridHeader>) -> Result<DomainMask<T>> {
    let ([nx, ny], inside) = decode_pbm_bits(bytes)?;
    let header = match geometry {
        Some(g) => GridHeader { dim: 2, extent: vec![nx, ny], h: g.h, origin: g.origin.clone() },
        None => {
            let h = 1.0 / nx as f64;
            GridHeader { dim: 2, extent: vec![nx, ny], h, origin: vec![h / 2.0, h / 2.0] }
        }
    };
    DomainMask::new(GridSpace::from_header(&header)?, inside)
}

pub fn write_pbm<T: Real>(mask: &DomainMask<T>, path: &Path) -> Result<()> {
    fs::write(path, encode_pbm(mask)?)?;
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&mask.space().header())?)?;
    Ok(())
}

pub fn read_pbm<T: Real>(path: &Path) -> Result<DomainMask<T>> {
    let bytes = fs::read(path)?;
    let side = sidecar_path(path);
    let geometry: Option<GridHeader> = if side.exists() {
        Some(serde_json::from_slice(&fs::read(side)?)?)
    } else {
        None
    };
    decode_pbm(&bytes, geometry.as_ref())
}

pub fn write_mask_raw<T: Real>(mask: &DomainMask<T>, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = mask.as_slice().iter().map(|&b| b as u8).collect();
    fs::write(path, bytes)?;
    let header = RawHeader::new(mask.space().header(), "u8");
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&header)?)?;
    Ok(())
}

fn read_header(path: &Path, dtype: &str) -> Result<RawHeader> {
    let header: RawHeader = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    if header.dtype != dtype || header.order != "C" {
        return Err(Error::Format(format!(
            "expected dtype {dtype} order C, got {} {}",
            header.dtype, header.order
        )));
    }
    Ok(header)
}

pub fn read_mask_raw<T: Real>(path: &Path) -> Result<DomainMask<T>> {
    let header = read_header(path, "u8")?;
    let space = GridSpace::from_header(&header.grid())?;
    let bytes = fs::read(path)?;
    if bytes.len() != space.len() {
        return Err(Error::Format(format!("expected {} bytes, found {}", space.len(), bytes.len())));
    }
    DomainMask::new(space, bytes.iter().map(|&b| b != 0).collect())
}

pub fn write_field_raw<T: Real>(space: &GridSpace<T>, values: &[T], path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.f64().to_le_bytes());
    }
    fs::write(path, bytes)?;
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&RawHeader::new(space.header(), "f64"))?)?;
    Ok(())
}

pub fn read_field_raw<T: Real>(path: &Path) -> Result<(GridSpace<T>, Vec<T>)> {
    let header = read_header(path, "f64")?;
    let space = GridSpace::from_header(&header.grid())?;
    let bytes = fs::read(path)?;
    if bytes.len() != space.len() * 8 {
        return Err(Error::Format(format!("expected {} bytes, found {}", space.len() * 8, bytes.len())));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8-byte chunk"))))
        .collect();
    Ok((space, values))
}

/// Reads a mask by extension: `.pbm` or raw with sidecar.
pub fn read_mask<T: Real>(path: &Path) -> Result<DomainMask<T>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pbm") => read_pbm(path),
        _ => read_mask_raw(path),
    }
}

/// Writes a mask by extension: `.pbm` for 2D, raw otherwise.
pub fn write_mask<T: Real>(mask: &DomainMask<T>, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("pbm") => write_pbm(mask, path),
        _ => write_mask_raw(mask, path),
    }
}
