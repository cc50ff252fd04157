//! Field snapshots.
//!
//! Binary layout (all little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `DWFIELD\0` |
//! | 4     | format version (`1`) |
//! | 4     | endianness marker `0x01020304` |
//! | 4     | dimension `n` |
//! | 4     | points per axis `N` |
//! | 8     | box side `L` (f64) |
//! | 4     | component count `m` |
//! | 4     | reserved (zero) |
//!
//! followed by `m·Nⁿ` interleaved `(re, im)` f64 pairs, component-major.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid, SpectralField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DWFIELD\0";
pub const VERSION: u32 = 1;
const ENDIAN_MARK: u32 = 0x0102_0304;

/// Largest grid exported as CSV.
pub const CSV_MAX_POINTS: usize = 1 << 20;

pub fn write_snapshot<W: Write>(mut w: W, fields: &[&SpectralField]) -> Result<()> {
    let first = fields.first().ok_or_else(|| Error::Snapshot("no components".into()))?;
    let grid = first.grid();
    if fields.iter().any(|f| !f.grid().same_as(grid)) {
        return Err(Error::GridMismatch);
    }
    let mut header = Vec::with_capacity(40);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&VERSION.to_le_bytes());
    header.extend_from_slice(&ENDIAN_MARK.to_le_bytes());
    header.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    header.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    header.extend_from_slice(&grid.length().to_le_bytes());
    header.extend_from_slice(&(fields.len() as u32).to_le_bytes());
    header.extend_from_slice(&0u32.to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(grid.len() * 16);
    for f in fields {
        buf.clear();
        for z in f.values() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Vec<SpectralField>> {
    let mut header = [0u8; 40];
    r.read_exact(&mut header)?;
    if &header[..8] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    if u32_at(8) != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {}", u32_at(8))));
    }
    if u32_at(12) != ENDIAN_MARK {
        return Err(Error::Snapshot("endianness marker mismatch".into()));
    }
    let length = f64::from_le_bytes(header[24..32].try_into().unwrap());
    let grid = Grid::new(u32_at(16) as usize, u32_at(20) as usize, length)?;
    let count = u32_at(32) as usize;
    let mut bytes = vec![0u8; grid.len() * 16];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        out.push(SpectralField::from_values(&grid, values)?);
    }
    Ok(out)
}

/// CSV with one row per lattice point: `x1[,x2[,x3]],re,im`.
pub fn write_csv<W: Write>(mut w: W, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    if grid.len() > CSV_MAX_POINTS {
        return Err(Error::Snapshot(format!(
            "{} points exceed the CSV limit of {CSV_MAX_POINTS}",
            grid.len()
        )));
    }
    let axes = ["x1", "x2", "x3"];
    writeln!(w, "{},re,im", axes[..grid.dim()].join(","))?;
    for (i, z) in field.values().iter().enumerate() {
        let x = grid.point(i);
        for xi in &x[..grid.dim()] {
            write!(w, "{xi:e},")?;
        }
        writeln!(w, "{:e},{:e}", z.re, z.im)?;
    }
    Ok(())
}
