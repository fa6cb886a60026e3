//! Binary snapshots and CSV slices.
//!
//! Snapshot layout (little endian): magic `NSKF`, version `u32`, dim `u32`,
//! n `u32`, field count `u32`, then per field a `u32` name length and the
//! UTF-8 name, then every field's samples as `f64` in row-major order.

use std::io::{Read, Write};

use super::{Grid, ScalarField};
use crate::error::{NskError, Result};

pub const MAGIC: &[u8; 4] = b"NSKF";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, fields: &[&ScalarField]) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| NskError::Format("snapshot needs at least one field".into()))?;
    let grid = first.grid();
    for f in fields {
        first.same_grid(f)?;
    }
    w.write_all(MAGIC)?;
    for v in [VERSION, grid.dim() as u32, grid.n() as u32, fields.len() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for f in fields {
        let name = f.name().as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
    }
    for f in fields {
        let mut buf = Vec::with_capacity(8 * f.values().len());
        for v in f.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Vec<ScalarField>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NskError::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(NskError::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let grid = Grid::with_budget(dim, n, usize::MAX).map_err(|e| NskError::Format(e.to_string()))?;
    let mut names = Vec::with_capacity(count);
    for _ in 0..count {
        let len = read_u32(&mut r)? as usize;
        if len > 1 << 16 {
            return Err(NskError::Format("field name too long".into()));
        }
        let mut b = vec![0u8; len];
        r.read_exact(&mut b)?;
        names.push(String::from_utf8(b).map_err(|e| NskError::Format(e.to_string()))?);
    }
    let mut out = Vec::with_capacity(count);
    for name in names {
        let mut bytes = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push(ScalarField::new(&grid, values, name)?);
    }
    Ok(out)
}

/// Write the line through the origin along `axis` as CSV `x,<names...>`.
pub fn write_csv_slice<W: Write>(mut w: W, fields: &[&ScalarField], axis: usize) -> Result<()> {
    let first = fields
        .first()
        .ok_or_else(|| NskError::Format("slice needs at least one field".into()))?;
    let grid = first.grid();
    if axis >= grid.dim() {
        return Err(NskError::InvalidParameter(format!("axis {axis} out of range")));
    }
    let names: Vec<&str> = fields.iter().map(|f| f.name()).collect();
    writeln!(w, "x,{}", names.join(","))?;
    for i in 0..grid.n() {
        let mut idx = [0usize; 3];
        idx[axis] = i;
        let flat = grid.flat_index(&idx);
        let row: Vec<String> = fields.iter().map(|f| format!("{:.17e}", f.values()[flat])).collect();
        writeln!(w, "{:.17e},{}", i as f64 * grid.spacing(), row.join(","))?;
    }
    Ok(())
}
