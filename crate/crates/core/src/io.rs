//! Binary field format "KWF1".
//!
//! Layout: magic `KWF1`, `u8` dim, `u32` points per dim, `f64` domain
//! length, `u32` component count (all little endian), then each component's
//! real-space samples as little-endian `f64`, row-major,
//! component-contiguous.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"KWF1";

pub fn write_kwf1(path: &Path, grid: &GridSpec, components: &[Vec<f64>]) -> Result<()> {
    let n = grid.total_points();
    if components.is_empty() {
        return Err(Error::InvalidArgument("KWF1 needs at least one component".into()));
    }
    for (i, c) in components.iter().enumerate() {
        if c.len() != n {
            return Err(Error::InvalidArgument(format!(
                "component {i} has {} samples, expected {n}",
                c.len()
            )));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[grid.dim() as u8])?;
    w.write_all(&(grid.points_per_dim() as u32).to_le_bytes())?;
    w.write_all(&grid.domain_length().to_le_bytes())?;
    w.write_all(&(components.len() as u32).to_le_bytes())?;
    for c in components {
        for v in c {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_kwf1(path: &Path) -> Result<(GridSpec, Vec<Vec<f64>>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadFieldFile(format!(
            "bad magic {:?} (expected \"KWF1\")",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1)?;
    let dim = b1[0] as usize;
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let points = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let length = f64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    let grid = GridSpec::new(dim, points, length)
        .map_err(|e| Error::BadFieldFile(format!("invalid header: {e}")))?;
    let n = grid.total_points();
    let mut components = Vec::with_capacity(count);
    for _ in 0..count {
        let mut buf = vec![0u8; n * 8];
        r.read_exact(&mut buf).map_err(|_| {
            Error::BadFieldFile("payload shorter than header promises".into())
        })?;
        let comp: Vec<f64> =
            buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        components.push(comp);
    }
    Ok((grid, components))
}
