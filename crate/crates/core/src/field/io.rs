//! Little-endian grid container:
//!
//! ```text
//! "VTGR" | u32 version | u32 nx | u32 ny | u32 nz | f64 origin[3] | f64 spacing
//!        | u8 dtype (0 = u8 binary, 1 = f32 probability) | payload, x fastest
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::grid::{GridGeometry, GridValues, OccupancyGrid};
use crate::error::{Error, Result};
use crate::geom::Point3;

pub const GRID_MAGIC: &[u8; 4] = b"VTGR";
pub const GRID_VERSION: u32 = 1;

pub fn write_grid(grid: &OccupancyGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode(grid, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<OccupancyGrid> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode(&mut BufReader::new(file), path)
}

fn encode(grid: &OccupancyGrid, w: &mut impl Write) -> std::io::Result<()> {
    let g = grid.geometry();
    w.write_all(GRID_MAGIC)?;
    w.write_all(&GRID_VERSION.to_le_bytes())?;
    for d in g.dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for o in g.origin {
        w.write_all(&o.to_le_bytes())?;
    }
    w.write_all(&g.spacing.to_le_bytes())?;
    match grid.values() {
        GridValues::Binary(v) => {
            w.write_all(&[0u8])?;
            w.write_all(v)?;
        }
        GridValues::Probability(v) => {
            w.write_all(&[1u8])?;
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn decode(r: &mut impl Read, path: &Path) -> Result<OccupancyGrid> {
    let io = |e| Error::io(path, e);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != GRID_MAGIC {
        return Err(Error::GridFormat(format!("bad magic {magic:?}")));
    }
    let mut u32buf = [0u8; 4];
    let mut f64buf = [0u8; 8];
    let mut next_u32 = |r: &mut dyn Read| -> Result<u32> {
        r.read_exact(&mut u32buf).map_err(|e| Error::io(path, e))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = next_u32(r)?;
    if version != GRID_VERSION {
        return Err(Error::GridFormat(format!("unsupported version {version}")));
    }
    let dims = [next_u32(r)?, next_u32(r)?, next_u32(r)?].map(|d| d as usize);
    let mut origin: Point3 = [0.0; 3];
    for o in origin.iter_mut() {
        r.read_exact(&mut f64buf).map_err(io)?;
        *o = f64::from_le_bytes(f64buf);
    }
    r.read_exact(&mut f64buf).map_err(io)?;
    let spacing = f64::from_le_bytes(f64buf);
    let geometry = GridGeometry::new(dims, origin, spacing)?;
    let len = geometry.checked_len()?;
    let mut dtype = [0u8; 1];
    r.read_exact(&mut dtype).map_err(io)?;
    let values = match dtype[0] {
        0 => {
            let mut v = vec![0u8; len];
            r.read_exact(&mut v).map_err(io)?;
            GridValues::Binary(v)
        }
        1 => {
            let mut raw = vec![0u8; len * 4];
            r.read_exact(&mut raw).map_err(io)?;
            GridValues::Probability(
                raw.chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            )
        }
        other => return Err(Error::GridFormat(format!("unknown dtype {other}"))),
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io)? != 0 {
        return Err(Error::GridFormat("trailing bytes after payload".into()));
    }
    OccupancyGrid::new(geometry, values)
}

/// Debug dump of points as OBJ vertices.
pub fn write_obj_points(points: &[Point3], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in points {
        writeln!(w, "v {} {} {}", p[0], p[1], p[2]).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
