//! GSF1 binary field files and atomic file writes.
//!
//! Layout, all little-endian: `b"GSF1"`, `u32` version (1), `u32` d, `d`
//! times `u64` n, `f64` L, `f64` h, then `n^d` `f64` values row-major with
//! the last axis fastest.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const GSF1_MAGIC: &[u8; 4] = b"GSF1";
pub const GSF1_VERSION: u32 = 1;

/// Size in bytes of a GSF1 file holding a field on `grid`.
pub fn gsf1_size(grid: &Grid) -> usize {
    4 + 4 + 4 + 8 * grid.d() + 16 + 8 * grid.len()
}

pub fn encode_gsf1(f: &Field) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(gsf1_size(g));
    out.extend_from_slice(GSF1_MAGIC);
    out.extend_from_slice(&GSF1_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.d() as u32).to_le_bytes());
    for _ in 0..g.d() {
        out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    }
    out.extend_from_slice(&g.half_width().to_le_bytes());
    out.extend_from_slice(&g.h().to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < k {
            return Err(Error::Format("truncated GSF1 file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_gsf1(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < 4 || &bytes[..4] != GSF1_MAGIC {
        return Err(Error::Format("not a GSF1 file".into()));
    }
    let mut r = Reader { bytes, pos: 4 };
    let version = r.u32()?;
    if version != GSF1_VERSION {
        return Err(Error::Format(format!("unsupported GSF1 version {version}")));
    }
    let d = r.u32()? as usize;
    if !(1..=3).contains(&d) {
        return Err(Error::Format(format!("GSF1 dimension {d} not in 1..=3")));
    }
    let mut ns = Vec::with_capacity(d);
    for _ in 0..d {
        ns.push(r.u64()?);
    }
    if ns.iter().any(|&n| n != ns[0]) {
        return Err(Error::Format(format!("non-cubic GSF1 grid {ns:?}")));
    }
    let n = usize::try_from(ns[0]).map_err(|_| Error::Format("GSF1 size overflow".into()))?;
    let half_width = r.f64()?;
    let h = r.f64()?;
    let grid = Grid::from_stored(d, n, half_width, h)?;
    let expected = gsf1_size(&grid);
    if bytes.len() != expected {
        return Err(Error::Format(format!("GSF1 size {} != expected {expected}", bytes.len())));
    }
    let values = (0..grid.len()).map(|_| r.f64()).collect::<Result<Vec<f64>>>()?;
    Field::from_values(grid, values)
}

/// Writes `bytes` to a sibling temporary file, syncs it and renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("'{}' has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn save_field(path: &Path, f: &Field) -> Result<()> {
    write_atomic(path, &encode_gsf1(f))
}

pub fn load_field(path: &Path) -> Result<Field> {
    decode_gsf1(&fs::read(path)?)
}
