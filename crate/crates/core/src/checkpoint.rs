//! FBNS binary field checkpoints.
//!
//! Layout (little-endian):
//!
//! | section      | type                    |
//! |--------------|-------------------------|
//! | magic        | `b"FBNS"`               |
//! | version      | u16                     |
//! | dim          | u32                     |
//! | n            | u32 (points per axis)   |
//! | period_l     | f64                     |
//! | components   | u32                     |
//! | coefficients | (re, im) f64 pairs, component-major, row-major lattice order |

use crate::field::SpectralField;
use crate::grid::Grid;
use num_complex::Complex64;
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"FBNS";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected \"FBNS\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {found} (this build reads version {VERSION})")]
    UnsupportedVersion { found: u16 },
    #[error("file truncated in section `{section}`")]
    Truncated { section: &'static str },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("{0} trailing bytes after coefficient data")]
    TrailingBytes(usize),
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, section: &'static str) -> Result<&'a [u8], CheckpointError> {
        if self.buf.len() - self.pos < len {
            return Err(CheckpointError::Truncated { section });
        }
        let out = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u16(&mut self, section: &'static str) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2, section)?.try_into().unwrap()))
    }

    fn u32(&mut self, section: &'static str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().unwrap()))
    }

    fn f64(&mut self, section: &'static str) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8, section)?.try_into().unwrap()))
    }
}

pub fn encode(field: &SpectralField) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(26 + field.ncomp() * g.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.period_l().to_le_bytes());
    out.extend_from_slice(&(field.ncomp() as u32).to_le_bytes());
    for c in field.components() {
        for v in c {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<SpectralField, CheckpointError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4, "magic")?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion { found: version });
    }
    let dim = r.u32("dim")? as usize;
    let n = r.u32("n_points_per_axis")? as usize;
    let period_l = r.f64("period_l")?;
    let ncomp = r.u32("component_count")? as usize;
    let grid =
        Grid::new(dim, n, period_l).map_err(|e| CheckpointError::InvalidHeader(e.to_string()))?;
    if ncomp != 1 && ncomp != dim {
        return Err(CheckpointError::InvalidHeader(format!(
            "component count {ncomp} is neither 1 nor dim = {dim}"
        )));
    }
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let raw = r.take(grid.len() * 16, "coefficients")?;
        comps.push(
            raw.chunks_exact(16)
                .map(|c| {
                    Complex64::new(
                        f64::from_le_bytes(c[..8].try_into().unwrap()),
                        f64::from_le_bytes(c[8..].try_into().unwrap()),
                    )
                })
                .collect(),
        );
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(SpectralField::from_components(grid, comps).expect("lengths checked"))
}

/// Writes `bytes` to `path` via a temporary sibling and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CheckpointError> {
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write(path: &Path, field: &SpectralField) -> Result<(), CheckpointError> {
    write_atomic(path, &encode(field))
}

pub fn read(path: &Path) -> Result<SpectralField, CheckpointError> {
    decode(&fs::read(path)?)
}

/// Outcome of a read → write → compare cycle.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RoundtripReport {
    pub bytes: usize,
    pub dim: usize,
    pub n_points_per_axis: usize,
    pub period_l: f64,
    pub components: usize,
    pub identical: bool,
}

/// Decodes a checkpoint, re-encodes it and checks byte equality.
pub fn verify_roundtrip(bytes: &[u8]) -> Result<RoundtripReport, CheckpointError> {
    let field = decode(bytes)?;
    let again = encode(&field);
    let g = field.grid();
    Ok(RoundtripReport {
        bytes: bytes.len(),
        dim: g.dim(),
        n_points_per_axis: g.n(),
        period_l: g.period_l(),
        components: field.ncomp(),
        identical: again == bytes,
    })
}
