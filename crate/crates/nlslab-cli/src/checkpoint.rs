//! Binary field checkpoints.
//!
//! Layout (all little-endian): magic `NLSL`, format version (u32), then
//! `n`, `N` (u32), `R_max`, `time` (f64), then `N` interleaved `(re, im)`
//! f64 pairs.  The round trip is bit-exact.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

use nlslab::{GridSpec, RadialField};

const MAGIC: &[u8; 4] = b"NLSL";
const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, field: &RadialField, time: f64) -> Result<()> {
    let grid = field.grid();
    let mut buf =
        Vec::with_capacity(4 + 4 + 4 + 4 + 8 + 8 + 16 * grid.size());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&grid.n().to_le_bytes());
    buf.extend_from_slice(&(grid.size() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.r_max().to_le_bytes());
    buf.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating checkpoint {}", path.display()))?;
    file.write_all(&buf)?;
    Ok(())
}

pub struct Checkpoint {
    pub field: RadialField,
    pub time: f64,
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .with_context(|| format!("opening checkpoint {}", path.display()))?
        .read_to_end(&mut bytes)?;
    read_checkpoint_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn read_checkpoint_bytes(bytes: &[u8]) -> Result<Checkpoint> {
    let mut off = 0usize;
    let take = |off: &mut usize, len: usize| -> Result<&[u8]> {
        if *off + len > bytes.len() {
            bail!("checkpoint truncated at offset {}", *off);
        }
        let s = &bytes[*off..*off + len];
        *off += len;
        Ok(s)
    };
    let magic = take(&mut off, 4)?;
    if magic != MAGIC {
        bail!("bad magic bytes {magic:?} (expected NLSL)");
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap());
    let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
    let version = u32_at(take(&mut off, 4)?);
    if version != VERSION {
        bail!("unsupported checkpoint version {version}");
    }
    let n = u32_at(take(&mut off, 4)?);
    let size = u32_at(take(&mut off, 4)?) as usize;
    let r_max = f64_at(take(&mut off, 8)?);
    let time = f64_at(take(&mut off, 8)?);
    let mut values = Vec::with_capacity(size);
    for _ in 0..size {
        let re = f64_at(take(&mut off, 8)?);
        let im = f64_at(take(&mut off, 8)?);
        values.push(Complex64::new(re, im));
    }
    if off != bytes.len() {
        bail!("trailing bytes after checkpoint payload");
    }
    let grid: Arc<GridSpec> = GridSpec::new(n, size, r_max)
        .map_err(|e| anyhow::anyhow!("checkpoint grid invalid: {e}"))?;
    let field = RadialField::new(grid, values)
        .map_err(|e| anyhow::anyhow!("checkpoint field invalid: {e}"))?;
    Ok(Checkpoint { field, time })
}
