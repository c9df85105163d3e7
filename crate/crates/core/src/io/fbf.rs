use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Field, ScalarField, SpectralGrid};

const MAGIC: &[u8; 4] = b"FBF1";

/// Encodes a field: magic, `d`, axis sizes, box length, then the samples of
/// every component in row-major order, all little-endian.
pub fn encode_field<F: Field, W: Write>(field: &F, mut out: W) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for _ in 0..grid.dim() {
        out.write_all(&(grid.n() as u32).to_le_bytes())?;
    }
    out.write_all(&grid.length().to_le_bytes())?;
    for c in field.scalar_components() {
        for v in c.samples() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

/// Decodes a field; the component count follows from the payload size.
pub fn decode_field<F: Field, R: Read>(mut input: R) -> Result<F> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(|_| Error::Format("missing magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected FBF1".into()));
    }
    let dim = read_u32(&mut input)? as usize;
    if dim == 0 || dim > 8 {
        return Err(Error::Format(format!("unsupported dimension {dim}")));
    }
    let sizes = (0..dim)
        .map(|_| read_u32(&mut input).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(Error::Format(format!("axis sizes {sizes:?} differ")));
    }
    let mut lb = [0u8; 8];
    input.read_exact(&mut lb).map_err(|_| Error::Format("truncated header".into()))?;
    let grid = SpectralGrid::new(dim, sizes[0], f64::from_le_bytes(lb))?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    let per = grid.len() * 8;
    if payload.is_empty() || payload.len() % per != 0 {
        return Err(Error::Format(format!(
            "payload of {} bytes is not a whole number of fields",
            payload.len()
        )));
    }
    let comps = payload
        .chunks_exact(per)
        .map(|chunk| {
            let s = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            ScalarField::new(grid.clone(), s)
        })
        .collect::<Result<Vec<_>>>()?;
    F::from_scalar_components(comps)
}

pub fn write_field<F: Field>(field: &F, path: impl AsRef<Path>) -> Result<()> {
    encode_field(field, BufWriter::new(File::create(path)?))
}

pub fn read_field<F: Field>(path: impl AsRef<Path>) -> Result<F> {
    decode_field(BufReader::new(File::open(path)?))
}
