//! Flat binary field files: a 32-byte header followed by `Nⁿ` little-endian
//! `(re, im)` f64 pairs, row-major with axis 0 slowest.
//!
//! Header: `b"NLSF"`, version `u32`, dimension `u32`, points per axis `u32`,
//! box length `f64`, 8 zero bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{NlsError, Result};
use crate::spectral::{ComplexField, Grid};

const MAGIC: &[u8; 4] = b"NLSF";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

pub fn encode_sample_file(field: &ComplexField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points() as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for z in field.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_sample_file(bytes: &[u8]) -> Result<ComplexField> {
    let bad = |msg: String| NlsError::SampleFile(msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("missing NLSF magic".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let dim = word(8) as usize;
    let points = word(12) as usize;
    let length = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let grid = Grid::new(dim, length, points).map_err(|e| bad(format!("bad grid in header: {e}")))?;
    let expected = HEADER_LEN + 16 * grid.len();
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    ComplexField::from_values(&grid, values)
}

pub fn read_sample_file(path: &Path) -> Result<ComplexField> {
    let bytes = fs::read(path).map_err(|e| NlsError::SampleFile(format!("{}: {e}", path.display())))?;
    decode_sample_file(&bytes)
}

pub fn write_sample_file(path: &Path, field: &ComplexField) -> Result<()> {
    let io = |e: std::io::Error| NlsError::SampleFile(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(&encode_sample_file(field)).map_err(io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = Grid::new(2, 7.5, 8).unwrap();
        let f = ComplexField::from_fn(&grid, |x| Complex64::new(x[0].sin(), x[1] * 0.1));
        let g = decode_sample_file(&encode_sample_file(&f)).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rejects_truncated_and_foreign_files() {
        let grid = Grid::new(1, 1.0, 4).unwrap();
        let bytes = encode_sample_file(&ComplexField::zeros(&grid));
        assert!(decode_sample_file(&bytes[..bytes.len() - 1]).is_err());
        let mut other = bytes.clone();
        other[0] = b'X';
        assert!(decode_sample_file(&other).is_err());
    }
}
