//! `CMAT` binary matrix files with a JSON metadata sidecar.
//!
//! Layout (little-endian): magic `b"CMAT"`, `u32` rows, `u32` cols, `u32`
//! flags (currently always 0), then `rows·cols` pairs of `f64` `(re, im)` in
//! row-major order.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CMAT";
pub const HEADER_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmatMeta {
    pub rows: usize,
    pub cols: usize,
    pub label: String,
    pub seed: Option<u64>,
}

pub fn encode_cmat(m: &ComplexMatrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Format("row count exceeds u32".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::Format("column count exceeds u32".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * m.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for z in m.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_cmat(bytes: &[u8]) -> Result<ComplexMatrix> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing CMAT header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (rows, cols, flags) = (word(4) as usize, word(8) as usize, word(12));
    if flags != 0 {
        return Err(Error::Format(format!("unsupported flags {flags:#x}")));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != rows * cols * 16 {
        return Err(Error::Format(format!(
            "expected {} payload bytes for {rows}x{cols}, found {}",
            rows * cols * 16,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexMatrix::from_vec(rows, cols, data)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_cmat(path: &Path, m: &ComplexMatrix, label: &str, seed: Option<u64>) -> Result<()> {
    fs::File::create(path)?.write_all(&encode_cmat(m)?)?;
    let meta = CmatMeta { rows: m.rows(), cols: m.cols(), label: label.to_string(), seed };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_cmat(path: &Path) -> Result<ComplexMatrix> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_cmat(&bytes)
}

/// Reads the matrix and its sidecar, checking that the two agree on shape.
pub fn read_cmat_with_meta(path: &Path) -> Result<(ComplexMatrix, CmatMeta)> {
    let m = read_cmat(path)?;
    let meta: CmatMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if (meta.rows, meta.cols) != m.shape() {
        return Err(Error::Format(format!(
            "sidecar says {}x{}, payload is {:?}",
            meta.rows,
            meta.cols,
            m.shape()
        )));
    }
    Ok((m, meta))
}
