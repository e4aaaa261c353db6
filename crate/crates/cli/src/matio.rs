//! Matrix files. `.qmat` is the binary QMAT1 layout, anything else is text.
//!
//! QMAT1: magic `QMAT1\0`, then little-endian u32 rows, cols, ld and a
//! reserved zero word, two zero pad bytes (24 bytes in all), then `ld * cols` binary128 words, 16 bytes
//! each, little-endian, column-major.
//!
//! Text: a `rows cols` line, then one hex-float per line in column-major order.

use std::path::Path;

use quadgemm::quadfp::{format_hexfloat, parse_hexfloat};
use quadgemm::{Matrix, QuadFloat};

use crate::error::usage;

pub const MAGIC: &[u8; 6] = b"QMAT1\0";
const HEADER: usize = 24;

pub fn encode_qmat(m: &Matrix) -> anyhow::Result<Vec<u8>> {
    let dim = |x: usize, what: &str| u32::try_from(x).map_err(|_| usage(format!("{what} {x} does not fit QMAT1")));
    let mut out = Vec::with_capacity(HEADER + 16 * m.ld() * m.cols());
    out.extend_from_slice(MAGIC);
    for v in [dim(m.rows(), "rows")?, dim(m.cols(), "cols")?, dim(m.ld(), "ld")?, 0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&[0, 0]);
    let words = m.ld() * m.cols();
    for x in &m.as_slice()[..words] {
        out.extend_from_slice(&x.to_bits().to_le_bytes());
    }
    Ok(out)
}

pub fn decode_qmat(bytes: &[u8]) -> anyhow::Result<Matrix> {
    if bytes.len() < HEADER || &bytes[..6] != MAGIC {
        return Err(usage("not a QMAT1 file"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[6 + 4 * i..10 + 4 * i].try_into().unwrap()) as usize;
    let (rows, cols, ld) = (word(0), word(1), word(2));
    let words = ld.checked_mul(cols).ok_or_else(|| usage("QMAT1 size overflow"))?;
    if bytes.len() != HEADER + 16 * words {
        return Err(usage(format!("QMAT1 body is {} bytes, expected {}", bytes.len() - HEADER, 16 * words)));
    }
    let data = bytes[HEADER..]
        .chunks_exact(16)
        .map(|c| QuadFloat::from_bits(u128::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Matrix::from_col_major(rows, cols, ld, data).map_err(|e| usage(format!("QMAT1: {e}")))
}

/// Logical elements only; padding is not written.
pub fn encode_text(m: &Matrix) -> String {
    let mut s = format!("{} {}\n", m.rows(), m.cols());
    for j in 0..m.cols() {
        for x in &m.col(j)[..m.rows()] {
            s.push_str(&format_hexfloat(*x));
            s.push('\n');
        }
    }
    s
}

pub fn decode_text(text: &str) -> anyhow::Result<Matrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| usage("empty matrix file"))?;
    let dims: Vec<usize> = head
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| usage(format!("line 1: bad dimension {t:?}"))))
        .collect::<anyhow::Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(usage("line 1: expected `rows cols`"));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (i, l) in lines {
        let x = parse_hexfloat(l.trim()).map_err(|e| usage(format!("line {}: {e}", i + 1)))?;
        data.push(x);
    }
    if data.len() != rows * cols {
        return Err(usage(format!("expected {} values, found {}", rows * cols, data.len())));
    }
    if rows == 0 {
        return Ok(Matrix::zeros(0, cols));
    }
    Matrix::from_col_major(rows, cols, rows, data).map_err(|e| usage(e.to_string()))
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "qmat")
}

pub fn read_matrix(path: &Path) -> anyhow::Result<Matrix> {
    let bytes = std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if is_binary(path) {
        decode_qmat(&bytes)
    } else {
        decode_text(std::str::from_utf8(&bytes).map_err(|_| usage(format!("{}: not UTF-8", path.display())))?)
    }
}

pub fn write_matrix(path: &Path, m: &Matrix) -> anyhow::Result<()> {
    let bytes = if is_binary(path) { encode_qmat(m)? } else { encode_text(m).into_bytes() };
    std::fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}
