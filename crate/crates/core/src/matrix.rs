//! Column-major binary128 matrices with an explicit leading dimension.
//!
//! Element `(i, j)` lives at offset `i + j * ld`. Rows `rows..ld` of every
//! column are padding: allocated, never read by any computation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::quadfp::QuadFloat;
use crate::rng::SplitMix64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixError {
    /// `ld < rows`.
    LeadingDimension { ld: usize, rows: usize },
    /// Backing storage shorter than `ld * cols`.
    StorageTooShort { needed: usize, got: usize },
    /// Two operands with incompatible shapes.
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MatrixError::LeadingDimension { ld, rows } => {
                write!(f, "leading dimension {ld} is smaller than row count {rows}")
            }
            MatrixError::StorageTooShort { needed, got } => {
                write!(f, "matrix storage holds {got} elements, {needed} required")
            }
            MatrixError::ShapeMismatch { left, right } => {
                write!(f, "incompatible shapes {}x{} and {}x{}", left.0, left.1, right.0, right.1)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MatrixError {}

/// `transa` / `transb` of the `Rgemm` interface.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TransposeFlag {
    #[default]
    NoTranspose,
    Transpose,
}

impl TransposeFlag {
    /// BLAS convention: only the first character counts, case-insensitive.
    /// `'C'` is rejected since every matrix here is real.
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'N' | 'n' => Some(TransposeFlag::NoTranspose),
            'T' | 't' => Some(TransposeFlag::Transpose),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            TransposeFlag::NoTranspose => 'N',
            TransposeFlag::Transpose => 'T',
        }
    }
}

#[derive(Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    ld: usize,
    data: Vec<QuadFloat>,
}

impl Matrix {
    /// A `rows x cols` matrix with every logical element set to `fill` and
    /// padding set to `+0`.
    pub fn new(rows: usize, cols: usize, ld: usize, fill: QuadFloat) -> Result<Self, MatrixError> {
        if ld < rows {
            return Err(MatrixError::LeadingDimension { ld, rows });
        }
        let mut data = vec![QuadFloat::ZERO; ld * cols];
        for j in 0..cols {
            data[j * ld..j * ld + rows].fill(fill);
        }
        Ok(Matrix { rows, cols, ld, data })
    }

    /// Packed (`ld == rows`) zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, ld: rows, data: vec![QuadFloat::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, QuadFloat::ONE);
        }
        m
    }

    /// Packed matrix with `f(i, j)` at every element.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> QuadFloat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, ld: rows, data }
    }

    /// Wraps existing column-major storage; extra trailing storage is kept.
    pub fn from_col_major(rows: usize, cols: usize, ld: usize, data: Vec<QuadFloat>) -> Result<Self, MatrixError> {
        if ld < rows {
            return Err(MatrixError::LeadingDimension { ld, rows });
        }
        if data.len() < ld * cols {
            return Err(MatrixError::StorageTooShort { needed: ld * cols, got: data.len() });
        }
        Ok(Matrix { rows, cols, ld, data })
    }

    /// Entries uniform in `[0, 1)` with full 113-bit significands, drawn
    /// column by column with [`SplitMix64::next_quad`] seeded with `seed`.
    /// Padding is `+0` and consumes no random numbers.
    pub fn random(rows: usize, cols: usize, ld: usize, seed: u64) -> Result<Self, MatrixError> {
        let mut m = Matrix::new(rows, cols, ld, QuadFloat::ZERO)?;
        let mut rng = SplitMix64::new(seed);
        for j in 0..cols {
            for i in 0..rows {
                m.set(i, j, rng.next_quad());
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn ld(&self) -> usize {
        self.ld
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> QuadFloat {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.ld]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: QuadFloat) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.ld] = v;
    }

    /// Logical elements of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> &[QuadFloat] {
        &self.data[j * self.ld..j * self.ld + self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [QuadFloat] {
        let ld = self.ld;
        &mut self.data[j * ld..j * ld + self.rows]
    }

    /// Whole backing store, padding included.
    pub fn as_slice(&self) -> &[QuadFloat] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [QuadFloat] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<QuadFloat> {
        self.data
    }

    /// Read-only accessor for `op(self)`.
    pub fn view(&self, flag: TransposeFlag) -> MatView<'_> {
        MatView::new(&self.data, self.rows, self.cols, self.ld, flag)
    }

    /// Out-of-place transpose (packed).
    pub fn transposed(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Copy with `ld == rows`.
    pub fn packed(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// Copy of the `rows x cols` block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "block out of range");
        Matrix::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Writes `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for j in 0..block.cols {
            for i in 0..block.rows {
                self.set(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }

    /// Same shape and bit-identical logical elements; padding is ignored.
    pub fn bits_eq(&self, other: &Matrix) -> bool {
        self.shape() == other.shape()
            && (0..self.cols).all(|j| self.col(j).iter().zip(other.col(j)).all(|(a, b)| a.bits_eq(*b)))
    }

    /// FNV-1a (64-bit) over the shape and the little-endian bytes of the
    /// logical elements in column-major order.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write(&(self.rows as u64).to_le_bytes());
        h.write(&(self.cols as u64).to_le_bytes());
        for j in 0..self.cols {
            for x in self.col(j) {
                h.write(&x.to_le_bytes());
            }
        }
        h.finish()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} (ld {})", self.rows, self.cols, self.ld)?;
        for i in 0..self.rows {
            let row: Vec<QuadFloat> = (0..self.cols).map(|j| self.get(i, j)).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Element accessor for `op(A)` over column-major storage, without copying.
#[derive(Clone, Copy)]
pub struct MatView<'a> {
    data: &'a [QuadFloat],
    stored_rows: usize,
    stored_cols: usize,
    ld: usize,
    flag: TransposeFlag,
}

impl<'a> MatView<'a> {
    /// `stored_rows x stored_cols` are the dimensions as laid out in memory,
    /// before `flag` is applied.
    pub fn new(data: &'a [QuadFloat], stored_rows: usize, stored_cols: usize, ld: usize, flag: TransposeFlag) -> Self {
        MatView { data, stored_rows, stored_cols, ld, flag }
    }

    pub fn rows(&self) -> usize {
        match self.flag {
            TransposeFlag::NoTranspose => self.stored_rows,
            TransposeFlag::Transpose => self.stored_cols,
        }
    }

    pub fn cols(&self) -> usize {
        match self.flag {
            TransposeFlag::NoTranspose => self.stored_cols,
            TransposeFlag::Transpose => self.stored_rows,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> QuadFloat {
        match self.flag {
            TransposeFlag::NoTranspose => self.data[i + j * self.ld],
            TransposeFlag::Transpose => self.data[j + i * self.ld],
        }
    }

    /// Packed copy of `op(A)`.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.rows(), self.cols(), |i, j| self.get(i, j))
    }
}

struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}
