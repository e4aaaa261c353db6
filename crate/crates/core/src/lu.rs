//! Right-looking LU factorisation, unblocked and blocked. The blocked form
//! factors a `b`-column panel, solves for the `U12` block row and hands the
//! trailing update `A22 -= L21 U12` to [`rgemm`] with `alpha = -1`,
//! `beta = 1`.
//!
//! `piv[i]` is the row swapped with row `i` at step `i` (LAPACK `ipiv`,
//! zero-based).

use alloc::vec::Vec;
use core::fmt;

use crate::matrix::{Matrix, TransposeFlag};
use crate::quadfp::{qabs, qdiv, qmadd, qmul, qsub, MaddMode, QuadFloat};
use crate::rgemm::{e_l1, rgemm, GemmBackend};

pub const DEFAULT_BLOCK: usize = 108;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Pivoting {
    /// Row swap on the largest-magnitude entry, ties to the smallest row.
    #[default]
    Partial,
    /// No row exchanges; the panel is factored with a triangular solve for
    /// `L21`. Only safe on inputs such as diagonally dominant matrices.
    NoPivot,
}

#[derive(Clone, Debug)]
pub struct LuFactors {
    /// Unit-lower `L` strictly below the diagonal, `U` on and above it.
    pub lu: Matrix,
    pub piv: Vec<usize>,
    pub block_b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LuError {
    NotSquare {
        rows: usize,
        cols: usize,
    },
    ZeroBlock,
    /// Exactly zero pivot in this (global) column.
    Singular {
        column: usize,
    },
}

impl fmt::Display for LuError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LuError::NotSquare { rows, cols } => write!(f, "LU needs a square matrix, got {rows}x{cols}"),
            LuError::ZeroBlock => f.write_str("block size must be at least 1"),
            LuError::Singular { column } => write!(f, "matrix is singular: zero pivot in column {column}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LuError {}

fn check_square(a: &Matrix) -> Result<(), LuError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(LuError::NotSquare { rows: a.rows(), cols: a.cols() })
    }
}

/// Factors rows `r0..` of columns `r0..r0 + w` in place, one rank-1 update
/// per column. Swaps touch only the panel columns; pivots are recorded as
/// global row indices in `piv[r0..r0 + w]`.
fn factor_panel(a: &mut Matrix, r0: usize, w: usize, piv: &mut [usize], pivoting: Pivoting) -> Result<(), LuError> {
    let n = a.rows();
    for c in r0..r0 + w {
        let mut p = c;
        if pivoting == Pivoting::Partial {
            let mut best = qabs(a.get(c, c));
            for i in c + 1..n {
                let v = qabs(a.get(i, c));
                if v > best {
                    best = v;
                    p = i;
                }
            }
        }
        piv[c] = p;
        if a.get(p, c) == QuadFloat::ZERO {
            return Err(LuError::Singular { column: c });
        }
        if p != c {
            for j in r0..r0 + w {
                let (x, y) = (a.get(c, j), a.get(p, j));
                a.set(c, j, y);
                a.set(p, j, x);
            }
        }
        let d = a.get(c, c);
        for i in c + 1..n {
            a.set(i, c, qdiv(a.get(i, c), d));
        }
        for j in c + 1..r0 + w {
            let u = a.get(c, j);
            let ld = a.ld();
            let s = a.as_mut_slice();
            for i in c + 1..n {
                s[i + j * ld] = qsub(s[i + j * ld], qmul(s[i + c * ld], u));
            }
        }
    }
    Ok(())
}

/// Applies the swaps `piv[from..to]` to the given columns.
fn swap_rows(a: &mut Matrix, piv: &[usize], from: usize, to: usize, cols: core::ops::Range<usize>) {
    for i in from..to {
        let p = piv[i];
        if p != i {
            for j in cols.clone() {
                let (x, y) = (a.get(i, j), a.get(p, j));
                a.set(i, j, y);
                a.set(p, j, x);
            }
        }
    }
}

/// Unblocked LU with partial pivoting.
pub fn getrf_unblocked(a: Matrix) -> Result<LuFactors, LuError> {
    getrf(a, usize::MAX, Pivoting::Partial, &GemmBackend::default())
}

/// Blocked LU with partial pivoting; the trailing update runs on `backend`.
pub fn getrf_blocked(a: Matrix, b: usize, backend: &GemmBackend) -> Result<LuFactors, LuError> {
    getrf(a, b, Pivoting::Partial, backend)
}

/// Blocked LU. With `b >= n` this is a single unblocked panel.
pub fn getrf(mut a: Matrix, b: usize, pivoting: Pivoting, backend: &GemmBackend) -> Result<LuFactors, LuError> {
    check_square(&a)?;
    if b == 0 {
        return Err(LuError::ZeroBlock);
    }
    let n = a.rows();
    let mut piv: Vec<usize> = (0..n).collect();
    let mut j = 0;
    while j < n {
        let jb = b.min(n - j);
        let e = j + jb;
        match pivoting {
            Pivoting::Partial => {
                factor_panel(&mut a, j, jb, &mut piv, pivoting)?;
                swap_rows(&mut a, &piv, j, e, 0..j);
                swap_rows(&mut a, &piv, j, e, e..n);
                if e < n {
                    let l11 = a.submatrix(j, j, jb, jb);
                    let mut a12 = a.submatrix(j, e, jb, n - e);
                    trsm_unit_lower(&l11, &mut a12);
                    a.set_submatrix(j, e, &a12);
                }
            }
            Pivoting::NoPivot => {
                // Factor only the diagonal block, then solve for both off-diagonal blocks.
                let mut a11 = a.submatrix(j, j, jb, jb);
                let mut local = alloc::vec![0; jb];
                factor_panel(&mut a11, 0, jb, &mut local, Pivoting::NoPivot).map_err(|err| shift_column(err, j))?;
                a.set_submatrix(j, j, &a11);
                if e < n {
                    let mut a12 = a.submatrix(j, e, jb, n - e);
                    trsm_unit_lower(&a11, &mut a12);
                    a.set_submatrix(j, e, &a12);
                    let mut a21 = a.submatrix(e, j, n - e, jb);
                    trsm_upper_right(&a11, &mut a21).map_err(|err| shift_column(err, j))?;
                    a.set_submatrix(e, j, &a21);
                }
            }
        }
        if e < n {
            let l21 = a.submatrix(e, j, n - e, jb);
            let u12 = a.submatrix(j, e, jb, n - e);
            let ld = a.ld();
            let off = e + e * ld;
            rgemm(
                TransposeFlag::NoTranspose,
                TransposeFlag::NoTranspose,
                n - e,
                n - e,
                jb,
                QuadFloat::NEG_ONE,
                l21.as_slice(),
                l21.ld(),
                u12.as_slice(),
                u12.ld(),
                QuadFloat::ONE,
                &mut a.as_mut_slice()[off..],
                ld,
                backend,
            )
            .expect("trailing update arguments are consistent");
        }
        j = e;
    }
    Ok(LuFactors { lu: a, piv, block_b: b.min(n.max(1)) })
}

fn shift_column(err: LuError, by: usize) -> LuError {
    match err {
        LuError::Singular { column } => LuError::Singular { column: column + by },
        other => other,
    }
}

/// Overwrites `a12` with `L11^{-1} a12`, `L11` unit lower triangular (its
/// diagonal and upper part are never read).
pub fn trsm_unit_lower(l11: &Matrix, a12: &mut Matrix) {
    let b = l11.rows();
    assert_eq!(a12.rows(), b, "trsm_unit_lower: row count mismatch");
    for j in 0..a12.cols() {
        let x = a12.col_mut(j);
        for i in 1..b {
            let mut v = x[i];
            for p in 0..i {
                v = qsub(v, qmul(l11.get(i, p), x[p]));
            }
            x[i] = v;
        }
    }
}

/// Overwrites `a21` with `a21 U11^{-1}`, `U11` upper triangular (the strict
/// lower part is never read). Columns are solved left to right.
pub fn trsm_upper_right(u11: &Matrix, a21: &mut Matrix) -> Result<(), LuError> {
    let b = u11.rows();
    assert_eq!(a21.cols(), b, "trsm_upper_right: column count mismatch");
    for c in 0..b {
        let d = u11.get(c, c);
        if d == QuadFloat::ZERO {
            return Err(LuError::Singular { column: c });
        }
        for r in 0..a21.rows() {
            let mut v = a21.get(r, c);
            for p in 0..c {
                v = qsub(v, qmul(a21.get(r, p), u11.get(p, c)));
            }
            a21.set(r, c, qdiv(v, d));
        }
    }
    Ok(())
}

/// `P A`: the recorded swaps applied to the rows of `a` in order.
pub fn apply_pivots(a: &Matrix, piv: &[usize]) -> Matrix {
    let mut pa = a.packed();
    let cols = pa.cols();
    swap_rows(&mut pa, piv, 0, piv.len(), 0..cols);
    pa
}

/// Unit-lower factor.
pub fn unpack_l(lu: &Matrix) -> Matrix {
    Matrix::from_fn(lu.rows(), lu.cols(), |i, j| match i.cmp(&j) {
        core::cmp::Ordering::Greater => lu.get(i, j),
        core::cmp::Ordering::Equal => QuadFloat::ONE,
        core::cmp::Ordering::Less => QuadFloat::ZERO,
    })
}

/// Upper factor.
pub fn unpack_u(lu: &Matrix) -> Matrix {
    Matrix::from_fn(lu.rows(), lu.cols(), |i, j| if i <= j { lu.get(i, j) } else { QuadFloat::ZERO })
}

/// `L U` from the packed factors, skipping the structural zeros.
pub fn reconstruct(lu: &Matrix) -> Matrix {
    let n = lu.rows();
    let lt = unpack_l(lu).transposed();
    let u = unpack_u(lu);
    Matrix::from_fn(n, n, |i, j| {
        let (li, uj) = (lt.col(i), u.col(j));
        let mut s = QuadFloat::ZERO;
        for p in 0..=i.min(j) {
            s = qmadd(li[p], uj[p], s, MaddMode::TwoRoundings);
        }
        s
    })
}

/// `E_L1(P A, L U)`.
pub fn residual(a: &Matrix, f: &LuFactors) -> QuadFloat {
    e_l1(&apply_pivots(a, &f.piv), &reconstruct(&f.lu)).expect("square factors")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: f64) -> QuadFloat {
        QuadFloat::from_f64(x)
    }

    fn small(rows: &[&[f64]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows[0].len(), |i, j| q(rows[i][j]))
    }

    #[test]
    fn identity() {
        let f = getrf_unblocked(Matrix::identity(5)).unwrap();
        assert!(f.lu.bits_eq(&Matrix::identity(5)));
        assert_eq!(f.piv, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn forced_swap() {
        let f = getrf_unblocked(small(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!(f.lu.bits_eq(&Matrix::identity(2)));
        assert_eq!(f.piv, vec![1, 1]);
    }

    #[test]
    fn ties_pick_smallest_row() {
        let f = getrf_unblocked(small(&[&[1.0, 2.0, 0.0], &[-2.0, 1.0, 1.0], &[2.0, 0.0, 3.0]])).unwrap();
        assert_eq!(f.piv[0], 1);
    }

    #[test]
    fn singular() {
        let a = small(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[1.0, 0.0, 1.0]]);
        assert!(matches!(getrf_unblocked(a.clone()), Err(LuError::Singular { .. })));
        let z = small(&[&[1.0, 0.0, 5.0], &[2.0, 0.0, 1.0], &[3.0, 0.0, 2.0]]);
        assert_eq!(getrf_unblocked(z.clone()).unwrap_err(), LuError::Singular { column: 1 });
        assert_eq!(getrf_blocked(z, 1, &GemmBackend::default()).unwrap_err(), LuError::Singular { column: 1 });
        assert_eq!(getrf_unblocked(Matrix::zeros(2, 3)).unwrap_err(), LuError::NotSquare { rows: 2, cols: 3 });
        assert_eq!(getrf_blocked(Matrix::identity(2), 0, &GemmBackend::default()).unwrap_err(), LuError::ZeroBlock);
    }

    #[test]
    fn trsm_lower_by_hand() {
        let l = small(&[&[1.0, 0.0], &[2.0, 1.0]]);
        let mut x = small(&[&[1.0], &[0.0]]);
        trsm_unit_lower(&l, &mut x);
        assert!(x.bits_eq(&small(&[&[1.0], &[-2.0]])));
        let a = Matrix::random(4, 3, 4, 2).unwrap();
        let mut y = a.clone();
        trsm_unit_lower(&Matrix::identity(4), &mut y);
        assert!(y.bits_eq(&a));
    }

    #[test]
    fn trsm_upper_by_hand() {
        let a = Matrix::random(5, 1, 5, 4).unwrap();
        let mut x = a.clone();
        trsm_upper_right(&small(&[&[4.0]]), &mut x).unwrap();
        for i in 0..5 {
            assert!(x.get(i, 0).bits_eq(a.get(i, 0) / q(4.0)));
        }
        let mut y = Matrix::random(3, 3, 3, 5).unwrap();
        let before = y.clone();
        trsm_upper_right(&Matrix::identity(3), &mut y).unwrap();
        assert!(y.bits_eq(&before));
        assert_eq!(
            trsm_upper_right(&small(&[&[1.0, 1.0], &[0.0, 0.0]]), &mut Matrix::zeros(1, 2)).unwrap_err(),
            LuError::Singular { column: 1 }
        );
    }

    #[test]
    fn random_reconstruction() {
        let a = Matrix::random(8, 8, 8, 11).unwrap();
        let f = getrf_unblocked(a.clone()).unwrap();
        assert!(residual(&a, &f) <= q(1e-30));
        for (i, &p) in f.piv.iter().enumerate() {
            assert!(i <= p && p < 8);
        }
    }

    #[test]
    fn no_pivot_mode() {
        // Diagonally dominant, so no pivoting is needed.
        let n = 12;
        let mut a = Matrix::random(n, n, n, 3).unwrap();
        for i in 0..n {
            a.set(i, i, a.get(i, i) + q(n as f64));
        }
        let be = GemmBackend::default();
        let full = getrf(a.clone(), n, Pivoting::NoPivot, &be).unwrap();
        let blocked = getrf(a.clone(), 5, Pivoting::NoPivot, &be).unwrap();
        assert_eq!(blocked.piv, (0..n).collect::<Vec<_>>());
        assert!(residual(&a, &full) <= q(1e-30));
        assert!(residual(&a, &blocked) <= q(1e-30));
    }
}
