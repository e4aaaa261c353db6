//! `C <- alpha op(A) op(B) + beta C` with the argument list of the reference
//! BLAS `Rgemm`, plus the mean-absolute-difference metric `E_L1`.
//!
//! Only the product `op(A) op(B)` runs on the selected kernel. Transposes are
//! materialised into scratch copies first and the `alpha`/`beta` work is done
//! afterwards on the host path: every element of `C` becomes
//! `qadd(qmul(alpha, ab), qmul(beta, c))`.

use core::fmt;

use crate::matrix::{MatView, Matrix, MatrixError, TransposeFlag};
use crate::quadfp::{qabs, qadd, qdiv, qmul, qsub, MaddMode, QuadFloat};
use crate::systolic::{reference_gemm, simulate_gemm, ArrayConfig};

/// Kernel used for the `op(A) op(B)` product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GemmBackend {
    /// Plain triple loop with the given multiply-add rounding.
    Reference(MaddMode),
    Systolic(ArrayConfig),
}

impl GemmBackend {
    pub fn madd_mode(&self) -> MaddMode {
        match self {
            GemmBackend::Reference(m) => *m,
            GemmBackend::Systolic(cfg) => cfg.madd_mode,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GemmBackend::Reference(_) => "reference",
            GemmBackend::Systolic(_) => "systolic",
        }
    }

    /// `a * b` on this kernel.
    pub fn product(&self, a: &Matrix, b: &Matrix) -> Matrix {
        match self {
            GemmBackend::Reference(mode) => reference_gemm(a, b, *mode).expect("shapes checked"),
            GemmBackend::Systolic(cfg) => simulate_gemm(cfg, a, b).expect("shapes checked").c_prime,
        }
    }
}

impl Default for GemmBackend {
    fn default() -> Self {
        GemmBackend::Reference(MaddMode::default())
    }
}

/// Illegal argument, numbered 1..=13 in the order of the `Rgemm` argument list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArgumentError {
    pub position: usize,
}

impl ArgumentError {
    pub fn name(&self) -> &'static str {
        const NAMES: [&str; 13] =
            ["transa", "transb", "m", "n", "k", "alpha", "a", "lda", "b", "ldb", "beta", "c", "ldc"];
        NAMES.get(self.position.wrapping_sub(1)).copied().unwrap_or("?")
    }
}

impl fmt::Display for ArgumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rgemm: parameter {} ({}) had an illegal value", self.position, self.name())
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ArgumentError {}

fn check_operand(
    rows: usize,
    cols: usize,
    len: usize,
    ld: usize,
    data_pos: usize,
    ld_pos: usize,
) -> Result<(), ArgumentError> {
    if ld < rows.max(1) {
        return Err(ArgumentError { position: ld_pos });
    }
    if rows > 0 && cols > 0 && len < (cols - 1) * ld + rows {
        return Err(ArgumentError { position: data_pos });
    }
    Ok(())
}

/// `(rows, cols)` of the stored `A` and `B` for the given flags.
fn stored_shapes(
    transa: TransposeFlag,
    transb: TransposeFlag,
    m: usize,
    n: usize,
    k: usize,
) -> ((usize, usize), (usize, usize)) {
    let a = match transa {
        TransposeFlag::NoTranspose => (m, k),
        TransposeFlag::Transpose => (k, m),
    };
    let b = match transb {
        TransposeFlag::NoTranspose => (k, n),
        TransposeFlag::Transpose => (n, k),
    };
    (a, b)
}

/// The leading-dimension checks of [`rgemm`] without any storage.
#[allow(clippy::too_many_arguments)]
pub fn check_leading_dims(
    transa: TransposeFlag,
    transb: TransposeFlag,
    m: usize,
    n: usize,
    k: usize,
    lda: usize,
    ldb: usize,
    ldc: usize,
) -> Result<(), ArgumentError> {
    let ((nrowa, _), (nrowb, _)) = stored_shapes(transa, transb, m, n, k);
    if lda < nrowa.max(1) {
        return Err(ArgumentError { position: 8 });
    }
    if ldb < nrowb.max(1) {
        return Err(ArgumentError { position: 10 });
    }
    if ldc < m.max(1) {
        return Err(ArgumentError { position: 13 });
    }
    Ok(())
}

/// General matrix multiply on column-major slices.
#[allow(clippy::too_many_arguments)]
pub fn rgemm(
    transa: TransposeFlag,
    transb: TransposeFlag,
    m: usize,
    n: usize,
    k: usize,
    alpha: QuadFloat,
    a: &[QuadFloat],
    lda: usize,
    b: &[QuadFloat],
    ldb: usize,
    beta: QuadFloat,
    c: &mut [QuadFloat],
    ldc: usize,
    backend: &GemmBackend,
) -> Result<(), ArgumentError> {
    let ((nrowa, ncola), (nrowb, ncolb)) = stored_shapes(transa, transb, m, n, k);
    check_operand(nrowa, ncola, a.len(), lda, 7, 8)?;
    check_operand(nrowb, ncolb, b.len(), ldb, 9, 10)?;
    check_operand(m, n, c.len(), ldc, 12, 13)?;

    if m == 0 || n == 0 {
        return Ok(());
    }
    let alpha_zero = alpha == QuadFloat::ZERO;
    let beta_zero = beta == QuadFloat::ZERO;
    if (alpha_zero || k == 0) && beta == QuadFloat::ONE {
        return Ok(());
    }
    if alpha_zero || k == 0 {
        for j in 0..n {
            for x in &mut c[j * ldc..j * ldc + m] {
                *x = if beta_zero { QuadFloat::ZERO } else { qmul(beta, *x) };
            }
        }
        return Ok(());
    }

    let opa = MatView::new(a, nrowa, ncola, lda, transa).to_matrix();
    let opb = MatView::new(b, nrowb, ncolb, ldb, transb).to_matrix();
    let ab = backend.product(&opa, &opb);
    for j in 0..n {
        let col = &mut c[j * ldc..j * ldc + m];
        for (i, x) in col.iter_mut().enumerate() {
            let t = qmul(alpha, ab.get(i, j));
            // beta == 0 never reads C, so NaN/Inf garbage in C is overwritten.
            *x = if beta_zero { t } else { qadd(t, qmul(beta, *x)) };
        }
    }
    Ok(())
}

/// [`rgemm`] on [`Matrix`] operands; `m`, `n`, `k` and the leading
/// dimensions come from the operands themselves.
#[allow(clippy::too_many_arguments)]
pub fn rgemm_matrix(
    transa: TransposeFlag,
    transb: TransposeFlag,
    alpha: QuadFloat,
    a: &Matrix,
    b: &Matrix,
    beta: QuadFloat,
    c: &mut Matrix,
    backend: &GemmBackend,
) -> Result<(), ArgumentError> {
    let va = a.view(transa);
    let vb = b.view(transb);
    let (m, k, n) = (va.rows(), va.cols(), vb.cols());
    if vb.rows() != k {
        return Err(ArgumentError { position: 5 });
    }
    if c.shape() != (m, n) {
        return Err(ArgumentError { position: 12 });
    }
    let (lda, ldb, ldc) = (a.ld().max(1), b.ld().max(1), c.ld().max(1));
    rgemm(transa, transb, m, n, k, alpha, a.as_slice(), lda, b.as_slice(), ldb, beta, c.as_mut_slice(), ldc, backend)
}

/// Mean absolute elementwise difference of two `n x n` matrices, summed in
/// row-major order and divided by `n^2` at the end.
pub fn e_l1(c_f: &Matrix, c_r: &Matrix) -> Result<QuadFloat, MatrixError> {
    if c_f.shape() != c_r.shape() || !c_f.is_square() {
        return Err(MatrixError::ShapeMismatch { left: c_f.shape(), right: c_r.shape() });
    }
    let n = c_f.rows();
    if n == 0 {
        return Ok(QuadFloat::ZERO);
    }
    let mut s = QuadFloat::ZERO;
    for i in 0..n {
        for j in 0..n {
            s = qadd(s, qabs(qsub(c_f.get(i, j), c_r.get(i, j))));
        }
    }
    Ok(qdiv(s, QuadFloat::from_f64((n * n) as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use TransposeFlag::{NoTranspose as N, Transpose as T};

    fn q(x: f64) -> QuadFloat {
        QuadFloat::from_f64(x)
    }

    #[test]
    fn alpha_zero_beta_one_leaves_c() {
        let a = Matrix::random(3, 4, 3, 1).unwrap();
        let b = Matrix::random(4, 2, 4, 2).unwrap();
        let mut c = Matrix::new(3, 2, 3, QuadFloat::NAN).unwrap();
        let before = c.clone();
        rgemm_matrix(N, N, QuadFloat::ZERO, &a, &b, QuadFloat::ONE, &mut c, &GemmBackend::default()).unwrap();
        assert_eq!(
            c.as_slice().iter().map(|x| x.to_bits()).collect::<alloc::vec::Vec<_>>(),
            before.as_slice().iter().map(|x| x.to_bits()).collect::<alloc::vec::Vec<_>>()
        );
    }

    #[test]
    fn beta_zero_gives_kernel_output() {
        let a = Matrix::random(5, 3, 5, 1).unwrap();
        let b = Matrix::random(3, 4, 3, 2).unwrap();
        let mut c = Matrix::new(5, 4, 5, QuadFloat::NAN).unwrap();
        let be = GemmBackend::default();
        rgemm_matrix(N, N, QuadFloat::ONE, &a, &b, QuadFloat::ZERO, &mut c, &be).unwrap();
        assert!(c.bits_eq(&be.product(&a, &b)));
    }

    #[test]
    fn k_zero_scales_c() {
        let a = Matrix::zeros(2, 0);
        let b = Matrix::zeros(0, 2);
        let mut c = Matrix::new(2, 2, 2, q(3.0)).unwrap();
        rgemm_matrix(N, N, QuadFloat::ONE, &a, &b, q(0.5), &mut c, &GemmBackend::default()).unwrap();
        assert!(c.bits_eq(&Matrix::new(2, 2, 2, q(1.5)).unwrap()));
    }

    #[test]
    fn argument_positions() {
        let z = [QuadFloat::ZERO; 16];
        let mut c = [QuadFloat::ZERO; 16];
        let be = GemmBackend::default();
        let one = QuadFloat::ONE;
        let err = |r: Result<(), ArgumentError>| r.unwrap_err().position;
        assert_eq!(err(rgemm(N, N, 4, 4, 4, one, &z, 3, &z, 4, one, &mut c, 4, &be)), 8);
        assert_eq!(err(rgemm(N, T, 4, 2, 4, one, &z, 4, &z, 1, one, &mut c, 4, &be)), 10);
        assert_eq!(err(rgemm(N, N, 4, 4, 4, one, &z, 4, &z, 4, one, &mut c, 2, &be)), 13);
        assert_eq!(err(rgemm(N, N, 4, 4, 5, one, &z, 4, &z, 5, one, &mut c, 4, &be)), 7);
        assert_eq!(err(rgemm(T, N, 4, 4, 4, one, &z, 4, &z, 5, one, &mut c, 4, &be)), 9);
        assert_eq!(err(rgemm(N, N, 4, 5, 4, one, &z, 4, &z, 4, one, &mut c, 4, &be)), 9);
        // ld of 0 is illegal even for empty operands
        assert_eq!(err(rgemm(N, N, 0, 4, 4, one, &z, 0, &z, 4, one, &mut c, 1, &be)), 8);
        assert!(rgemm(N, N, 0, 4, 4, one, &z, 1, &z, 4, one, &mut c, 1, &be).is_ok());
        assert_eq!(ArgumentError { position: 13 }.name(), "ldc");
    }

    #[test]
    fn metric() {
        let x = Matrix::random(3, 3, 3, 9).unwrap();
        assert!(e_l1(&x, &x).unwrap().bits_eq(QuadFloat::ZERO));
        let mut y = Matrix::zeros(2, 2);
        y.set(1, 0, q(0.75));
        let d = e_l1(&Matrix::zeros(2, 2), &y).unwrap();
        assert!(d.bits_eq(q(0.75 / 4.0)));
        assert!(e_l1(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)).is_err());
    }
}
