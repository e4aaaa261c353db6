use proptest::prelude::*;
use quadgemm::quadfp::{qadd, qmadd, qmul};
use quadgemm::rgemm::{e_l1, rgemm, rgemm_matrix, GemmBackend};
use quadgemm::{ArrayConfig, MaddMode, Matrix, QuadFloat, TransposeFlag};

use TransposeFlag::{NoTranspose as N, Transpose as T};

fn q(x: f64) -> QuadFloat {
    QuadFloat::from_f64(x)
}

fn systolic(p: usize, m_tile: usize) -> GemmBackend {
    GemmBackend::Systolic(ArrayConfig::new(p, p, m_tile, 200.0).unwrap())
}

/// Textbook definition, evaluated element by element.
#[allow(clippy::too_many_arguments)]
fn naive(
    ta: TransposeFlag,
    tb: TransposeFlag,
    alpha: QuadFloat,
    a: &Matrix,
    b: &Matrix,
    beta: QuadFloat,
    c: &Matrix,
    mode: MaddMode,
) -> Matrix {
    let va = a.view(ta);
    let vb = b.view(tb);
    Matrix::from_fn(c.rows(), c.cols(), |i, j| {
        let mut s = QuadFloat::ZERO;
        for p in 0..va.cols() {
            s = qmadd(va.get(i, p), vb.get(p, j), s, mode);
        }
        if alpha == QuadFloat::ZERO {
            return if beta == QuadFloat::ZERO { QuadFloat::ZERO } else { qmul(beta, c.get(i, j)) };
        }
        if beta == QuadFloat::ZERO {
            qmul(alpha, s)
        } else {
            qadd(qmul(alpha, s), qmul(beta, c.get(i, j)))
        }
    })
}

#[test]
fn transposed_a_matches_pretransposed() {
    let a = Matrix::random(2, 3, 2, 1).unwrap();
    let b = Matrix::random(2, 4, 2, 2).unwrap();
    let c0 = Matrix::random(3, 4, 3, 3).unwrap();
    let be = GemmBackend::default();
    let mut c1 = c0.clone();
    rgemm_matrix(T, N, q(0.5), &a, &b, q(2.0), &mut c1, &be).unwrap();
    let mut c2 = c0.clone();
    rgemm_matrix(N, N, q(0.5), &a.transposed(), &b, q(2.0), &mut c2, &be).unwrap();
    assert!(c1.bits_eq(&c2));
}

#[test]
fn all_flag_combinations_match_explicit_copies() {
    let (m, n, k) = (5, 6, 7);
    let be = systolic(2, 3);
    for ta in [N, T] {
        for tb in [N, T] {
            let a = if ta == N { Matrix::random(m, k, m + 2, 4) } else { Matrix::random(k, m, k, 4) }.unwrap();
            let b = if tb == N { Matrix::random(k, n, k, 5) } else { Matrix::random(n, k, n + 1, 5) }.unwrap();
            let c0 = Matrix::random(m, n, m + 3, 6).unwrap();
            let mut got = c0.clone();
            rgemm_matrix(ta, tb, q(-1.5), &a, &b, q(0.25), &mut got, &be).unwrap();
            let opa = a.view(ta).to_matrix();
            let opb = b.view(tb).to_matrix();
            let mut want = c0.clone();
            rgemm_matrix(N, N, q(-1.5), &opa, &opb, q(0.25), &mut want, &be).unwrap();
            assert!(got.bits_eq(&want), "{ta:?} {tb:?}");
            let oracle = naive(ta, tb, q(-1.5), &a, &b, q(0.25), &c0, MaddMode::TwoRoundings);
            assert!(got.bits_eq(&oracle));
        }
    }
}

#[test]
fn systolic_matches_reference_at_128() {
    let a = Matrix::random(128, 128, 128, 10).unwrap();
    let b = Matrix::random(128, 128, 128, 11).unwrap();
    let c0 = Matrix::random(128, 128, 128, 12).unwrap();
    let mut r = c0.clone();
    rgemm_matrix(N, T, q(0.75), &a, &b, q(-3.0), &mut r, &GemmBackend::Reference(MaddMode::TwoRoundings)).unwrap();
    let mut s = c0.clone();
    rgemm_matrix(N, T, q(0.75), &a, &b, q(-3.0), &mut s, &systolic(8, 32)).unwrap();
    assert!(r.bits_eq(&s));
}

#[test]
fn leading_dimension_does_not_change_results() {
    let be = GemmBackend::default();
    let a = Matrix::random(9, 4, 9, 1).unwrap();
    let b = Matrix::random(4, 6, 4, 2).unwrap();
    let c = Matrix::random(9, 6, 9, 3).unwrap();
    let mut base = c.clone();
    rgemm_matrix(N, N, q(1.25), &a, &b, q(-0.5), &mut base, &be).unwrap();
    for pad in [1, 5] {
        let wide = |m: &Matrix| {
            let ld = m.rows() + pad;
            let mut w = Matrix::from_col_major(m.rows(), m.cols(), ld, vec![QuadFloat::NAN; ld * m.cols()]).unwrap();
            w.set_submatrix(0, 0, m);
            w
        };
        let mut cw = wide(&c);
        rgemm_matrix(N, N, q(1.25), &wide(&a), &wide(&b), q(-0.5), &mut cw, &be).unwrap();
        assert!(cw.bits_eq(&base));
        // padding rows of C are untouched
        assert!(cw.as_slice()[9].is_nan());
    }
}

#[test]
fn empty_shapes_only_scale_c() {
    let be = systolic(2, 2);
    let mut c = Matrix::new(3, 2, 3, q(6.0)).unwrap();
    let z = [QuadFloat::ZERO; 0];
    let ldc = c.ld();
    rgemm(N, N, 3, 2, 0, q(1.0), &z, 3, &z, 1, q(0.5), c.as_mut_slice(), ldc, &be).unwrap();
    assert!(c.bits_eq(&Matrix::new(3, 2, 3, q(3.0)).unwrap()));
    let mut c = Matrix::new(3, 2, 3, q(6.0)).unwrap();
    rgemm(N, N, 0, 2, 4, q(1.0), &z, 1, &[QuadFloat::ONE; 8], 4, q(0.5), c.as_mut_slice(), 3, &be).unwrap();
    assert!(c.bits_eq(&Matrix::new(3, 2, 3, q(6.0)).unwrap()));
}

#[test]
fn e_l1_properties() {
    let x = Matrix::random(6, 6, 6, 1).unwrap();
    let y = Matrix::random(6, 6, 6, 2).unwrap();
    let d1 = e_l1(&x, &y).unwrap();
    let d2 = e_l1(&y, &x).unwrap();
    assert!(d1.bits_eq(d2));
    assert!(d1 > QuadFloat::ZERO);
    assert!(e_l1(&x, &x).unwrap().bits_eq(QuadFloat::ZERO));
}

#[test]
fn rounding_modes_differ_slightly() {
    let a = Matrix::random(64, 64, 64, 3).unwrap();
    let b = Matrix::random(64, 64, 64, 4).unwrap();
    let two = GemmBackend::Reference(MaddMode::TwoRoundings).product(&a, &b);
    let fused = GemmBackend::Reference(MaddMode::Fused).product(&a, &b);
    let d = e_l1(&fused, &two).unwrap();
    assert!(d > q(1e-34) && d < q(1e-30), "{d:?}");
}

fn scalar() -> impl Strategy<Value = QuadFloat> {
    prop_oneof![
        Just(QuadFloat::ZERO),
        Just(QuadFloat::ONE),
        Just(QuadFloat::NEG_ONE),
        (-4.0f64..4.0).prop_map(QuadFloat::from_f64),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn backends_agree(m in 0usize..9, n in 0usize..9, k in 0usize..9,
                      ta in any::<bool>(), tb in any::<bool>(),
                      alpha in scalar(), beta in scalar(),
                      pad in 0usize..3, p in 1usize..5, m_tile in 1usize..5, seed in any::<u64>()) {
        let ta = if ta { T } else { N };
        let tb = if tb { T } else { N };
        let (ra, ca) = if ta == N { (m, k) } else { (k, m) };
        let (rb, cb) = if tb == N { (k, n) } else { (n, k) };
        let a = Matrix::random(ra, ca, ra.max(1) + pad, seed).unwrap();
        let b = Matrix::random(rb, cb, rb.max(1) + pad, seed ^ 2).unwrap();
        let c0 = Matrix::random(m, n, m.max(1) + pad, seed ^ 3).unwrap();
        let mut r = c0.clone();
        rgemm_matrix(ta, tb, alpha, &a, &b, beta, &mut r, &GemmBackend::Reference(MaddMode::TwoRoundings)).unwrap();
        let mut s = c0.clone();
        rgemm_matrix(ta, tb, alpha, &a, &b, beta, &mut s, &systolic(p, m_tile)).unwrap();
        prop_assert!(r.bits_eq(&s));
        if k > 0 || alpha == QuadFloat::ZERO {
            let want = naive(ta, tb, alpha, &a, &b, beta, &c0, MaddMode::TwoRoundings);
            prop_assert!(r.bits_eq(&want));
        }
    }
}
