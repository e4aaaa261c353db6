//! Reduced oracle suites for a quick health check of a build: soft-float
//! against the arbitrary-precision oracle, simulator against the reference
//! kernel, and LU against exact elimination and residual bounds.

use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use quadgemm::lu::{getrf_blocked, getrf_unblocked, residual};
use quadgemm::perfmodel::lu_flops;
use quadgemm::quadfp::{qadd, qdiv, qmadd, qmul};
use quadgemm::rgemm::GemmBackend;
use quadgemm::systolic::{reference_gemm, simulate_gemm};
use quadgemm::{ArrayConfig, MaddMode, Matrix, QuadFloat, SplitMix64};
use quadgemm_oracle as oracle;
use quadgemm_oracle::cases::{any_operand, directed_values, fma_triple, near_pair, CaseRng};

use crate::table::{fmt_f64, Table};

pub const SCHEMA: &str = "selftest/1";

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
    pub seconds: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

struct Tally {
    name: &'static str,
    cases: u64,
    failures: u64,
    first: Option<String>,
    start: Instant,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, cases: 0, failures: 0, first: None, start: Instant::now() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn done(self) -> Check {
        Check {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            first_failure: self.first,
            seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

type BinOp = fn(u128, u128) -> u128;

fn q(bits: u128) -> QuadFloat {
    QuadFloat::from_bits(bits)
}

/// Each binary operation on all directed pairs plus `random` generated
/// operand sets; the fused multiply-add also runs a directed triple grid.
pub fn softfloat(random: usize, seed: u64) -> Vec<Check> {
    let dv = directed_values();
    let ops: [(&'static str, BinOp, BinOp); 3] = [
        ("softfloat-add", |a, b| qadd(q(a), q(b)).to_bits(), oracle::add),
        ("softfloat-mul", |a, b| qmul(q(a), q(b)).to_bits(), oracle::mul),
        ("softfloat-div", |a, b| qdiv(q(a), q(b)).to_bits(), oracle::div),
    ];
    let mut out = Vec::new();
    for (i, (name, ours, theirs)) in ops.into_iter().enumerate() {
        let mut t = Tally::new(name);
        for &a in &dv {
            for &b in &dv {
                t.check(ours(a, b) == theirs(a, b), || format!("{a:#034x} {b:#034x}"));
            }
        }
        let mut rng = CaseRng::new(seed ^ i as u64);
        for _ in 0..random {
            let (a, b) =
                if i == 0 { near_pair(&mut rng) } else { (any_operand(&mut rng, 20), any_operand(&mut rng, 20)) };
            t.check(ours(a, b) == theirs(a, b), || format!("{a:#034x} {b:#034x}"));
        }
        out.push(t.done());
    }
    let mut t = Tally::new("softfloat-fma");
    let fma = |a, b, c| qmadd(q(a), q(b), q(c), MaddMode::Fused).to_bits();
    for &a in &dv {
        for &b in &dv {
            for &c in dv.iter().step_by(7) {
                t.check(fma(a, b, c) == oracle::fma(a, b, c), || format!("{a:#034x} {b:#034x} {c:#034x}"));
            }
        }
    }
    let mut rng = CaseRng::new(seed ^ 3);
    for _ in 0..random {
        let (a, b, c) = fma_triple(&mut rng);
        t.check(fma(a, b, c) == oracle::fma(a, b, c), || format!("{a:#034x} {b:#034x} {c:#034x}"));
    }
    out.push(t.done());
    out
}

/// Array configurations with square, rectangular, degenerate and oversized
/// grids and memory tiles.
pub fn tiling_configs() -> Vec<ArrayConfig> {
    [(1, 1, 1), (2, 2, 8), (4, 4, 32), (8, 8, 32), (8, 16, 256), (3, 5, 7), (16, 8, 2)]
        .into_iter()
        .map(|(p_r, p_c, t)| ArrayConfig::new(p_r, p_c, t, 200.0).expect("static config"))
        .collect()
}

/// `shapes` random `(m, n, k)` in `[1, max_dim]`, every config, both modes
/// alternating, compared bitwise with the reference kernel.
pub fn tiling(shapes: usize, max_dim: usize, seed: u64) -> Check {
    let mut t = Tally::new("tiling-invariance");
    let mut rng = SplitMix64::new(seed);
    let configs = tiling_configs();
    for s in 0..shapes {
        let mut dim = || 1 + rng.below(max_dim as u64) as usize;
        let (m, n, k) = (dim(), dim(), dim());
        let mode = if s % 2 == 0 { MaddMode::TwoRoundings } else { MaddMode::Fused };
        let a = Matrix::random(m, k, m, rng.next_u64()).expect("ld = rows");
        let b = Matrix::random(k, n, k, rng.next_u64()).expect("ld = rows");
        let want = reference_gemm(&a, &b, mode).expect("conforming");
        for cfg in &configs {
            let got = simulate_gemm(&cfg.with_mode(mode), &a, &b).expect("conforming").c_prime;
            t.check(got.bits_eq(&want), || format!("{m}x{n}x{k} on {}x{} tile {}", cfg.p_r, cfg.p_c, cfg.m_tile));
        }
    }
    t.done()
}

/// 4x4 integer matrix whose partial-pivoting factors are known in closed form.
pub const LU_EXACT_CASE: [[i64; 4]; 4] = [[-7, -9, 2, -4], [0, 8, 1, -6], [-5, 2, 5, -3], [-8, -8, 6, 1]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac(i128, i128);

impl Frac {
    fn new(n: i128, d: i128) -> Frac {
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()) as i128;
        let s = if d < 0 { -1 } else { 1 };
        Frac(s * n / g, s * d / g)
    }
    fn sub(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1, self.1 * o.0)
    }
    fn abs_gt(self, o: Frac) -> bool {
        (self.0 * o.1).abs() > (o.0 * self.1).abs()
    }
    fn round(self) -> u128 {
        oracle::from_rational(&BigInt::from(self.0), &BigUint::from(self.1 as u128))
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Exact right-looking elimination with the same pivot rule (first strictly
/// larger magnitude wins). Returns packed factors by row and the pivots.
#[allow(clippy::needless_range_loop)]
pub fn exact_lu(a: &[[i64; 4]; 4]) -> (Vec<Vec<(i128, i128)>>, Vec<usize>) {
    let mut m: Vec<Vec<Frac>> = a.iter().map(|r| r.iter().map(|&x| Frac(x as i128, 1)).collect()).collect();
    let mut piv = Vec::new();
    for c in 0..4 {
        let mut p = c;
        for i in c + 1..4 {
            if m[i][c].abs_gt(m[p][c]) {
                p = i;
            }
        }
        piv.push(p);
        m.swap(c, p);
        for i in c + 1..4 {
            let l = m[i][c].div(m[c][c]);
            for j in c + 1..4 {
                m[i][j] = m[i][j].sub(l.mul(m[c][j]));
            }
            m[i][c] = l;
        }
    }
    (m.into_iter().map(|r| r.into_iter().map(|f| (f.0, f.1)).collect()).collect(), piv)
}

/// LU: the exact 4x4 case on both backends and every block size, residual
/// bounds on random matrices, full-width blocks against the unblocked
/// routine, and the flop count formula.
pub fn lu(n: usize, blocks: &[usize], seed: u64) -> Check {
    let mut t = Tally::new("lu");
    let backends = [
        GemmBackend::Reference(MaddMode::TwoRoundings),
        GemmBackend::Systolic(ArrayConfig::new(2, 2, 1, 1.0).expect("static config")),
    ];
    let (exact, piv) = exact_lu(&LU_EXACT_CASE);
    let a4 = Matrix::from_fn(4, 4, |i, j| QuadFloat::from_f64(LU_EXACT_CASE[i][j] as f64));
    for b in 1..=4 {
        for be in &backends {
            match getrf_blocked(a4.clone(), b, be) {
                Ok(f) => {
                    let mut ok = f.piv == piv;
                    for (i, row) in exact.iter().enumerate() {
                        for (j, &(num, den)) in row.iter().enumerate() {
                            let got = f.lu.get(i, j);
                            // a rational zero carries no sign
                            ok &= if num == 0 { got.is_zero() } else { got.to_bits() == Frac(num, den).round() };
                        }
                    }
                    t.check(ok, || format!("4x4 exact case, b={b}, {}", be.name()));
                }
                Err(e) => t.check(false, || format!("4x4 exact case, b={b}: {e}")),
            }
        }
    }

    let bound = QuadFloat::from_f64(1e-29);
    let a = Matrix::random(n, n, n, seed).expect("ld = rows");
    let systolic = GemmBackend::Systolic(ArrayConfig::new(4, 4, 32, 200.0).expect("static config"));
    for &b in blocks {
        match getrf_blocked(a.clone(), b, &systolic) {
            Ok(f) => {
                let r = residual(&a, &f);
                t.check(r <= bound, || format!("n={n} b={b}: residual {r}"));
            }
            Err(e) => t.check(false, || format!("n={n} b={b}: {e}")),
        }
    }
    match (getrf_unblocked(a.clone()), getrf_blocked(a.clone(), n, &systolic)) {
        (Ok(u), Ok(f)) => {
            t.check(u.lu.bits_eq(&f.lu) && u.piv == f.piv, || format!("n={n} b=n differs from unblocked"))
        }
        _ => t.check(false, || format!("n={n}: factorization failed")),
    }

    for k in 1u64..=1000 {
        let n = k as u128;
        let six = 6 * lu_flops(k);
        t.check(six == 4 * n * n * n - 3 * n * n + 5 * n, || format!("lu_flops({k})"));
    }
    t.done()
}

/// Selftest sizes.
#[derive(Clone, Copy, Debug)]
pub struct Plan {
    pub random_cases: usize,
    pub shapes: usize,
    pub max_dim: usize,
    pub lu_n: usize,
}

impl Default for Plan {
    fn default() -> Self {
        Plan { random_cases: 100_000, shapes: 50, max_dim: 96, lu_n: 256 }
    }
}

pub fn run_all(plan: Plan, seed: u64) -> Vec<Check> {
    let mut out = softfloat(plan.random_cases, seed);
    out.push(tiling(plan.shapes, plan.max_dim, seed));
    out.push(lu(plan.lu_n, &[32, 108, 128], seed));
    out
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(SCHEMA, &["check", "cases", "failures", "status", "first_failure", "seconds*"]);
    for c in checks {
        t.push(vec![
            c.name.to_string(),
            c.cases.to_string(),
            c.failures.to_string(),
            if c.passed() { "PASS" } else { "FAIL" }.to_string(),
            c.first_failure.as_deref().map_or("-".into(), |s| s.replace(',', ";")),
            fmt_f64(c.seconds, 3),
        ]);
    }
    t
}
