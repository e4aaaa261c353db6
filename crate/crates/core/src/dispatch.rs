//! Accelerator offload rule for `Rgemm` calls, the `.rgtrace` call-trace
//! text format, and trace replay with a two-cost timing model.
//!
//! A call is offloaded iff `m == n` or `m * n * k > n_min`.
//!
//! Trace format: the first non-comment line is `RGTRACE1`; every further
//! line holds one call as ten tab-separated fields
//! `transa transb m n k alpha lda ldb beta ldc`, flags as single letters
//! and `alpha`/`beta` as hex-floats. Lines starting with `#` and blank lines
//! are ignored. The ordinal of a call is its position among the records.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::matrix::{Matrix, TransposeFlag};
use crate::perfmodel::BoardSpec;
use crate::quadfp::{parse_hexfloat, write_hexfloat, QuadFloat};
use crate::rgemm::{check_leading_dims, rgemm, ArgumentError, GemmBackend};
use crate::rng::SplitMix64;
use crate::systolic::{cycle_count, dram_traffic, ArrayConfig};

pub const TRACE_HEADER: &str = "RGTRACE1";

/// The scalar and dimension arguments of one `Rgemm` call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GemmCallRecord {
    pub transa: TransposeFlag,
    pub transb: TransposeFlag,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub alpha: QuadFloat,
    pub lda: usize,
    pub ldb: usize,
    pub beta: QuadFloat,
    pub ldc: usize,
    pub ordinal: usize,
}

impl GemmCallRecord {
    /// Packed, untransposed call.
    pub fn packed(m: usize, n: usize, k: usize) -> Self {
        GemmCallRecord {
            transa: TransposeFlag::NoTranspose,
            transb: TransposeFlag::NoTranspose,
            m,
            n,
            k,
            alpha: QuadFloat::ONE,
            lda: m.max(1),
            ldb: k.max(1),
            beta: QuadFloat::ZERO,
            ldc: m.max(1),
            ordinal: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ArgumentError> {
        check_leading_dims(self.transa, self.transb, self.m, self.n, self.k, self.lda, self.ldb, self.ldc)
    }

    /// `n = m = k = lda = ldb = ldc`.
    pub fn is_square_packed(&self) -> bool {
        let n = self.n;
        self.m == n && self.k == n && self.lda == n && self.ldb == n && self.ldc == n
    }

    pub fn flops(&self) -> u128 {
        2 * self.m as u128 * self.n as u128 * self.k as u128
    }

    /// Bitwise equality including `alpha` and `beta` patterns.
    pub fn same_as(&self, o: &GemmCallRecord) -> bool {
        self.transa == o.transa
            && self.transb == o.transb
            && (self.m, self.n, self.k) == (o.m, o.n, o.k)
            && (self.lda, self.ldb, self.ldc) == (o.lda, o.ldb, o.ldc)
            && self.alpha.bits_eq(o.alpha)
            && self.beta.bits_eq(o.beta)
            && self.ordinal == o.ordinal
    }
}

/// Product threshold above which non-square calls are offloaded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DispatchPolicy {
    /// `u128::MAX` disables the product condition.
    pub n_min: u128,
}

impl DispatchPolicy {
    pub const DEFAULT_N_MIN: u128 = 1_000_000;
    pub const NEVER_BY_SIZE: DispatchPolicy = DispatchPolicy { n_min: u128::MAX };

    pub fn new(n_min: u128) -> Option<Self> {
        (n_min >= 1).then_some(DispatchPolicy { n_min })
    }
}

impl Default for DispatchPolicy {
    fn default() -> Self {
        DispatchPolicy { n_min: Self::DEFAULT_N_MIN }
    }
}

pub fn should_offload(rec: &GemmCallRecord, policy: &DispatchPolicy) -> bool {
    if rec.m == rec.n {
        return true;
    }
    let product = (rec.m as u128).checked_mul(rec.n as u128).and_then(|p| p.checked_mul(rec.k as u128));
    match product {
        Some(p) => p > policy.n_min,
        None => policy.n_min != u128::MAX,
    }
}

/// One trace line (without newline).
pub fn format_record(rec: &GemmCallRecord) -> String {
    let mut s = String::new();
    write_record(&mut s, rec).expect("writing to a String cannot fail");
    s
}

pub fn write_record<W: Write>(out: &mut W, rec: &GemmCallRecord) -> fmt::Result {
    write!(out, "{}\t{}\t{}\t{}\t{}\t", rec.transa.as_char(), rec.transb.as_char(), rec.m, rec.n, rec.k)?;
    write_hexfloat(out, rec.alpha)?;
    write!(out, "\t{}\t{}\t", rec.lda, rec.ldb)?;
    write_hexfloat(out, rec.beta)?;
    write!(out, "\t{}", rec.ldc)
}

/// Whole trace: header plus one line per record.
pub fn format_trace(recs: &[GemmCallRecord]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in recs {
        write_record(&mut s, r).expect("writing to a String cannot fail");
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceErrorKind {
    MissingHeader,
    FieldCount(usize),
    Flag(String),
    Integer { field: &'static str, text: String },
    Scalar { field: &'static str, text: String },
    Argument(ArgumentError),
}

/// A malformed trace line; `line` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceError {
    pub line: usize,
    pub kind: TraceErrorKind,
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace line {}: ", self.line)?;
        match &self.kind {
            TraceErrorKind::MissingHeader => write!(f, "expected header {TRACE_HEADER}"),
            TraceErrorKind::FieldCount(n) => write!(f, "expected 10 tab-separated fields, found {n}"),
            TraceErrorKind::Flag(t) => write!(f, "bad transpose flag {t:?}"),
            TraceErrorKind::Integer { field, text } => write!(f, "bad {field} {text:?}"),
            TraceErrorKind::Scalar { field, text } => write!(f, "bad {field} {text:?}"),
            TraceErrorKind::Argument(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TraceError {}

/// Parses a whole trace. An empty input is an empty trace.
pub fn parse_trace(text: &str) -> Result<Vec<GemmCallRecord>, TraceError> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim_end_matches('\r');
        if l.trim().is_empty() || l.starts_with('#') {
            continue;
        }
        if !seen_header {
            if l.trim() != TRACE_HEADER {
                return Err(TraceError { line, kind: TraceErrorKind::MissingHeader });
            }
            seen_header = true;
            continue;
        }
        let mut rec = parse_record(l).map_err(|kind| TraceError { line, kind })?;
        rec.ordinal = out.len();
        out.push(rec);
    }
    Ok(out)
}

/// Parses one record line; the ordinal is left at 0.
pub fn parse_record(line: &str) -> Result<GemmCallRecord, TraceErrorKind> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 10 {
        return Err(TraceErrorKind::FieldCount(f.len()));
    }
    let flag = |t: &str| {
        let mut cs = t.chars();
        match (cs.next(), cs.next()) {
            (Some(c), None) => TransposeFlag::from_char(c),
            _ => None,
        }
        .ok_or_else(|| TraceErrorKind::Flag(t.into()))
    };
    let int = |t: &str, field| t.parse::<usize>().map_err(|_| TraceErrorKind::Integer { field, text: t.into() });
    let scalar = |t: &str, field| parse_hexfloat(t).map_err(|_| TraceErrorKind::Scalar { field, text: t.into() });
    let rec = GemmCallRecord {
        transa: flag(f[0])?,
        transb: flag(f[1])?,
        m: int(f[2], "m")?,
        n: int(f[3], "n")?,
        k: int(f[4], "k")?,
        alpha: scalar(f[5], "alpha")?,
        lda: int(f[6], "lda")?,
        ldb: int(f[7], "ldb")?,
        beta: scalar(f[8], "beta")?,
        ldc: int(f[9], "ldc")?,
        ordinal: 0,
    };
    rec.validate().map_err(TraceErrorKind::Argument)?;
    Ok(rec)
}

/// Host and accelerator cost assumptions for replay timing.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel {
    /// Sustained host GEMM rate in GFlops.
    pub host_gflops: f64,
    pub accel: ArrayConfig,
    pub board: BoardSpec,
}

impl CostModel {
    pub const DEFAULT_HOST_GFLOPS: f64 = 0.65;

    pub fn host_seconds(&self, rec: &GemmCallRecord) -> f64 {
        rec.flops() as f64 / (self.host_gflops * 1e9)
    }

    /// The slower of compute (cycle model) and DRAM traffic at board bandwidth.
    pub fn accel_seconds(&self, rec: &GemmCallRecord) -> f64 {
        let compute = cycle_count(&self.accel, rec.m, rec.n, rec.k) as f64 / (self.accel.f_mhz * 1e6);
        let memory = dram_traffic(&self.accel, rec.m, rec.n, rec.k) as f64 / (self.board.bandwidth_gbs * 1e9);
        if rec.m == 0 || rec.n == 0 || rec.k == 0 {
            return 0.0;
        }
        compute.max(memory)
    }
}

/// How replay treats each call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplayMode {
    /// Decide and cost only.
    DryRun,
    /// Also run `rgemm` on seeded random operands with the chosen backend.
    Execute { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CallOutcome {
    pub ordinal: usize,
    pub offloaded: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayReport {
    pub n_min: u128,
    pub calls: Vec<CallOutcome>,
    pub offloaded: usize,
    pub host: usize,
    /// Calls with `m == n`.
    pub square: usize,
    /// Calls with `n = m = k = lda = ldb = ldc`.
    pub square_packed: usize,
    /// Modeled time if every call ran on the host.
    pub host_only_seconds: f64,
    /// Modeled time under the policy.
    pub mixed_seconds: f64,
    /// Per-call digests of `C` after execution (empty for dry runs).
    pub result_digests: Vec<u64>,
}

impl ReplayReport {
    pub fn total(&self) -> usize {
        self.calls.len()
    }

    pub fn offload_fraction(&self) -> f64 {
        if self.calls.is_empty() {
            0.0
        } else {
            self.offloaded as f64 / self.calls.len() as f64
        }
    }
}

/// A replay failure at call `index` (0-based position in the trace).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplayError {
    pub index: usize,
    pub error: ArgumentError,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "call {}: {}", self.index, self.error)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ReplayError {}

/// Replays `trace` in order. Offloaded calls use the systolic backend of
/// `cost.accel`, host calls the reference kernel with the same rounding.
pub fn replay(
    trace: &[GemmCallRecord],
    policy: &DispatchPolicy,
    cost: &CostModel,
    mode: ReplayMode,
) -> Result<ReplayReport, ReplayError> {
    let mut report = ReplayReport {
        n_min: policy.n_min,
        calls: Vec::with_capacity(trace.len()),
        offloaded: 0,
        host: 0,
        square: 0,
        square_packed: 0,
        host_only_seconds: 0.0,
        mixed_seconds: 0.0,
        result_digests: Vec::new(),
    };
    let accel = GemmBackend::Systolic(cost.accel);
    let host = GemmBackend::Reference(cost.accel.madd_mode);
    for (index, rec) in trace.iter().enumerate() {
        rec.validate().map_err(|error| ReplayError { index, error })?;
        let off = should_offload(rec, policy);
        let host_t = cost.host_seconds(rec);
        let t = if off { cost.accel_seconds(rec) } else { host_t };
        if off {
            report.offloaded += 1;
        } else {
            report.host += 1;
        }
        report.square += (rec.m == rec.n) as usize;
        report.square_packed += rec.is_square_packed() as usize;
        report.host_only_seconds += host_t;
        report.mixed_seconds += t;
        report.calls.push(CallOutcome { ordinal: rec.ordinal, offloaded: off, seconds: t });
        if let ReplayMode::Execute { seed } = mode {
            let backend = if off { &accel } else { &host };
            let c =
                execute(rec, seed.wrapping_add(index as u64), backend).map_err(|error| ReplayError { index, error })?;
            report.result_digests.push(c.digest());
        }
    }
    Ok(report)
}

/// Runs one recorded call on random operands laid out with the recorded
/// leading dimensions; returns the resulting `C` (logical `m x n` part).
pub fn execute(rec: &GemmCallRecord, seed: u64, backend: &GemmBackend) -> Result<Matrix, ArgumentError> {
    let (ra, ca) = match rec.transa {
        TransposeFlag::NoTranspose => (rec.m, rec.k),
        TransposeFlag::Transpose => (rec.k, rec.m),
    };
    let (rb, cb) = match rec.transb {
        TransposeFlag::NoTranspose => (rec.k, rec.n),
        TransposeFlag::Transpose => (rec.n, rec.k),
    };
    let mut rng = SplitMix64::new(seed);
    let a = Matrix::random(ra, ca, rec.lda, rng.next_u64()).map_err(|_| ArgumentError { position: 8 })?;
    let b = Matrix::random(rb, cb, rec.ldb, rng.next_u64()).map_err(|_| ArgumentError { position: 10 })?;
    let mut c = Matrix::random(rec.m, rec.n, rec.ldc, rng.next_u64()).map_err(|_| ArgumentError { position: 13 })?;
    let ldc = c.ld();
    rgemm(
        rec.transa,
        rec.transb,
        rec.m,
        rec.n,
        rec.k,
        rec.alpha,
        a.as_slice(),
        rec.lda,
        b.as_slice(),
        rec.ldb,
        rec.beta,
        c.as_mut_slice(),
        ldc,
        backend,
    )?;
    Ok(c.packed())
}

/// Deterministic stand-in for the call stream of an interior-point SDP
/// solver: `total` calls of which exactly `square_packed` have
/// `n = m = k = lda = ldb = ldc`. The rest are strided square updates,
/// tall-skinny products with small `k`, and small dense blocks.
pub fn synthetic_sdp_trace(total: usize, square_packed: usize, seed: u64) -> Vec<GemmCallRecord> {
    assert!(square_packed <= total);
    let mut rng = SplitMix64::new(seed);
    let rest = total - square_packed;
    let strided = rest / 5;
    let tall = (rest - strided) / 2;
    let mut classes: Vec<u8> = Vec::with_capacity(total);
    classes.extend(core::iter::repeat_n(0, square_packed));
    classes.extend(core::iter::repeat_n(1, strided));
    classes.extend(core::iter::repeat_n(2, tall));
    classes.extend(core::iter::repeat_n(3, rest - strided - tall));
    for i in (1..classes.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        classes.swap(i, j);
    }
    let mut range = |lo: usize, hi: usize| lo + rng.below((hi - lo + 1) as u64) as usize;
    let mut out = Vec::with_capacity(total);
    for (ordinal, class) in classes.into_iter().enumerate() {
        let mut r = match class {
            0 => {
                let n = range(16, 320);
                GemmCallRecord::packed(n, n, n)
            }
            1 => {
                let n = range(16, 320);
                let k = range(1, 400);
                let mut r = GemmCallRecord::packed(n, n, k);
                r.lda = n + range(1, 64);
                r.ldc = r.lda;
                r
            }
            2 => {
                let m = range(100, 2000);
                let k = range(1, 48);
                let mut r = GemmCallRecord::packed(m, m + range(1, 200), k);
                if range(0, 1) == 1 {
                    r.transb = TransposeFlag::Transpose;
                    r.ldb = r.n;
                }
                r
            }
            _ => {
                let m = range(1, 80);
                let mut n = range(1, 80);
                if n == m {
                    n += 1;
                }
                GemmCallRecord::packed(m, n, range(1, 600))
            }
        };
        if range(0, 1) == 1 {
            r.alpha = QuadFloat::NEG_ONE;
            r.beta = QuadFloat::ONE;
        }
        r.ordinal = ordinal;
        out.push(r);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_examples() {
        let p = DispatchPolicy::default();
        assert!(should_offload(&GemmCallRecord::packed(100, 100, 1), &p));
        assert!(should_offload(&GemmCallRecord::packed(50, 40, 600), &p));
        assert!(!should_offload(&GemmCallRecord::packed(50, 40, 10), &p));
        assert!(!should_offload(&GemmCallRecord::packed(50, 40, 500), &p));
        assert!(!should_offload(&GemmCallRecord::packed(1, 2, 1_000_000_000), &DispatchPolicy::NEVER_BY_SIZE));
        assert!(DispatchPolicy::new(0).is_none());
    }

    #[test]
    fn trace_round_trip() {
        let mut recs = vec![
            GemmCallRecord::packed(3, 4, 5),
            GemmCallRecord::packed(7, 7, 7),
            GemmCallRecord { transa: TransposeFlag::Transpose, lda: 9, ..GemmCallRecord::packed(2, 6, 9) },
        ];
        recs[1].alpha = QuadFloat::from_f64(-0.1);
        recs[2].beta = QuadFloat::NEG_ZERO;
        for (i, r) in recs.iter_mut().enumerate() {
            r.ordinal = i;
        }
        let back = parse_trace(&format_trace(&recs)).unwrap();
        assert_eq!(back.len(), 3);
        assert!(back.iter().zip(&recs).all(|(a, b)| a.same_as(b)));
        assert!(parse_trace("").unwrap().is_empty());
        assert!(parse_trace("# only a comment\nRGTRACE1\n").unwrap().is_empty());
    }

    #[test]
    fn trace_errors_carry_line() {
        let bad = "RGTRACE1\nN\tN\t2\t2\t2\t0x1p+0\t2\t2\t0x0p+0\t2\nN\tX\t2\t2\t2\t0x1p+0\t2\t2\t0x0p+0\t2\n";
        let e = parse_trace(bad).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.kind, TraceErrorKind::Flag("X".into()));
        let e = parse_trace("N\tN\n").unwrap_err();
        assert_eq!((e.line, e.kind), (1, TraceErrorKind::MissingHeader));
        let e = parse_trace("RGTRACE1\nN\tN\t4\t2\t2\t0x1p+0\t2\t2\t0x0p+0\t4\n").unwrap_err();
        assert_eq!(e.kind, TraceErrorKind::Argument(ArgumentError { position: 8 }));
        let e = parse_trace("RGTRACE1\nN\tN\t2\t2\n").unwrap_err();
        assert_eq!(e.kind, TraceErrorKind::FieldCount(4));
    }

    #[test]
    fn synthetic_trace_shape() {
        let t = synthetic_sdp_trace(800, 50, 2024);
        assert_eq!(t.len(), 800);
        assert_eq!(t.iter().filter(|r| r.is_square_packed()).count(), 50);
        assert!(t.iter().all(|r| r.validate().is_ok()));
        let again = synthetic_sdp_trace(800, 50, 2024);
        assert!(t.iter().zip(&again).all(|(a, b)| a.same_as(b)));
    }

    #[test]
    fn replay_counts() {
        let cost = CostModel {
            host_gflops: 0.65,
            accel: ArrayConfig::new(2, 2, 4, 100.0).unwrap(),
            board: BoardSpec::new("b", 10.0).unwrap(),
        };
        let sq: Vec<_> = (1..6).map(|n| GemmCallRecord::packed(n, n, 3)).collect();
        let r = replay(&sq, &DispatchPolicy::default(), &cost, ReplayMode::DryRun).unwrap();
        assert_eq!(r.offloaded, 5);
        let rect: Vec<_> = (1..6).map(|n| GemmCallRecord::packed(n, n + 1, 3)).collect();
        let r = replay(&rect, &DispatchPolicy::NEVER_BY_SIZE, &cost, ReplayMode::DryRun).unwrap();
        assert_eq!(r.offloaded, 0);
        assert_eq!(r.mixed_seconds, r.host_only_seconds);
        let ex = replay(&rect, &DispatchPolicy::new(1).unwrap(), &cost, ReplayMode::Execute { seed: 1 }).unwrap();
        assert_eq!(ex.result_digests.len(), 5);
        let mut bad = rect.clone();
        bad[3].ldc = 1;
        let e = replay(&bad, &DispatchPolicy::default(), &cost, ReplayMode::DryRun).unwrap_err();
        assert_eq!(e, ReplayError { index: 3, error: ArgumentError { position: 13 } });
    }
}
