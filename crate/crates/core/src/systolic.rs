//! Functional and analytic model of a `P_R x P_C` systolic GEMM array.
//!
//! The array computes `C' = A B` only. `A` is cut into `p_r`-row panels; a
//! panel is buffered `m_tile` columns deep (one k-chunk) in the memory tile
//! and streamed against every `p_c`-column panel of `B`. Each PE keeps one
//! running sum per output element, so every element is accumulated in
//! ascending `p` order no matter how the work is tiled.
//!
//! Cost model, per pass (one row panel x one k-chunk x one column panel):
//! `p_r + p_c` cycles of pipeline fill/drain plus one cycle per k-step.
//!
//! Traffic model: `A` is re-read once per group of `p_c * m_tile` columns
//! of `B`, `B` once per group of `p_r * m_tile` rows of `A`, and `C'` is
//! stored once.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::matrix::Matrix;
use crate::perfmodel;
use crate::quadfp::{qmadd, MaddMode, QuadFloat};

/// Geometry and clock of one array design.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayConfig {
    pub p_r: usize,
    pub p_c: usize,
    pub m_tile: usize,
    pub f_mhz: f64,
    pub n_byte: usize,
    pub madd_mode: MaddMode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConfigError {
    /// `p_r`, `p_c` or `m_tile` is zero.
    ZeroDimension(&'static str),
    /// Clock not finite and positive.
    Clock(f64),
    /// Only 16-byte words are supported.
    WordSize(usize),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::ZeroDimension(name) => write!(f, "{name} must be at least 1"),
            ConfigError::Clock(v) => write!(f, "clock frequency must be positive, got {v} MHz"),
            ConfigError::WordSize(v) => write!(f, "word size must be 16 bytes, got {v}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

impl ArrayConfig {
    /// Binary128 words, two-rounding multiply-add.
    pub fn new(p_r: usize, p_c: usize, m_tile: usize, f_mhz: f64) -> Result<Self, ConfigError> {
        let cfg = ArrayConfig { p_r, p_c, m_tile, f_mhz, n_byte: 16, madd_mode: MaddMode::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mode(mut self, mode: MaddMode) -> Self {
        self.madd_mode = mode;
        self
    }

    pub fn with_m_tile(mut self, m_tile: usize) -> Result<Self, ConfigError> {
        self.m_tile = m_tile;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.p_r == 0 {
            return Err(ConfigError::ZeroDimension("p_r"));
        }
        if self.p_c == 0 {
            return Err(ConfigError::ZeroDimension("p_c"));
        }
        if self.m_tile == 0 {
            return Err(ConfigError::ZeroDimension("m_tile"));
        }
        if !(self.f_mhz.is_finite() && self.f_mhz > 0.0) {
            return Err(ConfigError::Clock(self.f_mhz));
        }
        if self.n_byte != 16 {
            return Err(ConfigError::WordSize(self.n_byte));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inner dimensions disagree: A is {}x{}, B is {}x{}", self.a.0, self.a.1, self.b.0, self.b.1)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DimensionMismatch {}

/// One pass of the array: a buffered A-panel streamed against one B-panel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pass {
    pub row_panel: usize,
    pub k_chunk: usize,
    pub col_panel: usize,
    pub rows: Range<usize>,
    pub ks: Range<usize>,
    pub cols: Range<usize>,
}

/// Pass order: row panel, then k-chunk, then column panel (innermost).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TileSchedule {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub p_r: usize,
    pub p_c: usize,
    pub m_tile: usize,
}

pub fn tile_schedule(cfg: &ArrayConfig, m: usize, n: usize, k: usize) -> TileSchedule {
    TileSchedule { m, n, k, p_r: cfg.p_r, p_c: cfg.p_c, m_tile: cfg.m_tile }
}

impl TileSchedule {
    pub fn row_panels(&self) -> usize {
        self.m.div_ceil(self.p_r)
    }

    pub fn col_panels(&self) -> usize {
        self.n.div_ceil(self.p_c)
    }

    pub fn k_chunks(&self) -> usize {
        self.k.div_ceil(self.m_tile)
    }

    pub fn len(&self) -> usize {
        self.row_panels() * self.k_chunks() * self.col_panels()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn passes(&self) -> impl Iterator<Item = Pass> + '_ {
        let s = *self;
        (0..s.row_panels()).flat_map(move |r| {
            (0..s.k_chunks()).flat_map(move |kc| {
                (0..s.col_panels()).map(move |c| Pass {
                    row_panel: r,
                    k_chunk: kc,
                    col_panel: c,
                    rows: r * s.p_r..((r + 1) * s.p_r).min(s.m),
                    ks: kc * s.m_tile..((kc + 1) * s.m_tile).min(s.k),
                    cols: c * s.p_c..((c + 1) * s.p_c).min(s.n),
                })
            })
        })
    }
}

/// Modeled cycles for an `m x k` by `k x n` product.
pub fn cycle_count(cfg: &ArrayConfig, m: usize, n: usize, k: usize) -> u128 {
    let s = tile_schedule(cfg, m, n, k);
    let (r, c, kc) = (s.row_panels() as u128, s.col_panels() as u128, s.k_chunks() as u128);
    r * c * kc * (cfg.p_r + cfg.p_c) as u128 + r * c * k as u128
}

/// Modeled DRAM traffic in bytes.
pub fn dram_traffic(cfg: &ArrayConfig, m: usize, n: usize, k: usize) -> u128 {
    let (m, n, k) = (m as u128, n as u128, k as u128);
    let w = cfg.n_byte as u128;
    let loads_a = n.div_ceil((cfg.p_c * cfg.m_tile) as u128);
    let loads_b = m.div_ceil((cfg.p_r * cfg.m_tile) as u128);
    w * m * k * loads_a + w * k * n * loads_b + w * m * n
}

#[derive(Clone, Debug)]
pub struct SimReport {
    pub c_prime: Matrix,
    pub cycles: u128,
    pub dram_bytes: u128,
    pub t_exec_model: f64,
    pub gflops_model: f64,
}

/// Modeled time and throughput without running the arithmetic.
pub fn model_timing(cfg: &ArrayConfig, m: usize, n: usize, k: usize) -> (u128, u128, f64, f64) {
    let cycles = cycle_count(cfg, m, n, k);
    let bytes = dram_traffic(cfg, m, n, k);
    let t = cycles as f64 / (cfg.f_mhz * 1e6);
    let g = if t > 0.0 { perfmodel::f_perf(m, n, k, t).unwrap_or(0.0) } else { 0.0 };
    (cycles, bytes, t, g)
}

/// Runs the schedule pass by pass and returns `C' = A B` with the cost model.
pub fn simulate_gemm(cfg: &ArrayConfig, a: &Matrix, b: &Matrix) -> Result<SimReport, DimensionMismatch> {
    if a.cols() != b.rows() {
        return Err(DimensionMismatch { a: a.shape(), b: b.shape() });
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mode = cfg.madd_mode;
    let mut acc: Vec<QuadFloat> = alloc::vec![QuadFloat::ZERO; m * n];
    let mut buffer: Vec<QuadFloat> = Vec::with_capacity(cfg.p_r * cfg.m_tile.min(k.max(1)));
    let sched = tile_schedule(cfg, m, n, k);
    let mut loaded = None;
    for pass in sched.passes() {
        // Memory tile: the A-panel stays resident across all column panels.
        if loaded != Some((pass.row_panel, pass.k_chunk)) {
            buffer.clear();
            for p in pass.ks.clone() {
                buffer.extend_from_slice(&a.col(p)[pass.rows.clone()]);
            }
            loaded = Some((pass.row_panel, pass.k_chunk));
        }
        let h = pass.rows.len();
        for (t, p) in pass.ks.clone().enumerate() {
            let a_col = &buffer[t * h..(t + 1) * h];
            for j in pass.cols.clone() {
                let bpj = b.get(p, j);
                let out = &mut acc[j * m + pass.rows.start..j * m + pass.rows.end];
                for (c, &aip) in out.iter_mut().zip(a_col) {
                    *c = qmadd(aip, bpj, *c, mode);
                }
            }
        }
    }
    let c_prime = Matrix::from_col_major(m, n, m, acc).expect("packed storage");
    let (cycles, dram_bytes, t_exec_model, gflops_model) = model_timing(cfg, m, n, k);
    Ok(SimReport { c_prime, cycles, dram_bytes, t_exec_model, gflops_model })
}

/// Canonical triple loop: `C'(i,j) = sum_p A(i,p) B(p,j)`, ascending `p`,
/// starting from `+0`.
pub fn reference_gemm(a: &Matrix, b: &Matrix, mode: MaddMode) -> Result<Matrix, DimensionMismatch> {
    if a.cols() != b.rows() {
        return Err(DimensionMismatch { a: a.shape(), b: b.shape() });
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    // Row i of A as a contiguous slice.
    let at = a.transposed();
    let mut c = Matrix::zeros(m, n);
    for j in 0..n {
        let bj = b.col(j);
        for i in 0..m {
            let ai = at.col(i);
            let mut s = QuadFloat::ZERO;
            for p in 0..k {
                s = qmadd(ai[p], bj[p], s, mode);
            }
            c.set(i, j, s);
        }
    }
    Ok(c)
}
