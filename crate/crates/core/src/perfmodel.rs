//! Closed-form throughput and bandwidth models. All rates use decimal units:
//! GFlops = 10^9 flop/s, GB/s = 10^9 byte/s.

use alloc::string::String;
use core::fmt;

use crate::systolic::ArrayConfig;

/// A board and its DRAM bandwidth.
#[derive(Clone, Debug, PartialEq)]
pub struct BoardSpec {
    pub name: String,
    pub bandwidth_gbs: f64,
}

impl BoardSpec {
    pub fn new(name: impl Into<String>, bandwidth_gbs: f64) -> Result<Self, DomainError> {
        if !(bandwidth_gbs.is_finite() && bandwidth_gbs > 0.0) {
            return Err(DomainError::Bandwidth(bandwidth_gbs));
        }
        Ok(BoardSpec { name: name.into(), bandwidth_gbs })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainError {
    /// Execution time not finite and positive.
    Time(f64),
    Bandwidth(f64),
    /// LU size zero.
    Size,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainError::Time(t) => write!(f, "execution time must be positive, got {t}"),
            DomainError::Bandwidth(b) => write!(f, "bandwidth must be positive, got {b}"),
            DomainError::Size => f.write_str("matrix size must be at least 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DomainError {}

/// Peak GFlops: two flops per PE per cycle.
pub fn f_peak(cfg: &ArrayConfig) -> f64 {
    2.0 * (cfg.p_r * cfg.p_c) as f64 * cfg.f_mhz * 1e6 / 1e9
}

/// Achieved GFlops of an `m x n x k` GEMM that took `t_exec` seconds.
pub fn f_perf(m: usize, n: usize, k: usize, t_exec: f64) -> Result<f64, DomainError> {
    check_time(t_exec)?;
    Ok(2.0 * m as f64 * n as f64 * k as f64 / (t_exec * 1e9))
}

/// Bandwidth in GB/s needed to feed one new word per PE row and column each cycle.
pub fn b_req(cfg: &ArrayConfig) -> f64 {
    (cfg.p_r + cfg.p_c) as f64 * cfg.f_mhz * 1e6 * cfg.n_byte as f64 / 1e9
}

/// Peak throughput scaled down by the bandwidth shortfall, if any.
pub fn bandwidth_ceiling(cfg: &ArrayConfig, board: &BoardSpec) -> f64 {
    let ratio = board.bandwidth_gbs / b_req(cfg);
    f_peak(cfg) * ratio.min(1.0)
}

/// Exact flop count of LU on an `n x n` matrix:
/// `2n^3/3 - n^2/2 + 5n/6 = (4n^3 - 3n^2 + 5n) / 6`.
pub fn lu_flops(n: u64) -> u128 {
    let n = n as u128;
    (4 * n * n * n - 3 * n * n + 5 * n) / 6
}

/// LU GFlops using the leading term `2n^3/3`.
pub fn f_perf_lu(n: usize, t_exec: f64) -> Result<f64, DomainError> {
    if n == 0 {
        return Err(DomainError::Size);
    }
    check_time(t_exec)?;
    let n = n as f64;
    Ok(2.0 * n * n * n / (3.0 * t_exec * 1e9))
}

fn check_time(t: f64) -> Result<(), DomainError> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(DomainError::Time(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p_r: usize, p_c: usize, f: f64) -> ArrayConfig {
        ArrayConfig::new(p_r, p_c, 32, f).unwrap()
    }

    #[test]
    fn peak() {
        assert!((f_peak(&cfg(8, 8, 201.28)) - 25.76384).abs() < 1e-9);
        assert!((f_peak(&cfg(8, 16, 388.95)) - 99.5712).abs() < 1e-9);
    }

    #[test]
    fn perf() {
        assert_eq!(f_perf(1000, 1000, 1000, 2.0).unwrap(), 1.0);
        assert_eq!(f_perf(10, 10, 10, 0.0), Err(DomainError::Time(0.0)));
        assert!(f_perf(10, 10, 10, -1.0).is_err());
        let a = f_perf(64, 64, 64, 1e-3).unwrap();
        let b = f_perf(64, 64, 64, 2e-3).unwrap();
        assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn bandwidth() {
        assert_eq!(b_req(&cfg(8, 8, 200.0)), 51.2);
        let arria = BoardSpec::new("arria10", 34.2).unwrap();
        assert_eq!(bandwidth_ceiling(&cfg(2, 2, 236.29), &arria), f_peak(&cfg(2, 2, 236.29)));
        assert!(bandwidth_ceiling(&cfg(8, 8, 201.28), &arria) < f_peak(&cfg(8, 8, 201.28)));
        let tiny = BoardSpec::new("tiny", 1e-12).unwrap();
        assert!(bandwidth_ceiling(&cfg(8, 8, 200.0), &tiny) < 1e-9);
        assert!(BoardSpec::new("none", 0.0).is_err());
    }

    #[test]
    fn lu_counts() {
        assert_eq!(lu_flops(1), 1);
        assert_eq!(lu_flops(2), 5);
        assert_eq!(lu_flops(3), 16);
        assert!((f_perf_lu(1000, 1.0).unwrap() - 0.6666666666666666).abs() < 1e-12);
        assert_eq!(f_perf_lu(0, 1.0), Err(DomainError::Size));
    }
}
