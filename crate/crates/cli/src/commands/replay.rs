use std::path::PathBuf;

use quadgemm::dispatch::{replay, CostModel, ReplayMode};
use quadgemm::DispatchPolicy;
use sha2::{Digest, Sha256};

use super::{Ctx, Report};
use crate::error::usage;
use crate::table::{fmt_f64, fmt_sci, Table};
use crate::trace;

pub const SCHEMA: &str = "dispatch-replay/1";
pub const DEFAULT_N_MIN: &[u128] = &[1_000, 10_000, 100_000, 1_000_000, 10_000_000, u128::MAX];

#[derive(Clone, Debug)]
pub struct ReplayArgs {
    /// `None` replays the bundled synthetic trace.
    pub trace: Option<PathBuf>,
    /// `u128::MAX` stands for an infinite threshold.
    pub n_min: Vec<u128>,
    pub preset: String,
    pub host_gflops: f64,
    /// Also run every call on seeded random operands.
    pub execute: bool,
}

pub fn parse_n_min(s: &str) -> Result<u128, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") {
        return Ok(u128::MAX);
    }
    let v = match t.parse::<u128>() {
        Ok(v) => v,
        Err(_) => {
            let f: f64 = t.parse().map_err(|_| format!("bad n_min {t:?}"))?;
            if !(f.is_finite() && f >= 1.0 && f.fract() == 0.0 && f < 1e38) {
                return Err(format!("bad n_min {t:?}"));
            }
            f as u128
        }
    };
    if v == 0 {
        return Err("n_min must be at least 1".into());
    }
    Ok(v)
}

pub fn format_n_min(v: u128) -> String {
    if v == u128::MAX {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// Offload counts and modeled time for each threshold.
pub fn run(ctx: &Ctx, args: &ReplayArgs) -> anyhow::Result<Report> {
    let (accel, board) = ctx.config.resolve(&args.preset, ctx.mode)?;
    if !(args.host_gflops > 0.0 && args.host_gflops.is_finite()) {
        return Err(usage("host rate must be positive"));
    }
    let calls = match &args.trace {
        Some(p) => trace::trace_load(p)?,
        None => trace::bundled(),
    };
    let cost = CostModel { host_gflops: args.host_gflops, accel, board };
    let mut warnings = Vec::new();
    let work: u128 = calls.iter().map(|c| c.m as u128 * c.n as u128 * c.k as u128).sum();
    if args.execute && work > 1_000_000_000 {
        warnings.push(format!("--execute runs {work} soft-float multiply-adds per threshold"));
    }
    let mode = if args.execute { ReplayMode::Execute { seed: ctx.seed } } else { ReplayMode::DryRun };
    let mut table = Table::new(
        SCHEMA,
        &[
            "n_min",
            "calls",
            "offloaded",
            "host",
            "offload_fraction",
            "square",
            "square_packed",
            "host_only_s",
            "mixed_s",
            "speedup",
            "results",
        ],
    );
    for &n_min in &args.n_min {
        let policy = DispatchPolicy::new(n_min).ok_or_else(|| usage("n_min must be at least 1"))?;
        let r = replay(&calls, &policy, &cost, mode).map_err(|e| usage(e.to_string()))?;
        let results = if args.execute {
            let mut h = Sha256::new();
            for d in &r.result_digests {
                h.update(d.to_le_bytes());
            }
            h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
        } else {
            "-".to_string()
        };
        let speedup = if r.mixed_seconds > 0.0 { r.host_only_seconds / r.mixed_seconds } else { 1.0 };
        table.push(vec![
            format_n_min(n_min),
            r.total().to_string(),
            r.offloaded.to_string(),
            r.host.to_string(),
            fmt_f64(r.offload_fraction(), 6),
            r.square.to_string(),
            r.square_packed.to_string(),
            fmt_sci(r.host_only_seconds),
            fmt_sci(r.mixed_seconds),
            fmt_f64(speedup, 4),
            results,
        ]);
    }
    Ok(Report { table, warnings, failure: None })
}
