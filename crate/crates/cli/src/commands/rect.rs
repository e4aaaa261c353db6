use quadgemm::perfmodel::f_peak;
use quadgemm::systolic::{cycle_count, dram_traffic};

use super::{Ctx, Report};
use crate::error::usage;
use crate::table::{fmt_f64, fmt_sci, Table};

pub const SCHEMA: &str = "bench-rect/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vary {
    N,
    K,
}

#[derive(Clone, Debug)]
pub struct RectArgs {
    pub vary: Vary,
    /// The two fixed dimensions; `None` takes the scaled default.
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    /// Values of the varied dimension; empty takes powers of two from 32
    /// up to the scaled default limit.
    pub values: Vec<usize>,
    pub preset: String,
    pub m_tile: Option<usize>,
}

impl RectArgs {
    /// `m = k = 4096` with `n` varied up to 4096.
    pub fn vary_n(preset: &str) -> RectArgs {
        RectArgs { vary: Vary::N, m: None, n: None, k: None, values: vec![], preset: preset.into(), m_tile: Some(128) }
    }

    /// `m = n = 16384` with `k` varied up to 16384.
    pub fn vary_k(preset: &str) -> RectArgs {
        RectArgs { vary: Vary::K, m: None, n: None, k: None, values: vec![], preset: preset.into(), m_tile: None }
    }
}

fn powers(limit: usize) -> Vec<usize> {
    let mut v = vec![];
    let mut x = 32;
    while x <= limit {
        v.push(x);
        x *= 2;
    }
    if v.is_empty() {
        v.push(limit);
    }
    v
}

/// Non-square scans: model throughput and utilization `gflops_model / f_peak`,
/// plus the same under the board bandwidth limit.
pub fn run(ctx: &Ctx, args: &RectArgs) -> anyhow::Result<Report> {
    let (mut cfg, board) = ctx.config.resolve(&args.preset, ctx.mode)?;
    if let Some(t) = args.m_tile {
        cfg = cfg.with_m_tile(t).map_err(|e| usage(e.to_string()))?;
    }
    let full = match args.vary {
        Vary::N => 4096,
        Vary::K => 16384,
    };
    let fixed = |x: Option<usize>| x.unwrap_or_else(|| ctx.scaled(full));
    let values = if args.values.is_empty() { powers(ctx.scaled(full)) } else { args.values.clone() };
    let m = fixed(args.m);
    if values.contains(&0) || m == 0 || args.n == Some(0) || args.k == Some(0) {
        return Err(usage("dimensions must be at least 1"));
    }
    let peak = f_peak(&cfg);
    let mut table = Table::new(
        SCHEMA,
        &[
            "m",
            "n",
            "k",
            "p_r",
            "p_c",
            "m_tile",
            "cycles",
            "dram_bytes",
            "t_model",
            "gflops_model",
            "f_peak",
            "utilization",
            "gflops_bw_bound",
            "utilization_bw_bound",
        ],
    );
    for &v in &values {
        let (n, k) = match args.vary {
            Vary::N => (v, fixed(args.k)),
            Vary::K => (fixed(args.n), v),
        };
        let cycles = cycle_count(&cfg, m, n, k);
        let bytes = dram_traffic(&cfg, m, n, k);
        let t_model = cycles as f64 / (cfg.f_mhz * 1e6);
        let t_bound = t_model.max(bytes as f64 / (board.bandwidth_gbs * 1e9));
        let flops = 2.0 * m as f64 * n as f64 * k as f64;
        let (g, gb) = (flops / t_model / 1e9, flops / t_bound / 1e9);
        table.push(vec![
            m.to_string(),
            n.to_string(),
            k.to_string(),
            cfg.p_r.to_string(),
            cfg.p_c.to_string(),
            cfg.m_tile.to_string(),
            cycles.to_string(),
            bytes.to_string(),
            fmt_sci(t_model),
            fmt_f64(g, 6),
            fmt_f64(peak, 6),
            fmt_f64(g / peak, 6),
            fmt_f64(gb, 6),
            fmt_f64(gb / peak, 6),
        ]);
    }
    Ok(Report::new(table))
}
