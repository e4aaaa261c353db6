use quadgemm::systolic::{cycle_count, dram_traffic};

use super::{Ctx, Report};
use crate::error::usage;
use crate::table::{fmt_f64, fmt_sci, Table};

pub const SCHEMA: &str = "bench-tile/1";
/// `(m, n, k)` at full size; `m = k` throughout.
pub const DEFAULT_SHAPES: &[(usize, usize, usize)] =
    &[(4096, 512, 4096), (4096, 2048, 4096), (2048, 2048, 2048), (4096, 4096, 4096)];
pub const DEFAULT_M_TILES: &[usize] = &[24, 32, 48, 64, 96, 128, 192, 256];

#[derive(Clone, Debug)]
pub struct TileArgs {
    /// Explicit shapes are not scaled.
    pub shapes: Option<Vec<(usize, usize, usize)>>,
    pub m_tiles: Vec<usize>,
    pub preset: String,
}

/// Memory-tile sweep from the analytic models: traffic, the bandwidth the
/// run would draw at model speed, and throughput with and without the
/// board's bandwidth limit.
pub fn run(ctx: &Ctx, args: &TileArgs) -> anyhow::Result<Report> {
    let (base, board) = ctx.config.resolve(&args.preset, ctx.mode)?;
    let shapes: Vec<(usize, usize, usize)> = match &args.shapes {
        Some(s) => s.clone(),
        None => DEFAULT_SHAPES.iter().map(|&(m, n, k)| (ctx.scaled(m), ctx.scaled(n), ctx.scaled(k))).collect(),
    };
    if shapes.iter().any(|&(m, n, k)| m == 0 || n == 0 || k == 0) {
        return Err(usage("shape dimensions must be at least 1"));
    }
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
            "bw_draw_gbs",
            "board_gbs",
            "gflops_bw_bound",
        ],
    );
    for &(m, n, k) in &shapes {
        for &t in &args.m_tiles {
            let cfg = base.with_m_tile(t).map_err(|e| usage(e.to_string()))?;
            let cycles = cycle_count(&cfg, m, n, k);
            let bytes = dram_traffic(&cfg, m, n, k);
            let t_model = cycles as f64 / (cfg.f_mhz * 1e6);
            let flops = 2.0 * m as f64 * n as f64 * k as f64;
            let t_bound = t_model.max(bytes as f64 / (board.bandwidth_gbs * 1e9));
            table.push(vec![
                m.to_string(),
                n.to_string(),
                k.to_string(),
                cfg.p_r.to_string(),
                cfg.p_c.to_string(),
                t.to_string(),
                cycles.to_string(),
                bytes.to_string(),
                fmt_sci(t_model),
                fmt_f64(flops / t_model / 1e9, 6),
                fmt_f64(bytes as f64 / t_model / 1e9, 6),
                fmt_f64(board.bandwidth_gbs, 2),
                fmt_f64(flops / t_bound / 1e9, 6),
            ]);
        }
    }
    Ok(Report::new(table))
}
