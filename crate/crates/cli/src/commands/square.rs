use quadgemm::rgemm::e_l1;
use quadgemm::systolic::{reference_gemm, simulate_gemm};
use quadgemm::{MaddMode, Matrix};

use super::{desk_warning, timed, Ctx, Report};
use crate::error::usage;
use crate::table::{fmt_f64, fmt_sci, Table};

pub const SCHEMA: &str = "bench-square/1";
pub const DEFAULT_N: &[usize] = &[64, 128, 256];

#[derive(Clone, Debug)]
pub struct SquareArgs {
    pub n: Vec<usize>,
    pub preset: String,
    /// Overrides the preset's memory tile.
    pub m_tile: Option<usize>,
}

/// Square GEMM on the simulator: model timing, mean wall time, agreement
/// with the reference kernel, and `E_L1` between the two rounding modes.
pub fn run(ctx: &Ctx, args: &SquareArgs) -> anyhow::Result<Report> {
    let (mut cfg, _) = ctx.config.resolve(&args.preset, ctx.mode)?;
    if let Some(t) = args.m_tile {
        cfg = cfg.with_m_tile(t).map_err(|e| usage(e.to_string()))?;
    }
    if args.n.contains(&0) {
        return Err(usage("matrix sizes must be at least 1"));
    }
    let repeats = ctx.repeats.unwrap_or(3);
    let mut table = Table::new(
        SCHEMA,
        &[
            "n",
            "p_r",
            "p_c",
            "m_tile",
            "f_mhz",
            "madd",
            "cycles",
            "dram_bytes",
            "t_model",
            "gflops_model",
            "matches_reference",
            "e_l1",
            "wall_t_exec*",
            "gflops_wall*",
        ],
    );
    let mut report_warnings = Vec::new();
    for &n in &args.n {
        desk_warning(&mut report_warnings, "n", n);
        let a = Matrix::random(n, n, n, ctx.seed)?;
        let b = Matrix::random(n, n, n, ctx.seed.wrapping_add(1))?;
        let (sim, wall) = timed(repeats, || simulate_gemm(&cfg, &a, &b).expect("square operands"));
        let reference = reference_gemm(&a, &b, cfg.madd_mode)?;
        let other_mode = match cfg.madd_mode {
            MaddMode::TwoRoundings => MaddMode::Fused,
            MaddMode::Fused => MaddMode::TwoRoundings,
        };
        let other = reference_gemm(&a, &b, other_mode)?;
        let err = e_l1(&reference, &other)?;
        let flops = 2.0 * (n as f64).powi(3);
        table.push(vec![
            n.to_string(),
            cfg.p_r.to_string(),
            cfg.p_c.to_string(),
            cfg.m_tile.to_string(),
            fmt_f64(cfg.f_mhz, 2),
            mode_name(cfg.madd_mode).into(),
            sim.cycles.to_string(),
            sim.dram_bytes.to_string(),
            fmt_sci(sim.t_exec_model),
            fmt_f64(sim.gflops_model, 6),
            sim.c_prime.bits_eq(&reference).to_string(),
            fmt_sci(err.to_f64()),
            fmt_sci(wall),
            fmt_f64(flops / wall / 1e9, 6),
        ]);
    }
    let mut r = Report::new(table);
    r.warnings = report_warnings;
    Ok(r)
}

pub fn mode_name(m: MaddMode) -> &'static str {
    match m {
        MaddMode::TwoRoundings => "two-roundings",
        MaddMode::Fused => "fused",
    }
}
