use std::path::PathBuf;

use quadgemm::quadfp::parse_hexfloat;
use quadgemm::rgemm::{rgemm_matrix, GemmBackend};
use quadgemm::{Matrix, QuadFloat, TransposeFlag};

use super::lu::BackendKind;
use super::{timed, Ctx, Report};
use crate::error::usage;
use crate::matio::{read_matrix, write_matrix};
use crate::table::{fmt_sci, Table};

pub const SCHEMA: &str = "gemm/1";

#[derive(Clone, Debug)]
pub struct GemmArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Input `C`; zeros when absent.
    pub c: Option<PathBuf>,
    pub result: PathBuf,
    pub transa: TransposeFlag,
    pub transb: TransposeFlag,
    pub alpha: QuadFloat,
    pub beta: QuadFloat,
    pub backend: BackendKind,
    pub preset: String,
}

/// Hex-float, or a decimal widened from binary64.
pub fn parse_scalar(s: &str) -> Result<QuadFloat, String> {
    if let Ok(q) = parse_hexfloat(s) {
        return Ok(q);
    }
    s.parse::<f64>().map(QuadFloat::from_f64).map_err(|_| format!("bad scalar {s:?}"))
}

pub fn parse_flag(s: &str) -> Result<TransposeFlag, String> {
    let mut cs = s.chars();
    match (cs.next(), cs.next()) {
        (Some(c), None) => TransposeFlag::from_char(c),
        _ => None,
    }
    .ok_or_else(|| format!("transpose flag must be N or T, got {s:?}"))
}

/// `C = alpha op(A) op(B) + beta C` on matrix files.
pub fn run(ctx: &Ctx, args: &GemmArgs) -> anyhow::Result<Report> {
    let (cfg, _) = ctx.config.resolve(&args.preset, ctx.mode)?;
    let backend = match args.backend {
        BackendKind::Reference => GemmBackend::Reference(ctx.mode),
        BackendKind::Systolic => GemmBackend::Systolic(cfg),
    };
    let a = read_matrix(&args.a)?;
    let b = read_matrix(&args.b)?;
    let va = a.view(args.transa);
    let vb = b.view(args.transb);
    let (m, k, n) = (va.rows(), va.cols(), vb.cols());
    if vb.rows() != k {
        return Err(usage(format!("op(A) is {m}x{k} but op(B) is {}x{n}", vb.rows())));
    }
    let c0 = match &args.c {
        Some(p) => {
            let c = read_matrix(p)?;
            if c.shape() != (m, n) {
                return Err(usage(format!("C is {}x{}, expected {m}x{n}", c.rows(), c.cols())));
            }
            c
        }
        None => Matrix::zeros(m, n),
    };
    let (c, t) = timed(ctx.repeats.unwrap_or(1), || {
        let mut c = c0.clone();
        rgemm_matrix(args.transa, args.transb, args.alpha, &a, &b, args.beta, &mut c, &backend).map(|_| c)
    });
    let c = c.map_err(|e| usage(e.to_string()))?;
    write_matrix(&args.result, &c)?;
    let mut table = Table::new(SCHEMA, &["m", "n", "k", "backend", "digest", "wall_t*"]);
    table.push(vec![
        m.to_string(),
        n.to_string(),
        k.to_string(),
        backend.name().to_string(),
        format!("{:016x}", c.digest()),
        fmt_sci(t),
    ]);
    Ok(Report::new(table))
}
