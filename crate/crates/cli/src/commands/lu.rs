use std::path::PathBuf;

use quadgemm::lu::{getrf_blocked, residual, LuError};
use quadgemm::perfmodel::f_perf_lu;
use quadgemm::rgemm::GemmBackend;
use quadgemm::Matrix;

use super::{desk_warning, timed, Ctx, Report};
use crate::error::usage;
use crate::matio::read_matrix;
use crate::table::{fmt_f64, fmt_sci, Table};

pub const SCHEMA: &str = "bench-lu/1";
pub const COLUMNS: [&str; 6] = ["n", "b", "t*", "gflops*", "residual", "backend"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Reference,
    Systolic,
}

#[derive(Clone, Debug)]
pub struct LuArgs {
    pub n: Vec<usize>,
    pub b: Vec<usize>,
    pub backend: BackendKind,
    pub preset: String,
    /// Factor this matrix instead of random ones; `n` is ignored.
    pub input: Option<PathBuf>,
}

/// Blocked LU on random or supplied matrices. A singular matrix fills its
/// row with an error marker and the run continues.
pub fn run(ctx: &Ctx, args: &LuArgs) -> anyhow::Result<Report> {
    let (cfg, _) = ctx.config.resolve(&args.preset, ctx.mode)?;
    let backend = match args.backend {
        BackendKind::Reference => GemmBackend::Reference(ctx.mode),
        BackendKind::Systolic => GemmBackend::Systolic(cfg),
    };
    if args.b.contains(&0) {
        return Err(usage("block sizes must be at least 1"));
    }
    let inputs: Vec<Matrix> = match &args.input {
        Some(p) => {
            let m = read_matrix(p)?;
            if !m.is_square() {
                return Err(usage(format!("{}: matrix is {}x{}, not square", p.display(), m.rows(), m.cols())));
            }
            vec![m]
        }
        None => {
            if args.n.contains(&0) {
                return Err(usage("matrix sizes must be at least 1"));
            }
            args.n.iter().map(|&n| Matrix::random(n, n, n, ctx.seed)).collect::<Result<_, _>>()?
        }
    };
    let repeats = ctx.repeats.unwrap_or(1);
    let mut table = Table::new(SCHEMA, &COLUMNS);
    let mut warnings = Vec::new();
    let mut failure = None;
    for a in &inputs {
        let n = a.rows();
        desk_warning(&mut warnings, "n", n);
        for &b in &args.b {
            let (res, t) = timed(repeats, || getrf_blocked(a.clone(), b, &backend));
            let row = match res {
                Ok(f) => vec![
                    n.to_string(),
                    b.to_string(),
                    fmt_sci(t),
                    f_perf_lu(n, t).map(|g| fmt_f64(g, 6)).unwrap_or_default(),
                    fmt_sci(residual(a, &f).to_f64()),
                    backend.name().to_string(),
                ],
                Err(LuError::Singular { column }) => {
                    failure = Some(format!("matrix of order {n} is singular at column {column}"));
                    vec![
                        n.to_string(),
                        b.to_string(),
                        String::new(),
                        String::new(),
                        format!("error:singular:{column}"),
                        backend.name().to_string(),
                    ]
                }
                Err(e) => return Err(usage(e.to_string())),
            };
            table.push(row);
        }
    }
    Ok(Report { table, warnings, failure })
}
