use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quadgemm::MaddMode;
use quadgemm::{QuadFloat, TransposeFlag};
use quadgemm_cli::commands::gemm::{parse_flag, parse_scalar, GemmArgs};
use quadgemm_cli::commands::lu::{BackendKind, LuArgs};
use quadgemm_cli::commands::rect::{RectArgs, Vary};
use quadgemm_cli::commands::replay::{parse_n_min, ReplayArgs, DEFAULT_N_MIN};
use quadgemm_cli::commands::square::SquareArgs;
use quadgemm_cli::commands::tile::{TileArgs, DEFAULT_M_TILES};
use quadgemm_cli::commands::{self, Ctx, Report};
use quadgemm_cli::error::{exit_code, usage, NumericalError};
use quadgemm_cli::{selftest, trace, Config};

#[derive(Parser)]
#[command(
    name = "quadgemm",
    version,
    about = "binary128 GEMM on a simulated systolic array: benchmarks, LU, dispatch replay"
)]
struct Cli {
    /// JSON file with presets and boards (default: bundled).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for random operands (default 1; gen-trace: 2024).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Divide the default full-size shapes by this factor.
    #[arg(long, global = true, default_value_t = 1)]
    scale: usize,
    /// Write the result table as CSV here (gen-trace: the trace file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Timed repetitions per cell; wall time is the mean.
    #[arg(long, global = true)]
    repeats: Option<usize>,
    /// Multiply-add rounding of the kernels.
    #[arg(long, global = true, value_enum, default_value_t = Madd::TwoRoundings)]
    madd: Madd,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Madd {
    TwoRoundings,
    Fused,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Reference,
    Systolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum VaryArg {
    N,
    K,
}

#[derive(Subcommand)]
enum Cmd {
    /// Square products on the simulator with rounding-mode comparison.
    BenchSquare {
        #[arg(long, value_delimiter = ',', default_values_t = [64usize, 128, 256])]
        n: Vec<usize>,
        #[arg(long, default_value = "arria10-8x8")]
        preset: String,
        #[arg(long)]
        m_tile: Option<usize>,
    },
    /// Memory-tile sweep (analytic).
    BenchTile {
        /// Shapes as MxNxK, comma separated; default is the scaled full-size grid.
        #[arg(long, value_delimiter = ',', value_parser = parse_shape)]
        shape: Vec<(usize, usize, usize)>,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_M_TILES.to_vec())]
        m_tile: Vec<usize>,
        #[arg(long, default_value = "arria10-8x8")]
        preset: String,
    },
    /// Non-square scans over n (m = k fixed) or k (m = n fixed), analytic.
    BenchRect {
        #[arg(long, value_enum, default_value_t = VaryArg::N)]
        vary: VaryArg,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Values of the varied dimension (default: powers of two from 32).
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
        #[arg(long, default_value = "arria10-8x8")]
        preset: String,
        /// Memory tile (default: 128 when varying n, the preset's when varying k).
        #[arg(long)]
        m_tile: Option<usize>,
    },
    /// Blocked LU factorization.
    BenchLu {
        #[arg(long, value_delimiter = ',', default_values_t = [128usize, 256])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [32usize, 108, 128])]
        b: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Backend::Systolic)]
        backend: Backend,
        #[arg(long, default_value = "arria10-8x8")]
        preset: String,
        /// Factor this matrix file instead of random matrices.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Replay a call trace under offload thresholds.
    DispatchReplay {
        /// .rgtrace file (default: the bundled synthetic trace).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Thresholds; accepts integers, 1e6 style and inf.
        #[arg(long, value_delimiter = ',', value_parser = parse_n_min,
              default_values_t = DEFAULT_N_MIN.to_vec())]
        n_min: Vec<u128>,
        #[arg(long, default_value = "agilex-8x16")]
        preset: String,
        /// Host GEMM rate in GFlops.
        #[arg(long, default_value_t = 0.65)]
        host_gflops: f64,
        /// Run each call on random operands as well.
        #[arg(long)]
        execute: bool,
    },
    /// C = alpha op(A) op(B) + beta C on matrix files (.qmat binary, else text).
    Gemm {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        c: Option<PathBuf>,
        /// Where to write the resulting C.
        #[arg(long)]
        result: PathBuf,
        #[arg(long, value_parser = parse_flag, default_value = "N")]
        transa: TransposeFlag,
        #[arg(long, value_parser = parse_flag, default_value = "N")]
        transb: TransposeFlag,
        /// Hex-float or decimal.
        #[arg(long, value_parser = parse_scalar, default_value = "1", allow_hyphen_values = true)]
        alpha: QuadFloat,
        #[arg(long, value_parser = parse_scalar, default_value = "0", allow_hyphen_values = true)]
        beta: QuadFloat,
        #[arg(long, value_enum, default_value_t = Backend::Systolic)]
        backend: Backend,
        #[arg(long, default_value = "arria10-8x8")]
        preset: String,
    },
    /// Reduced oracle suites: soft-float, tiling invariance, LU.
    Selftest {
        #[arg(long, default_value_t = selftest::Plan::default().random_cases)]
        cases: usize,
        #[arg(long, default_value_t = selftest::Plan::default().shapes)]
        shapes: usize,
        #[arg(long, default_value_t = selftest::Plan::default().max_dim)]
        max_dim: usize,
        #[arg(long, default_value_t = selftest::Plan::default().lu_n)]
        lu_n: usize,
    },
    /// Write the synthetic SDP-like trace.
    GenTrace {
        #[arg(long, default_value_t = trace::SYNTHETIC_TOTAL)]
        total: usize,
        #[arg(long, default_value_t = trace::SYNTHETIC_SQUARE_PACKED)]
        square_packed: usize,
    },
}

fn parse_shape(s: &str) -> Result<(usize, usize, usize), String> {
    let d: Vec<usize> = s
        .split('x')
        .map(|t| t.trim().parse().map_err(|_| format!("bad shape {s:?}, expected MxNxK")))
        .collect::<Result<_, _>>()?;
    match d[..] {
        [m, n, k] => Ok((m, n, k)),
        _ => Err(format!("bad shape {s:?}, expected MxNxK")),
    }
}

fn backend(b: Backend) -> BackendKind {
    match b {
        Backend::Reference => BackendKind::Reference,
        Backend::Systolic => BackendKind::Systolic,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.scale == 0 {
        return Err(usage("--scale must be at least 1"));
    }
    let mut ctx = Ctx::new(Config::load(cli.config.as_deref())?);
    ctx.seed = cli.seed.unwrap_or(1);
    ctx.scale = cli.scale;
    ctx.repeats = cli.repeats;
    ctx.mode = match cli.madd {
        Madd::TwoRoundings => MaddMode::TwoRoundings,
        Madd::Fused => MaddMode::Fused,
    };
    let report = match cli.cmd {
        Cmd::BenchSquare { n, preset, m_tile } => commands::square::run(&ctx, &SquareArgs { n, preset, m_tile })?,
        Cmd::BenchTile { shape, m_tile, preset } => {
            let shapes = (!shape.is_empty()).then_some(shape);
            commands::tile::run(&ctx, &TileArgs { shapes, m_tiles: m_tile, preset })?
        }
        Cmd::BenchRect { vary, m, n, k, values, preset, m_tile } => {
            let mut args = match vary {
                VaryArg::N => RectArgs::vary_n(&preset),
                VaryArg::K => RectArgs::vary_k(&preset),
            };
            if args.vary == Vary::N && n.is_some() || args.vary == Vary::K && k.is_some() {
                return Err(usage("the varied dimension is set with --values"));
            }
            args.m = m;
            args.n = n;
            args.k = k;
            args.values = values;
            args.m_tile = m_tile.or(args.m_tile);
            commands::rect::run(&ctx, &args)?
        }
        Cmd::BenchLu { n, b, backend: be, preset, input } => {
            commands::lu::run(&ctx, &LuArgs { n, b, backend: backend(be), preset, input })?
        }
        Cmd::DispatchReplay { trace, n_min, preset, host_gflops, execute } => {
            commands::replay::run(&ctx, &ReplayArgs { trace, n_min, preset, host_gflops, execute })?
        }
        Cmd::Gemm { a, b, c, result, transa, transb, alpha, beta, backend: be, preset } => commands::gemm::run(
            &ctx,
            &GemmArgs { a, b, c, result, transa, transb, alpha, beta, backend: backend(be), preset },
        )?,
        Cmd::Selftest { cases, shapes, max_dim, lu_n } => {
            if max_dim == 0 || lu_n == 0 {
                return Err(usage("sizes must be at least 1"));
            }
            let checks = selftest::run_all(selftest::Plan { random_cases: cases, shapes, max_dim, lu_n }, ctx.seed);
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
            let mut r = Report::new(selftest::table(&checks));
            if !failed.is_empty() {
                r.failure = Some(format!("selftest failed: {}", failed.join(", ")));
            }
            r
        }
        Cmd::GenTrace { total, square_packed } => {
            if square_packed > total {
                return Err(usage("--square-packed exceeds --total"));
            }
            let text = trace::synthetic_trace_text(total, square_packed, cli.seed.unwrap_or(trace::SYNTHETIC_SEED));
            match &cli.out {
                Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            return Ok(());
        }
    };
    emit(&report, cli.out.as_deref())
}

fn emit(report: &Report, out: Option<&std::path::Path>) -> anyhow::Result<()> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.table.render());
    println!("digest {} sha256:{}", report.table.schema, report.table.digest());
    if let Some(p) = out {
        report.table.write_csv(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    }
    match &report.failure {
        Some(msg) => Err(NumericalError(msg.clone()).into()),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
