use std::process::Command;

use quadgemm::dispatch::{parse_trace, synthetic_sdp_trace};
use quadgemm::lu::{getrf_unblocked, residual};
use quadgemm::{GemmCallRecord, Matrix, QuadFloat, TransposeFlag};
use quadgemm_cli::commands::lu::{BackendKind, LuArgs};
use quadgemm_cli::commands::rect::{RectArgs, Vary};
use quadgemm_cli::commands::replay::{parse_n_min, ReplayArgs};
use quadgemm_cli::commands::square::SquareArgs;
use quadgemm_cli::commands::tile::TileArgs;
use quadgemm_cli::commands::{self, Ctx};
use quadgemm_cli::config::Preset;
use quadgemm_cli::matio::{decode_qmat, decode_text, encode_qmat, encode_text, read_matrix, write_matrix};
use quadgemm_cli::table::{fmt_sci, parse_csv, Table};
use quadgemm_cli::trace::{self, Recorder};
use quadgemm_cli::Config;

const BIN: &str = env!("CARGO_BIN_EXE_quadgemm");

fn ctx() -> Ctx {
    Ctx::new(Config::bundled())
}

fn num(t: &Table, col: &str) -> Vec<f64> {
    t.values(col).iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn digest_ignores_timing_columns() {
    let mut a = Table::new("x/1", &["n", "t*"]);
    a.push(vec!["1".into(), "0.5".into()]);
    let mut b = a.clone();
    b.rows[0][1] = "9.0".into();
    assert_eq!(a.digest(), b.digest());
    b.rows[0][0] = "2".into();
    assert_ne!(a.digest(), b.digest());
    let (schema, header, rows) = parse_csv(&a.to_csv()).unwrap();
    assert_eq!((schema.as_str(), header, rows.len()), ("x/1", vec!["n".to_string(), "t".to_string()], 1));
    assert!(parse_csv("n,t\n1,2\n").is_err());
    assert!(parse_csv("# schema x/1\nn,t\n1\n").is_err());
}

#[test]
fn bundled_config_has_all_presets() {
    let c = Config::bundled();
    for name in
        ["arria10-2x2", "arria10-4x4", "arria10-8x8", "stratix10-8x8", "stratix10-8x16", "agilex-8x8", "agilex-8x16"]
    {
        c.resolve(name, Default::default()).unwrap();
    }
    let (cfg, board) = c.resolve("agilex-8x16", Default::default()).unwrap();
    assert_eq!((cfg.p_r, cfg.p_c, cfg.m_tile, cfg.f_mhz), (8, 16, 512, 388.95));
    assert_eq!(board.bandwidth_gbs, 85.2);
    assert!(
        Config::parse(r#"{"boards":{},"presets":{"x":{"p_r":1,"p_c":1,"m_tile":1,"f_mhz":1,"board":"y"}}}"#).is_err()
    );
    assert!(c.resolve("nope", Default::default()).is_err());
}

#[test]
fn qmat_round_trip_keeps_padding_and_header_layout() {
    let m = Matrix::random(3, 4, 5, 9).unwrap();
    let bytes = encode_qmat(&m).unwrap();
    assert_eq!(bytes.len(), 24 + 16 * 5 * 4);
    assert_eq!(&bytes[..6], b"QMAT1\0");
    assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 3);
    assert_eq!(u32::from_le_bytes(bytes[14..18].try_into().unwrap()), 5);
    let back = decode_qmat(&bytes).unwrap();
    assert_eq!((back.rows(), back.cols(), back.ld()), (3, 4, 5));
    assert!(back.bits_eq(&m));
    assert!(decode_qmat(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(decode_qmat(&bad).is_err());
}

#[test]
fn text_round_trip_is_exact() {
    let mut m = Matrix::random(4, 2, 4, 3).unwrap();
    m.set(0, 0, QuadFloat::NEG_ZERO);
    m.set(1, 1, QuadFloat::from_bits(1));
    let back = decode_text(&encode_text(&m)).unwrap();
    assert!(back.bits_eq(&m));
    assert!(back.get(0, 0).bits_eq(QuadFloat::NEG_ZERO));
    assert!(decode_text("2 2\n0x1p+0\n").is_err());
    assert!(decode_text("2 x\n").is_err());
    assert_eq!(decode_text("0 3\n").unwrap().shape(), (0, 3));

    let dir = tempfile::tempdir().unwrap();
    for name in ["m.qmat", "m.txt"] {
        let p = dir.path().join(name);
        write_matrix(&p, &m).unwrap();
        assert!(read_matrix(&p).unwrap().bits_eq(&m));
    }
}

#[test]
fn trace_round_trip_and_empty_file() {
    let mut recs =
        vec![GemmCallRecord::packed(3, 4, 5), GemmCallRecord::packed(7, 7, 7), GemmCallRecord::packed(1, 9, 2)];
    recs[1].transb = TransposeFlag::Transpose;
    recs[1].alpha = QuadFloat::from_f64(-0.1);
    recs[2].ldc = 4;
    let rec = Recorder::new(Vec::new()).unwrap();
    for r in &recs {
        rec.record(r).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.rgtrace");
    std::fs::write(&p, rec.into_inner()).unwrap();
    let back = trace::trace_load(&p).unwrap();
    assert_eq!(back.len(), 3);
    for (i, (a, b)) in recs.iter().zip(&back).enumerate() {
        let mut a = *a;
        a.ordinal = i;
        assert!(a.same_as(b));
    }
    std::fs::write(&p, "").unwrap();
    assert!(trace::trace_load(&p).unwrap().is_empty());
    std::fs::write(&p, "RGTRACE1\nN\tN\t1\n").unwrap();
    let e = trace::trace_load(&p).unwrap_err().to_string();
    assert!(e.contains("line 2"), "{e}");
}

#[test]
fn recorder_keeps_lines_whole_across_threads() {
    let rec = Recorder::new(Vec::new()).unwrap();
    std::thread::scope(|s| {
        for t in 0..4 {
            let rec = &rec;
            s.spawn(move || {
                for i in 0..50 {
                    rec.record(&GemmCallRecord::packed(t + 1, i + 1, 3)).unwrap();
                }
            });
        }
    });
    let text = String::from_utf8(rec.into_inner()).unwrap();
    assert_eq!(parse_trace(&text).unwrap().len(), 200);
}

#[test]
fn bundled_trace_matches_generator() {
    let text =
        trace::synthetic_trace_text(trace::SYNTHETIC_TOTAL, trace::SYNTHETIC_SQUARE_PACKED, trace::SYNTHETIC_SEED);
    assert_eq!(text, trace::BUNDLED_TRACE);
    let recs = trace::bundled();
    let gen = synthetic_sdp_trace(800, 50, 2024);
    assert_eq!(recs.len(), 800);
    assert!(recs.iter().zip(&gen).all(|(a, b)| a.same_as(b)));
    assert_eq!(recs.iter().filter(|r| r.is_square_packed()).count(), 50);
}

#[test]
fn square_bench_unit_array_reports_e_l1() {
    let mut c = ctx();
    c.config.presets.insert("unit".into(), Preset { p_r: 1, p_c: 1, m_tile: 1, f_mhz: 100.0, board: "arria10".into() });
    c.repeats = Some(1);
    let r = commands::square::run(&c, &SquareArgs { n: vec![64], preset: "unit".into(), m_tile: None }).unwrap();
    assert_eq!(r.table.rows.len(), 1);
    let e = num(&r.table, "e_l1")[0];
    assert!(e > 0.0 && e < 1e-30, "{e}");
    assert_eq!(r.table.values("matches_reference"), vec!["true"]);
}

#[test]
fn square_bench_wall_time_is_mean_and_model_non_decreasing() {
    let mut c = ctx();
    c.repeats = Some(3);
    let r =
        commands::square::run(&c, &SquareArgs { n: vec![64, 128, 256], preset: "arria10-8x8".into(), m_tile: None })
            .unwrap();
    let g = num(&r.table, "gflops_model");
    assert!(g.windows(2).all(|w| w[0] <= w[1]), "{g:?}");
    for (n, (t, gw)) in
        [64.0f64, 128.0, 256.0].iter().zip(num(&r.table, "wall_t_exec").iter().zip(num(&r.table, "gflops_wall")))
    {
        assert!(*t > 0.0);
        // wall GFlops is computed from the stored mean time
        assert!((gw - 2.0 * n.powi(3) / t / 1e9).abs() <= 1e-5 * gw + 1e-6);
    }
    assert!(r.table.values("matches_reference").iter().all(|v| *v == "true"));
    let d1 = r.table.digest();
    let r2 =
        commands::square::run(&c, &SquareArgs { n: vec![64, 128, 256], preset: "arria10-8x8".into(), m_tile: None })
            .unwrap();
    assert_eq!(d1, r2.table.digest());
}

#[test]
fn tile_sweep_traffic_and_golden_digest() {
    let mut c = ctx();
    c.scale = 8;
    let args =
        TileArgs { shapes: None, m_tiles: vec![24, 32, 48, 64, 96, 128, 192, 256], preset: "arria10-8x8".into() };
    let r = commands::tile::run(&c, &args).unwrap();
    assert_eq!(r.table.rows.len(), 4 * 8);
    let bytes = num(&r.table, "dram_bytes");
    for shape in bytes.chunks(8) {
        assert!(shape.windows(2).all(|w| w[1] <= w[0]), "{shape:?}");
    }
    assert_eq!(r.table.digest(), "a8b33245c7958f90ea3d55252bb06491ff85870ea580c7ffc0d9be2c1cc9c02f");

    // once the tile covers the whole A panel, traffic stops falling
    let args =
        TileArgs { shapes: Some(vec![(64, 200, 64)]), m_tiles: vec![64, 65, 200, 1000], preset: "arria10-8x8".into() };
    let r = commands::tile::run(&ctx(), &args).unwrap();
    let b = num(&r.table, "dram_bytes");
    let floor = 16.0 * (64.0 * 64.0 + 64.0 * 200.0 + 64.0 * 200.0);
    assert!(b.iter().all(|&x| x == floor), "{b:?}");
}

#[test]
fn rect_scan_utilization() {
    let c = ctx();
    let (cfg, _) = c.config.resolve("arria10-8x8", Default::default()).unwrap();
    let edge = cfg.p_c * 128;
    let mut args = RectArgs::vary_n("arria10-8x8");
    args.values = vec![edge - 1, edge];
    args.m = Some(512);
    args.k = Some(512);
    let r = commands::rect::run(&c, &args).unwrap();
    let u = num(&r.table, "utilization");
    assert!(u[1] >= u[0], "{u:?}");

    args.values = vec![100];
    assert_eq!(commands::rect::run(&c, &args).unwrap().table.rows.len(), 1);

    // k = 32 on a large square output: the committed cycle model gives
    // k / (k + p_r + p_c) when every dimension divides evenly
    let mut args = RectArgs::vary_k("agilex-8x16");
    args.m = Some(16384);
    args.n = Some(16384);
    args.values = vec![32];
    let r = commands::rect::run(&c, &args).unwrap();
    assert!((num(&r.table, "utilization")[0] - 32.0 / 56.0).abs() < 1e-6);
    assert_eq!(args.vary, Vary::K);
}

#[test]
fn lu_bench_full_block_matches_unblocked() {
    let mut c = ctx();
    c.seed = 5;
    let args = LuArgs {
        n: vec![128],
        b: vec![128],
        backend: BackendKind::Systolic,
        preset: "arria10-8x8".into(),
        input: None,
    };
    let r = commands::lu::run(&c, &args).unwrap();
    assert_eq!(r.table.columns.len(), 6);
    let a = Matrix::random(128, 128, 128, 5).unwrap();
    let want = residual(&a, &getrf_unblocked(a.clone()).unwrap());
    assert_eq!(r.table.values("residual"), vec![fmt_sci(want.to_f64()).as_str()]);
    assert!(r.failure.is_none());
}

#[test]
fn lu_bench_marks_singular_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.qmat");
    let a = Matrix::random(6, 6, 6, 1).unwrap();
    let s = Matrix::from_fn(6, 6, |i, j| if j == 3 { QuadFloat::ZERO } else { a.get(i, j) });
    write_matrix(&p, &s).unwrap();
    let args = LuArgs {
        n: vec![],
        b: vec![2, 6],
        backend: BackendKind::Reference,
        preset: "arria10-8x8".into(),
        input: Some(p),
    };
    let r = commands::lu::run(&ctx(), &args).unwrap();
    assert_eq!(r.table.values("residual"), vec!["error:singular:3", "error:singular:3"]);
    assert!(r.failure.is_some());
}

#[test]
fn replay_thresholds() {
    let args = |n_min: Vec<u128>| ReplayArgs {
        trace: None,
        n_min,
        preset: "agilex-8x16".into(),
        host_gflops: 0.65,
        execute: false,
    };
    let r = commands::replay::run(&ctx(), &args(vec![1, 1_000, 1_000_000, 10_000_000, u128::MAX])).unwrap();
    let f = num(&r.table, "offload_fraction");
    assert!(f.windows(2).all(|w| w[0] >= w[1]), "{f:?}");
    let square = num(&r.table, "square")[4];
    assert_eq!(f[4], square / 800.0);
    assert_eq!(r.table.values("square_packed")[0], "50");

    let r = commands::replay::run(&ctx(), &args(vec![1_000_000])).unwrap();
    assert_eq!(r.table.digest(), "1629801641916e2419f801942b7b933b04e708fbee41c53fba394f95b66c40eb");
    assert_eq!(parse_n_min("1e6"), Ok(1_000_000));
    assert_eq!(parse_n_min("inf"), Ok(u128::MAX));
    assert!(parse_n_min("0").is_err() && parse_n_min("1.5").is_err());
}

#[test]
fn replay_execute_on_small_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("small.rgtrace");
    let recs: Vec<GemmCallRecord> =
        synthetic_sdp_trace(40, 5, 3).into_iter().filter(|r| r.m * r.n * r.k < 200_000).collect();
    std::fs::write(&p, quadgemm::dispatch::format_trace(&recs)).unwrap();
    let mut c = ctx();
    c.seed = 11;
    let a = ReplayArgs {
        trace: Some(p),
        n_min: vec![1000],
        preset: "arria10-4x4".into(),
        host_gflops: 0.65,
        execute: true,
    };
    let r1 = commands::replay::run(&c, &a).unwrap();
    let r2 = commands::replay::run(&c, &a).unwrap();
    assert_ne!(r1.table.values("results")[0], "-");
    assert_eq!(r1.table.digest(), r2.table.digest());
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = Command::new(BIN).args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into(), String::from_utf8_lossy(&o.stderr).into())
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["bench-tile", "--bogus"]).0, 1);
    assert_eq!(run(&["bench-tile", "--preset", "nope"]).0, 1);
    assert_eq!(run(&["bench-tile", "--scale", "0"]).0, 1);
    assert_eq!(run(&["bench-tile", "--scale", "64", "--m-tile", "32"]).0, 0);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.txt");
    std::fs::write(&p, "2 2\n0x1p+0\n0x2p+0\n0x0p+0\n0x0p+0\n").unwrap();
    let (code, out, err) = run(&["bench-lu", "--input", p.to_str().unwrap(), "--b", "1"]);
    assert_eq!(code, 2, "{out}{err}");
    assert!(out.contains("error:singular:1"));
}

#[test]
fn gemm_verb_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let pa = dir.path().join("a.qmat");
    let pb = dir.path().join("b.txt");
    let pc = dir.path().join("c.txt");
    let out = dir.path().join("r.qmat");
    let a = Matrix::random(5, 3, 6, 1).unwrap();
    let b = Matrix::random(4, 5, 4, 2).unwrap();
    let c = Matrix::random(3, 4, 3, 3).unwrap();
    write_matrix(&pa, &a).unwrap();
    write_matrix(&pb, &b).unwrap();
    write_matrix(&pc, &c).unwrap();
    let (code, _, err) = run(&[
        "gemm",
        "--a",
        pa.to_str().unwrap(),
        "--b",
        pb.to_str().unwrap(),
        "--c",
        pc.to_str().unwrap(),
        "--result",
        out.to_str().unwrap(),
        "--transa",
        "T",
        "--transb",
        "t",
        "--alpha",
        "0x1.8p+0",
        "--beta",
        "-2",
    ]);
    assert_eq!(code, 0, "{err}");
    let mut want = c.clone();
    quadgemm::rgemm::rgemm_matrix(
        TransposeFlag::Transpose,
        TransposeFlag::Transpose,
        QuadFloat::from_f64(1.5),
        &a,
        &b,
        QuadFloat::from_f64(-2.0),
        &mut want,
        &Default::default(),
    )
    .unwrap();
    assert!(read_matrix(&out).unwrap().bits_eq(&want));
    let (code, _, _) = run(&["gemm", "--a", pa.to_str().unwrap(), "--b", pa.to_str().unwrap(), "--result", "x.txt"]);
    assert_eq!(code, 1);
}

#[test]
fn csv_file_matches_stdout_digest() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("o.csv");
    let (code, out, _) = run(&["bench-rect", "--scale", "32", "--out", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (schema, header, rows) = parse_csv(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(schema, "bench-rect/1");
    assert_eq!(header.len(), 14);
    let mut t = Table::new("bench-rect/1", &[]);
    t.columns = header
        .iter()
        .map(|h| quadgemm_cli::table::Column { name: Box::leak(h.clone().into_boxed_str()), timing: false })
        .collect();
    t.rows = rows;
    assert!(out.contains(&t.digest()));
}
