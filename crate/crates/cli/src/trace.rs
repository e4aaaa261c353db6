//! `.rgtrace` files on disk and the bundled synthetic trace.

use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;

use quadgemm::dispatch::{format_record, format_trace, parse_trace, synthetic_sdp_trace, TRACE_HEADER};
use quadgemm::GemmCallRecord;

use crate::error::usage;

/// Parameters of the bundled trace.
pub const SYNTHETIC_TOTAL: usize = 800;
pub const SYNTHETIC_SQUARE_PACKED: usize = 50;
pub const SYNTHETIC_SEED: u64 = 2024;

pub const BUNDLED_TRACE: &str = include_str!("../data/sdp_synthetic.rgtrace");

/// Text of the bundled trace, regenerated from the generator.
pub fn synthetic_trace_text(total: usize, square_packed: usize, seed: u64) -> String {
    format!(
        "# synthetic SDP-like call stream, not recorded from a solver\n\
         # generated by `quadgemm gen-trace --total {total} --square-packed {square_packed} --seed {seed}`\n{}",
        format_trace(&synthetic_sdp_trace(total, square_packed, seed))
    )
}

pub fn bundled() -> Vec<GemmCallRecord> {
    parse_trace(BUNDLED_TRACE).expect("bundled trace parses")
}

/// Appends one record line to `sink`.
pub fn trace_record<W: Write>(sink: &mut W, rec: &GemmCallRecord) -> io::Result<()> {
    writeln!(sink, "{}", format_record(rec))
}

pub fn trace_load(path: &Path) -> anyhow::Result<Vec<GemmCallRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_trace(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Shared trace sink; appends from several threads land whole and in lock order.
pub struct Recorder<W: Write> {
    sink: Mutex<W>,
}

impl<W: Write> Recorder<W> {
    pub fn new(mut sink: W) -> io::Result<Self> {
        writeln!(sink, "{TRACE_HEADER}")?;
        Ok(Recorder { sink: Mutex::new(sink) })
    }

    pub fn record(&self, rec: &GemmCallRecord) -> io::Result<()> {
        let mut s = self.sink.lock().unwrap_or_else(|e| e.into_inner());
        trace_record(&mut *s, rec)
    }

    pub fn into_inner(self) -> W {
        self.sink.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}
