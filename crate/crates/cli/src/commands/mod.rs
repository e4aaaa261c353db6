//! One module per CLI verb. Each returns a [`Report`]; `main` handles
//! printing, CSV output and exit codes.

use std::time::Instant;

use quadgemm::MaddMode;

use crate::config::Config;
use crate::table::Table;

pub mod gemm;
pub mod lu;
pub mod rect;
pub mod replay;
pub mod square;
pub mod tile;

/// Functional runs above this size print a warning.
pub const DESK_LIMIT: usize = 1024;

/// Settings shared by every verb.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub config: Config,
    pub seed: u64,
    /// Divisor applied to default full-size shapes.
    pub scale: usize,
    pub repeats: Option<usize>,
    pub mode: MaddMode,
}

impl Ctx {
    pub fn new(config: Config) -> Ctx {
        Ctx { config, seed: 1, scale: 1, repeats: None, mode: MaddMode::TwoRoundings }
    }

    pub fn scaled(&self, x: usize) -> usize {
        (x / self.scale.max(1)).max(1)
    }
}

#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub warnings: Vec<String>,
    /// Set when some row hit a numerical failure; the table is still complete.
    pub failure: Option<String>,
}

impl Report {
    pub fn new(table: Table) -> Report {
        Report { table, warnings: Vec::new(), failure: None }
    }
}

/// Runs `f` `repeats` times; returns the last result and the mean seconds.
pub(crate) fn timed<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let repeats = repeats.max(1);
    let mut total = 0.0;
    let mut out = None;
    for _ in 0..repeats {
        let t0 = Instant::now();
        out = Some(f());
        total += t0.elapsed().as_secs_f64();
    }
    (out.unwrap(), total / repeats as f64)
}

pub(crate) fn desk_warning(warnings: &mut Vec<String>, what: &str, n: usize) {
    if n > DESK_LIMIT {
        warnings.push(format!(
            "{what} {n} exceeds the desk limit {DESK_LIMIT}; soft-float runs at this size take a long time"
        ));
    }
}
