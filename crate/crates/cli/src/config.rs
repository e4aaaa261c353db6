use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use quadgemm::{ArrayConfig, BoardSpec, MaddMode};
use serde::Deserialize;

use crate::error::usage;

const BUNDLED: &str = include_str!("../data/presets.json");

#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct Preset {
    pub p_r: usize,
    pub p_c: usize,
    pub m_tile: usize,
    pub f_mhz: f64,
    pub board: String,
}

/// Array presets and boards, keyed by name.
#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct Config {
    /// Board name to memory bandwidth in GB/s.
    pub boards: BTreeMap<String, f64>,
    pub presets: BTreeMap<String, Preset>,
}

impl Config {
    pub fn bundled() -> Config {
        Config::parse(BUNDLED).expect("bundled presets are valid")
    }

    pub fn parse(text: &str) -> anyhow::Result<Config> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        for (name, p) in &cfg.presets {
            if !cfg.boards.contains_key(&p.board) {
                return Err(usage(format!("preset {name}: unknown board {}", p.board)));
            }
        }
        Ok(cfg)
    }

    /// The file at `path`, or the bundled presets.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Config> {
        match path {
            None => Ok(Config::bundled()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                Config::parse(&text).with_context(|| format!("loading {}", p.display()))
            }
        }
    }

    pub fn board(&self, name: &str) -> anyhow::Result<BoardSpec> {
        let bw = *self.boards.get(name).ok_or_else(|| usage(format!("unknown board {name}")))?;
        BoardSpec::new(name, bw).map_err(|e| usage(format!("board {name}: {e}")))
    }

    /// Array config and board for a preset, with the rounding mode applied.
    pub fn resolve(&self, name: &str, mode: MaddMode) -> anyhow::Result<(ArrayConfig, BoardSpec)> {
        let p = self.presets.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.presets.keys().map(String::as_str).collect();
            usage(format!("unknown preset {name} (known: {})", known.join(", ")))
        })?;
        let cfg = ArrayConfig::new(p.p_r, p.p_c, p.m_tile, p.f_mhz)
            .map_err(|e| usage(format!("preset {name}: {e}")))?
            .with_mode(mode);
        Ok((cfg, self.board(&p.board)?))
    }
}
