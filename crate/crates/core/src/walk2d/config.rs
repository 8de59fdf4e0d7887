use std::path::PathBuf;

use super::{Walk2DJob, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};
use crate::linops::Lattice2D;
use crate::monitor::TailPolicy;

/// A job plus where its results go.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk2DConfig {
    pub job: Walk2DJob,
    pub out: Option<PathBuf>,
    pub curves: bool,
}

/// `key = value` lines; `#` starts a comment. Keys: `lattice` (square,
/// hexagonal), `coin` (grover, fourier, c0), `n_max`, `tail` (none,
/// powerlaw), `out`, `curves` (true/false), `memory_budget_mb`.
pub fn parse_config(text: &str) -> Result<Walk2DConfig> {
    let mut lattice = None;
    let mut coin = None;
    let mut n_max = 1024usize;
    let mut tail = TailPolicy::PowerLaw;
    let mut out = None;
    let mut curves = false;
    let mut budget = DEFAULT_MEMORY_BUDGET;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let bad = |what: &str| Error::InvalidInput(format!("line {}: bad {what} '{v}'", lineno + 1));
        match k {
            "lattice" => {
                lattice = Some(match v {
                    "square" => Lattice2D::Square,
                    "hexagonal" | "hex" => Lattice2D::Hexagonal,
                    _ => return Err(bad("lattice")),
                })
            }
            "coin" => coin = Some(v.to_string()),
            "n_max" | "nmax" => n_max = v.parse().map_err(|_| bad("n_max"))?,
            "tail" => tail = v.parse()?,
            "out" => out = Some(PathBuf::from(v)),
            "curves" => curves = v.parse().map_err(|_| bad("curves flag"))?,
            "memory_budget_mb" => {
                let mb: u64 = v.parse().map_err(|_| bad("memory budget"))?;
                budget = mb << 20;
            }
            _ => return Err(Error::InvalidInput(format!("line {}: unknown key '{k}'", lineno + 1))),
        }
    }
    let lattice = lattice.ok_or_else(|| Error::InvalidInput("missing key 'lattice'".into()))?;
    let coin = coin.ok_or_else(|| Error::InvalidInput("missing key 'coin'".into()))?;
    let mut job = Walk2DJob::named(lattice, &coin, n_max)?;
    job.tail = tail;
    job.memory_budget = budget;
    Ok(Walk2DConfig { job, out, curves })
}
