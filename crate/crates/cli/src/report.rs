use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use finsler_core::{MetricParams, PolydiscPoint, TangentVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Parameters identifying one cell of a campaign grid. Target fields are
/// absent for single-metric commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub t: f64,
    pub k: u32,
    pub tt: Option<f64>,
    pub kk: Option<u32>,
    pub m: usize,
    pub n: Option<usize>,
}

impl GridCell {
    pub fn single(p: &MetricParams, m: usize) -> Self {
        Self { t: p.t(), k: p.k(), tt: None, kk: None, m, n: None }
    }

    pub fn pair(src: &MetricParams, tgt: &MetricParams, m: usize, n: usize) -> Self {
        Self { t: src.t(), k: src.k(), tt: Some(tgt.t()), kk: Some(tgt.k()), m, n: Some(n) }
    }
}

/// Enough to replay the worst trial: `TrialRng::new(cell.seed).stream(trial)`
/// regenerates it, and `map_spec`, `z`, `v` allow a direct re-evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub trial: Option<u64>,
    pub map_spec: Option<serde_json::Value>,
    pub z: PolydiscPoint,
    pub v: Option<TangentVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub command: String,
    pub grid_cell: GridCell,
    pub trials: u64,
    /// Largest observed quantity that the checked bound keeps at or below
    /// `sharp_constant`.
    pub max_ratio: f64,
    pub sharp_constant: f64,
    pub worst_case: Option<WorstCase>,
    pub residuals: BTreeMap<String, f64>,
    pub seed: u64,
    pub elapsed_ms: u64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub elapsed_ms: u64,
    pub violated: bool,
    pub cells: Vec<CellReport>,
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout when no path is given.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| e.error)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
