//! CSV and JSON persistence. CSV files use a header row, LF line endings
//! and shortest round-trip decimal floats; sets are hex bit masks.

use std::path::Path;

use anyhow::{Context, Result};
use bicrit::online::RunTrace;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub phase: String,
    pub action_mask_hex: String,
    pub sampled_f: f64,
    pub sampled_g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub horizon: u64,
    pub seed: u64,
    pub m: u64,
    pub regret_f: f64,
    pub ccv_g: f64,
    #[serde(rename = "bound_C3")]
    pub bound_c3: f64,
}

pub fn trace_rows(trace: &RunTrace) -> impl Iterator<Item = TraceRow> + '_ {
    trace.rounds.iter().map(|r| TraceRow {
        t: r.t,
        phase: r.phase.as_str().to_string(),
        action_mask_hex: r.action.to_hex(),
        sampled_f: r.sampled_f,
        sampled_g: r.sampled_g,
    })
}

pub fn write_csv<T: Serialize, I: IntoIterator<Item = T>>(path: &Path, rows: I) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
