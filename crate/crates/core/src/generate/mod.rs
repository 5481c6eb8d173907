//! Synthetic sequence generation: graph walks, the value-permutation
//! baseline, DTW and the DS / SimDS downsampling procedures.

mod downsample;
mod dtw;
mod vrp;
mod walk;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

pub use downsample::{downsample, DownsampleMode, Downsampled};
pub use dtw::dtw_distance;
pub use vrp::vrp_generate;
pub use walk::{
    generate_sequence, next_node, NodeStrategy, RestartFallback, ValuePolicy, ValueSelector,
    WalkConfig, DEFAULT_RESTART_PROB, DEFAULT_SWITCH_PROB,
};

use crate::error::{Error, Result};
use crate::ingest::MinMax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub ticker: String,
    pub window_start: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkConfig>,
}

/// A generated sequence in the original price scale, plus the scaled values
/// it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub values: Vec<f64>,
    pub scaled_values: Vec<f64>,
    pub scale: MinMax,
    pub provenance: Provenance,
}

impl SyntheticSequence {
    pub fn from_scaled(scaled_values: Vec<f64>, scale: MinMax, provenance: Provenance) -> Self {
        Self {
            values: scaled_values.iter().map(|&s| scale.inverse(s)).collect(),
            scaled_values,
            scale,
            provenance,
        }
    }
}

/// One line of a generated-sequence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedRecord {
    pub ticker: String,
    pub window_start: usize,
    pub method: String,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl GeneratedRecord {
    /// `scaled` selects the diagnostic scaled-space values instead of prices.
    pub fn from_sequence(seq: &SyntheticSequence, scaled: bool) -> Self {
        Self {
            ticker: seq.provenance.ticker.clone(),
            window_start: seq.provenance.window_start,
            method: seq.provenance.method.clone(),
            seed: seq.provenance.seed,
            values: if scaled {
                seq.scaled_values.clone()
            } else {
                seq.values.clone()
            },
        }
    }
}

pub fn write_generated<W: Write>(records: &[GeneratedRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<generated writer>", e))?;
    }
    Ok(())
}

pub fn read_generated<R: BufRead>(reader: R) -> Result<Vec<GeneratedRecord>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<generated reader>", e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
