use serde::{Deserialize, Serialize};

use super::{dtw_distance, SyntheticSequence};
use crate::error::Result;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DownsampleMode {
    /// Uniform random selection without replacement.
    #[default]
    #[serde(rename = "ds", alias = "DS")]
    Ds,
    /// The candidates closest to the reference under DTW.
    #[serde(rename = "simds", alias = "SimDS")]
    SimDs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Downsampled {
    pub sequences: Vec<SyntheticSequence>,
    /// Set when fewer than `k` candidates were available.
    pub short: bool,
}

/// Keeps `k` of `sequences`. Selection preserves generation order; SimDS
/// compares each candidate's price-scale values with `reference` and breaks
/// distance ties by generation order.
pub fn downsample(
    sequences: Vec<SyntheticSequence>,
    reference: &[f64],
    k: usize,
    mode: DownsampleMode,
    seed: u64,
) -> Result<Downsampled> {
    if k >= sequences.len() {
        let short = k > sequences.len();
        if short {
            log::warn!("downsample: asked for {k} of {} sequences", sequences.len());
        }
        return Ok(Downsampled { sequences, short });
    }
    let mut keep: Vec<usize> = match mode {
        DownsampleMode::Ds => {
            rand::seq::index::sample(&mut rng_from_seed(seed), sequences.len(), k).into_vec()
        }
        DownsampleMode::SimDs => {
            let mut scored = sequences
                .iter()
                .enumerate()
                .map(|(i, s)| Ok((dtw_distance(&s.values, reference)?, i)))
                .collect::<Result<Vec<(f64, usize)>>>()?;
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            scored.into_iter().take(k).map(|(_, i)| i).collect()
        }
    };
    keep.sort_unstable();
    let mut slots: Vec<Option<SyntheticSequence>> = sequences.into_iter().map(Some).collect();
    Ok(Downsampled {
        sequences: keep.into_iter().map(|i| slots[i].take().unwrap()).collect(),
        short: false,
    })
}
