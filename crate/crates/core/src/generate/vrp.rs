use rand::seq::SliceRandom;

use super::{Provenance, SyntheticSequence};
use crate::ingest::{MinMax, Window};
use crate::seed::rng_from_seed;

/// Values-random-permutation baseline: a uniform shuffle of the window's raw
/// values.
pub fn vrp_generate(window: &Window, seed: u64) -> SyntheticSequence {
    let mut values = window.raw_values.clone();
    values.shuffle(&mut rng_from_seed(seed));
    let scale = window.bounds().unwrap_or_else(|| MinMax::fit(&window.raw_values));
    SyntheticSequence {
        scaled_values: values.iter().map(|&v| scale.scale(v)).collect(),
        values,
        scale,
        provenance: Provenance {
            method: "vrp".into(),
            ticker: window.ticker.clone(),
            window_start: window.start_index,
            seed,
            walk: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashMap;

    #[test]
    fn constant_window_is_unchanged() {
        let w = Window::from_raw("A", 0, vec![7.0, 7.0, 7.0]);
        assert_eq!(vrp_generate(&w, 1).values, vec![7.0, 7.0, 7.0]);
    }

    #[test]
    fn preserves_multiset() {
        let mut rng = rng_from_seed(99);
        for i in 0..1000 {
            let len = rng.random_range(2..61);
            let raw: Vec<f64> = (0..len).map(|_| rng.random_range(1.0..100.0)).collect();
            let out = vrp_generate(&Window::from_raw("A", 0, raw.clone()), i);
            let (mut a, mut b) = (raw, out.values);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn permutations_are_uniform() {
        let w = Window::from_raw("A", 0, vec![1.0, 2.0, 3.0]);
        let mut counts: HashMap<Vec<u64>, usize> = HashMap::new();
        let draws = 6000;
        for seed in 0..draws {
            let key = vrp_generate(&w, seed).values.iter().map(|v| *v as u64).collect();
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (perm, c) in counts {
            let f = c as f64 / draws as f64;
            assert!((f - 1.0 / 6.0).abs() <= 0.02, "{perm:?}: {f}");
        }
    }
}
