//! Slow reference implementations used by the self-test and test suites.
//! They share no code with the production routines they check.

/// DTW by plain recursion over every warping path (no memoization).
/// Exponential; keep inputs to a handful of points.
pub fn dtw_bruteforce(a: &[f64], b: &[f64]) -> f64 {
    fn go(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
        let cost = (a[i] - b[j]).abs();
        match (i, j) {
            (0, 0) => cost,
            (0, _) => cost + go(a, b, 0, j - 1),
            (_, 0) => cost + go(a, b, i - 1, 0),
            _ => {
                cost + go(a, b, i - 1, j)
                    .min(go(a, b, i, j - 1))
                    .min(go(a, b, i - 1, j - 1))
            }
        }
    }
    assert!(!a.is_empty() && !b.is_empty());
    go(a, b, a.len() - 1, b.len() - 1)
}

/// AUC as an exact fraction: (2·wins + ties, 2·positives·negatives).
pub fn auc_pairwise_counts(scores: &[f64], labels: &[bool]) -> (u64, u64) {
    let mut twice_wins = 0u64;
    let (mut pos, mut neg) = (0u64, 0u64);
    for (i, &li) in labels.iter().enumerate() {
        if li {
            pos += 1;
        } else {
            neg += 1;
        }
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            if scores[i] > scores[j] {
                twice_wins += 2;
            } else if scores[i] == scores[j] {
                twice_wins += 1;
            }
        }
    }
    (twice_wins, 2 * pos * neg)
}

/// Pairwise AUC with ties counted one half. `None` if a class is absent.
pub fn auc_pairwise(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let (num, den) = auc_pairwise_counts(scores, labels);
    (den > 0).then(|| num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtw_oracle_examples() {
        assert_eq!(dtw_bruteforce(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]), 0.0);
        assert_eq!(dtw_bruteforce(&[0.0], &[5.0]), 5.0);
        assert_eq!(dtw_bruteforce(&[0.0; 3], &[0.5; 3]), 1.5);
        assert_eq!(dtw_bruteforce(&[0.0; 3], &[1.0; 3]), 3.0);
    }

    #[test]
    fn auc_oracle_examples() {
        assert_eq!(auc_pairwise(&[0.2, 0.8, 0.4, 0.6], &[false, true, true, false]), Some(0.75));
        assert_eq!(auc_pairwise(&[0.5, 0.5], &[false, true]), Some(0.5));
        assert_eq!(auc_pairwise(&[0.5], &[true]), None);
    }
}
