use crate::error::{Error, Result};

/// Classic dynamic time warping with absolute-difference cost, full
/// alignment and no band constraint. Two-row DP, O(|a|·|b|).
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("dtw of an empty sequence".into()));
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![0.0; m];
    for (i, &x) in a.iter().enumerate() {
        for j in 0..m {
            let cost = (x - b[j]).abs();
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => curr[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(curr[j - 1]).min(prev[j - 1]),
            };
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        let x = [0.3, 1.5, -2.0, 4.0];
        assert_eq!(dtw_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(dtw_distance(&[0.0], &[5.0]).unwrap(), 5.0);
        assert_eq!(dtw_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(dtw_distance(&[0.0, 0.0], &[1.0]).unwrap(), 2.0);
        assert!(matches!(dtw_distance(&[], &[1.0]), Err(Error::InvalidInput(_))));
        assert!(dtw_distance(&[1.0], &[]).is_err());
    }

    #[test]
    fn symmetric() {
        let a = [1.0, 3.0, 2.0, 8.0, 5.0];
        let b = [2.0, 2.5, 9.0];
        assert_eq!(dtw_distance(&a, &b).unwrap(), dtw_distance(&b, &a).unwrap());
    }
}
