use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Real,
    Synthetic,
}

pub const FEATURE_NAMES: [&str; 8] = [
    "linear_trend_slope",
    "quadratic_coeff",
    "average_change",
    "rsi",
    "num_peaks",
    "mean",
    "variance",
    "range",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Features {
    pub linear_trend_slope: f64,
    pub quadratic_coeff: f64,
    pub average_change: f64,
    pub rsi: f64,
    pub num_peaks: f64,
    pub mean: f64,
    pub variance: f64,
    pub range: f64,
}

impl Features {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.linear_trend_slope,
            self.quadratic_coeff,
            self.average_change,
            self.rsi,
            self.num_peaks,
            self.mean,
            self.variance,
            self.range,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub features: Features,
    pub label: bool,
    pub origin: Origin,
    pub group: String,
}

/// RSI over the whole slice: one average gain and one average loss.
fn rsi(values: &[f64]) -> f64 {
    let (gain, loss) = values.windows(2).fold((0.0, 0.0), |(g, l), w| {
        let d = w[1] - w[0];
        if d > 0.0 {
            (g + d, l)
        } else {
            (g, l - d)
        }
    });
    match (gain > 0.0, loss > 0.0) {
        (false, false) => 50.0,
        (true, false) => 100.0,
        (false, true) => 0.0,
        (true, true) => 100.0 - 100.0 / (1.0 + gain / loss),
    }
}

/// Features of a feature window (at least two points).
pub fn compute_features(values: &[f64]) -> Result<Features> {
    let m = values.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!("feature window of {m} values")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite value in feature window".into()));
    }
    let mf = m as f64;
    let mean = values.iter().sum::<f64>() / mf;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / mf;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));

    // centred abscissa makes x and x^2 - mean(x^2) orthogonal to each other
    // and to the constant, so each least-squares coefficient is a projection
    let xc: Vec<f64> = (0..m).map(|i| i as f64 - (mf - 1.0) / 2.0).collect();
    let sxx: f64 = xc.iter().map(|x| x * x).sum();
    let slope = xc.iter().zip(values).map(|(x, y)| x * (y - mean)).sum::<f64>() / sxx;
    let x2_mean = sxx / mf;
    let p2: Vec<f64> = xc.iter().map(|x| x * x - x2_mean).collect();
    let p2_norm: f64 = p2.iter().map(|p| p * p).sum();
    let quadratic_coeff = if m >= 3 && p2_norm > 0.0 {
        p2.iter().zip(values).map(|(p, y)| p * y).sum::<f64>() / p2_norm
    } else {
        0.0
    };

    let num_peaks = values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count() as f64;

    Ok(Features {
        linear_trend_slope: slope,
        quadratic_coeff,
        average_change: (values[m - 1] - values[0]) / (mf - 1.0),
        rsi: rsi(values),
        num_peaks,
        mean,
        variance,
        range: hi - lo,
    })
}

/// Features over the first `n - 1` values; the label is whether the last
/// step goes strictly up.
pub fn extract_features(values: &[f64], origin: Origin, group: &str) -> Result<FeatureRow> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 values to build a feature row, got {n}"
        )));
    }
    Ok(FeatureRow {
        features: compute_features(&values[..n - 1])?,
        label: values[n - 1] > values[n - 2],
        origin,
        group: group.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn increasing_window() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        let row = extract_features(&v, Origin::Real, "A").unwrap();
        assert_eq!(row.features.rsi, 100.0);
        assert_eq!(row.features.num_peaks, 0.0);
        assert!(row.label);
        assert_abs_diff_eq!(row.features.linear_trend_slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(row.features.quadratic_coeff, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(row.features.average_change, 1.0, epsilon = 1e-12);
        assert_eq!(row.features.range, 18.0);
    }

    #[test]
    fn zigzag_rsi_is_fifty() {
        let f = compute_features(&[1.0, 2.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(f.rsi, 50.0);
        assert_eq!(f.num_peaks, 2.0);
        assert_eq!(f.average_change, 0.0);
    }

    #[test]
    fn trend_and_moments() {
        let f = compute_features(&[2.0, 4.0, 6.0]).unwrap();
        assert_abs_diff_eq!(f.linear_trend_slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.mean, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.variance, 8.0 / 3.0, epsilon = 1e-12);
        let c = compute_features(&[3.0; 6]).unwrap();
        assert_eq!(c.linear_trend_slope, 0.0);
        assert_eq!(c.rsi, 50.0);
        assert_eq!(c.variance, 0.0);
    }

    #[test]
    fn quadratic_coefficient_of_parabola() {
        // y = 0.5 x^2 - 3x + 1 sampled at x = 0..9
        let v: Vec<f64> = (0..10).map(|x| 0.5 * (x * x) as f64 - 3.0 * x as f64 + 1.0).collect();
        let f = compute_features(&v).unwrap();
        assert_abs_diff_eq!(f.quadratic_coeff, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn decreasing_rsi_and_tie_label() {
        let f = compute_features(&[5.0, 4.0, 3.0]).unwrap();
        assert_eq!(f.rsi, 0.0);
        let row = extract_features(&[1.0, 2.0, 2.0], Origin::Real, "A").unwrap();
        assert!(!row.label);
    }

    #[test]
    fn too_short_is_invalid() {
        assert!(matches!(extract_features(&[1.0, 2.0], Origin::Real, "A"), Err(Error::InvalidInput(_))));
    }

    proptest! {
        #[test]
        fn rsi_bounded_and_last_value_only_moves_label(
            v in proptest::collection::vec(-1e3f64..1e3, 3..40),
            last in -1e3f64..1e3,
        ) {
            let row = extract_features(&v, Origin::Real, "A").unwrap();
            prop_assert!((0.0..=100.0).contains(&row.features.rsi));
            prop_assert!(row.features.to_vec().iter().all(|x| x.is_finite()));
            let mut w = v.clone();
            *w.last_mut().unwrap() = last;
            let other = extract_features(&w, Origin::Real, "A").unwrap();
            prop_assert_eq!(other.features, row.features);
            prop_assert_eq!(other.label, last > v[v.len() - 2]);
        }
    }
}
