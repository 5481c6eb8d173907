use serde::{Deserialize, Serialize};

use super::features::FeatureRow;
use crate::error::{Error, Result};

/// A fitted model that maps a raw feature vector to a positive-class score.
pub trait Scorer {
    fn score(&self, features: &[f64]) -> f64;

    fn score_row(&self, row: &FeatureRow) -> f64 {
        self.score(&row.features.to_vec())
    }
}

/// A training procedure. Implement this to plug in a different learner.
pub trait Learner {
    type Model: Scorer;

    fn fit(&self, rows: &[FeatureRow]) -> Result<Self::Model>;
}

/// Per-feature z-scoring with statistics taken from the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                if s > 0.0 && s.is_finite() {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mean: vec![0.0; d],
            std: vec![1.0; d],
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// L2-regularized logistic regression trained by full-batch gradient
/// descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticRegression {
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the gradient norm drops below this.
    pub tol: f64,
    /// Keep the objective value of every iterate.
    #[serde(skip)]
    pub record_loss: bool,
}

impl Default for LogisticRegression {
    fn default() -> Self {
        Self {
            l2: 1e-3,
            max_iter: 10_000,
            tol: 1e-6,
            record_loss: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub standardizer: Standardizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    #[serde(skip)]
    pub loss_trace: Vec<f64>,
}

impl LogisticModel {
    /// Untrained model: every score is 0.5.
    pub fn zeros(d: usize) -> Self {
        Self {
            standardizer: Standardizer::identity(d),
            weights: vec![0.0; d],
            bias: 0.0,
            iterations: 0,
            grad_norm: f64::NAN,
            loss_trace: Vec::new(),
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl Scorer for LogisticModel {
    fn score(&self, features: &[f64]) -> f64 {
        let x = self.standardizer.transform(features);
        sigmoid(self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// Largest eigenvalue of a small symmetric PSD matrix by power iteration.
fn top_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let d = m.len();
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w: Vec<f64> = m.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= 1e-12 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

impl LogisticRegression {
    fn objective(&self, x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64) -> f64 {
        let n = x.len() as f64;
        let data: f64 = x
            .iter()
            .zip(y)
            .map(|(row, &t)| {
                let z = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
                softplus(z) - t * z
            })
            .sum::<f64>()
            / n;
        data + 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Fits on raw (unscaled) feature vectors; standardization is learned
    /// here.
    pub fn fit_matrix(&self, raw: &[Vec<f64>], labels: &[bool]) -> Result<LogisticModel> {
        if raw.is_empty() {
            return Err(Error::InsufficientData("empty training set".into()));
        }
        if raw.len() != labels.len() {
            return Err(Error::InvalidInput("features and labels differ in length".into()));
        }
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            return Err(Error::InsufficientData(
                "training set has a single class".into(),
            ));
        }
        let standardizer = Standardizer::fit(raw);
        let x: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.transform(r)).collect();
        let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();
        let n = x.len() as f64;
        let d = x[0].len();

        // Lipschitz constant of the gradient: 0.25 * lambda_max(A^T A / n) + l2
        // with A the design matrix augmented by a bias column.
        let mut gram = vec![vec![0.0; d + 1]; d + 1];
        for row in &x {
            let aug: Vec<f64> = row.iter().copied().chain(std::iter::once(1.0)).collect();
            for i in 0..=d {
                for j in 0..=d {
                    gram[i][j] += aug[i] * aug[j] / n;
                }
            }
        }
        let lipschitz = 0.25 * top_eigenvalue(&gram) * 1.05 + self.l2;
        let step = 1.0 / lipschitz;

        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut trace = Vec::new();
        let mut iterations = 0;
        let grad_norm = loop {
            if self.record_loss {
                trace.push(self.objective(&x, &y, &w, b));
            }
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (row, &t) in x.iter().zip(&y) {
                let z = b + row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
                let r = sigmoid(z) - t;
                for (g, a) in gw.iter_mut().zip(row) {
                    *g += r * a;
                }
                gb += r;
            }
            for (g, wj) in gw.iter_mut().zip(&w) {
                *g = *g / n + self.l2 * wj;
            }
            gb /= n;
            let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
            if norm < self.tol || iterations >= self.max_iter {
                break norm;
            }
            for (wj, g) in w.iter_mut().zip(&gw) {
                *wj -= step * g;
            }
            b -= step * gb;
            iterations += 1;
        };
        Ok(LogisticModel {
            standardizer,
            weights: w,
            bias: b,
            iterations,
            grad_norm,
            loss_trace: trace,
        })
    }
}

impl Learner for LogisticRegression {
    type Model = LogisticModel;

    fn fit(&self, rows: &[FeatureRow]) -> Result<LogisticModel> {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.features.to_vec()).collect();
        let y: Vec<bool> = rows.iter().map(|r| r.label).collect();
        self.fit_matrix(&x, &y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::roc_auc;
    use crate::seed::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    fn blobs(n: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = rng_from_seed(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = i % 2 == 0;
            let centre = if label { separation / 2.0 } else { -separation / 2.0 };
            x.push((0..3).map(|k| if k == 0 { centre } else { 0.0 } + noise.sample(&mut rng)).collect());
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_rank_perfectly() {
        let (x, y) = blobs(100, 6.0, 1);
        // the oracle: with 6 sigma separation on axis 0 the data is split by x0 = 0
        let separable = x.iter().zip(&y).all(|(r, &l)| (r[0] > 0.0) == l);
        assert!(separable, "fixture must be linearly separable");
        let model = LogisticRegression::default().fit_matrix(&x, &y).unwrap();
        let scores: Vec<f64> = x.iter().map(|r| model.score(r)).collect();
        assert_eq!(roc_auc(&scores, &y).unwrap(), 1.0);
    }

    #[test]
    fn zero_model_scores_half() {
        let m = LogisticModel::zeros(8);
        assert_eq!(m.score(&[1.0, -3.0, 2.0, 0.0, 5.0, 1.0, 2.0, 3.0]), 0.5);
    }

    #[test]
    fn duplicated_training_set_gives_same_weights() {
        let (x, y) = blobs(80, 1.0, 2);
        let lr = LogisticRegression::default();
        let a = lr.fit_matrix(&x, &y).unwrap();
        let x2: Vec<_> = x.iter().chain(&x).cloned().collect();
        let y2: Vec<_> = y.iter().chain(&y).copied().collect();
        let b = lr.fit_matrix(&x2, &y2).unwrap();
        for (p, q) in a.weights.iter().zip(&b.weights) {
            assert!((p - q).abs() < 1e-9, "{p} vs {q}");
        }
        assert!((a.bias - b.bias).abs() < 1e-9);
    }

    #[test]
    fn loss_is_non_increasing_and_converges() {
        let (x, y) = blobs(200, 1.5, 3);
        let lr = LogisticRegression { record_loss: true, ..Default::default() };
        let m = lr.fit_matrix(&x, &y).unwrap();
        assert!(m.grad_norm < 1e-6);
        for w in m.loss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            LogisticRegression::default().fit_matrix(&x, &[true, true]),
            Err(Error::InsufficientData(_))
        ));
        assert!(LogisticRegression::default().fit_matrix(&[], &[]).is_err());
    }
}
