//! Exact (O(N^2) per iteration) t-SNE into two dimensions.
//!
//! Gaussian input affinities with a per-point bandwidth found by bisection
//! on the entropy, symmetrized; Student-t output kernel; KL divergence
//! minimized by gradient descent with momentum, adaptive gains and early
//! exaggeration.

use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch: usize,
    /// Inputs above this size are subsampled.
    pub max_points: usize,
    /// Record the KL objective every this many iterations (and at the end).
    pub kl_every: usize,
    pub entropy_tol: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch: 250,
            max_points: 2000,
            kl_every: 50,
            entropy_tol: 1e-5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    /// Index into the caller's points for each row of `coords`.
    pub indices: Vec<usize>,
    /// `(iteration, KL(P || Q))`, iterations counted from 1.
    pub kl_trace: Vec<(usize, f64)>,
    /// Sums of the conditional affinity rows before symmetrization.
    pub row_sums: Vec<f64>,
    /// |H(P_i) - ln(perplexity)| per row.
    pub entropy_errors: Vec<f64>,
}

impl Embedding {
    pub fn kl_at(&self, iteration: usize) -> Option<f64> {
        self.kl_trace.iter().find(|(i, _)| *i == iteration).map(|(_, v)| *v)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Conditional affinities of one row, bandwidth tuned so the row entropy
/// (nats) matches `target`. Returns `(row, |H - target|)`.
fn affinity_row(dist: &[f64], i: usize, target: f64, tol: f64) -> (Vec<f64>, f64) {
    let n = dist.len();
    let dmin = dist
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = dist.iter().map(|d| d - dmin).collect();
    let mean_shift = shifted
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &d)| d)
        .sum::<f64>()
        / (n - 1) as f64;

    let mut beta = if mean_shift > 0.0 { 1.0 / mean_shift } else { 1.0 };
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut row = vec![0.0; n];
    let mut err = f64::INFINITY;
    for _ in 0..200 {
        let mut z = 0.0;
        let mut weighted = 0.0;
        for j in 0..n {
            row[j] = if j == i { 0.0 } else { (-beta * shifted[j]).exp() };
            z += row[j];
            weighted += row[j] * shifted[j];
        }
        let h = z.ln() + beta * weighted / z;
        for p in row.iter_mut() {
            *p /= z;
        }
        let diff = h - target;
        err = diff.abs();
        if err < tol {
            break;
        }
        // entropy falls as beta grows
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (beta + lo) / 2.0;
        }
    }
    (row, err)
}

fn kl_divergence(p: &[f64], y: &[[f64; 2]], exec: &Executor) -> f64 {
    let n = y.len();
    let num = |i: usize, j: usize| 1.0 / (1.0 + (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2));
    let z: f64 = exec
        .map_range(n, |i| (0..n).filter(|&j| j != i).map(|j| num(i, j)).sum::<f64>())
        .into_iter()
        .sum();
    exec.map_range(n, |i| {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let pij = p[i * n + j];
                pij * (pij / (num(i, j) / z)).ln()
            })
            .sum::<f64>()
    })
    .into_iter()
    .sum()
}

/// Embeds `points` into 2D. Deterministic for a fixed config and input,
/// whatever the executor.
pub fn embed_2d(points: &[Vec<f64>], config: &TsneConfig, exec: &Executor) -> Result<Embedding> {
    if points.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "embedding needs at least 4 points, got {}",
            points.len()
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("ragged or non-finite embedding input".into()));
    }
    let mut rng = rng_from_seed(config.seed);
    let mut indices: Vec<usize> = if points.len() > config.max_points {
        sample(&mut rng, points.len(), config.max_points).into_vec()
    } else {
        (0..points.len()).collect()
    };
    indices.sort_unstable();
    let n = indices.len();
    if config.perplexity.is_nan() || config.perplexity <= 0.0 || config.perplexity >= n as f64 {
        return Err(Error::InvalidConfig(format!(
            "perplexity {} must be in (0, {n})",
            config.perplexity
        )));
    }
    let target = config.perplexity.ln();

    let rows: Vec<(Vec<f64>, f64)> = exec.map_range(n, |i| {
        let pi = &points[indices[i]];
        let dist: Vec<f64> = indices.iter().map(|&j| sq_dist(pi, &points[j])).collect();
        affinity_row(&dist, i, target, config.entropy_tol)
    });
    let row_sums: Vec<f64> = rows.iter().map(|(r, _)| r.iter().sum()).collect();
    let entropy_errors: Vec<f64> = rows.iter().map(|(_, e)| *e).collect();

    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[i * n + j] = ((rows[i].0[j] + rows[j].0[i]) / (2.0 * n as f64)).max(1e-12);
            }
        }
    }
    drop(rows);

    let normal = Normal::new(0.0, 1e-2).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_trace = Vec::new();

    for iter in 0..config.iterations {
        let exaggeration = if iter < config.exaggeration_iterations {
            config.early_exaggeration
        } else {
            1.0
        };
        let momentum = if iter < config.momentum_switch {
            config.initial_momentum
        } else {
            config.final_momentum
        };
        let yr = &y;
        let num = |i: usize, j: usize| {
            1.0 / (1.0 + (yr[i][0] - yr[j][0]).powi(2) + (yr[i][1] - yr[j][1]).powi(2))
        };
        let z: f64 = exec
            .map_range(n, |i| (0..n).filter(|&j| j != i).map(|j| num(i, j)).sum::<f64>())
            .into_iter()
            .sum();
        let pr = &p;
        let grad: Vec<[f64; 2]> = exec.map_range(n, |i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = num(i, j);
                let mult = (exaggeration * pr[i * n + j] - q / z) * q;
                g[0] += mult * (yr[i][0] - yr[j][0]);
                g[1] += mult * (yr[i][1] - yr[j][1]);
            }
            [4.0 * g[0], 4.0 * g[1]]
        });

        for i in 0..n {
            for d in 0..2 {
                let same_sign = (grad[i][d] > 0.0) == (update[i][d] > 0.0);
                gains[i][d] = if same_sign { gains[i][d] * 0.8 } else { gains[i][d] + 0.2 };
                gains[i][d] = gains[i][d].max(0.01);
                update[i][d] = momentum * update[i][d] - config.learning_rate * gains[i][d] * grad[i][d];
                y[i][d] += update[i][d];
            }
        }
        let mean = y.iter().fold([0.0; 2], |acc, c| [acc[0] + c[0], acc[1] + c[1]]);
        let mean = [mean[0] / n as f64, mean[1] / n as f64];
        for c in y.iter_mut() {
            c[0] -= mean[0];
            c[1] -= mean[1];
        }

        let done = iter + 1;
        if (config.kl_every > 0 && done % config.kl_every == 0) || done == config.iterations {
            kl_trace.push((done, kl_divergence(&p, &y, exec)));
        }
    }

    Ok(Embedding {
        coords: y,
        indices,
        kl_trace,
        row_sums,
        entropy_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cloud(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|i| {
                let c = if i % 2 == 0 { 0.0 } else { 8.0 };
                (0..5).map(|_| c + rng.random_range(-1.0..1.0)).collect()
            })
            .collect()
    }

    fn small() -> TsneConfig {
        TsneConfig { perplexity: 10.0, iterations: 300, seed: 3, ..Default::default() }
    }

    #[test]
    fn shape_and_determinism() {
        let pts = cloud(60, 1);
        let a = embed_2d(&pts, &small(), &Executor::Sequential).unwrap();
        assert_eq!(a.coords.len(), 60);
        assert!(a.coords.iter().all(|c| c[0].is_finite() && c[1].is_finite()));
        let b = embed_2d(&pts, &small(), &Executor::with_workers(3)).unwrap();
        assert_eq!(a.coords, b.coords);
        for s in &a.row_sums {
            assert!((s - 1.0).abs() < 1e-9);
        }
        assert!(a.entropy_errors.iter().all(|e| *e < 1e-5));
    }

    #[test]
    fn separates_two_clusters() {
        let pts = cloud(60, 2);
        let e = embed_2d(&pts, &small(), &Executor::Sequential).unwrap();
        let centroid = |parity: usize| {
            let sel: Vec<&[f64; 2]> = e.coords.iter().enumerate().filter(|(i, _)| i % 2 == parity).map(|(_, c)| c).collect();
            let k = sel.len() as f64;
            [sel.iter().map(|c| c[0]).sum::<f64>() / k, sel.iter().map(|c| c[1]).sum::<f64>() / k]
        };
        let (a, b) = (centroid(0), centroid(1));
        let gap = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        assert!(gap > 5.0, "{gap}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let pts = cloud(10, 1);
        assert!(matches!(embed_2d(&pts[..3], &small(), &Executor::Sequential), Err(Error::InvalidInput(_))));
        assert!(matches!(embed_2d(&pts, &small(), &Executor::Sequential), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn subsamples_large_inputs() {
        let pts = cloud(50, 4);
        let cfg = TsneConfig { max_points: 20, perplexity: 5.0, iterations: 10, ..Default::default() };
        let e = embed_2d(&pts, &cfg, &Executor::Sequential).unwrap();
        assert_eq!(e.coords.len(), 20);
        assert_eq!(e.indices.len(), 20);
        assert!(e.indices.windows(2).all(|w| w[0] < w[1]));
    }
}
