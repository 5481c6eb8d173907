use super::features::Origin;
use crate::error::{Error, Result};
use crate::exec::Executor;

/// Neighbor-mixing score of a labelled 2D point set.
///
/// For each point, the fraction of its `k` nearest neighbors with the other
/// origin, divided by that origin's share of all points; averaged. Near 1
/// for well-mixed sets, near 0 for separated ones. Equidistant neighbors
/// are ordered opposite-origin first. The ratio is not capped.
pub fn mixing_score(coords: &[[f64; 2]], origins: &[Origin], k: usize, exec: &Executor) -> Result<f64> {
    let n = coords.len();
    if origins.len() != n {
        return Err(Error::InvalidInput(format!("{n} coordinates but {} origins", origins.len())));
    }
    let n_real = origins.iter().filter(|&&o| o == Origin::Real).count();
    if n_real == 0 || n_real == n {
        return Err(Error::UndefinedMetric("mixing score needs both origins".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!("mixing k={k} must be in [1, {n})")));
    }
    let share = |o: Origin| {
        let opposite = if o == Origin::Real { n - n_real } else { n_real };
        opposite as f64 / n as f64
    };
    let per_point = exec.map_range(n, |i| {
        let mut others: Vec<(f64, bool, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let d = (coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2);
                (d, origins[j] == origins[i], j)
            })
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let opposite = others[..k].iter().filter(|x| !x.1).count();
        opposite as f64 / k as f64 / share(origins[i])
    });
    Ok(per_point.iter().sum::<f64>() / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn separated_clusters_score_zero() {
        let mut rng = rng_from_seed(1);
        let mut coords = Vec::new();
        let mut origins = Vec::new();
        for i in 0..200 {
            let (c, o) = if i % 2 == 0 { (0.0, Origin::Real) } else { (1000.0, Origin::Synthetic) };
            coords.push([c + rng.random::<f64>(), rng.random::<f64>()]);
            origins.push(o);
        }
        let s = mixing_score(&coords, &origins, 5, &Executor::Sequential).unwrap();
        assert!(s < 1e-12);
    }

    #[test]
    fn coin_flip_labels_score_one() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let coords: Vec<[f64; 2]> = (0..1000).map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
            let origins: Vec<Origin> = (0..1000)
                .map(|_| if rng.random::<bool>() { Origin::Real } else { Origin::Synthetic })
                .collect();
            let s = mixing_score(&coords, &origins, 10, &Executor::with_workers(2)).unwrap();
            assert!((s - 1.0).abs() <= 0.1, "{s}");
            total += s;
        }
        assert!((total / 20.0 - 1.0).abs() <= 0.1);
    }

    #[test]
    fn duplicates_score_two() {
        let mut rng = rng_from_seed(3);
        let real: Vec<[f64; 2]> = (0..50).map(|_| [rng.random::<f64>() * 100.0, rng.random::<f64>() * 100.0]).collect();
        let coords: Vec<[f64; 2]> = real.iter().chain(&real).copied().collect();
        let origins: Vec<Origin> = (0..100).map(|i| if i < 50 { Origin::Real } else { Origin::Synthetic }).collect();
        assert_eq!(mixing_score(&coords, &origins, 1, &Executor::Sequential).unwrap(), 2.0);
    }

    #[test]
    fn errors() {
        let c = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        assert!(matches!(
            mixing_score(&c, &[Origin::Real; 3], 1, &Executor::Sequential),
            Err(Error::UndefinedMetric(_))
        ));
        let o = [Origin::Real, Origin::Synthetic, Origin::Real];
        assert!(mixing_score(&c, &o, 3, &Executor::Sequential).is_err());
    }
}
