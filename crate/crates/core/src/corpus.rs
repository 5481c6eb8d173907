//! Seeded desk-scale price corpus: geometric random walks whose drift and
//! volatility switch between regimes.

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ingest::TimeSeries;
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    /// Mean daily log return.
    pub drift: f64,
    /// Daily log-return standard deviation.
    pub volatility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSpec {
    pub tickers: usize,
    pub days: usize,
    pub seed: u64,
    pub regimes: Vec<Regime>,
    /// Expected regime length in days.
    pub mean_regime_days: f64,
    /// Probability that any single close is dropped.
    pub missing_rate: f64,
    pub start_date: NaiveDate,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            tickers: 20,
            days: 500,
            seed: 7,
            regimes: vec![
                Regime { drift: 0.006, volatility: 0.010 },
                Regime { drift: -0.006, volatility: 0.012 },
                Regime { drift: 0.000, volatility: 0.008 },
                Regime { drift: 0.003, volatility: 0.020 },
                Regime { drift: -0.003, volatility: 0.020 },
            ],
            mean_regime_days: 40.0,
            missing_rate: 0.0,
            start_date: NaiveDate::from_ymd_opt(2015, 2, 2).unwrap(),
        }
    }
}

impl CorpusSpec {
    pub fn new(tickers: usize, days: usize, seed: u64) -> Self {
        Self { tickers, days, seed, ..Default::default() }
    }

    /// Business-day calendar (weekends skipped).
    fn calendar(&self) -> Vec<NaiveDate> {
        let mut out = Vec::with_capacity(self.days);
        let mut d = self.start_date;
        while out.len() < self.days {
            use chrono::Datelike;
            if d.weekday().num_days_from_monday() < 5 {
                out.push(d);
            }
            d = d.succ_opt().expect("date in range");
        }
        out
    }

    pub fn generate(&self) -> Vec<TimeSeries> {
        let dates = self.calendar();
        let width = self.tickers.max(1).to_string().len().max(3);
        (0..self.tickers)
            .map(|t| {
                let ticker = format!("T{t:0width$}");
                let mut rng = rng_from_seed(derive_seed(self.seed, &ticker));
                let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
                let mut price: f64 = rng.random_range(20.0..200.0);
                let mut regime = rng.random_range(0..self.regimes.len());
                let switch_p = 1.0 / self.mean_regime_days.max(1.0);
                let values = (0..self.days)
                    .map(|_| {
                        if rng.random::<f64>() < switch_p {
                            regime = rng.random_range(0..self.regimes.len());
                        }
                        let r = self.regimes[regime];
                        price *= (r.drift + r.volatility * std_normal.sample(&mut rng)).exp();
                        let dropped = self.missing_rate > 0.0 && rng.random::<f64>() < self.missing_rate;
                        (!dropped).then_some(price)
                    })
                    .collect();
                TimeSeries::new(ticker, dates.clone(), values).expect("corpus series is well formed")
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_well_formed() {
        let spec = CorpusSpec::new(3, 50, 9);
        let a = spec.generate();
        assert_eq!(a, spec.generate());
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|s| s.len() == 50 && s.values.iter().all(|v| v.unwrap() > 0.0)));
        assert_eq!(a[0].timestamps, a[2].timestamps);
        assert_ne!(a[0].values, a[1].values);
    }

    #[test]
    fn missing_rate_drops_values() {
        let spec = CorpusSpec { missing_rate: 0.1, ..CorpusSpec::new(2, 400, 1) };
        let missing = spec.generate().iter().flat_map(|s| &s.values).filter(|v| v.is_none()).count();
        assert!(missing > 40 && missing < 120, "{missing}");
    }
}
