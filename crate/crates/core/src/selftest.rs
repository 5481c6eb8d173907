//! Embedded oracle suites: production routines against their brute-force
//! references on seeded random inputs.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::evaluate::roc_auc;
use crate::generate::dtw_distance;
use crate::graphs::{hvg_bruteforce, hvg_edges, nvg_bruteforce, nvg_edges, NodeId};
use crate::ingest::Window;
use crate::oracle::{auc_pairwise, dtw_bruteforce};
use crate::seed::{derive_seed, rng_from_seed, Rng as SeededRng};

pub type EdgeBuilder = fn(&[f64]) -> Vec<(NodeId, NodeId)>;

/// Graph builders under test. Swap one out to check that the suite notices.
#[derive(Clone, Copy)]
pub struct Builders {
    pub nvg: EdgeBuilder,
    pub hvg: EdgeBuilder,
}

impl Default for Builders {
    fn default() -> Self {
        Self {
            nvg: nvg_edges,
            hvg: hvg_edges,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Random windows per length for each visibility suite.
    pub visibility_windows: usize,
    pub visibility_lengths: [usize; 2],
    pub dtw_pairs: usize,
    pub dtw_max_len: usize,
    pub auc_inputs: usize,
    pub auc_max_len: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            visibility_windows: 200,
            visibility_lengths: [20, 60],
            dtw_pairs: 500,
            dtw_max_len: 8,
            auc_inputs: 1000,
            auc_max_len: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    /// First few mismatches, human readable.
    pub failures: Vec<String>,
    pub failed_cases: usize,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failed_cases == 0
    }
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>7} {:>7} {:>10}  result", "suite", "cases", "failed", "time")?;
        for s in &self.suites {
            writeln!(
                f,
                "{:<16} {:>7} {:>7} {:>9.3}s  {}",
                s.name,
                s.cases,
                s.failed_cases,
                s.elapsed.as_secs_f64(),
                if s.passed() { "PASS" } else { "FAIL" }
            )?;
            for msg in &s.failures {
                writeln!(f, "    {msg}")?;
            }
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

const MAX_MESSAGES: usize = 5;

struct Suite {
    result: SuiteResult,
    start: Instant,
}

impl Suite {
    fn new(name: &str) -> Self {
        Self {
            result: SuiteResult {
                name: name.into(),
                cases: 0,
                failures: Vec::new(),
                failed_cases: 0,
                elapsed: Duration::ZERO,
            },
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.result.cases += 1;
        if !ok {
            self.result.failed_cases += 1;
            if self.result.failures.len() < MAX_MESSAGES {
                self.result.failures.push(msg());
            }
        }
    }

    fn done(mut self) -> SuiteResult {
        self.result.elapsed = self.start.elapsed();
        self.result
    }
}

/// Half the windows are continuous, half drawn from a few levels so ties
/// and collinear runs show up.
pub fn random_window(rng: &mut SeededRng, len: usize, case: usize) -> Vec<f64> {
    if case.is_multiple_of(2) {
        (0..len).map(|_| rng.random::<f64>() * 100.0).collect()
    } else {
        (0..len).map(|_| f64::from(rng.random_range(0..6u32))).collect()
    }
}

fn describe(diff: &BTreeSet<(NodeId, NodeId)>, oracle: &BTreeSet<(NodeId, NodeId)>) -> String {
    let &(i, j) = diff.iter().next().expect("non-empty difference");
    if oracle.contains(&(i, j)) {
        format!("missing edge ({i}, {j})")
    } else {
        format!("spurious edge ({i}, {j})")
    }
}

fn visibility_suite(
    name: &str,
    builder: EdgeBuilder,
    oracle: fn(&Window) -> crate::error::Result<crate::graphs::VisibilityGraph>,
    cfg: &SelftestConfig,
) -> SuiteResult {
    let mut suite = Suite::new(name);
    for len in cfg.visibility_lengths {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, &format!("{name}/{len}")));
        for case in 0..cfg.visibility_windows {
            let window = Window::scaled_from_raw("SELFTEST", 0, random_window(&mut rng, len, case));
            let got: BTreeSet<_> = builder(window.scaled_values().unwrap()).into_iter().collect();
            let want = match oracle(&window) {
                Ok(g) => g.edge_set(),
                Err(e) => {
                    suite.check(false, || format!("len {len} case {case}: oracle failed: {e}"));
                    continue;
                }
            };
            let diff: BTreeSet<_> = got.symmetric_difference(&want).copied().collect();
            suite.check(diff.is_empty(), || {
                format!("len {len} case {case}: {}", describe(&diff, &want))
            });
        }
    }
    suite.done()
}

fn dtw_suite(cfg: &SelftestConfig) -> SuiteResult {
    let mut suite = Suite::new("dtw");
    let mut rng = rng_from_seed(derive_seed(cfg.seed, "dtw"));
    for case in 0..cfg.dtw_pairs {
        let la = rng.random_range(1..=cfg.dtw_max_len);
        let lb = rng.random_range(1..=cfg.dtw_max_len);
        let a: Vec<f64> = (0..la).map(|_| rng.random_range(-10.0..10.0)).collect();
        let b: Vec<f64> = (0..lb).map(|_| rng.random_range(-10.0..10.0)).collect();
        let want = dtw_bruteforce(&a, &b);
        match dtw_distance(&a, &b) {
            Ok(got) => suite.check((got - want).abs() <= 1e-9, || {
                format!("case {case} ({la}x{lb}): got {got}, oracle {want}")
            }),
            Err(e) => suite.check(false, || format!("case {case}: {e}")),
        }
    }
    suite.done()
}

fn auc_suite(cfg: &SelftestConfig) -> SuiteResult {
    let mut suite = Suite::new("auc");
    let mut rng = rng_from_seed(derive_seed(cfg.seed, "auc"));
    for case in 0..cfg.auc_inputs {
        let n = rng.random_range(2..=cfg.auc_max_len);
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        // both classes present
        labels[0] = true;
        labels[1] = false;
        let quantized = case % 3 == 0;
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if quantized {
                    f64::from(rng.random_range(0..5u32)) / 4.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let want = auc_pairwise(&scores, &labels).expect("both classes present");
        match roc_auc(&scores, &labels) {
            Ok(got) => suite.check(got == want, || format!("case {case} (n={n}): got {got}, oracle {want}")),
            Err(e) => suite.check(false, || format!("case {case}: {e}")),
        }
    }
    suite.done()
}

pub fn run_selftest_with(builders: &Builders, cfg: &SelftestConfig) -> SelftestReport {
    SelftestReport {
        suites: vec![
            visibility_suite("nvg", builders.nvg, nvg_bruteforce, cfg),
            visibility_suite("hvg", builders.hvg, hvg_bruteforce, cfg),
            dtw_suite(cfg),
            auc_suite(cfg),
        ],
    }
}

pub fn run_selftest() -> SelftestReport {
    run_selftest_with(&Builders::default(), &SelftestConfig::default())
}
