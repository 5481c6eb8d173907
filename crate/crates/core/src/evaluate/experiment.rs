use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::auc::roc_auc;
use super::classifier::{Learner, Scorer};
use super::features::{extract_features, FeatureRow, Origin};
use crate::error::{Error, Result};
use crate::generate::GeneratedRecord;
use crate::ingest::Window;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Chronological split fractions, applied per ticker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.70,
            validation: 0.15,
            test: 0.15,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p)) || self.train <= 0.0 || self.test <= 0.0 {
            return Err(Error::InvalidConfig(format!("bad split fractions {parts:?}")));
        }
        if ((parts.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("split fractions {parts:?} do not sum to 1")));
        }
        Ok(())
    }
}

/// Indices into the window slice, per split.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SplitAssignment {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits windows chronologically within each ticker: earliest windows to
/// train, latest to test. Windows that would overlap a later split in time
/// are purged so every train index precedes every test index.
pub fn chronological_split(windows: &[Window], spec: &SplitSpec) -> Result<SplitAssignment> {
    spec.validate()?;
    let mut by_ticker: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, w) in windows.iter().enumerate() {
        by_ticker.entry(&w.ticker).or_default().push(i);
    }
    let mut out = SplitAssignment::default();
    for idx in by_ticker.values_mut() {
        idx.sort_by_key(|&i| windows[i].start_index);
        let n = idx.len();
        let n_test = if n >= 3 { ((n as f64 * spec.test).ceil() as usize).max(1) } else { 0 };
        let n_val = ((n as f64 * spec.validation).floor() as usize).min(n - n_test);
        let n_train = n - n_test - n_val;
        let (train, rest) = idx.split_at(n_train);
        let (val, test) = rest.split_at(n_val);
        let first_start = |s: &[usize]| s.first().map(|&i| windows[i].start_index);
        let end = |i: usize| windows[i].start_index + windows[i].len() - 1;
        let val_bound = first_start(test).unwrap_or(usize::MAX);
        let train_bound = first_start(val).unwrap_or(val_bound).min(val_bound);
        out.train.extend(train.iter().copied().filter(|&i| end(i) < train_bound));
        out.validation.extend(val.iter().copied().filter(|&i| end(i) < val_bound));
        out.test.extend(test.iter().copied());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucTriple {
    pub real: f64,
    pub synthetic: Option<f64>,
    pub mixed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub auc_real: f64,
    pub auc_synthetic: Option<f64>,
    pub auc_mixed: Option<f64>,
    /// Same three models scored on the validation split.
    pub validation: Option<AucTriple>,
    pub n_synthetic_rows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub seed: u64,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    pub methods: Vec<MethodResult>,
    /// Method name -> summed runtime, `days hh:mm:ss`. Filled by reporting.
    #[serde(default)]
    pub runtime_totals: BTreeMap<String, String>,
    #[serde(default)]
    pub config: serde_json::Value,
}

impl EvalReport {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == name)
    }
}

fn rows_for(windows: &[Window], idx: &[usize]) -> Result<Vec<FeatureRow>> {
    idx.iter()
        .map(|&i| extract_features(&windows[i].raw_values, Origin::Real, &windows[i].ticker))
        .collect()
}

fn auc_of<M: Scorer>(model: &M, rows: &[FeatureRow]) -> Result<f64> {
    let scores: Vec<f64> = rows.iter().map(|r| model.score_row(r)).collect();
    let labels: Vec<bool> = rows.iter().map(|r| r.label).collect();
    roc_auc(&scores, &labels)
}

/// Trains on real, synthetic and mixed data and scores every model on the
/// same real-only test split.
///
/// Synthetic sequences are used only when their source window is in the
/// training split. A method with no usable synthetic rows, or whose rows
/// hold a single class, is reported with `None` AUCs and a note.
pub fn run_experiment<L: Learner>(
    real: &[Window],
    synthetic: &BTreeMap<String, Vec<GeneratedRecord>>,
    split: &SplitSpec,
    learner: &L,
    seed: u64,
) -> Result<EvalReport> {
    let assignment = chronological_split(real, split)?;
    let train = rows_for(real, &assignment.train)?;
    let validation = rows_for(real, &assignment.validation)?;
    let test = rows_for(real, &assignment.test)?;
    if test.is_empty() {
        return Err(Error::InsufficientData("empty test split".into()));
    }

    let real_model = learner.fit(&train)?;
    let auc_real = auc_of(&real_model, &test)?;
    let val_real = auc_of(&real_model, &validation).ok();

    let train_keys: BTreeSet<(&str, usize)> = assignment
        .train
        .iter()
        .map(|&i| (real[i].ticker.as_str(), real[i].start_index))
        .collect();

    let mut methods = Vec::new();
    for (method, records) in synthetic {
        let syn_rows: Vec<FeatureRow> = records
            .iter()
            .filter(|r| train_keys.contains(&(r.ticker.as_str(), r.window_start)))
            .map(|r| extract_features(&r.values, Origin::Synthetic, &r.ticker))
            .collect::<Result<_>>()?;
        let mut result = MethodResult {
            method: method.clone(),
            auc_real,
            auc_synthetic: None,
            auc_mixed: None,
            validation: val_real.map(|real| AucTriple {
                real,
                synthetic: None,
                mixed: None,
            }),
            n_synthetic_rows: syn_rows.len(),
            mixing_score: None,
            note: None,
        };
        if syn_rows.is_empty() {
            result.note = Some("no synthetic rows for the training windows".into());
            methods.push(result);
            continue;
        }
        let syn_model = match learner.fit(&syn_rows) {
            Ok(m) => m,
            Err(e) => {
                result.note = Some(format!("synthetic model not trained: {e}"));
                methods.push(result);
                continue;
            }
        };
        let mixed_rows: Vec<FeatureRow> = train.iter().chain(&syn_rows).cloned().collect();
        let mixed_model = learner.fit(&mixed_rows)?;
        result.auc_synthetic = Some(auc_of(&syn_model, &test)?);
        result.auc_mixed = Some(auc_of(&mixed_model, &test)?);
        if let Some(v) = result.validation.as_mut() {
            v.synthetic = auc_of(&syn_model, &validation).ok();
            v.mixed = auc_of(&mixed_model, &validation).ok();
        }
        methods.push(result);
    }

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        n_train: train.len(),
        n_validation: validation.len(),
        n_test: test.len(),
        methods,
        runtime_totals: BTreeMap::new(),
        config: serde_json::Value::Null,
    })
}
