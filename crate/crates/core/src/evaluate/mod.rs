//! Downstream evaluation: features, classifier, ROC AUC, the
//! real / synthetic / mixed experiment, and the 2D overlap diagnostic.

mod auc;
mod classifier;
mod embed;
mod experiment;
mod features;
mod mixing;

pub use auc::roc_auc;
pub use classifier::{Learner, LogisticModel, LogisticRegression, Scorer, Standardizer};
pub use embed::{embed_2d, Embedding, TsneConfig};
pub use experiment::{
    chronological_split, run_experiment, AucTriple, EvalReport, MethodResult, SplitAssignment,
    SplitSpec, REPORT_SCHEMA_VERSION,
};
pub use features::{compute_features, extract_features, FeatureRow, Features, Origin, FEATURE_NAMES};
pub use mixing::mixing_score;
