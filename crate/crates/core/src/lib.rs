//! Synthetic financial time series from visibility-graph random walks.
//!
//! Price windows become natural or horizontal visibility graphs (or a
//! multi-ticker composite), random walks over those graphs emit new
//! sequences, and an evaluation harness measures how useful the synthetic
//! data is for a next-step direction classifier.

pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod exec;
pub mod generate;
pub mod graphs;
pub mod ingest;
pub mod oracle;
pub mod pipeline;
pub mod runtime;
pub mod seed;
pub mod selftest;

pub use config::{Method, RunConfig};
pub use error::{Error, Result};
pub use exec::Executor;
