//! Wall-clock accounting per ticker or per segment.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Ticker,
    Segment,
}

/// Elapsed time of one unit of work, stored in whole microseconds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuntimeRecord {
    pub unit_id: String,
    pub unit_kind: UnitKind,
    pub method: String,
    pub elapsed_us: u64,
    /// False when the task failed; the elapsed time is still recorded.
    pub valid: bool,
}

impl RuntimeRecord {
    pub fn from_millis(unit_id: &str, unit_kind: UnitKind, method: &str, ms: u64) -> Self {
        Self {
            unit_id: unit_id.into(),
            unit_kind,
            method: method.into(),
            elapsed_us: ms * 1000,
            valid: true,
        }
    }

    pub fn elapsed(&self) -> Duration {
        Duration::from_micros(self.elapsed_us)
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.elapsed_us as f64 / 1000.0
    }
}

/// Line format of the runtime log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeLine {
    pub unit_id: String,
    pub unit_kind: UnitKind,
    pub method: String,
    pub elapsed_ms: f64,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub valid: bool,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl From<&RuntimeRecord> for RuntimeLine {
    fn from(r: &RuntimeRecord) -> Self {
        Self {
            unit_id: r.unit_id.clone(),
            unit_kind: r.unit_kind,
            method: r.method.clone(),
            elapsed_ms: r.elapsed_ms(),
            valid: r.valid,
        }
    }
}

impl From<RuntimeLine> for RuntimeRecord {
    fn from(l: RuntimeLine) -> Self {
        Self {
            unit_id: l.unit_id,
            unit_kind: l.unit_kind,
            method: l.method,
            elapsed_us: (l.elapsed_ms * 1000.0).round().max(0.0) as u64,
            valid: l.valid,
        }
    }
}

/// Runs `work` and times it on the monotonic clock.
pub fn time_unit<T, E, F>(unit_id: &str, unit_kind: UnitKind, method: &str, work: F) -> (std::result::Result<T, E>, RuntimeRecord)
where
    F: FnOnce() -> std::result::Result<T, E>,
{
    let start = Instant::now();
    let out = work();
    let elapsed = start.elapsed();
    let record = RuntimeRecord {
        unit_id: unit_id.into(),
        unit_kind,
        method: method.into(),
        elapsed_us: elapsed.as_micros() as u64,
        valid: out.is_ok(),
    };
    (out, record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodTotal {
    pub method: String,
    pub unit_kind: UnitKind,
    pub units: usize,
    pub total_us: u64,
}

impl MethodTotal {
    pub fn formatted(&self) -> String {
        format_duration(Duration::from_micros(self.total_us))
    }
}

/// Sums records per (method, unit kind), in method order.
pub fn aggregate(records: &[RuntimeRecord]) -> Vec<MethodTotal> {
    let mut totals: BTreeMap<(&str, UnitKind), (usize, u64)> = BTreeMap::new();
    for r in records {
        let e = totals.entry((&r.method, r.unit_kind)).or_default();
        e.0 += 1;
        e.1 += r.elapsed_us;
    }
    totals
        .into_iter()
        .map(|((method, unit_kind), (units, total_us))| MethodTotal {
            method: method.into(),
            unit_kind,
            units,
            total_us,
        })
        .collect()
}

/// `days hh:mm:ss`, floored to whole seconds.
pub fn format_duration(d: Duration) -> String {
    let s = d.as_secs();
    format!("{} {:02}:{:02}:{:02}", s / 86_400, (s / 3600) % 24, (s / 60) % 60, s % 60)
}

pub fn write_runtime_log<W: Write>(records: &[RuntimeRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, &RuntimeLine::from(r))?;
        out.write_all(b"\n").map_err(|e| Error::io("<runtime log>", e))?;
    }
    Ok(())
}

pub fn read_runtime_log<R: BufRead>(reader: R) -> Result<Vec<RuntimeRecord>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<runtime log>", e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str::<RuntimeLine>(&line)?.into());
        }
    }
    Ok(out)
}
