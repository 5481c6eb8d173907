//! Price-series ingestion, windowing and reversible min-max scaling.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Close-price history of one ticker. `None` marks a missing close.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub ticker: String,
    pub timestamps: Vec<NaiveDate>,
    pub values: Vec<Option<f64>>,
}

impl TimeSeries {
    /// Builds a series, checking ordering, length agreement and finiteness.
    pub fn new(
        ticker: impl Into<String>,
        timestamps: Vec<NaiveDate>,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        let ticker = ticker.into();
        if timestamps.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{ticker}: {} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "{ticker}: timestamps not strictly increasing at {}",
                w[1]
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{ticker}: non-finite close value"
            )));
        }
        Ok(Self {
            ticker,
            timestamps,
            values,
        })
    }

    /// Series with consecutive daily timestamps starting at 2000-01-01.
    /// Handy for tests and synthetic corpora.
    pub fn from_values(ticker: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        let base = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let timestamps = (0..values.len())
            .map(|i| base + chrono::Days::new(i as u64))
            .collect();
        Self::new(ticker, timestamps, values).expect("generated timestamps are ordered")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Affine bounds recorded at scaling time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: &[f64]) -> Self {
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Self { min, max }
    }

    /// Constant windows (max == min) scale to 0.5 and invert to `min`.
    pub fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    pub fn scale(&self, v: f64) -> f64 {
        if self.is_constant() {
            0.5
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    pub fn inverse(&self, s: f64) -> f64 {
        if self.is_constant() {
            self.min
        } else {
            self.min + s * (self.max - self.min)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scaled {
    pub bounds: MinMax,
    pub values: Vec<f64>,
}

/// Fixed-length slice of one ticker's series.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub ticker: String,
    pub start_index: usize,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    pub raw_values: Vec<f64>,
    pub scaled: Option<Scaled>,
}

/// Identity of the time range a window covers; multigraph inputs must agree
/// on it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SegmentKey {
    pub start_index: usize,
    pub length: usize,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
}

impl std::fmt::Display for SegmentKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.first_date, self.last_date) {
            (Some(a), Some(b)) => write!(f, "{a}..{b}"),
            _ => write!(
                f,
                "{}..{}",
                self.start_index,
                self.start_index + self.length - 1
            ),
        }
    }
}

impl Window {
    /// Unscaled window without calendar information.
    pub fn from_raw(ticker: impl Into<String>, start_index: usize, raw_values: Vec<f64>) -> Self {
        Self {
            ticker: ticker.into(),
            start_index,
            first_date: None,
            last_date: None,
            raw_values,
            scaled: None,
        }
    }

    /// Convenience: raw window scaled immediately.
    pub fn scaled_from_raw(
        ticker: impl Into<String>,
        start_index: usize,
        raw_values: Vec<f64>,
    ) -> Self {
        minmax_scale(&Self::from_raw(ticker, start_index, raw_values))
    }

    pub fn len(&self) -> usize {
        self.raw_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw_values.is_empty()
    }

    pub fn segment(&self) -> SegmentKey {
        SegmentKey {
            start_index: self.start_index,
            length: self.len(),
            first_date: self.first_date,
            last_date: self.last_date,
        }
    }

    pub fn scaled_values(&self) -> Option<&[f64]> {
        self.scaled.as_ref().map(|s| s.values.as_slice())
    }

    pub fn bounds(&self) -> Option<MinMax> {
        self.scaled.as_ref().map(|s| s.bounds)
    }

    pub fn is_constant(&self) -> bool {
        self.bounds().is_some_and(|b| b.is_constant())
    }
}

/// Scales a window into [0, 1]. Constant windows map to 0.5 everywhere.
pub fn minmax_scale(window: &Window) -> Window {
    let bounds = MinMax::fit(&window.raw_values);
    let values = window.raw_values.iter().map(|&v| bounds.scale(v)).collect();
    Window {
        scaled: Some(Scaled { bounds, values }),
        ..window.clone()
    }
}

/// Rebuilds `raw_values` from the scaled values and recorded bounds.
/// Unscaled windows are returned unchanged.
pub fn inverse_scale(window: &Window) -> Window {
    match &window.scaled {
        Some(s) => Window {
            raw_values: s.values.iter().map(|&v| s.bounds.inverse(v)).collect(),
            ..window.clone()
        },
        None => window.clone(),
    }
}

/// Cuts `series` into windows at offsets `0, stride, 2*stride, ...`,
/// dropping any window that contains a missing value.
pub fn slice_windows(series: &TimeSeries, length: usize, stride: usize) -> Result<Vec<Window>> {
    if length < 2 {
        return Err(Error::InvalidConfig(format!(
            "window length must be >= 2, got {length}"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be >= 1".into()));
    }
    if series.len() < length {
        return Ok(Vec::new());
    }
    let windows = (0..=series.len() - length)
        .step_by(stride)
        .filter_map(|start| {
            let raw: Option<Vec<f64>> = series.values[start..start + length].iter().copied().collect();
            raw.map(|raw_values| Window {
                ticker: series.ticker.clone(),
                start_index: start,
                first_date: series.timestamps.get(start).copied(),
                last_date: series.timestamps.get(start + length - 1).copied(),
                raw_values,
                scaled: None,
            })
        })
        .collect();
    Ok(windows)
}

const REQUIRED_COLUMNS: [&str; 3] = ["date", "ticker", "close"];

/// Reads `date,ticker,close` CSV (any column order, extra columns ignored).
/// Returns one series per ticker, ordered by ticker name.
pub fn load_series(path: impl AsRef<Path>) -> Result<Vec<TimeSeries>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    read_series(BufReader::new(file))
}

pub fn read_series<R: Read>(reader: R) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 3];
    for (slot, name) in idx.iter_mut().zip(REQUIRED_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Schema(format!("missing required column {name:?}")))?;
    }
    let [di, ti, ci] = idx;

    let mut rows: BTreeMap<String, BTreeMap<NaiveDate, Option<f64>>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(di), "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date {:?}: {e}", field(di)),
        })?;
        let ticker = field(ti).to_string();
        if ticker.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty ticker".into(),
            });
        }
        let close = field(ci).parse::<f64>().ok().filter(|v| v.is_finite());
        let per_ticker = rows.entry(ticker.clone()).or_default();
        if per_ticker.insert(date, close).is_some() {
            return Err(Error::DuplicateRow {
                ticker,
                date: date.to_string(),
            });
        }
    }

    rows.into_iter()
        .map(|(ticker, by_date)| {
            let (timestamps, values) = by_date.into_iter().unzip();
            TimeSeries::new(ticker, timestamps, values)
        })
        .collect()
}

/// Writes series back out in the input format (used by corpus generation).
pub fn write_series<W: Write>(series: &[TimeSeries], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(REQUIRED_COLUMNS)?;
    // date-major order, like a provider export
    let dates: BTreeSet<NaiveDate> = series.iter().flat_map(|s| s.timestamps.iter().copied()).collect();
    let lookup: Vec<BTreeMap<NaiveDate, Option<f64>>> = series
        .iter()
        .map(|s| s.timestamps.iter().copied().zip(s.values.iter().copied()).collect())
        .collect();
    for date in dates {
        for (s, map) in series.iter().zip(&lookup) {
            if let Some(v) = map.get(&date) {
                let close = v.map(|x| format!("{x}")).unwrap_or_default();
                wtr.write_record([date.to_string().as_str(), s.ticker.as_str(), close.as_str()])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// One line of the window export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub ticker: String,
    pub start_index: usize,
    pub values: Vec<f64>,
}

impl From<&Window> for WindowRecord {
    fn from(w: &Window) -> Self {
        Self {
            ticker: w.ticker.clone(),
            start_index: w.start_index,
            values: w.raw_values.clone(),
        }
    }
}

pub fn write_windows<W: Write>(windows: &[Window], mut writer: W) -> Result<()> {
    for w in windows {
        serde_json::to_writer(&mut writer, &WindowRecord::from(w))?;
        writer.write_all(b"\n").map_err(|e| Error::io("<window writer>", e))?;
    }
    Ok(())
}

pub fn read_windows<R: BufRead>(reader: R) -> Result<Vec<WindowRecord>> {
    reader
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|line| {
            let line = line.map_err(|e| Error::io("<window reader>", e))?;
            Ok(serde_json::from_str(&line)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn loads_single_ticker() {
        let csv = "date,ticker,close\n2024-01-01,AAA,1.0\n2024-01-02,AAA,2.0\n2024-01-03,AAA,3.0\n";
        let series = read_series(csv.as_bytes()).unwrap();
        assert_eq!(series.len(), 1);
        assert_eq!(series[0].len(), 3);
        assert_eq!(series[0].values, vec![Some(1.0), Some(2.0), Some(3.0)]);
    }

    #[test]
    fn partitions_and_sorts_interleaved_tickers() {
        let csv = "ticker,close,date\nBBB,5,2024-01-02\nAAA,1,2024-01-02\nBBB,4,2024-01-01\nAAA,,2024-01-01\nAAA,x,2024-01-03\n";
        let series = read_series(csv.as_bytes()).unwrap();
        assert_eq!(series.len(), 2);
        assert_eq!(series[0].ticker, "AAA");
        assert_eq!(series[0].timestamps, vec![d("2024-01-01"), d("2024-01-02"), d("2024-01-03")]);
        assert_eq!(series[0].values, vec![None, Some(1.0), None]);
        assert_eq!(series[1].values, vec![Some(4.0), Some(5.0)]);
    }

    #[test]
    fn duplicate_row_is_rejected() {
        let csv = "date,ticker,close\n2024-01-01,AAA,1\n2024-01-01,AAA,2\n";
        match read_series(csv.as_bytes()) {
            Err(Error::DuplicateRow { ticker, date }) => {
                assert_eq!(ticker, "AAA");
                assert_eq!(date, "2024-01-01");
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "date,symbol,close\n2024-01-01,AAA,1\n";
        assert!(matches!(read_series(csv.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn non_finite_close_becomes_missing() {
        let csv = "date,ticker,close\n2024-01-01,AAA,NaN\n2024-01-02,AAA,inf\n";
        let s = read_series(csv.as_bytes()).unwrap();
        assert_eq!(s[0].values, vec![None, None]);
    }

    #[test]
    fn short_series_gives_no_windows() {
        let s = TimeSeries::from_values("A", (0..5).map(|v| Some(v as f64)).collect());
        assert!(slice_windows(&s, 20, 20).unwrap().is_empty());
    }

    #[test]
    fn non_overlapping_offsets() {
        let s = TimeSeries::from_values("A", (1..=40).map(|v| Some(v as f64)).collect());
        let w = slice_windows(&s, 20, 20).unwrap();
        assert_eq!(w.iter().map(|w| w.start_index).collect::<Vec<_>>(), vec![0, 20]);
        assert_eq!(w[1].raw_values[0], 21.0);
        assert!(w.iter().all(|w| w.scaled.is_none()));
    }

    #[test]
    fn windows_with_missing_values_are_dropped() {
        // offsets 0..=4; those covering index 2 are 0, 1, 2
        let vals = vec![Some(1.0), Some(2.0), None, Some(4.0), Some(5.0), Some(6.0), Some(7.0)];
        let s = TimeSeries::from_values("A", vals);
        let w = slice_windows(&s, 3, 1).unwrap();
        assert_eq!(w.iter().map(|w| w.start_index).collect::<Vec<_>>(), vec![3, 4]);
        assert_eq!(w[0].raw_values, vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn slice_rejects_bad_params() {
        let s = TimeSeries::from_values("A", vec![Some(1.0); 4]);
        assert!(slice_windows(&s, 1, 1).is_err());
        assert!(slice_windows(&s, 2, 0).is_err());
    }

    #[test]
    fn scale_endpoints() {
        let w = minmax_scale(&Window::from_raw("A", 0, vec![2.0, 4.0, 6.0]));
        assert_eq!(w.scaled_values().unwrap(), &[0.0, 0.5, 1.0]);
        assert!(!w.is_constant());
    }

    #[test]
    fn constant_window() {
        let w = minmax_scale(&Window::from_raw("A", 0, vec![7.0, 7.0, 7.0]));
        assert_eq!(w.scaled_values().unwrap(), &[0.5, 0.5, 0.5]);
        assert!(w.is_constant());
        let mut back = w.clone();
        back.raw_values.clear();
        assert_eq!(inverse_scale(&back).raw_values, vec![7.0, 7.0, 7.0]);
    }

    #[test]
    fn window_export_round_trip() {
        let w = vec![Window::from_raw("A", 3, vec![1.5, 2.5])];
        let mut buf = Vec::new();
        write_windows(&w, &mut buf).unwrap();
        let back = read_windows(buf.as_slice()).unwrap();
        assert_eq!(back, vec![WindowRecord { ticker: "A".into(), start_index: 3, values: vec![1.5, 2.5] }]);
    }

    #[test]
    fn write_then_read_series() {
        let a = TimeSeries::from_values("A", vec![Some(1.0), None, Some(3.25)]);
        let b = TimeSeries::from_values("B", vec![Some(10.0), Some(11.0)]);
        let mut buf = Vec::new();
        write_series(&[a.clone(), b.clone()], &mut buf).unwrap();
        let back = read_series(buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    proptest! {
        #[test]
        fn scale_round_trip(raw in proptest::collection::vec(-1e6f64..1e6, 2..80)) {
            let w = minmax_scale(&Window::from_raw("A", 0, raw.clone()));
            let s = w.scaled_values().unwrap();
            prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
            let mut stripped = w.clone();
            stripped.raw_values = vec![];
            let back = inverse_scale(&stripped).raw_values;
            for (a, b) in raw.iter().zip(&back) {
                let tol = 1e-9 * a.abs().max(1.0);
                prop_assert!((a - b).abs() <= tol, "{a} vs {b}");
            }
        }

        #[test]
        fn window_count_formula(n in 0usize..120, len in 2usize..30, stride in 1usize..25) {
            let s = TimeSeries::from_values("A", (0..n).map(|v| Some(v as f64)).collect());
            let w = slice_windows(&s, len, stride).unwrap();
            let expected = if n < len { 0 } else { (n - len) / stride + 1 };
            prop_assert_eq!(w.len(), expected);
            prop_assert!(w.iter().all(|w| w.len() == len));
        }
    }
}
