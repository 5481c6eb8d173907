//! End-to-end orchestration behind the `generate`, `evaluate` and `report`
//! commands.
//!
//! Output directory layout:
//!
//! ```text
//! config.toml              snapshot of the config that produced the outputs
//! windows.jsonl            real windows, sorted by (ticker, start)
//! generated_<method>.jsonl kept synthetic sequences, sorted by (ticker, start)
//! runtime.jsonl            one line per ticker or segment unit
//! eval_report.json         evaluation report
//! embedding_<method>.csv   x,y,origin
//! runtime_summary.txt      per-method totals
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;

use crate::config::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::evaluate::{
    chronological_split, embed_2d, mixing_score, run_experiment, EvalReport, Origin,
};
use crate::exec::Executor;
use crate::generate::{
    downsample, generate_sequence, read_generated, vrp_generate, write_generated,
    GeneratedRecord, Provenance, SyntheticSequence, WalkConfig,
};
use crate::graphs::{build_hvg, build_multigraph, build_nvg, MultiGraph};
use crate::ingest::{
    load_series, minmax_scale, read_windows, slice_windows, write_windows, SegmentKey,
    TimeSeries, Window,
};
use crate::runtime::{
    aggregate, read_runtime_log, time_unit, write_runtime_log, MethodTotal, RuntimeRecord,
    UnitKind,
};
use crate::seed::{derive_seed, rng_from_seed, window_seed};

pub const CONFIG_FILE: &str = "config.toml";
pub const WINDOWS_FILE: &str = "windows.jsonl";
pub const RUNTIME_FILE: &str = "runtime.jsonl";
pub const REPORT_FILE: &str = "eval_report.json";
pub const SUMMARY_FILE: &str = "runtime_summary.txt";

pub fn generated_path(out: &Path, method: Method) -> PathBuf {
    out.join(format!("generated_{method}.jsonl"))
}

pub fn embedding_path(out: &Path, method: Method) -> PathBuf {
    out.join(format!("embedding_{method}.csv"))
}

/// Windows of every series, scaled, in (ticker, start) order.
pub fn build_windows(series: &[TimeSeries], length: usize, stride: usize) -> Result<Vec<Window>> {
    let mut out = Vec::new();
    for s in series {
        out.extend(slice_windows(s, length, stride)?.iter().map(minmax_scale));
    }
    out.sort_by(|a, b| (&a.ticker, a.start_index).cmp(&(&b.ticker, b.start_index)));
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct Generation {
    pub records: BTreeMap<Method, Vec<GeneratedRecord>>,
    pub runtime: Vec<RuntimeRecord>,
    /// Windows for which fewer than `downsample.k` sequences were available.
    pub short_windows: usize,
}

fn walk_config(cfg: &RunConfig, seed: u64) -> WalkConfig {
    WalkConfig::new(cfg.target_length(), seed)
        .with_strategy(cfg.walk.node_strategy)
        .with_policy(cfg.walk.value_policy)
}

/// Generates `sequences_per_window` candidates for one window with `make`,
/// then downsamples them against the window's prices.
fn candidates_for<F>(
    cfg: &RunConfig,
    method: Method,
    window: &Window,
    mut make: F,
) -> Result<(Vec<SyntheticSequence>, bool)>
where
    F: FnMut(u64) -> Result<SyntheticSequence>,
{
    let base = window_seed(cfg.seed, &window.ticker, window.start_index, method.as_str());
    let seqs = (0..cfg.sequences_per_window)
        .map(|i| make(derive_seed(base, &i.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let kept = downsample(
        seqs,
        &window.raw_values,
        cfg.downsample.k,
        cfg.downsample.mode,
        derive_seed(base, "downsample"),
    )?;
    Ok((kept.sequences, kept.short))
}

fn walk_window(cfg: &RunConfig, method: Method, window: &Window) -> Result<(Vec<SyntheticSequence>, bool)> {
    let graph = match method {
        Method::Nvg => build_nvg(window)?,
        Method::Hvg => build_hvg(window)?,
        _ => unreachable!("per-window graph methods only"),
    };
    let scale = window.bounds().expect("pipeline windows are scaled");
    candidates_for(cfg, method, window, |seed| {
        let walk = walk_config(cfg, seed);
        let scaled = generate_sequence(&graph, &walk)?;
        Ok(SyntheticSequence::from_scaled(
            scaled,
            scale,
            Provenance {
                method: method.to_string(),
                ticker: window.ticker.clone(),
                window_start: window.start_index,
                seed,
                walk: Some(walk),
            },
        ))
    })
}

fn per_ticker(cfg: &RunConfig, method: Method, windows: &[Window]) -> Result<(Vec<SyntheticSequence>, usize)> {
    let mut out = Vec::new();
    let mut short = 0;
    for w in windows {
        let (seqs, s) = match method {
            Method::Vrp => candidates_for(cfg, method, w, |seed| Ok(vrp_generate(w, seed)))?,
            _ => walk_window(cfg, method, w)?,
        };
        out.extend(seqs);
        short += usize::from(s);
    }
    Ok((out, short))
}

/// Walks the multigraph of one segment once per member ticker, starting at
/// that ticker's first node and mapping back through its own scale.
fn per_segment(cfg: &RunConfig, windows: &[&Window]) -> Result<(Vec<SyntheticSequence>, usize)> {
    let owned: Vec<Window> = windows.iter().map(|w| (*w).clone()).collect();
    let graph: MultiGraph = build_multigraph(&owned, cfg.similar_value_epsilon)?;
    let mut out = Vec::new();
    let mut short = 0;
    for w in windows {
        let start = graph
            .node_of(&w.ticker, 0)
            .ok_or_else(|| Error::Integrity(format!("ticker {} missing from multigraph", w.ticker)))?;
        let scale = graph.scales[&w.ticker];
        let (seqs, s) = candidates_for(cfg, Method::Nvmg, w, |seed| {
            let walk = walk_config(cfg, seed).with_start(start);
            let scaled = generate_sequence(&graph, &walk)?;
            Ok(SyntheticSequence::from_scaled(
                scaled,
                scale,
                Provenance {
                    method: Method::Nvmg.to_string(),
                    ticker: w.ticker.clone(),
                    window_start: w.start_index,
                    seed,
                    walk: Some(walk),
                },
            ))
        })?;
        out.extend(seqs);
        short += usize::from(s);
    }
    Ok((out, short))
}

/// Kept sequences of one unit and how many of its windows came up short.
type UnitOutput = Result<(Vec<SyntheticSequence>, usize)>;

fn collect_units(
    results: Vec<(UnitOutput, RuntimeRecord)>,
    emit_scaled: bool,
    gen: &mut Generation,
    method: Method,
) -> Result<()> {
    let mut records = Vec::new();
    for (res, rec) in results {
        gen.runtime.push(rec);
        let (seqs, short) = res?;
        gen.short_windows += short;
        records.extend(seqs.iter().map(|s| GeneratedRecord::from_sequence(s, emit_scaled)));
    }
    records.sort_by(|a, b| (&a.ticker, a.window_start).cmp(&(&b.ticker, b.window_start)));
    gen.records.insert(method, records);
    Ok(())
}

/// Runs every configured method over `windows` (scaled, any order).
///
/// Units are fanned out over `exec`; each unit's seeds depend only on the
/// master seed and the unit's identity, so the output is independent of the
/// worker count.
pub fn generate_all(cfg: &RunConfig, windows: &[Window], exec: &Executor) -> Result<Generation> {
    cfg.validate()?;
    let mut by_ticker: BTreeMap<&str, Vec<Window>> = BTreeMap::new();
    for w in windows {
        by_ticker.entry(&w.ticker).or_default().push(w.clone());
    }
    let tickers: Vec<(&str, Vec<Window>)> = by_ticker.into_iter().collect();
    let mut segments: BTreeMap<SegmentKey, Vec<&Window>> = BTreeMap::new();
    for w in windows {
        segments.entry(w.segment()).or_default().push(w);
    }
    let segments: Vec<(SegmentKey, Vec<&Window>)> = segments.into_iter().collect();

    let mut gen = Generation::default();
    for &method in &cfg.methods {
        let results = match method {
            Method::Nvmg => exec.map(&segments, |(key, ws)| {
                time_unit(&key.to_string(), UnitKind::Segment, method.as_str(), || per_segment(cfg, ws))
            }),
            _ => exec.map(&tickers, |(ticker, ws)| {
                time_unit(ticker, UnitKind::Ticker, method.as_str(), || per_ticker(cfg, method, ws))
            }),
        };
        collect_units(results, cfg.emit_scaled, &mut gen, method)?;
    }
    if gen.short_windows > 0 {
        log::warn!("{} windows yielded fewer than k sequences", gen.short_windows);
    }
    Ok(gen)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_config_snapshot(cfg: &RunConfig) -> Result<()> {
    let path = cfg.out_dir.join(CONFIG_FILE);
    std::fs::write(&path, cfg.to_toml()?).map_err(|e| Error::io(&path, e))
}

#[derive(Debug, Clone)]
pub struct GenerateSummary {
    pub windows: usize,
    pub sequences: BTreeMap<Method, usize>,
    pub totals: Vec<MethodTotal>,
}

/// Loads the input, generates every method and writes the outputs.
pub fn cmd_generate(cfg: &RunConfig, exec: &Executor) -> Result<GenerateSummary> {
    cfg.validate()?;
    let series = load_series(&cfg.input)?;
    let windows = build_windows(&series, cfg.window, cfg.stride())?;
    if windows.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no complete windows of length {} in {}",
            cfg.window,
            cfg.input.display()
        )));
    }
    log::info!("{} windows from {} tickers", windows.len(), series.len());
    let gen = generate_all(cfg, &windows, exec)?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    write_config_snapshot(cfg)?;
    let path = cfg.out_dir.join(WINDOWS_FILE);
    let mut w = create(&path)?;
    write_windows(&windows, &mut w)?;
    finish(w, &path)?;
    for (&method, records) in &gen.records {
        let path = generated_path(&cfg.out_dir, method);
        let mut w = create(&path)?;
        write_generated(records, &mut w)?;
        finish(w, &path)?;
    }
    let path = cfg.out_dir.join(RUNTIME_FILE);
    let mut w = create(&path)?;
    write_runtime_log(&gen.runtime, &mut w)?;
    finish(w, &path)?;

    Ok(GenerateSummary {
        windows: windows.len(),
        sequences: gen.records.iter().map(|(m, r)| (*m, r.len())).collect(),
        totals: aggregate(&gen.runtime),
    })
}

/// Real windows as written by `cmd_generate`.
pub fn load_real_windows(out_dir: &Path) -> Result<Vec<Window>> {
    let records = read_windows(open(&out_dir.join(WINDOWS_FILE))?)?;
    Ok(records
        .into_iter()
        .map(|r| Window::from_raw(r.ticker, r.start_index, r.values))
        .collect())
}

pub fn load_generated(out_dir: &Path, methods: &[Method]) -> Result<BTreeMap<String, Vec<GeneratedRecord>>> {
    methods
        .iter()
        .map(|&m| Ok((m.to_string(), read_generated(open(&generated_path(out_dir, m))?)?)))
        .collect()
}

/// Embedding of a balanced sample of real windows and synthetic sequences of
/// one method, in raw price space.
#[derive(Debug, Clone)]
pub struct MethodEmbedding {
    pub coords: Vec<[f64; 2]>,
    pub origins: Vec<Origin>,
    pub mixing: f64,
}

pub fn embed_method(
    cfg: &RunConfig,
    method: &str,
    real: &[Window],
    synthetic: &[GeneratedRecord],
    exec: &Executor,
) -> Result<MethodEmbedding> {
    let ev = &cfg.evaluation;
    let n = ev.embed_per_origin.min(real.len()).min(synthetic.len());
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &format!("embed-sample/{method}")));
    let mut pick = |len: usize| {
        let mut idx = sample(&mut rng, len, n).into_vec();
        idx.sort_unstable();
        idx
    };
    let real_idx = pick(real.len());
    let syn_idx = pick(synthetic.len());
    let points: Vec<Vec<f64>> = real_idx
        .iter()
        .map(|&i| real[i].raw_values.clone())
        .chain(syn_idx.iter().map(|&i| synthetic[i].values.clone()))
        .collect();
    let origins: Vec<Origin> = std::iter::repeat_n(Origin::Real, n)
        .chain(std::iter::repeat_n(Origin::Synthetic, n))
        .collect();
    if points.iter().any(|p| p.len() != points[0].len()) {
        return Err(Error::InvalidInput(format!(
            "{method}: synthetic and real sequences differ in length"
        )));
    }
    let mut tsne = ev.embedding.clone();
    tsne.seed = derive_seed(cfg.seed, &format!("embed/{method}"));
    let emb = embed_2d(&points, &tsne, exec)?;
    let origins: Vec<Origin> = emb.indices.iter().map(|&i| origins[i]).collect();
    let mixing = mixing_score(&emb.coords, &origins, ev.mixing_k, exec)?;
    Ok(MethodEmbedding {
        coords: emb.coords,
        origins,
        mixing,
    })
}

fn write_embedding(path: &Path, emb: &MethodEmbedding) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["x", "y", "origin"])?;
    for (c, o) in emb.coords.iter().zip(&emb.origins) {
        let origin = match o {
            Origin::Real => "real",
            Origin::Synthetic => "synthetic",
        };
        w.write_record([c[0].to_string().as_str(), c[1].to_string().as_str(), origin])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Experiment plus embedding diagnostics for every configured method.
pub fn evaluate_all(
    cfg: &RunConfig,
    real: &[Window],
    synthetic: &BTreeMap<String, Vec<GeneratedRecord>>,
    exec: &Executor,
) -> Result<(EvalReport, BTreeMap<String, MethodEmbedding>)> {
    let ev = &cfg.evaluation;
    let mut report = run_experiment(real, synthetic, &ev.split, &ev.classifier, cfg.seed)?;
    report.config = serde_json::to_value(cfg)?;
    let mut embeddings = BTreeMap::new();
    for result in &mut report.methods {
        let records = &synthetic[&result.method];
        let note = |msg: String, slot: &mut Option<String>| {
            *slot = Some(match slot.take() {
                Some(prev) => format!("{prev}; {msg}"),
                None => msg,
            })
        };
        if records.is_empty() || real.is_empty() {
            note("embedding skipped: no points".into(), &mut result.note);
            continue;
        }
        match embed_method(cfg, &result.method, real, records, exec) {
            Ok(emb) => {
                result.mixing_score = Some(emb.mixing);
                embeddings.insert(result.method.clone(), emb);
            }
            Err(e) if !matches!(e, Error::Io { .. }) => {
                note(format!("embedding skipped: {e}"), &mut result.note);
            }
            Err(e) => return Err(e),
        }
    }
    Ok((report, embeddings))
}

/// Reads the outputs of `cmd_generate` and writes the report and embedding
/// exports.
pub fn cmd_evaluate(cfg: &RunConfig, exec: &Executor) -> Result<EvalReport> {
    cfg.validate()?;
    let real = load_real_windows(&cfg.out_dir)?;
    let synthetic = load_generated(&cfg.out_dir, &cfg.methods)?;
    let assignment = chronological_split(&real, &cfg.evaluation.split)?;
    log::info!(
        "split: {} train / {} validation / {} test windows",
        assignment.train.len(),
        assignment.validation.len(),
        assignment.test.len()
    );
    let (report, embeddings) = evaluate_all(cfg, &real, &synthetic, exec)?;
    for (method, emb) in &embeddings {
        let m: Method = method.parse()?;
        write_embedding(&embedding_path(&cfg.out_dir, m), emb)?;
    }
    write_report(&cfg.out_dir.join(REPORT_FILE), &report)?;
    Ok(report)
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, report)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    finish(w, path)
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    Ok(serde_json::from_reader(open(path)?)?)
}

/// Per-method totals as a fixed-width table.
pub fn format_totals(totals: &[MethodTotal]) -> String {
    let mut s = format!("{:<8} {:<8} {:>6} {:>14}\n", "method", "unit", "units", "total");
    for t in totals {
        let kind = match t.unit_kind {
            UnitKind::Ticker => "ticker",
            UnitKind::Segment => "segment",
        };
        s.push_str(&format!("{:<8} {:<8} {:>6} {:>14}\n", t.method, kind, t.units, t.formatted()));
    }
    s
}

/// Aggregates the runtime log, writes the summary table and, when an
/// evaluation report exists, records the totals in it.
pub fn cmd_report(cfg: &RunConfig) -> Result<String> {
    let records = read_runtime_log(open(&cfg.out_dir.join(RUNTIME_FILE))?)?;
    let invalid = records.iter().filter(|r| !r.valid).count();
    if invalid > 0 {
        log::warn!("{invalid} runtime records are flagged invalid");
    }
    let totals = aggregate(&records);
    let mut table = format_totals(&totals);

    let report_path = cfg.out_dir.join(REPORT_FILE);
    if report_path.exists() {
        let mut report = read_report(&report_path)?;
        report.runtime_totals = totals.iter().map(|t| (t.method.clone(), t.formatted())).collect();
        write_report(&report_path, &report)?;
        table.push('\n');
        table.push_str(&format_auc_table(&report));
    }
    let path = cfg.out_dir.join(SUMMARY_FILE);
    std::fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    Ok(table)
}

pub fn format_auc_table(report: &EvalReport) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    let mut s = format!(
        "{:<8} {:>8} {:>10} {:>8} {:>8}\n",
        "method", "real", "synthetic", "mixed", "mixing"
    );
    for m in &report.methods {
        s.push_str(&format!(
            "{:<8} {:>8} {:>10} {:>8} {:>8}\n",
            m.method,
            cell(Some(m.auc_real)),
            cell(m.auc_synthetic),
            cell(m.auc_mixed),
            cell(m.mixing_score)
        ));
    }
    s
}
