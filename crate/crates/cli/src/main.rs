use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vgsynth::config::parse_methods;
use vgsynth::corpus::CorpusSpec;
use vgsynth::pipeline::{cmd_evaluate, cmd_generate, cmd_report, format_auc_table, format_totals};
use vgsynth::selftest::run_selftest;
use vgsynth::{Error, Executor, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "vgsynth", version, about = "Visibility-graph synthetic time series")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per CPU).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Window length.
    #[arg(long, global = true, value_parser = ["20", "60"])]
    window: Option<String>,
    /// Comma-separated methods: nvg,hvg,nvmg,vrp.
    #[arg(long, global = true)]
    methods: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Input CSV with date,ticker,close columns.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build graphs, walk them and write the generated sequences.
    Generate,
    /// Train and score the classifiers, embed and write the report.
    Evaluate,
    /// Check the production routines against brute-force oracles.
    Selftest,
    /// Summarize runtimes (and AUCs, when a report exists).
    Report,
    /// Write a seeded regime-switching price corpus as CSV.
    Corpus {
        #[arg(long, default_value_t = 20)]
        tickers: usize,
        #[arg(long, default_value_t = 500)]
        days: usize,
        #[arg(long, default_value_t = 7)]
        corpus_seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load_config(cli: &Cli) -> vgsynth::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(w) = &cli.window {
        cfg.window = w.parse().expect("restricted by clap");
    }
    if let Some(list) = &cli.methods {
        cfg.methods = parse_methods(list)?;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(input) = &cli.input {
        cfg.input = input.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> vgsynth::Result<bool> {
    match &cli.command {
        Command::Selftest => {
            let report = run_selftest();
            println!("{report}");
            return Ok(report.passed());
        }
        Command::Corpus { tickers, days, corpus_seed, output } => {
            let series = CorpusSpec::new(*tickers, *days, *corpus_seed).generate();
            let file = std::fs::File::create(output).map_err(|e| Error::Io {
                path: output.clone(),
                source: e,
            })?;
            vgsynth::ingest::write_series(&series, std::io::BufWriter::new(file))?;
            println!("wrote {tickers} tickers x {days} days to {}", output.display());
            return Ok(true);
        }
        _ => {}
    }
    let cfg = load_config(cli)?;
    let exec = Executor::with_workers(cfg.workers);
    match cli.command {
        Command::Generate => {
            let summary = cmd_generate(&cfg, &exec)?;
            println!("{} windows", summary.windows);
            for (method, n) in &summary.sequences {
                println!("{method}: {n} sequences");
            }
            print!("{}", format_totals(&summary.totals));
        }
        Command::Evaluate => {
            let report = cmd_evaluate(&cfg, &exec)?;
            print!("{}", format_auc_table(&report));
        }
        Command::Report => print!("{}", cmd_report(&cfg)?),
        Command::Selftest | Command::Corpus { .. } => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e}");
            let config_missing = matches!(&e, Error::MissingFile(p) if Some(p) == cli.config.as_ref());
            if e.is_config_error() || config_missing {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
