//! `ciphermimic`: generate datasets, train mimic networks, evaluate and rank
//! cipher strength.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ciphermimic::{Activation, ArchKind, Error, FeatureEncoding, Format, OptimizerConfig, OracleSpec};

use crate::config::{parse_count, preset, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "ciphermimic", version, about = "Cipher strength evaluation by neural mimicry")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write disjoint train and test pair files plus a manifest.
    Gen(Common),
    /// Train every suite network on existing pair files.
    Train(Common),
    /// Run the data-doubling evaluation and write a security indicator.
    Eval(Common),
    /// Rank indicator files, strongest cipher first.
    Compare {
        /// Indicator JSON files.
        #[arg(required = true)]
        indicators: Vec<PathBuf>,
        /// Match rates closer than this count as equal.
        #[arg(long, default_value_t = ciphermimic::eval::DEFAULT_CMR_TOLERANCE)]
        tolerance: f64,
        /// Also write ranking.csv here.
        #[arg(long, env = "CIPHERMIMIC_OUT")]
        out: Option<PathBuf>,
    },
    /// Collect curves and indicators under run directories into plot-ready CSVs.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Where to write curves.csv, sweep.csv and report.txt.
        #[arg(long, env = "CIPHERMIMIC_OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML config, or a manifest JSON from an earlier run.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(short, long, env = "CIPHERMIMIC_OUT")]
    out: Option<PathBuf>,
    /// Cipher in compact form, e.g. `des:rounds=1` or `hitag2`.
    #[arg(long)]
    cipher: Option<OracleSpec>,
    /// Root seed for data, initialisation and the evaluation loop.
    #[arg(long)]
    seed: Option<u64>,
    /// Training pairs, e.g. 65536 or 2^16.
    #[arg(long, value_parser = parse_count)]
    count: Option<usize>,
    /// Test pairs.
    #[arg(long, value_parser = parse_count)]
    test_count: Option<usize>,
    /// Pair file format: binary or jsonl.
    #[arg(long)]
    format: Option<Format>,
    /// Pair file whose inputs generated sets must avoid.
    #[arg(long)]
    exclude: Option<PathBuf>,
    /// Training pair file (default: <out>/train.<ext>).
    #[arg(long)]
    train_data: Option<PathBuf>,
    /// Test pair file (default: <out>/test.<ext>).
    #[arg(long)]
    test_data: Option<PathBuf>,
    /// Architectures (repeat or comma-separate).
    #[arg(long = "arch", value_delimiter = ',')]
    archs: Vec<ArchKind>,
    /// Activations (repeat or comma-separate).
    #[arg(long = "activation", value_delimiter = ',')]
    activations: Vec<Activation>,
    /// Training preset applied before other training flags: default or fast.
    #[arg(long)]
    preset: Option<String>,
    /// Epoch budget per network.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam step size.
    #[arg(long)]
    lr: Option<f64>,
    /// Input features: zero_one or plus_minus_one.
    #[arg(long)]
    encoding: Option<FeatureEncoding>,
    /// log2 of the first training-set size.
    #[arg(long)]
    m1_start: Option<u32>,
    /// log2 of the test-set size.
    #[arg(long)]
    m2: Option<u32>,
    /// Largest log2 training-set size to try.
    #[arg(long)]
    max_comp_data: Option<u32>,
    /// Success threshold (default: the cipher's base match rate).
    #[arg(long)]
    cmr_base: Option<f64>,
    /// Extend the training set between doublings instead of redrawing it.
    #[arg(long)]
    grow: bool,
    /// Networks trained concurrently.
    #[arg(short, long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    /// Config file first, then flags on top.
    fn resolve(&self) -> ciphermimic::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::empty(),
        };
        if let Some(v) = &self.out {
            cfg.out_dir = Some(v.clone());
        }
        if let Some(v) = &self.cipher {
            cfg.cipher = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        let d = &mut cfg.data;
        if let Some(v) = self.count {
            d.train_count = v;
        }
        if let Some(v) = self.test_count {
            d.test_count = v;
        }
        if let Some(v) = self.format {
            d.format = v;
        }
        if let Some(v) = &self.exclude {
            d.exclude = Some(v.clone());
        }
        if let Some(v) = &self.train_data {
            d.train_path = Some(v.clone());
        }
        if let Some(v) = &self.test_data {
            d.test_path = Some(v.clone());
        }
        if !self.archs.is_empty() {
            cfg.suite.architectures = self.archs.clone();
        }
        if !self.activations.is_empty() {
            cfg.suite.activations = self.activations.clone();
        }
        if let Some(name) = &self.preset {
            let shuffle = cfg.train.shuffle_seed;
            cfg.train = preset(name).map_err(Error::Config)?;
            cfg.train.shuffle_seed = shuffle;
        }
        let t = &mut cfg.train;
        if let Some(v) = self.epochs {
            t.max_epochs = v;
        }
        if let Some(v) = self.batch_size {
            t.batch_size = v;
        }
        if let Some(v) = self.lr {
            t.optimizer = OptimizerConfig::adam(v);
        }
        if let Some(v) = self.encoding {
            t.encoding = v;
        }
        let e = &mut cfg.eval;
        if let Some(v) = self.m1_start {
            e.m1_start = v;
        }
        if let Some(v) = self.m2 {
            e.m2 = v;
        }
        if let Some(v) = self.max_comp_data {
            e.max_comp_data = v;
        }
        if let Some(v) = self.cmr_base {
            e.cmr_base = Some(v);
        }
        if self.grow {
            e.grow = true;
        }
        if self.jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Capacity(_) | Error::Length(_) | Error::Shape(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let argv: Vec<String> = std::env::args().collect();
    let result = match &cli.command {
        Command::Gen(c) => c.resolve().and_then(|cfg| commands::gen(&cfg, &argv)),
        Command::Train(c) => c.resolve().and_then(|cfg| commands::train(&cfg, c.jobs, &argv)),
        Command::Eval(c) => c.resolve().and_then(|cfg| commands::eval(&cfg, c.jobs, &argv)),
        Command::Compare { indicators, tolerance, out } => commands::compare(indicators, *tolerance, out.as_deref()),
        Command::Report { dirs, out } => commands::report(dirs, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
