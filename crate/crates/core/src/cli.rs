//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::harness::{
    run_cdf_experiment, run_m_sweep, ExperimentConfig, DL_CDF_SERIES, SWEEP_SERIES, UL_CDF_SERIES,
};
use crate::output::{cdf_rows, sweep_rows, write_rows, OutputRow};
use crate::precoding::PowerMode;
use crate::scenario::{ScenarioConfig, UePlacement};
use crate::validate;

#[derive(Debug, Parser)]
#[command(name = "cellfree", version, about = "Cell-free massive MIMO SE experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uplink SE CDFs (MMSE-c, RCMMSE-c, GMR-c, RCMMSE-d, GMR-d, MR-d).
    FigCdfUl(RunArgs),
    /// Downlink SE CDFs under duality precoding.
    FigCdfDl {
        #[command(flatten)]
        run: RunArgs,
        /// Power split used by every DL series.
        #[arg(long, value_parser = parse_power_mode)]
        eta: Option<PowerMode>,
    },
    /// Average uplink SE versus number of APs.
    Sweep(RunArgs),
    /// Run the built-in self-check suite.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config file; missing keys keep the experiment defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub drops: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_power_mode(s: &str) -> std::result::Result<PowerMode, String> {
    match s {
        "network_wide_equal" => Ok(PowerMode::NetworkWideEqual),
        "per_ap_sqrt_beta" => Ok(PowerMode::PerApSqrtBeta),
        _ => Err("expected network_wide_equal or per_ap_sqrt_beta".into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    CdfUl,
    CdfDl,
    Sweep,
}

impl Experiment {
    pub fn base_config(self) -> ExperimentConfig {
        match self {
            Experiment::CdfUl => ExperimentConfig { series: UL_CDF_SERIES.to_vec(), ..Default::default() },
            Experiment::CdfDl => ExperimentConfig { series: DL_CDF_SERIES.to_vec(), ..Default::default() },
            Experiment::Sweep => ExperimentConfig {
                scenario: ScenarioConfig {
                    k: 4,
                    side_m: 1000.0,
                    ue_placement: UePlacement::CenteredCluster { spacing: 5.0 },
                    ..Default::default()
                },
                series: SWEEP_SERIES.to_vec(),
                sweep: Some(vec![25, 50, 100, 200, 400]),
                ..Default::default()
            },
        }
    }

    pub fn id(self, cfg: &ExperimentConfig) -> String {
        match self {
            Experiment::CdfUl => "fig_cdf_ul".into(),
            Experiment::CdfDl => match cfg.dl_power {
                Some(p) => format!("fig_cdf_dl:eta={}", p.as_str()),
                None => "fig_cdf_dl".into(),
            },
            Experiment::Sweep => "sweep_m".into(),
        }
    }
}

/// Defaults, then the config file, then command-line overrides.
pub fn resolve_config(
    experiment: Experiment,
    args: &RunArgs,
    eta: Option<PowerMode>,
) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut cfg = file.resolve(experiment.base_config())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(d) = args.drops {
        cfg.n_drops = d;
    }
    if let Some(r) = args.realizations {
        cfg.n_realizations = r;
    }
    if eta.is_some() {
        cfg.dl_power = eta;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn experiment_rows(experiment: Experiment, cfg: &ExperimentConfig) -> Result<Vec<OutputRow>> {
    let id = experiment.id(cfg);
    match experiment {
        Experiment::CdfUl | Experiment::CdfDl => Ok(cdf_rows(&id, cfg, &run_cdf_experiment(cfg)?)),
        Experiment::Sweep => Ok(sweep_rows(&id, cfg, &run_m_sweep(cfg)?)),
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn run_experiment(experiment: Experiment, args: &RunArgs, eta: Option<PowerMode>) -> Result<()> {
    let cfg = resolve_config(experiment, args, eta)?;
    let rows = in_pool(args.threads, || experiment_rows(experiment, &cfg))??;
    match &args.out {
        Some(path) => {
            let file = File::create(path)?;
            write_rows(BufWriter::new(file), &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_rows(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::FigCdfUl(args) => run_experiment(Experiment::CdfUl, &args, None),
        Command::FigCdfDl { run, eta } => run_experiment(Experiment::CdfDl, &run, eta),
        Command::Sweep(args) => run_experiment(Experiment::Sweep, &args, None),
        Command::Validate { seed } => {
            let report = validate::run_suite(seed);
            let mut out = io::stdout().lock();
            let _ = writeln!(out, "{report}");
            return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
