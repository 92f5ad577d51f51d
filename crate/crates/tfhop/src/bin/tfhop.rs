use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use tfhop::analysis::certify;
use tfhop::config::ScenarioConfig;
use tfhop::harness::{export_rd_cube, read_history, run_experiment, write_json, Algorithm, ExperimentSpec, Fidelity};

#[derive(Parser)]
#[command(name = "tfhop", about = "Time-frequency hopping radar interference games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Random,
    Nash,
    External,
    Internal,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Random => Algorithm::Random,
            Algo::Nash => Algorithm::Nash,
            Algo::External => Algorithm::External,
            Algo::Internal => Algorithm::Internal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Fid {
    Fast,
    Waveform,
}

impl From<Fid> for Fidelity {
    fn from(f: Fid) -> Self {
        match f {
            Fid::Fast => Fidelity::Fast,
            Fid::Waveform => Fidelity::Waveform,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run trials of one algorithm and write metrics files.
    Run {
        /// Scenario TOML; the bundled baseline config when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "fast")]
        fidelity: Fid,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute regret certificates from a logged history.
    Certify {
        #[arg(long)]
        history: PathBuf,
        /// Write the certificate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the range-Doppler cube of one radar, waveform fidelity.
    Rdmap {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// 1-based radar index.
        #[arg(long)]
        radar: usize,
        #[arg(long, value_enum, default_value = "internal")]
        algo: Algo,
        /// 1-based epoch; the last epoch when omitted.
        #[arg(long)]
        epoch: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the bundled baseline scenario config.
    Config,
}

fn load(spec: &Option<PathBuf>) -> anyhow::Result<ScenarioConfig> {
    match spec {
        None => Ok(ScenarioConfig::baseline()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ScenarioConfig::parse(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Run {
            spec,
            algo,
            epochs,
            trials,
            seed,
            fidelity,
            out,
        } => {
            let mut s = ExperimentSpec::new(load(&spec)?, algo.into(), trials);
            s.epochs = epochs.unwrap_or(s.epochs);
            s.seed = seed.unwrap_or(s.seed);
            s.fidelity = fidelity.into();
            s.out_dir = Some(out.clone());
            let res = run_experiment(&s)?;
            let last = res.summary.per_epoch.last().expect("at least one epoch");
            println!(
                "{} trials={} epochs={} final sinr_db={:.2}±{:.2} collision={:.4} eps_ext={:.4} eps_int={:.4}",
                s.algorithm.name(),
                s.trials,
                s.epochs,
                last.sinr_db_mean,
                last.sinr_db_std,
                last.collision_mean,
                res.summary.eps_ext_mean,
                res.summary.eps_int_mean
            );
            println!("wrote {}", out.display());
        }
        Cmd::Certify { history, out } => {
            let h = read_history(&history)?;
            let cert = certify(&h)?;
            match out {
                Some(p) => write_json(&p, &cert)?,
                None => println!("{}", serde_json::to_string_pretty(&cert)?),
            }
        }
        Cmd::Rdmap {
            spec,
            radar,
            algo,
            epoch,
            epochs,
            seed,
            out,
        } => {
            let mut s = ExperimentSpec::new(load(&spec)?, algo.into(), 1);
            s.epochs = epochs.unwrap_or(s.epochs);
            s.seed = seed.unwrap_or(s.seed);
            s.fidelity = Fidelity::Waveform;
            let r = export_rd_cube(&s, radar, epoch.unwrap_or(s.epochs), &out)?;
            println!("{}", serde_json::to_string_pretty(&r.export)?);
        }
        Cmd::Config => print!("{}", ScenarioConfig::baseline().to_toml()),
    }
    Ok(())
}
