use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spoofkit::pa_sim::SeedMode;
use spoofkit::protocol::Subset;
use spoofkit_cli::config::RunConfig;
use spoofkit_cli::extract::FeatureKind;
use spoofkit_cli::{baseline, evaluate, extract, rank, simulate};

#[derive(Debug, Parser)]
#[command(name = "spoofkit", version, about = "Spoofing countermeasure evaluation toolkit")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for GMM initialization and PA simulation; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SubsetArg {
    Train,
    Dev,
    Eval,
}

impl From<SubsetArg> for Subset {
    fn from(s: SubsetArg) -> Self {
        match s {
            SubsetArg::Train => Subset::Train,
            SubsetArg::Dev => Subset::Dev,
            SubsetArg::Eval => Subset::Eval,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Train,
    Eval,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract CQCC or LFCC features for a list of WAV files.
    Extract {
        /// One `PATH` or `ID PATH` per line.
        #[arg(long)]
        audio_list: PathBuf,
        #[arg(long, value_enum)]
        feature: FeatureKind,
    },
    /// Train the bona fide and spoof GMMs.
    Train {
        /// Feature manifest (or the directory holding it).
        #[arg(long)]
        features: PathBuf,
        /// Protocol file `SPEAKER TRIAL SYSTEM ATTACK KEY`.
        #[arg(long)]
        protocol: PathBuf,
        /// Only use protocol trials of this partition.
        #[arg(long, value_enum)]
        subset: Option<SubsetArg>,
    },
    /// Score protocol trials with a trained model pair.
    Score {
        /// Directory holding bonafide.gmm and spoof.gmm.
        #[arg(long)]
        models: PathBuf,
        /// Feature manifest (or the directory holding it).
        #[arg(long)]
        features: PathBuf,
        /// Protocol file of the trials to score.
        #[arg(long)]
        protocol: PathBuf,
        /// Only score protocol trials of this partition.
        #[arg(long, value_enum)]
        subset: Option<SubsetArg>,
    },
    /// Tandem evaluation of one CM score file.
    Evaluate {
        /// CM score file `TRIAL ATTACK KEY SCORE`.
        #[arg(long)]
        cm: PathBuf,
        /// ASV score file with target, nontarget and spoof keys.
        #[arg(long)]
        asv: PathBuf,
        /// Restrict CM scores to this protocol and check their labels.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Also write det.svg.
        #[arg(long)]
        plot: bool,
    },
    /// Rank several submissions by pooled min t-DCF.
    Rank {
        /// One `TEAM_ID LABEL SCORE_FILE` per line.
        #[arg(long)]
        submissions: PathBuf,
        /// ASV score file shared by every submission.
        #[arg(long)]
        asv: PathBuf,
        /// Restrict each submission to this protocol and check its labels.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Entries summarized in boxplot.csv (overrides report.top_n).
        #[arg(long)]
        top: Option<usize>,
        /// Also write det.svg with the top entries.
        #[arg(long)]
        plot: bool,
    },
    /// Render a physical-access protocol through simulated rooms.
    SimulatePa {
        /// Protocol with acoustic ids in the system column.
        #[arg(long)]
        protocol: PathBuf,
        /// Directory with one `<trial_id>.wav` per protocol trial.
        #[arg(long)]
        sources: PathBuf,
        /// Seed space (overrides pa.mode).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker threads")?;
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?.with_seed(cli.seed);
    let out = cli.out;
    let (outputs, summary) = match cli.command {
        Command::Extract { audio_list, feature } => {
            (extract::run(&audio_list, feature, &cfg, &out)?, None)
        }
        Command::Train { features, protocol, subset } => (
            baseline::run_train(&features, &protocol, subset.map(Into::into), &cfg, &out)?,
            None,
        ),
        Command::Score { models, features, protocol, subset } => (
            baseline::run_score(&models, &features, &protocol, subset.map(Into::into), &out)?,
            None,
        ),
        Command::Evaluate { cm, asv, protocol, plot } => {
            cfg.report.plot |= plot;
            let (o, report) = evaluate::run(&cm, &asv, protocol.as_deref(), &cfg, &out)?;
            (o, Some(report.summary()))
        }
        Command::Rank { submissions, asv, protocol, top, plot } => {
            cfg.report.plot |= plot;
            if let Some(n) = top {
                cfg.report.top_n = n;
            }
            let (o, ranking) = rank::run(&submissions, &asv, protocol.as_deref(), &cfg, &out)?;
            (o, Some(ranking.to_tsv().trim_end().to_string()))
        }
        Command::SimulatePa { protocol, sources, mode } => {
            let mode = mode.map(|m| match m {
                ModeArg::Train => SeedMode::Train,
                ModeArg::Eval => SeedMode::Eval,
            });
            let (o, m) = simulate::run(&protocol, &sources, mode, &cfg, &out)?;
            (o, Some(format!("rendered {} trial(s)", m.trials.len())))
        }
    };
    let written = outputs.commit()?;
    if let Some(s) = summary {
        println!("{s}");
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
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
