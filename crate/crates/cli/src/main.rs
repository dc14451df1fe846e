use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use plrnet::commands::{run_eval, run_generate, run_sweep, run_train, Split, CHECKPOINT_FILE};
use plrnet::parallel::Threaded;
use plrnet::{CliError, LoadedConfig, Result};

#[derive(Parser)]
#[command(name = "plrnet", version, about = "Low-rank tensor-function surrogates for EM responses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset CSV and its metadata sidecar.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `dataset.seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one model and write checkpoint, report, curve and metrics.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `train.seed` and `model.init_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a checkpoint on a dataset split.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `checkpoint.json` in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// CSV to score instead of the configured dataset.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train several configs and tabulate them.
    Sweep {
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Overrides every run's `train.seed` and `model.init_seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let mut cfg = LoadedConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.config.dataset.seed = s;
            }
            let dir = cfg.out_dir(out.as_deref())?;
            let (path, rows) = run_generate(&cfg, &dir)?;
            println!("wrote {rows} rows to {}", path.display());
        }
        Command::Train { config, seed, out } => {
            let mut cfg = LoadedConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.config.override_train_seed(s);
            }
            let dir = cfg.out_dir(out.as_deref())?;
            let evaluator = Threaded::from_env()?;
            let o = run_train(&cfg, &dir, &evaluator, evaluator.threads())?;
            let m = o.report.metrics.as_ref().expect("successful runs carry metrics");
            println!(
                "{}: {} params, {} epochs (best {}), test MRE {:.3e}, MaxRE {:.3e}, {:.1} s -> {}",
                o.report.label,
                m.param_count,
                m.epochs_run,
                m.best_epoch,
                m.test_mre,
                m.test_maxre,
                o.wall_seconds,
                dir.display()
            );
        }
        Command::Eval { config, checkpoint, data, split, out } => {
            let cfg = LoadedConfig::load(&config)?;
            let dir = cfg.out_dir(out.as_deref())?;
            let ck = checkpoint.unwrap_or_else(|| dir.join(CHECKPOINT_FILE));
            let split = match split {
                SplitArg::Train => Split::Train,
                SplitArg::Test => Split::Test,
                SplitArg::All => Split::All,
            };
            let f = run_eval(&cfg, &ck, data.as_deref(), split, &dir)?;
            println!(
                "{} on {} rows ({}): MRE {:.3e}, MaxRE {:.3e}",
                f.result.label, f.result.samples, f.split, f.result.test_mre, f.result.test_maxre
            );
        }
        Command::Sweep { configs, seed, out } => {
            let evaluator = Threaded::from_env()?;
            let o = run_sweep(&configs, seed, Path::new(&out), &evaluator, evaluator.threads())?;
            print!("{}", o.table.render_text());
            let failed = o.table.failed().len();
            if failed > 0 {
                return Err(CliError::PartialSweep { failed, total: configs.len() });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
