use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use nilm::config::SEED_ENV;
use nilm::{Overrides, RunConfig};

/// Appliance state detection from aggregate power with a multi-label RBM.
#[derive(Parser)]
#[command(name = "nilm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a household from a profiles CSV.
    Synth(Common),
    /// Train a model on the training split of a meter CSV.
    Train {
        #[command(flatten)]
        common: Common,
        /// Pick the hidden size from {32, 64, 128, 256} on the validation split.
        #[arg(long)]
        sweep: bool,
    },
    /// Score a model on the test split.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Also score the CO baseline.
        #[arg(long)]
        baseline: bool,
    },
    /// Label every window of an aggregate CSV.
    Predict(Common),
    /// Score the CO baseline on the test split.
    Baseline(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Meter CSV (timestamp, aggregate_w, dev_<name>_w ...).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Appliance profiles CSV.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Readings per window.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Gibbs steps per CD update.
    #[arg(long = "cd-k")]
    cd_k: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(self, sweep: bool, baseline: bool) -> Result<RunConfig> {
        let overrides = Overrides {
            window: self.window,
            hidden: self.hidden,
            lr: self.lr,
            cd_k: self.cd_k,
            epochs: self.epochs,
            batch: self.batch,
            seed: self.seed,
            threshold: self.threshold,
            out: self.out,
            data: self.data,
            profiles: self.profiles,
            model: self.model,
            sweep,
            baseline,
        };
        let env_seed = std::env::var(SEED_ENV).ok();
        RunConfig::resolve(self.config.as_deref(), env_seed.as_deref(), &overrides)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(c) => {
            let s = nilm::cmd_synth(&c.resolve(false, false)?)?;
            println!("readings {} windows {}", s.readings, s.windows);
            for (name, on) in s.on_windows {
                println!("{name}: {on} windows ON");
            }
        }
        Command::Train { common, sweep } => {
            let s = nilm::cmd_train(&common.resolve(sweep, false)?)?;
            for (h, f1) in &s.sweep {
                println!("hidden {h}: validation macro F1 {f1:.4}");
            }
            let first = s.reconstruction_errors.first().copied().unwrap_or(f64::NAN);
            let last = s.reconstruction_errors.last().copied().unwrap_or(f64::NAN);
            println!(
                "trained {} hidden units on {} windows; reconstruction error {first:.6} -> {last:.6}",
                s.n_hidden, s.train_windows
            );
            println!("model written to {}", s.model_path.display());
        }
        Command::Eval { common, baseline } => {
            for r in nilm::cmd_eval(&common.resolve(false, baseline)?)? {
                println!("{}: macro F1 {:.4}, micro F1 {:.4}", r.method, r.macro_f1, r.micro_f1);
            }
        }
        Command::Predict(c) => {
            let n = nilm::cmd_predict(&c.resolve(false, false)?)?;
            println!("{n} windows labelled");
        }
        Command::Baseline(c) => {
            let r = nilm::cmd_baseline(&c.resolve(false, false)?)?;
            println!("{}: macro F1 {:.4}, micro F1 {:.4}", r.method, r.macro_f1, r.micro_f1);
        }
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
