use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use dqd::domains::DOMAIN_NAMES;
use dqd::AlgorithmKind;
use dqd_bench::{parse_resolution, run_experiment, ExperimentConfig, Hyperparameters};

#[derive(Parser)]
#[command(name = "dqd-bench", version, about = "Run quality-diversity benchmark experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write metrics, archives, heatmaps and a summary.
    Run(RunArgs),
    /// List algorithm and domain names.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    domain: Option<String>,
    /// Label for output paths and the summary row.
    #[arg(long)]
    label: Option<String>,
    /// Solution dimension n.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    /// Archive resolution, e.g. 100x100.
    #[arg(long)]
    resolution: Option<String>,
    #[arg(long)]
    log_period: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the unnormalized-gradient OMG-MEGA preset.
    #[arg(long)]
    unnormalized: bool,
    /// Include solution vectors in archive CSVs.
    #[arg(long)]
    archive_solutions: bool,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    sigma_g: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// OG-MAP-Elites with independent perturbation and gradient operators.
    #[arg(long)]
    independent_operators: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.algorithm {
            c.algorithm = v;
        }
        if let Some(v) = self.domain {
            c.domain = v;
        }
        if let Some(v) = self.label {
            c.label = Some(v);
        }
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.iterations {
            c.iterations = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.seed {
            c.base_seed = v;
        }
        if let Some(v) = self.resolution {
            c.resolution = parse_resolution(&v)?;
        }
        if let Some(v) = self.log_period {
            c.log_period = v;
        }
        if let Some(v) = self.out {
            c.out = v;
        }
        c.unnormalized |= self.unnormalized;
        c.archive_solutions |= self.archive_solutions;
        let flags = Hyperparameters {
            batch_size: self.batch_size,
            sigma: self.sigma,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            sigma_g: self.sigma_g,
            eta: self.eta,
            og_independent_operators: self.independent_operators.then_some(true),
            ..Hyperparameters::default()
        };
        c.hyperparameters = c.hyperparameters.merged(&flags);
        Ok(c)
    }
}

fn run(args: RunArgs) -> Result<()> {
    let config = args.into_config()?;
    let output = run_experiment(&config)?;
    let s = &output.summary;
    println!(
        "{} on {} ({} trials): qd_score {:.2} ± {:.2}, coverage {:.2}% ± {:.2}, best {:.2} ± {:.2}",
        s.algorithm,
        s.domain,
        output.trials.len(),
        s.qd_score.mean,
        s.qd_score.se,
        100.0 * s.coverage.mean,
        100.0 * s.coverage.se,
        s.best.mean,
        s.best.se
    );
    println!("results written to {}", config.run_dir().display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            let names: Vec<_> = AlgorithmKind::ALL.iter().map(|k| k.name()).collect();
            println!("algorithms: {}", names.join(", "));
            println!("domains: {}", DOMAIN_NAMES.join(", "));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
