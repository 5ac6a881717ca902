use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reszo::benchmarks::{save_dataset, Dataset};
use reszo::diagnostics::summarize_cd;
use reszo::harness::{
    export_merged_curves, export_results, grid_search, run_experiment, ExperimentConfig, ExperimentResult,
};
use reszo::optimizers::Method;
use reszo::{Result, ZoError};

#[derive(Parser)]
#[command(name = "reszo", version, about = "Zeroth-order optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Experiment file (TOML). A run manifest works too.
    #[arg(long)]
    config: PathBuf,
    /// Base seed; trial k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory (or file, for `compare`).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Keep every n-th exported row.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.base_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.output {
            cfg.output_path = Some(o.clone());
        }
        if let Some(s) = self.stride {
            cfg.stride = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(m) = self.method {
            cfg.optimizer.method = m;
        }
        if let Some(e) = self.eta {
            cfg.optimizer.eta = e;
        }
        if let Some(d) = self.delta {
            cfg.optimizer.delta = d;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run all trials of one experiment and export the curves.
    Run(Overrides),
    /// Grid-search step size and radius.
    Grid {
        #[command(flatten)]
        base: Overrides,
        /// Comma-separated step sizes.
        #[arg(long = "eta-grid", value_delimiter = ',', required = true)]
        eta_grid: Vec<f64>,
        /// Comma-separated radii.
        #[arg(long = "delta-grid", value_delimiter = ',', required = true)]
        delta_grid: Vec<f64>,
    },
    /// Single diagnostic run; prints max, p99 and mean of the C_d ratio.
    CdRatio(Overrides),
    /// Run several experiments and write one merged curve file.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Generate the benchmark data and save it as a dataset file.
    Dataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn summarize(result: &ExperimentResult) {
    let c = &result.curve;
    println!(
        "{} on {} (d={}): trials={} diverged={} queries={} initial_gap={:.6e} final_gap={:.6e}",
        result.config.optimizer.method,
        result.config.benchmark.problem.name(),
        result.config.benchmark.d,
        c.trials_used,
        c.diverged,
        c.queries.last().copied().unwrap_or(0),
        c.mean_gap[0],
        c.final_mean(),
    );
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let result = run_experiment(cfg)?;
    summarize(&result);
    if let Some(dir) = &cfg.output_path {
        export_results(&result, dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(result)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(o) => run(&o.load()?).map(|_| ()),
        Command::Grid {
            base,
            eta_grid,
            delta_grid,
        } => {
            let cfg = base.load()?;
            let r = grid_search(&cfg, &eta_grid, &delta_grid, base.trials)?;
            println!("eta,delta,score,queries_to_double_final,diverged_trials");
            for c in &r.cells {
                let q = c.queries_to_double_final.map(|q| q.to_string()).unwrap_or_default();
                println!("{:e},{:e},{:e},{q},{}", c.eta, c.delta, c.score, c.diverged_trials);
            }
            if !r.best.score.is_finite() {
                return Err(ZoError::ExperimentFailed("every grid cell diverged".into()));
            }
            println!(
                "best eta={:e} delta={:e} score={:e}",
                r.best.eta, r.best.delta, r.best.score
            );
            Ok(())
        }
        Command::CdRatio(o) => {
            let mut cfg = o.load()?;
            cfg.trials = 1;
            cfg.record_diagnostics = true;
            let result = run(&cfg)?;
            let trace = &result.traces[0];
            let s = summarize_cd(trace).ok_or_else(|| {
                ZoError::ExperimentFailed("no C_d values recorded (needs l-reszo and a known L)".into())
            })?;
            println!(
                "cd_ratio max={:.4} p99={:.4} mean={:.4} count={} argmax_iteration={}",
                s.max, s.p99, s.mean, s.count, s.argmax
            );
            Ok(())
        }
        Command::Compare {
            configs,
            output,
            seed,
            trials,
            stride,
        } => {
            let mut results = Vec::with_capacity(configs.len());
            for path in &configs {
                let mut cfg = ExperimentConfig::load(path)?;
                cfg.output_path = None;
                if let Some(s) = seed {
                    cfg.base_seed = s;
                }
                if let Some(t) = trials {
                    cfg.trials = t;
                }
                results.push((label(path, &cfg), run(&cfg)?));
            }
            let curves: Vec<(String, _)> = results.iter().map(|(l, r)| (l.clone(), &r.curve)).collect();
            export_merged_curves(&curves, &output, stride)?;
            println!("wrote {}", output.display());
            Ok(())
        }
        Command::Dataset { config, output } => {
            let cfg = ExperimentConfig::load(&config)?;
            save_dataset(&Dataset::generate(&cfg.benchmark)?, &output)?;
            println!("wrote {}", output.display());
            Ok(())
        }
    }
}

fn label(path: &Path, cfg: &ExperimentConfig) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    let method = cfg.optimizer.method.name().to_string();
    match stem {
        Some(s) if s != method => format!("{method}:{s}"),
        _ => method,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
