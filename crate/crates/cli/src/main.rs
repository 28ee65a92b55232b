use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rsgd_cli::{
    cmd_analyze, cmd_compare, cmd_gen_data, cmd_run, cmd_tradeoff, tradeoff_text, AnalyzeConfig, CliError, CliResult,
    ExperimentConfig, TradeoffConfig,
};

#[derive(Parser)]
#[command(name = "rsgd", version, about = "Riemannian SGD experiments with growing batch sizes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the dataset of a config's [problem] section to disk.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run every seed of an experiment and write telemetry plus a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Comma-separated seeds overriding run.seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Compare experiments by seed-averaged gradient norm against SFO.
    Compare {
        /// Repeat once per experiment.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Evaluate the convergence bounds and SFO complexity.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Also write analyze.json here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate the batch-growth hyperparameter trade-offs.
    Tradeoff {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_experiment(path: &Path, seeds: &Option<Vec<u64>>) -> CliResult<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    match seeds {
        Some(s) => {
            let cfg = cfg.with_seeds(s.clone());
            cfg.validate()?;
            Ok(cfg)
        }
        None => Ok(cfg),
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::GenData { config, output } => {
            let cfg = load_experiment(&config, &None)?;
            let dir = output.unwrap_or_else(|| cfg.run.output_dir.clone());
            let out = cmd_gen_data(&cfg.problem.data, &dir)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", out.data_path.display());
            if let Some(p) = out.truth_path {
                println!("wrote {}", p.display());
            }
        }
        Command::Run { config, output, seeds } => {
            let cfg = load_experiment(&config, &seeds)?;
            let dir = output.unwrap_or_else(|| cfg.run.output_dir.clone());
            let out = cmd_run(&cfg, &dir)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            for (label, record) in out.labels.iter().zip(&out.records) {
                let last = record.rows.last();
                println!(
                    "{label}: total_sfo = {}, min_grad_norm_sq = {:e}, final_loss = {}, final_grad_norm = {}",
                    record.total_sfo,
                    record.min_grad_norm_sq,
                    last.map_or(f64::NAN, |r| r.loss),
                    last.map_or(f64::NAN, |r| r.grad_norm)
                );
            }
            println!("wrote {}", out.summary_path.display());
        }
        Command::Compare { config, eps, output, seeds } => {
            let cfgs = config.iter().map(|p| load_experiment(p, &seeds)).collect::<CliResult<Vec<_>>>()?;
            let dir = output.unwrap_or_else(|| cfgs[0].run.output_dir.clone());
            let report = cmd_compare(&cfgs, eps, &dir)?;
            print!("{report}");
        }
        Command::Analyze { config, output } => {
            let report = cmd_analyze(&AnalyzeConfig::load(&config)?)?;
            print!("{report}");
            if let Some(dir) = output {
                std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                let path = dir.join("analyze.json");
                let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
                std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
            }
        }
        Command::Tradeoff { config, output } => {
            let cfg = match config {
                Some(p) => TradeoffConfig::load(p)?,
                None => TradeoffConfig::default(),
            };
            let tables = cmd_tradeoff(&cfg, output.as_deref())?;
            print!("{}", tradeoff_text(&tables));
        }
    }
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { context: format!("cannot write {}", path.display()), source }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
