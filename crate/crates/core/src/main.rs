use clap::{Parser, Subcommand};
use evokan::config::ExperimentConfig;
use evokan::experiment;
use evokan::Error;
use log::error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "evokan", version, about = "Evolutionary KAN solvers for time-dependent PDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the least-squares regularization.
    #[arg(long)]
    reg: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit, evolve and evaluate one configuration.
    Run(Common),
    /// Run every sweep entry for each solver kind.
    Sweep(Common),
    /// Run only the finite-difference reference.
    Oracle(Common),
    /// Check the configuration and exit.
    Validate(Common),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::UnsupportedDimension(_) => 1,
        Error::Numeric(_) | Error::UndefinedReference => 2,
        Error::Io(_) | Error::Csv(_) | Error::Checkpoint { .. } => 3,
    }
}

fn load(c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&c.config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read {}: {io}", c.config.display())),
        other => other,
    })?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.reg {
        cfg.time.regularization = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(c: &Common, cfg: &ExperimentConfig) -> PathBuf {
    c.out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| Path::new("out").to_path_buf())
}

fn execute(cmd: &Command) -> Result<u8, Error> {
    match cmd {
        Command::Validate(c) => {
            let cfg = load(c)?;
            println!("{}: ok ({} parameters)", c.config.display(), cfg.layers()?.iter().map(|l| l.param_count()).sum::<usize>());
            Ok(0)
        }
        Command::Run(c) => {
            let cfg = load(c)?;
            let dir = out_dir(c, &cfg);
            let out = experiment::run(&cfg)?;
            experiment::write_run(&out, &dir)?;
            if cfg.output.checkpoints {
                experiment::write_checkpoints(&out, &dir)?;
            }
            match out.final_error() {
                Some(e) => println!("{} {}: l2 error {e:.4e} at t={:.4e}", out.problem.name(), out.method.name(), out.evaluations.last().map_or(0.0, |v| v.time)),
                None => println!("{} {}: done", out.problem.name(), out.method.name()),
            }
            if out.run.completed() {
                Ok(0)
            } else {
                error!("run did not complete: {:?}", out.run.status);
                Ok(2)
            }
        }
        Command::Sweep(c) => {
            let cfg = load(c)?;
            let jobs = c.jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            let rows = experiment::sweep(&cfg, jobs)?;
            experiment::write_sweep(&rows, &out_dir(c, &cfg))?;
            for r in &rows {
                println!(
                    "{:>6} {:>6}: error {} cond {}",
                    r.method.name(),
                    r.points,
                    r.final_error().map_or("-".into(), |e| format!("{e:.4e}")),
                    r.run.max_condition().map_or("-".into(), |e| format!("{e:.3e}"))
                );
            }
            Ok(0)
        }
        Command::Oracle(c) => {
            let cfg = load(c)?;
            let out = experiment::oracle(&cfg)?;
            experiment::write_oracle(&out, &out_dir(c, &cfg))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EVOKAN_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
