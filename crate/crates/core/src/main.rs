use clap::{Parser, Subcommand};
use relclock::runner::{self, exit_code, read_json, BenchConfig, RunConfig, SweepConfig};
use relclock::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Finite-clock relational dynamics experiments.
///
/// Configs are JSON documents; unknown keys are rejected. Times are in clock
/// ticks unless `grid.time_scale` is "physical". Defaults: omega 1,
/// sigma "sqrt_d", j0 "center", k0 0, g 0, stepper "closed-form",
/// second_term "truncated-bch", ensemble_mode "evolve-then-mix".
///
/// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 conditioned
/// norm below the floor.
#[derive(Parser)]
#[command(name = "relclock", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Worker threads for sweeps and parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Recorded in sidecars; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Clock error norms and envelope over a list of dimensions.
    ClockBench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One trajectory as CSV, plus a JSON sidecar next to --out.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-time trace distance and fidelity between two runs.
    Compare {
        /// Give twice: first and second run.
        #[arg(long, num_args = 1, required = true)]
        config: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summary row per value of one config axis.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::ClockBench { config, out } => {
            let cfg: BenchConfig = read_json(&config)?;
            emit(out.as_deref(), &runner::cmd_clock_bench(&cfg)?)
        }
        Cmd::Evolve { config, out } => {
            let cfg: RunConfig = read_json(&config)?;
            let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            let (csv, side, _) = runner::cmd_evolve(&cfg, cli.seed)?;
            emit(out.as_deref(), &csv)?;
            if let Some(p) = out {
                std::fs::write(sidecar_path(&p), side)?;
            }
            Ok(())
        }
        Cmd::Compare { config, out } => {
            if config.len() != 2 {
                return Err(Error::Config(format!("compare needs two --config files, got {}", config.len())));
            }
            let a: RunConfig = read_json(&config[0])?;
            let b: RunConfig = read_json(&config[1])?;
            let (csv, s) = runner::cmd_compare(&a, &b)?;
            emit(out.as_deref(), &csv)?;
            let js = serde_json::to_string_pretty(&s)? + "\n";
            match out {
                Some(p) => std::fs::write(sidecar_path(&p), js)?,
                None => eprint!("{js}"),
            }
            Ok(())
        }
        Cmd::Sweep { config, out } => {
            let cfg: SweepConfig = read_json(&config)?;
            emit(out.as_deref(), &runner::cmd_sweep(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("relclock: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relclock: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
