use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use commands::{CmdError, Exit, Output};
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "kirchhoff",
    version,
    about = "Ground states of Kirchhoff-type equations on the Pohozaev manifold"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the energy on the Pohozaev manifold.
    Solve(Common),
    /// Audit hypotheses and scan the functional inequalities.
    Verify(Common),
    /// Compare the direct solve with shooting plus rescaling.
    Oracle(Common),
    /// λ-family levels or parameter sweeps.
    Sweep(Common),
    /// Tabulate the fibering map of one profile.
    Fibering(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Threads for sweep points.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::Solve(c) => ("solve", c),
        Command::Verify(c) => ("verify", c),
        Command::Oracle(c) => ("oracle", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Fibering(c) => ("fibering", c),
    };
    let code = match run(&cli.command, name, common) {
        Ok(exit) => exit,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    };
    ExitCode::from(code as u8)
}

fn run(command: &Command, name: &str, common: &Common) -> Result<Exit, CmdError> {
    let started = chrono::Utc::now();
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.override_seed(seed);
    }
    let workers = common.workers.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .ok();

    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let hash = cfg.hash();
    let out = Output::new(&dir, hash.clone())?;
    let result = match command {
        Command::Solve(_) => commands::solve(&cfg, &out),
        Command::Verify(_) => commands::verify(&cfg, &out),
        Command::Oracle(_) => commands::oracle(&cfg, &out),
        Command::Sweep(_) => commands::sweep(&cfg, &out),
        Command::Fibering(_) => commands::fibering(&cfg, &out),
    };
    let exit = result.as_ref().map_or_else(|e| e.exit(), |e| *e);
    let meta = serde_json::json!({
        "command": name,
        "config_hash": hash,
        "started_at": started.to_rfc3339(),
        "finished_at": chrono::Utc::now().to_rfc3339(),
        "version": env!("CARGO_PKG_VERSION"),
        "workers": rayon::current_num_threads(),
        "exit_code": exit as u8,
    });
    std::fs::write(
        dir.join("run_meta.json"),
        serde_json::to_string_pretty(&meta).unwrap() + "\n",
    )
    .map_err(|source| CmdError::Io {
        path: dir.join("run_meta.json"),
        source,
    })?;
    result
}
