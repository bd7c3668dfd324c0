use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sbarrier::config::RunConfig;
use sbarrier::pipeline::{run, Command, RunOutput};

#[derive(Parser)]
#[command(version, about = "Strong barriers, Hardy certificates and singular Dirichlet problems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true, env = "SBARRIER_OUT")]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Constant-source Dirichlet problem.
    Solve,
    /// Condenser capacity of a ball plate.
    Capacity,
    /// Capacity density ratios along Γ.
    CdcCheck,
    /// Calibrate, assemble and verify the barrier.
    Barrier,
    /// Barrier followed by the Hardy certificate.
    Hardy,
    /// Barrier followed by the singular Dirichlet problem.
    SingularSolve,
    /// Barrier, Hardy certificate and singular Dirichlet problem.
    FullPipeline,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Capacity => Command::Capacity,
            Cmd::CdcCheck => Command::CdcCheck,
            Cmd::Barrier => Command::Barrier,
            Cmd::Hardy => Command::Hardy,
            Cmd::SingularSolve => Command::SingularSolve,
            Cmd::FullPipeline => Command::FullPipeline,
        }
    }
}

fn write_output(dir: &Path, out: &RunOutput) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(&out.report).expect("report serializes");
    std::fs::write(dir.join("report.json"), json + "\n")?;
    for a in &out.artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let mut cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let out_dir = cli.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let output = match run(cli.command.into(), &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    for c in &output.report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Err(e) = write_output(&out_dir, &output) {
        eprintln!("error: writing {}: {e}", out_dir.display());
        return ExitCode::FAILURE;
    }
    println!("report written to {}", out_dir.join("report.json").display());
    if output.report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
