use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdstab_cli::{registry, run, CliError, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sdstab", version, about = "Sampled-data feedback stabilization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Frozen-gain synthesis at sample points, with uniform bounds
    Synthesize(Common),
    /// Sampled-data closed-loop runs with decrease certificates
    Simulate(Common),
    /// Pointwise Lie-algebraic condition classification
    CheckLie(Common),
    /// Offset selection and patchwork verification
    CheckPatchwork(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment file
    #[arg(long, conflicts_with = "example")]
    config: Option<PathBuf>,
    /// Built-in experiment
    #[arg(long, value_parser = registry::NAMES)]
    example: Option<String>,
    /// Directory for CSV and report files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of the config
    #[arg(long)]
    seed: Option<u64>,
    /// Print only the RESULT line
    #[arg(short, long)]
    quiet: bool,
}

fn load(c: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&c.config, &c.example) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(name)) => registry::example(name)?,
        (None, None) => return Err(sdstab_cli::config::invalid("pass --config <path> or --example <name>").into()),
    };
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, common) = match &cli.command {
        Cmd::Synthesize(c) => (Command::Synthesize, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::CheckLie(c) => (Command::CheckLie, c),
        Cmd::CheckPatchwork(c) => (Command::CheckPatchwork, c),
    };
    let result = load(common).and_then(|cfg| run(cmd, &cfg, common.out.as_deref()));
    match result {
        Ok(o) => {
            if common.quiet {
                if let Some(last) = o.report.lines().last() {
                    println!("{last}");
                }
            } else {
                print!("{}", o.report);
            }
            if let Some(dir) = &common.out {
                if let Err(e) = sdstab_cli::output::write_file(dir, "report.txt", &o.report) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("RESULT fail 0 1");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
