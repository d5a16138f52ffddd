use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::Format;

#[derive(Debug, Parser)]
#[command(name = "partomo", version, about = "Partial symplectic tomograms: transforms, moments and equation checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `PARTOMO_OUT` and `[output].dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `PARTOMO_THREADS`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Partial tomogram of a preset state.
    Tomogram,
    /// Wigner function and density matrix from a tomogram.
    Reconstruct,
    /// First and second moments through dual symbols against the trace oracle.
    Moments,
    /// Evolution and stationary-state residuals.
    Dynamics,
    /// Joint probability tomogram for a Gaussian parameter distribution.
    Joint,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad or incomplete configuration, unreadable input, unwritable output.
    Config(String),
    /// A numerical guard of the library tripped.
    Numerical(String),
}

impl From<partomo::Error> for Failure {
    fn from(e: partomo::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

fn env_threads() -> Result<Option<usize>, Failure> {
    match std::env::var("PARTOMO_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(format!("PARTOMO_THREADS: `{v}` is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let cfg = config::parse(&text)?;

    let threads = cli.threads.map(Some).unwrap_or(env_threads()?);
    if threads == Some(0) {
        return Err(Failure::Config("thread count must be positive".into()));
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("PARTOMO_OUT").map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("partomo-out"));
    let format = cli.format.or(cfg.output.format).unwrap_or_default();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| match cli.command {
        Command::Tomogram => commands::tomogram(&cfg, format),
        Command::Reconstruct => commands::reconstruct(&cfg, format),
        Command::Moments => commands::moments(&cfg, format),
        Command::Dynamics => commands::dynamics(&cfg, format),
        Command::Joint => commands::joint(&cfg, format),
    })?;

    fs::create_dir_all(&out_dir).map_err(|e| Failure::Config(format!("output dir {}: {e}", out_dir.display())))?;
    for a in &outcome.artifacts {
        let p = out_dir.join(&a.name);
        fs::write(&p, &a.contents).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
    }
    print!("{}", outcome.summary);
    for a in &outcome.artifacts {
        println!("wrote {}", out_dir.join(&a.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical guard: {msg}");
            ExitCode::from(3)
        }
    }
}
