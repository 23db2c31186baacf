use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use radial_sobolev::cli::{run_with_threads, ConfigError, ExitStatus, RunConfig, Subcommand};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Constant,
    Hardy,
    ExtendCheck,
    Verify,
    Sweep,
    Regime,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Constant => Subcommand::Constant,
            Command::Hardy => Subcommand::Hardy,
            Command::ExtendCheck => Subcommand::ExtendCheck,
            Command::Verify => Subcommand::Verify,
            Command::Sweep => Subcommand::Sweep,
            Command::Regime => Subcommand::Regime,
        }
    }
}

/// Best constants and extremals of weighted radial Sobolev inequalities.
#[derive(Debug, Parser)]
#[command(name = "radsob", version)]
struct Args {
    command: Command,
    /// JSON run configuration; defaults are used for missing keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory, overriding `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// root seed, overriding `seed`
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn load(args: &Args) -> Result<RunConfig, (ExitStatus, String)> {
    let sub: Subcommand = args.command.into();
    let mut value = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| (ExitStatus::Io, format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| (ExitStatus::Config, format!("config: {e}")))?
        }
        None => serde_json::json!({}),
    };
    let obj = value
        .as_object_mut()
        .ok_or_else(|| (ExitStatus::Config, "config: top level must be an object".to_string()))?;
    let name = serde_json::to_value(sub).expect("serializable");
    match obj.get("subcommand") {
        Some(v) if *v != name => {
            return Err((ExitStatus::Config, format!("config: subcommand {v} conflicts with {name}")));
        }
        _ => {
            obj.insert("subcommand".into(), name);
        }
    }
    if let Some(out) = &args.out {
        let output = obj.entry("output").or_insert_with(|| serde_json::json!({}));
        match output.as_object_mut() {
            Some(o) => {
                o.insert("dir".into(), out.to_string_lossy().into_owned().into());
            }
            None => return Err((ExitStatus::Config, "config: output must be an object".into())),
        }
    }
    if let Some(seed) = args.seed {
        obj.insert("seed".into(), seed.into());
    }
    RunConfig::from_value(value).map_err(|e: ConfigError| ((&e).into(), e.to_string()))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err((status, msg)) => {
            eprintln!("{msg}");
            return ExitCode::from(status.code() as u8);
        }
    };
    let outcome = run_with_threads(&config, args.threads);
    print!("{}", outcome.summary);
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    ExitCode::from(outcome.status.code() as u8)
}
