use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use soliton_lab_cli::{init_threads, run, CliError, Command, ConfigFile, ExperimentConfig, Lemma};

#[derive(Parser, Debug)]
#[command(
    name = "soliton-lab",
    version,
    about = "Scattering, spectra, soliton branches and NLS experiments"
)]
struct Args {
    command: Command,
    /// TOML config; omitted sections take their defaults.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `verify.lemma`.
    #[arg(long)]
    lemma: Option<Lemma>,
}

fn resolve(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(o) = &args.out {
        file.output = Some(o.clone());
    }
    if let Some(s) = args.seed {
        file.seed = s;
    }
    if let Some(l) = args.lemma {
        if args.command != Command::Verify {
            return Err(CliError::Usage("--lemma only applies to verify".into()));
        }
        file.verify.lemma = l;
    }
    Ok(ExperimentConfig::new(args.command, file))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut hash = None;
    let result = init_threads().and_then(|_| resolve(&args)).and_then(|cfg| {
        hash = Some(cfg.hash());
        run(&cfg)
    });
    match result {
        Ok(summary) => {
            for p in &summary.artifacts {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let rec = e.record(Some(args.command.name()), hash.as_deref());
            eprintln!(
                "{}",
                serde_json::to_string(&rec).expect("record serializes")
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
