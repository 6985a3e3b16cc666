use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mhdlab::cli::{self, RunConfig};
use mhdlab::Error;

#[derive(Parser)]
#[command(name = "mhdlab", version, about = "Mixed FV/FE schemes for compressible viscous MHD")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Store every k-th state.
    #[arg(long, global = true)]
    stride: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write energy.csv and fields_<k>.csv.
    Run { config: PathBuf },
    /// Consistency residuals over a refinement sequence, written to eoc.csv.
    Study {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
    },
    /// Check the discrete invariants on a small case.
    Check { config: Option<PathBuf> },
}

fn load(path: Option<&PathBuf>, args: &Args) -> Result<RunConfig, Error> {
    let mut config = match path {
        Some(p) => cli::parse_config(&fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)?,
        None => cli::parse_config("n = 4, T = 0.3")?,
    };
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    if let Some(stride) = args.stride {
        config.stride = stride;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn execute(args: &Args) -> Result<bool, Error> {
    match &args.command {
        Command::Run { config } => {
            let config = load(Some(config), args)?;
            let output = cli::run(&config)?;
            let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            cli::write_run(&output, &dir)?;
            let last = output.rows.last().expect("the initial row is always present");
            println!(
                "steps={} energy={:.10e} mass={:.16e} min_density={:.6e} out={}",
                output.rows.len() - 1,
                last.report.total(),
                last.mass,
                last.min_density,
                dir.display()
            );
            Ok(true)
        }
        Command::Study { config, levels } => {
            let config = load(Some(config), args)?;
            let report = cli::study(&config, levels)?;
            let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            fs::create_dir_all(&dir)?;
            let csv = report.to_csv();
            fs::write(dir.join("eoc.csv"), &csv)?;
            print!("{csv}");
            Ok(true)
        }
        Command::Check { config } => {
            let config = load(config.as_ref(), args)?;
            let lines = cli::check(&config)?;
            for l in &lines {
                println!("{l}");
            }
            Ok(lines.iter().all(|l| l.pass))
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("status=fail reason=invariant");
            ExitCode::from(2)
        }
        Err(e) => {
            let kind = format!("{e:?}");
            let kind = kind.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
            eprintln!("status=error kind={kind} message=\"{e}\"");
            ExitCode::FAILURE
        }
    }
}
