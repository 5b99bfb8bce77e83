use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sublab::{emit, override_seed, parse_scenarios, run, write_csv, write_json, Format, Status, KINDS};

#[derive(Parser)]
#[command(name = "sublab", version, about = "Run sub-linear expectation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario of a config file.
    Run {
        config: PathBuf,
        /// Directory for the report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Worker threads.
        #[arg(long, env = "SUBLAB_PARALLEL", default_value_t = 1)]
        parallel: usize,
        /// Seed for every randomized scenario, replacing the ones in the file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the scenario kinds.
    ListKinds,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::ListKinds => {
            for (kind, about) in KINDS {
                println!("{kind:<15} {about}");
            }
            Ok(true)
        }
        Command::Run {
            config,
            out,
            format,
            parallel,
            seed,
        } => {
            let mut scenarios = parse_scenarios(&config)?;
            if let Some(s) = seed {
                override_seed(&mut scenarios, s);
            }
            let reports = run(&scenarios, parallel)?;
            match out {
                Some(dir) => {
                    let path = emit(&reports, format, &dir)?;
                    eprintln!("wrote {}", path.display());
                }
                None => {
                    let stdout = std::io::stdout().lock();
                    match format {
                        Format::Csv => write_csv(&reports, stdout)?,
                        Format::Json => write_json(&reports, stdout)?,
                    }
                }
            }
            for r in reports.iter().filter(|r| r.status != Status::Pass) {
                eprintln!(
                    "{} {}: {}",
                    r.scenario_id,
                    r.status.as_str(),
                    r.message.as_deref().unwrap_or("")
                );
            }
            Ok(reports.iter().all(|r| r.status == Status::Pass))
        }
    }
}
