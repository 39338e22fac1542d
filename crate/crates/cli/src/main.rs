use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vessel_cli::commands::{self, Style};
use vessel_cli::config::RunConfig;
use vessel_cli::CliError;

#[derive(Parser)]
#[command(name = "vessel", version, about = "Vessel realizations: exact solutions and their verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the parameter presets with their matrices.
    Presets {
        /// Emit the matrices as JSON ([re, im] entries).
        #[arg(long)]
        json: bool,
    },
    /// Sample the fields on the configured grid and write them as CSV.
    Synthesize {
        #[arg(long)]
        config: PathBuf,
        /// Overrides outputs.csv; without either the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides outputs.report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Overrides flow_order.
        #[arg(long)]
        flow_order: Option<usize>,
    },
    /// Run the verification suite; exit 1 if any check fails.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Overrides seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides outputs.report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Overrides flow_order.
        #[arg(long)]
        flow_order: Option<usize>,
    },
    /// Summarize or print the hierarchy polynomials b0..bn.
    Hierarchy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        print: bool,
    },
}

fn load(path: &std::path::Path, flow_order: Option<usize>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(m) = flow_order {
        cfg.flow_order = m;
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Presets { json } => commands::presets(json, &mut out),
        Command::Synthesize {
            config,
            out: csv,
            report,
            flow_order,
        } => {
            let mut cfg = load(&config, flow_order)?;
            cfg.outputs.csv = csv.or(cfg.outputs.csv);
            cfg.outputs.report = report.or(cfg.outputs.report);
            let rep = commands::synthesize(&cfg, &mut out)?;
            if cfg.outputs.csv.is_some() {
                let _ = writeln!(
                    out,
                    "{} nodes ({} masked), max Lyapunov residual {:.3e}",
                    rep.frame.nodes, rep.frame.masked_nodes, rep.frame.lyapunov_max
                );
            }
            Ok(())
        }
        Command::Verify {
            config,
            seed,
            report,
            flow_order,
        } => {
            let mut cfg = load(&config, flow_order)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.outputs.report = report.or(cfg.outputs.report);
            commands::verify(&cfg, &Style::detect(), &mut out).map(|_| ())
        }
        Command::Hierarchy { n, print } => commands::hierarchy_cmd(n, print, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vessel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
