use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use vga_cli::commands::{self, exit_code, Format, Program, EXIT_OK};
use vga_cli::service::{self, AppState};
use vga_core::dataset::load_path;
use vga_core::post_analysis::geometry;
use vga_core::report::to_json_string;
use vga_core::{assess, VgaError};

#[derive(Parser)]
#[command(name = "vga", version, about = "Virtual gap analysis of decision-making units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assess one unit under the PTE or STE program.
    Assess {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dmu: String,
        #[arg(long, value_enum)]
        program: Program,
        /// SIC scalar; required with `--program ste`.
        #[arg(long, required_if_eq("program", "ste"))]
        kappa: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run phases 1 to 3 and optionally settle on a target scalar.
    Phases {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dmu: String,
        /// Comma-separated peers to drop before the run.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        #[arg(long)]
        kappa_target: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the slack-based measure with the PTE assessment.
    Sbm {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dmu: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the virtual technology plot data of one assessment.
    Geometry {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dmu: String,
        #[arg(long, value_enum)]
        program: Program,
        #[arg(long, required_if_eq("program", "ste"))]
        kappa: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, env = "VGA_PORT", default_value_t = 8080)]
        port: u16,
        /// Datasets to preload; session snapshots are written under `sessions/`.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), VgaError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), VgaError> {
    match cli.command {
        Command::Assess {
            data,
            dmu,
            program,
            kappa,
            out,
            format,
        } => {
            let d = load_path(&data)?;
            let kind = commands::program_kind(program, kappa)?;
            let report = commands::assessment_report(&d, &dmu, kind)?;
            emit(&commands::render_report(&report, format)?, out.as_deref())
        }
        Command::Phases {
            data,
            dmu,
            exclude,
            kappa_target,
            out,
        } => {
            let d = load_path(&data)?;
            let exclude: BTreeSet<String> = exclude.into_iter().filter(|s| !s.is_empty()).collect();
            let (snapshot, err) = commands::run_phases(&d, &dmu, &exclude, kappa_target)?;
            emit(&to_json_string(&snapshot)?, out.as_deref())?;
            err.map_or(Ok(()), Err)
        }
        Command::Sbm { data, dmu, out } => {
            let d = load_path(&data)?;
            emit(&commands::to_pretty(&commands::sbm_comparison(&d, &dmu)?)?, out.as_deref())
        }
        Command::Geometry {
            data,
            dmu,
            program,
            kappa,
            out,
        } => {
            let d = load_path(&data)?;
            let a = assess(&d, &dmu, commands::program_kind(program, kappa)?)?;
            emit(&to_json_string(&geometry(&d, &a))?, out.as_deref())
        }
        Command::Serve { port, data_dir } => {
            let state = match data_dir {
                Some(dir) => AppState::with_data_dir(&dir)?,
                None => AppState::new(),
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(port, Arc::new(state)))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            match &e {
                VgaError::OutsideInterval { .. } => eprintln!("vga: rejected: outside feasible interval ({e})"),
                _ => eprintln!("vga: {e}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
