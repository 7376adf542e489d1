use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use atypical_cli::{render, run_command, CliError, Command, Format, ProblemSpec, DATA_DIR_VAR};
use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Text,
    Compact,
}

/// Exact computations with atypical intersections in algebraic tori and in
/// products of modular curves.
#[derive(Debug, Parser)]
#[command(name = "atypical", version)]
struct Args {
    /// Problem spec file; `-` reads standard input.
    #[arg(long)]
    input: Option<PathBuf>,
    /// closure | atypical-locus | enumerate | optimal | family | oracle-check | data-check
    #[arg(long)]
    command: Command,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    #[arg(long)]
    bounds_subgroup_entry: Option<i64>,
    #[arg(long)]
    bounds_modular_complexity: Option<u32>,
    #[arg(long)]
    bounds_gamma_word: Option<i64>,
    #[arg(long)]
    bounds_hecke: Option<u32>,
    #[arg(long)]
    bounds_disc: Option<u32>,
    #[arg(long)]
    bounds_max_candidates: Option<usize>,
    #[arg(long)]
    bounds_max_degree: Option<u32>,
    #[arg(long)]
    bounds_max_basis: Option<usize>,
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let io_err = |source| CliError::Io { path: path.display().to_string(), source };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_err)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_err)
    }
}

fn apply_overrides(spec: &mut ProblemSpec, args: &Args) {
    let b = &mut spec.bounds;
    if let Some(v) = args.bounds_subgroup_entry {
        b.subgroup_entry_bound = v;
    }
    if let Some(v) = args.bounds_modular_complexity {
        b.modular_complexity_bound = v;
    }
    if let Some(v) = args.bounds_gamma_word {
        b.gamma_word_bound = v;
    }
    if let Some(v) = args.bounds_hecke {
        b.hecke_bound = v;
    }
    if let Some(v) = args.bounds_disc {
        b.disc_bound = v;
    }
    if let Some(v) = args.bounds_max_candidates {
        b.max_candidates = v;
    }
    if let Some(v) = args.bounds_max_degree {
        b.budget.max_degree = v;
    }
    if let Some(v) = args.bounds_max_basis {
        b.budget.max_basis = v;
    }
}

fn main_inner(args: &Args, format: Format) -> Result<String, CliError> {
    let spec = match &args.input {
        Some(path) => {
            let mut spec = ProblemSpec::parse(&read_input(path)?)?;
            apply_overrides(&mut spec, args);
            Some(spec)
        }
        None => None,
    };
    let data_dir = std::env::var_os(DATA_DIR_VAR).map(PathBuf::from);
    let doc = run_command(spec.as_ref(), args.command, data_dir.as_deref())?;
    Ok(render(&doc, format))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let format = match args.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Compact => Format::Compact,
    };
    match main_inner(&args, format) {
        Ok(out) => {
            let _ = io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let CliError::CheckFailed(doc) = &err {
                let _ = io::stdout().write_all(render(doc, format).as_bytes());
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
