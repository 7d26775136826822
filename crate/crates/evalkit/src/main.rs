use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use na_evalkit::commands::{self, Output};
use na_evalkit::{CliError, ColorChoice, Format};
use na_evalkit_core::ingest::Packing;
use na_evalkit_core::models::WhatIfInput;
use na_evalkit_core::ModelSelector;

#[derive(Parser, Debug)]
#[command(name = "na-evalkit", version)]
#[command(about = "Evaluate neutral-atom RSQASM schedules against an architecture")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a circuit and simulate it on the grid.
    Validate {
        circuit: PathBuf,
        arch: PathBuf,
        /// Warn about cz operands farther apart than this many cells.
        #[arg(long)]
        interaction_radius: Option<f64>,
    },
    /// Estimate the success probability of a circuit.
    Evaluate {
        circuit: PathBuf,
        arch: PathBuf,
        /// unified, hybridmapper, dasatom or enola.
        #[arg(long, default_value = "unified", value_parser = ModelSelector::from_str)]
        model: ModelSelector,
        /// table, json or csv.
        #[arg(long, default_value = "table", value_parser = Format::from_str)]
        format: Format,
        #[arg(long)]
        interaction_radius: Option<f64>,
    },
    /// Remove reversed and chained moves.
    Normalize {
        circuit: PathBuf,
        arch: PathBuf,
        /// Write the collapsed circuit here.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, default_value = "table", value_parser = Format::from_str)]
        format: Format,
    },
    /// Evaluate several circuits on one architecture.
    Compare {
        arch: PathBuf,
        #[arg(required = true)]
        circuits: Vec<PathBuf>,
        #[arg(long, default_value = "unified", value_parser = ModelSelector::from_str)]
        model: ModelSelector,
        #[arg(long, default_value = "table", value_parser = Format::from_str)]
        format: Format,
    },
    /// Estimate fidelities after removing shuttling distance and moves.
    Whatif {
        arch: PathBuf,
        /// Idle time before collapsing, µs.
        #[arg(long)]
        old_idle: f64,
        /// Travel distance removed, cell units.
        #[arg(long)]
        saved_distance: f64,
        #[arg(long)]
        moves_before: usize,
        #[arg(long)]
        moves_after: usize,
        /// Number of qubits.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "table", value_parser = Format::from_str)]
        format: Format,
    },
    /// Convert flat native-gate QASM 2.0 into RSQASM.
    Ingest {
        qasm: PathBuf,
        arch: PathBuf,
        /// greedy or one-per-stage.
        #[arg(long, default_value = "greedy", value_parser = Packing::from_str)]
        packing: Packing,
        /// Output file; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<Output, CliError> {
    match command {
        Command::Validate {
            circuit,
            arch,
            interaction_radius,
        } => commands::validate(&circuit, &arch, interaction_radius),
        Command::Evaluate {
            circuit,
            arch,
            model,
            format,
            interaction_radius,
        } => commands::evaluate(&circuit, &arch, model, format, interaction_radius),
        Command::Normalize {
            circuit,
            arch,
            emit,
            format,
        } => commands::normalize(&circuit, &arch, emit.as_deref(), format),
        Command::Compare {
            arch,
            circuits,
            model,
            format,
        } => commands::compare(&circuits, &arch, model, format),
        Command::Whatif {
            arch,
            old_idle,
            saved_distance,
            moves_before,
            moves_after,
            n,
            format,
        } => {
            let input = WhatIfInput {
                old_t_idle: old_idle,
                saved_distance,
                old_move_count: moves_before,
                new_move_count: moves_after,
                n,
            };
            commands::whatif(&input, &arch, format)
        }
        Command::Ingest {
            qasm,
            arch,
            packing,
            output,
        } => commands::ingest(&qasm, &arch, packing, output.as_deref()),
    }
}

struct Stderr {
    color: bool,
}

impl Stderr {
    fn emit(&self, label: &str, code: &str, message: &str) {
        let mut err = std::io::stderr().lock();
        let _ = if self.color {
            writeln!(err, "\x1b[{code}m{label}:\x1b[0m {message}")
        } else {
            writeln!(err, "{label}: {message}")
        };
    }

    fn warning(&self, message: &str) {
        self.emit("warning", "1;33", message);
    }

    fn error(&self, message: &str) {
        self.emit("error", "1;31", message);
    }
}

fn main() -> ExitCode {
    let tty = std::io::stderr().is_terminal();
    let env = std::env::var(ColorChoice::ENV).ok();
    let (choice, bad_env) = match ColorChoice::parse(env.as_deref()) {
        Ok(c) => (c, None),
        Err(e) => (ColorChoice::Auto, Some(e)),
    };
    let stderr = Stderr {
        color: choice.enabled(tty),
    };
    if let Some(e) = bad_env {
        stderr.error(&e.to_string());
        return ExitCode::from(e.exit_code());
    }

    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    match run(args.command) {
        Ok(out) => {
            for w in &out.warnings {
                stderr.warning(w);
            }
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::from(out.exit_code)
        }
        Err(e) => {
            stderr.error(&e.to_string());
            ExitCode::from(e.exit_code())
        }
    }
}
