use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod text;

/// Behavioural equivalence, quotients and modal-logic checks for finite
/// systems described in JSON.
#[derive(Debug, Parser)]
#[command(name = "coeq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Debug, Args)]
struct OutputFlags {
    /// Print the report as JSON (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Print the report as indented text.
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equivalence classes, or a verdict for one pair of states.
    Equiv(commands::EquivArgs),
    /// Equalizer automaton of an NDA, or the bisimilarity quotient of a CTS.
    Quotient(commands::QuotientArgs),
    /// Law checks and adequacy/expressivity checks.
    Check(commands::CheckArgs),
    /// Evaluate a formula, or tabulate the theory of a state.
    Eval(commands::EvalArgs),
    /// Dump the forward or backward subset construction.
    Determinize(commands::DeterminizeArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Equiv(a) => commands::equiv(a),
        Command::Quotient(a) => commands::quotient(a),
        Command::Check(a) => commands::check(a),
        Command::Eval(a) => commands::eval(a),
        Command::Determinize(a) => commands::determinize(a),
    };
    match outcome {
        Ok(report) => {
            if cli.output.text {
                print!("{}", text::render(&report.body));
            } else {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report.body).expect("reports serialize")
                );
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
