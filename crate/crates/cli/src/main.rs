//! `kreinkit` command-line front end.
//!
//! Every command reads JSON matrix or relation files (`-` for stdin) and
//! prints a JSON report on stdout. Exit codes: 0 ok, 1 verification failure,
//! 2 mathematically infeasible input, 3 invalid input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kreinkit::verify::Suite;

#[derive(Parser, Debug)]
#[command(name = "kreinkit", version, about = "Minimal-index completions, liftings and extensions")]
struct Cli {
    /// Relative zero threshold for eigenvalue and singular value decisions
    /// (overrides KREINKIT_TOL).
    #[arg(long, global = true, value_name = "TAU")]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inertia of a symmetric matrix or a selfadjoint relation.
    Inertia { path: PathBuf },

    /// Minimal-index completion of [[A11, A12], [A12ᵀ, *]].
    Complete {
        a11: PathBuf,
        a12: PathBuf,
        /// Decide whether this corner completes the block instead.
        #[arg(long, value_name = "PATH")]
        with_a22: Option<PathBuf>,
    },

    /// Extremal extensions of the symmetric column [T11; T21].
    Extremes { t11: PathBuf, t21: PathBuf },

    /// Whether T is an extension of [T11; T21] with the minimal index.
    CheckInterval {
        t11: PathBuf,
        t21: PathBuf,
        t: PathBuf,
    },

    /// Lift T: H1 → H2 to an operator on H1 ⊕ H1' → H2 ⊕ H2'.
    Lift {
        t: PathBuf,
        /// Signs of J1 as a comma-separated list (default all +1).
        #[arg(long, allow_hyphen_values = true)]
        j1: Option<String>,
        /// Signs of J2 (default all +1).
        #[arg(long, allow_hyphen_values = true)]
        j2: Option<String>,
        /// Signs of J1' (default empty).
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        j1p: String,
        /// Signs of J2' (default empty).
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        j2p: String,
        #[arg(long, value_name = "PATH")]
        gamma1: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        gamma2: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        gamma: Option<PathBuf>,
    },

    /// Cayley transform {(f + f′, f − f′)} of a relation or matrix.
    Cayley {
        path: PathBuf,
        /// Treat the input as a Cayley image and recover the relation.
        #[arg(long)]
        inverse: bool,
    },

    /// Friedrichs and Kreĭn–von Neumann extensions of a symmetric relation.
    Extensions {
        path: PathBuf,
        /// Decide membership of this selfadjoint extension.
        #[arg(long, value_name = "PATH")]
        member: Option<PathBuf>,
    },

    /// Run the randomized property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(out) => {
            println!("{}", out.json);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
