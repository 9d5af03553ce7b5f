//! `orlicz-kit`: conjugate tables, norms, inequality suites and the
//! two-solution solver from the command line.
//!
//! Results go to `--out` (or stdout) as JSON or CSV; a short human summary
//! goes to stderr. Exit codes: 0 success, 1 a check failed or the solver
//! refused the problem, 2 bad input.

mod check;
mod io;
mod sample;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use orlicz_core::modular::{luxemburg_norm, orlicz_norm};
use orlicz_core::{Error, NFunctionSpec};
use serde_json::json;

#[derive(Parser)]
#[command(name = "orlicz-kit", version, about = "Orlicz-space numerics and a two-solution quasilinear solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the Young conjugate G* as `s,conjugate` CSV rows.
    Conjugate {
        /// N-function, e.g. `power:2`, `exp_minus`, or a JSON object.
        #[arg(long)]
        g: NFunctionSpec,
        /// `from:to:count`; a count of 0 gives a header-only table.
        #[arg(long, default_value = "0:10:101")]
        range: Range,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Luxemburg and/or Orlicz norm of a grid function read from CSV or JSON.
    Norm {
        #[arg(long)]
        g: NFunctionSpec,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::Both)]
        which: Which,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an inequality suite and report every assertion.
    Check(check::CheckArgs),
    /// Compute the negative-energy minimizer and the mountain-pass solution.
    Solve(solve::SolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Luxemburg,
    Orlicz,
    Both,
}

#[derive(Clone, Copy, Debug)]
struct Range {
    from: f64,
    to: f64,
    count: usize,
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected from:to:count, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number `{x}`: {e}"));
        let range = Range {
            from: num(a)?,
            to: num(b)?,
            count: n.trim().parse().map_err(|e| format!("bad count `{n}`: {e}"))?,
        };
        if !(range.from.is_finite() && range.to.is_finite()) || range.from > range.to {
            return Err(format!("range `{s}` must satisfy from <= to"));
        }
        Ok(range)
    }
}

impl Range {
    fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n).map(|k| self.from + (self.to - self.from) * k as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// What a command produced: success or a failed check.
pub(crate) enum Outcome {
    Pass,
    Fail,
}

pub(crate) fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Hypothesis(_)
        | Error::NoNegativeEnergy(_)
        | Error::NoMountainPass(_)
        | Error::NoSignChange { .. }
        | Error::Convergence { .. } => 1,
        _ => 2,
    }
}

fn conjugate(spec: &NFunctionSpec, range: Range, out: Option<PathBuf>) -> orlicz_core::Result<Outcome> {
    let g = spec.build::<f64>()?;
    let conj = g.conjugate();
    let mut w = csv::Writer::from_writer(io::sink(out.as_deref())?);
    w.write_record(["s", "conjugate"])?;
    for s in range.points() {
        let v = conj.eval(s.max(0.0))?;
        w.write_record([format!("{s:e}"), format!("{v:e}")])?;
    }
    w.flush()?;
    eprintln!("conjugate of {g}: {} rows", range.count);
    Ok(Outcome::Pass)
}

fn norm(g: &NFunctionSpec, input: &std::path::Path, which: Which, out: Option<PathBuf>) -> orlicz_core::Result<Outcome> {
    let g = g.build::<f64>()?;
    let u = io::read_function(input)?;
    let value = match which {
        Which::Luxemburg => serde_json::to_value(luxemburg_norm(&u, &g))?,
        Which::Orlicz => serde_json::to_value(orlicz_norm(&u, &g))?,
        Which::Both => json!({ "luxemburg": luxemburg_norm(&u, &g), "orlicz": orlicz_norm(&u, &g) }),
    };
    eprintln!("{g}: {value}");
    io::write_json(out.as_deref(), &value)?;
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Conjugate { g, range, out } => conjugate(&g, range, out),
        Command::Norm { g, input, which, out } => norm(&g, &input, which, out),
        Command::Check(args) => check::run(args),
        Command::Solve(args) => solve::run(args),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
