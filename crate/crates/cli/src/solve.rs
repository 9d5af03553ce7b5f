use std::path::PathBuf;

use clap::Args;
use orlicz_core::pde::{solve_two_solutions, ProblemConfig, SolveReport};
use orlicz_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::{exit_code, io, Outcome};

#[derive(Args)]
pub struct SolveArgs {
    /// Problem JSON; the built-in default problem when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report JSON (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Path energies per sweep as `sweep,node_index,J` rows.
    #[arg(long)]
    path_csv: Option<PathBuf>,
    /// Solve even when the growth hypotheses fail.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Residual tolerance of the descent and the polish.
    #[arg(long)]
    tol: Option<f64>,
    /// `lambda=a:b:n`: independent solves at `n` equally spaced values.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Serialize)]
struct SweepEntry {
    lambda: f64,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<SolveReport>,
}

fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("sweep must look like lambda=a:b:n, got `{s}`"));
    let range = s.strip_prefix("lambda=").ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.parse().map_err(|_| bad())?;
    let b: f64 = b.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    Ok((0..n).map(|k| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect())
}

fn solve_one(config: &ProblemConfig, force: bool) -> Result<SolveReport> {
    let mut spec = config.build::<f64>()?;
    spec.force = force;
    solve_two_solutions(&spec)
}

fn summarize(r: &SolveReport) {
    eprintln!(
        "lambda = {:.6e} (lambda* = {}), I(u1) = {:.6e}, I(u2) = {:.6e}, residuals {:.2e} / {:.2e}, |u1-u2|_inf = {:.4e}, two solutions: {}",
        r.lambda,
        r.lambda_star.map_or("n/a".into(), |l| format!("{l:.6e}")),
        r.energy_u1,
        r.energy_u2,
        r.residual_u1,
        r.residual_u2,
        r.separation,
        r.two_solutions
    );
}

pub fn run(args: SolveArgs) -> Result<Outcome> {
    let mut config = match &args.config {
        Some(p) => ProblemConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => ProblemConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(tol) = args.tol {
        if !(tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {tol}")));
        }
        config.descent.tol_res = tol;
    }
    config.build::<f64>()?;

    let Some(sweep) = &args.sweep else {
        let report = solve_one(&config, args.force)?;
        summarize(&report);
        io::write_json(args.out.as_deref(), &report)?;
        if let Some(p) = &args.path_csv {
            report.write_path_csv(std::fs::File::create(p)?)?;
        }
        return Ok(if report.two_solutions { Outcome::Pass } else { Outcome::Fail });
    };
    if args.path_csv.is_some() {
        return Err(Error::Config("--path-csv applies to a single solve, not a sweep".into()));
    }
    let entries: Vec<SweepEntry> = parse_sweep(sweep)?
        .into_par_iter()
        .map(|lambda| {
            let mut c = config.clone();
            c.lambda = Some(lambda);
            match solve_one(&c, args.force) {
                Ok(r) => SweepEntry { lambda, exit_code: if r.two_solutions { 0 } else { 1 }, error: None, report: Some(r) },
                Err(e) => SweepEntry { lambda, exit_code: exit_code(&e), error: Some(e.to_string()), report: None },
            }
        })
        .collect();
    for e in &entries {
        match (&e.report, &e.error) {
            (Some(r), _) => summarize(r),
            (None, Some(msg)) => eprintln!("lambda = {:.6e}: {msg}", e.lambda),
            (None, None) => {}
        }
    }
    io::write_json(args.out.as_deref(), &entries)?;
    Ok(if entries.iter().all(|e| e.exit_code == 0) { Outcome::Pass } else { Outcome::Fail })
}
