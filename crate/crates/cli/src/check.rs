use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use orlicz_core::modular::{holder_check, poincare_check, sandwich_check};
use orlicz_core::nfunction::{delta2_check, ProbeGrid};
use orlicz_core::pde::{norm_modular_bounds, HypothesisReport, ProblemSpec};
use orlicz_core::{Grid64, GridFunction64, NFunction64, NFunctionSpec, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{io, sample, Outcome};

const ATOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Young,
    Sandwich,
    Holder,
    Poincare,
    Delta2,
    Indices,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value = "power:2")]
    g: NFunctionSpec,
    /// Function to test; random functions are drawn when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Second function for the `holder` suite.
    #[arg(long)]
    input2: Option<PathBuf>,
    /// Number of random functions (or pairs).
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Nodes per axis of the unit-square grid used for random functions.
    #[arg(long, default_value_t = 17)]
    nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probe interval `t_min:t_max` for `delta2`.
    #[arg(long, default_value = "1:100")]
    probes: String,
    /// Exponents `p` and `q` for the hypothesis part of `indices`.
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value_t = 1.2)]
    q: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Assertion {
    name: String,
    pass: bool,
    details: Value,
}

impl Assertion {
    fn new(name: impl Into<String>, pass: bool, details: impl Serialize) -> Result<Self> {
        Ok(Self { name: name.into(), pass, details: serde_json::to_value(details)? })
    }
}

#[derive(Serialize)]
struct CheckReport {
    suite: Suite,
    g: String,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    info: Option<Value>,
    assertions: Vec<Assertion>,
}

struct Inputs {
    rng: ChaCha8Rng,
    grid: Arc<Grid64>,
}

impl Inputs {
    fn functions(&mut self, given: Option<&PathBuf>, count: usize, dirichlet: bool) -> Result<Vec<GridFunction64>> {
        if let Some(p) = given {
            return Ok(vec![io::read_function(p)?]);
        }
        Ok((0..count)
            .map(|_| {
                if dirichlet {
                    sample::dirichlet(&self.grid, &mut self.rng)
                } else {
                    sample::field(&self.grid, &mut self.rng)
                }
            })
            .collect())
    }
}

fn young(g: &NFunction64) -> Result<Vec<Assertion>> {
    let axis: Vec<f64> = (0..100).map(|k| 20.0 * k as f64 / 99.0).collect();
    let mut min_gap = f64::INFINITY;
    let mut at = (0.0, 0.0);
    for &a in &axis {
        for &b in &axis {
            let gap = g.young_gap(a, b)?;
            if gap < min_gap {
                min_gap = gap;
                at = (a, b);
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut equality_ok = true;
    for &a in &axis {
        let b = g.density(a)?;
        let gap = g.young_gap(a, b)?;
        worst = worst.max(gap.abs());
        equality_ok &= gap.abs() <= 1e-6 * (1.0 + a * b * 1e-9);
    }
    Ok(vec![
        Assertion::new("gap_nonnegative", min_gap >= -1e-9, json!({ "min_gap": min_gap, "at": at, "pairs": 10_000 }))?,
        Assertion::new("equality_at_density", equality_ok, json!({ "max_abs_gap": worst, "points": axis.len() }))?,
    ])
}

fn probe_grid(s: &str) -> Result<ProbeGrid<f64>> {
    let bad = || orlicz_core::Error::Config(format!("probes must be `t_min:t_max` with 0 < t_min < t_max, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(bad());
    }
    Ok(ProbeGrid::new(a, b, 256))
}

pub fn run(args: CheckArgs) -> Result<Outcome> {
    let g = args.g.build::<f64>()?;
    let grid = Arc::new(Grid64::unit_square(args.nodes)?);
    let mut inputs = Inputs { rng: ChaCha8Rng::seed_from_u64(args.seed), grid };
    let mut info = None;
    let assertions = match args.suite {
        Suite::Young => young(&g)?,
        Suite::Sandwich => inputs
            .functions(args.input.as_ref(), args.samples, false)?
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let r = sandwich_check(u, &g, ATOL);
                Assertion::new(format!("sandwich[{k}]"), r.pass, r)
            })
            .collect::<Result<_>>()?,
        Suite::Holder => {
            let us = inputs.functions(args.input.as_ref(), args.samples, false)?;
            let vs = match &args.input2 {
                Some(p) => vec![io::read_function(p)?],
                None if args.input.is_some() => {
                    return Err(orlicz_core::Error::Config("holder with --input also needs --input2".into()))
                }
                None => inputs.functions(None, args.samples, false)?,
            };
            us.iter()
                .zip(&vs)
                .enumerate()
                .map(|(k, (u, v))| {
                    let r = holder_check(u, v, &g, ATOL)?;
                    Assertion::new(format!("holder[{k}]"), r.pass, r)
                })
                .collect::<Result<_>>()?
        }
        Suite::Poincare => inputs
            .functions(args.input.as_ref(), args.samples, true)?
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let r = poincare_check(u, &g, ATOL)?;
                Assertion::new(format!("poincare[{k}]"), r.pass, r)
            })
            .collect::<Result<_>>()?,
        Suite::Delta2 => {
            let r = delta2_check(&g, &probe_grid(&args.probes)?, 1e-6);
            vec![Assertion::new("delta2", r.satisfied, r)?]
        }
        Suite::Indices => {
            let dim = inputs.grid.dim();
            info = Some(serde_json::to_value(HypothesisReport::evaluate(&g, args.p, args.q, dim))?);
            let spec = ProblemSpec::new(g.clone(), args.p, args.q, inputs.grid.clone());
            let mut out = Vec::new();
            for (k, u) in inputs.functions(args.input.as_ref(), args.samples, true)?.iter().enumerate() {
                let base = norm_modular_bounds(&spec, u)?.norm;
                if !(base > 0.0) {
                    continue;
                }
                for target in [0.5, 2.0] {
                    let r = norm_modular_bounds(&spec, &u.scale(target / base))?;
                    out.push(Assertion::new(format!("chain[{k}]@{target}"), r.holds, r)?);
                }
            }
            out
        }
    };
    let pass = assertions.iter().all(|a| a.pass);
    let failed = assertions.iter().filter(|a| !a.pass).count();
    eprintln!("check {:?} on {g}: {} assertions, {failed} failed", args.suite, assertions.len());
    let report = CheckReport { suite: args.suite, g: g.to_string(), pass, info, assertions };
    io::write_json(args.out.as_deref(), &report)?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}
