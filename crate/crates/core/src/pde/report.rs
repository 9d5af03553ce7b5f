use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::descent::{axpy, dot, riesz_sup, steepest};
use super::threshold::min_along_ray;
use super::{lambda_star_search, minimize, mountain_pass, Discretization, Metric, PathSnapshot, ProblemSpec, Reaction};
use crate::grid::{GridDescriptor, GridFunction};
use crate::modular::{luxemburg_norm, modular};
use crate::nfunction::{log_space, NFunction};
use crate::{Error, Result, Scalar};

/// `(inf, sup)` of `t φ(t) / Φ(t)` over logarithmic probes in `[1e-6, 1e6]`.
pub fn growth_indices<T: Scalar>(phi: &NFunction<T>) -> (T, T) {
    log_space(T::lit(1e-6), T::lit(1e6), 32).into_iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), t| {
        let r = t * phi.density_at(t) / phi.at(t);
        if r.is_finite() {
            (lo.min(r), hi.max(r))
        } else {
            (lo, hi)
        }
    })
}

/// Structural hypotheses on `Φ`, `p`, `q` and the dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub phi_lower: f64,
    pub phi_upper: f64,
    pub dimension: usize,
    /// `1 < q < p < φ₀`.
    pub exponents_ordered: bool,
    /// `min(N, Nφ₀/(N-φ₀))`, infinite when `φ₀ >= N`.
    pub upper_index_bound: f64,
    /// `φ⁰` below `upper_index_bound`.
    pub upper_index_ok: bool,
    /// `t ↦ Φ(√t)` convex on the probes.
    pub sqrt_convex: bool,
}

impl HypothesisReport {
    pub fn evaluate<T: Scalar>(phi: &NFunction<T>, p: T, q: T, dimension: usize) -> Self {
        let (lo, hi) = growth_indices(phi);
        let (lo, hi) = (lo.as_f64(), hi.as_f64());
        let n = dimension as f64;
        let critical = if lo < n { n * lo / (n - lo) } else { f64::INFINITY };
        let bound = n.min(critical);
        let (p, q) = (p.as_f64(), q.as_f64());
        let ts = log_space(1e-12f64, 1e12, 16);
        let h: Vec<f64> = ts.iter().map(|&t| phi.at(T::lit(t.sqrt())).as_f64()).collect();
        let slopes: Vec<f64> = (1..ts.len()).map(|k| (h[k] - h[k - 1]) / (ts[k] - ts[k - 1])).collect();
        let sqrt_convex = slopes.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
        Self {
            phi_lower: lo,
            phi_upper: hi,
            dimension,
            exponents_ordered: 1.0 < q && q < p && p < lo,
            upper_index_bound: bound,
            upper_index_ok: hi < bound,
            sqrt_convex,
        }
    }

    /// The conditions without which the solver refuses to run.
    pub fn admissible(&self) -> bool {
        self.exponents_ordered && self.upper_index_ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainCase {
    /// `‖u‖ < 1`: `‖u‖^{φ⁰} <= ∫Φ(|∇u|) <= ‖u‖^{φ₀}`.
    InsideUnitBall,
    /// `‖u‖ > 1`: `‖u‖^{φ₀} <= ∫Φ(|∇u|) <= ‖u‖^{φ⁰}`.
    OutsideUnitBall,
    /// `‖u‖ = 1` within tolerance; nothing is asserted.
    Boundary,
}

/// Norm and modular of `|∇u|`, with the power bounds relating them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormModularReport {
    pub norm: f64,
    pub modular: f64,
    pub phi_lower: f64,
    pub phi_upper: f64,
    pub case: ChainCase,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

const CHAIN_RTOL: f64 = 1e-6;

/// `‖u‖ = ‖ |∇u| ‖_(Φ)` against `∫Φ(|∇u|)` and the index powers of `‖u‖`.
pub fn norm_modular_bounds<T: Scalar>(spec: &ProblemSpec<T>, u: &GridFunction<T>) -> Result<NormModularReport> {
    let d = spec.discretize()?;
    let values = d.dirichlet_values(u)?;
    let (lo, hi) = growth_indices(&spec.phi);
    Ok(chain_report(&d, values, lo.as_f64(), hi.as_f64()))
}

fn chain_report<T: Scalar>(d: &Discretization<T>, u: &[T], lo: f64, hi: f64) -> NormModularReport {
    let field = d.gradient_field(u);
    let norm = luxemburg_norm(&field, d.phi()).norm_value.as_f64();
    let rho = modular(&field, d.phi()).as_f64();
    let (case, lower, upper) = if (norm - 1.0).abs() <= CHAIN_RTOL {
        (ChainCase::Boundary, rho, rho)
    } else if norm < 1.0 {
        (ChainCase::InsideUnitBall, norm.powf(hi), norm.powf(lo))
    } else {
        (ChainCase::OutsideUnitBall, norm.powf(lo), norm.powf(hi))
    };
    let slack = CHAIN_RTOL * rho.abs().max(f64::MIN_POSITIVE);
    NormModularReport {
        norm,
        modular: rho,
        phi_lower: lo,
        phi_upper: hi,
        case,
        lower,
        upper,
        holds: lower <= rho + slack && rho <= upper + slack,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda1Sample {
    /// `∫Φ(|∇u|) / ∫|u|^{φ₀}` after descent.
    pub ratio: f64,
    pub norm: f64,
    /// Whether `‖u‖ > 1` holds for the final field.
    pub outside_unit_ball: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda1Estimate {
    /// Smallest ratio over all samples.
    pub estimate: f64,
    /// Smallest ratio over samples with `‖u‖ > 1`, if any.
    pub estimate_outside_unit_ball: Option<f64>,
    pub samples: Vec<Lambda1Sample>,
}

/// Upper estimate of `inf ∫Φ(|∇u|) / ∫|u|^{φ₀}` from random Dirichlet
/// fields scaled to `‖u‖ = 2`, each improved by preconditioned descent on
/// the quotient.
pub fn estimate_lambda_1<T: Scalar>(d: &Discretization<T>, phi_lower: T, samples: usize, seed: u64) -> Lambda1Estimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = d.grid().weights().to_vec();
    let interior = d.interior().to_vec();
    let quotient = |u: &[T]| {
        let den = interior.iter().fold(T::zero(), |acc, &k| acc + w[k] * u[k].abs().powf(phi_lower));
        (d.dirichlet_energy(u) / den, den)
    };
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut u = vec![T::zero(); d.len()];
        for &k in &interior {
            u[k] = T::lit(rng.gen_range(-1.0..1.0));
        }
        let norm = luxemburg_norm(&d.gradient_field(&u), d.phi()).norm_value;
        if norm > T::zero() {
            let s = T::lit(2.0) / norm;
            u.iter_mut().for_each(|v| *v = *v * s);
        }
        let (mut r, mut den) = quotient(&u);
        let mut step = T::one();
        for _ in 0..30 {
            let mut g = d.partials(T::zero(), Reaction::Full, &u);
            for &k in &interior {
                let uk = u[k];
                let dm = w[k] * phi_lower * uk.abs().powf(phi_lower - T::one()) * uk.signum();
                g[k] = (g[k] - r * dm) / den;
            }
            let dir = steepest(d, &g, Metric::Sobolev);
            let slope = dot(&g, &dir);
            let mut a = step * T::lit(2.0);
            let mut moved = false;
            while a > T::lit(1e-14) {
                let trial = axpy(&u, a, &dir);
                let (rt, dt) = quotient(&trial);
                if rt <= r + T::lit(1e-4) * a * slope {
                    u = trial;
                    r = rt;
                    den = dt;
                    step = a;
                    moved = true;
                    break;
                }
                a = a * T::lit(0.5);
            }
            if !moved {
                break;
            }
        }
        let norm = luxemburg_norm(&d.gradient_field(&u), d.phi()).norm_value.as_f64();
        out.push(Lambda1Sample { ratio: r.as_f64(), norm, outside_unit_ball: norm > 1.0 });
    }
    let estimate = out.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let constrained = out.iter().filter(|s| s.outside_unit_ball).map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    Lambda1Estimate {
        estimate,
        estimate_outside_unit_ball: constrained.is_finite().then_some(constrained),
        samples: out,
    }
}

/// `max |⟨E'(u), v⟩|` over `count` random Dirichlet fields `v` with `∫|∇v|² = 1`.
pub fn weak_form_residual<T: Scalar>(
    d: &Discretization<T>,
    lambda: T,
    reaction: Reaction<'_, T>,
    u: &[T],
    count: usize,
    seed: u64,
) -> T {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = d.partials(lambda, reaction, u);
    (0..count).fold(T::zero(), |m, _| {
        let mut v = vec![T::zero(); d.len()];
        for &k in d.interior() {
            v[k] = T::lit(rng.gen_range(-1.0..1.0));
        }
        let n = d.h1_seminorm_sq(&v).sqrt();
        m.max((dot(&g, &v) / n).abs())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationCounts {
    pub lambda_star_bisection: usize,
    pub descent: usize,
    pub newton_steps: usize,
    pub string_sweeps: usize,
    pub polish: usize,
}

/// Everything produced by [`solve_two_solutions`]. Field order is fixed, so
/// the JSON form is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub grid: GridDescriptor,
    pub phi: String,
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub lambda_star: Option<f64>,
    pub lambda_1: Lambda1Estimate,
    pub hypotheses: HypothesisReport,
    pub energy_u1: f64,
    pub energy_u2: f64,
    /// `J(u₂)`, equal to `I(u₂)` when `0 <= u₂ <= u₁`.
    pub truncated_energy_u2: f64,
    /// Highest energy on the final discrete path.
    pub c_discrete: f64,
    pub residual_u1: f64,
    pub residual_u2: f64,
    pub truncated_residual_u2: f64,
    pub converged_u1: bool,
    pub converged_u2: bool,
    pub iterations: IterationCounts,
    pub retries: usize,
    /// `max |u₁ - u₂|`.
    pub separation: f64,
    pub min_u2: f64,
    /// `max (u₂ - u₁)`.
    pub max_excess_u2: f64,
    pub weak_form_max: f64,
    pub norm_u1: NormModularReport,
    pub norm_u2: NormModularReport,
    pub two_solutions: bool,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub path: Vec<PathSnapshot>,
}

impl SolveReport {
    /// Rows `sweep,node_index,J` for every stored path snapshot.
    pub fn write_path_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sweep", "node_index", "J"])?;
        for s in &self.path {
            for (k, e) in s.energies.iter().enumerate() {
                w.write_record([s.sweep.to_string(), k.to_string(), format!("{e:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn sup<T: Scalar>(v: impl Iterator<Item = T>) -> T {
    v.fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Global minimizer and mountain-pass solution at `λ` (or `2λ*` when unset).
///
/// Refuses with [`Error::Hypothesis`] when `1 < q < p < φ₀` or the upper
/// index bound fails, unless `spec.force` is set, and with
/// [`Error::NoNegativeEnergy`] when descent from the best scaled plateau
/// does not reach negative energy.
pub fn solve_two_solutions<T: Scalar>(spec: &ProblemSpec<T>) -> Result<SolveReport> {
    let d = spec.discretize()?;
    let hypotheses = HypothesisReport::evaluate(&spec.phi, spec.p, spec.q, spec.grid.dim());
    if !spec.force && !hypotheses.admissible() {
        return Err(Error::Hypothesis(format!(
            "need 1 < q < p < φ₀ and φ⁰ < {:.6}; have q = {}, p = {}, φ₀ = {:.6}, φ⁰ = {:.6}",
            hypotheses.upper_index_bound,
            spec.q,
            spec.p,
            hypotheses.phi_lower,
            hypotheses.phi_upper
        )));
    }
    if let Some(l) = spec.lambda {
        if !(l > T::zero()) {
            return Err(Error::NoNegativeEnergy(format!("λ = {l}: the energy is nonnegative")));
        }
    }
    let margin = T::lit(spec.plateau_margin);
    let (star, u0) = match (lambda_star_search(&d, margin), spec.lambda) {
        (Ok((s, u0)), _) => (Some(s), u0),
        (Err(e), None) => return Err(e),
        (Err(_), Some(_)) => (None, super::plateau(&spec.grid, T::one(), margin)),
    };
    let lambda = spec.lambda.unwrap_or_else(|| T::lit(2.0) * star.as_ref().map_or(T::zero(), |s| s.lambda_star));
    let (t, _) = min_along_ray(&d, lambda, u0.values());
    let init: Vec<T> = u0.values().iter().map(|&v| v * t).collect();
    let first = minimize(&d, lambda, Reaction::Full, &init, &spec.descent);
    if !(first.energy < T::zero()) {
        return Err(Error::NoNegativeEnergy(format!(
            "descent from the scaled plateau ended at I = {:e} at λ = {lambda}",
            first.energy.as_f64()
        )));
    }
    let nonnegative = |u: &[T]| -> Vec<T> { u.iter().map(|&v| v.max(T::zero())).collect() };
    let u1 = nonnegative(&first.u);
    let energy_u1 = d.energy(lambda, Reaction::Full, &u1);
    let residual_u1 = riesz_sup(&d, &d.partials(lambda, Reaction::Full, &u1));
    let mp = mountain_pass(&d, lambda, &u1, &spec.mountain, &spec.descent, spec.seed)?;
    let u2 = nonnegative(&mp.u2);
    let energy_u2 = d.energy(lambda, Reaction::Full, &u2);
    let residual_u2 = riesz_sup(&d, &d.partials(lambda, Reaction::Full, &u2));
    let tol = T::lit(spec.descent.tol_res);
    let separation = sup(u1.iter().zip(&u2).map(|(&a, &b)| a - b));
    let min_u2 = u2.iter().fold(T::infinity(), |m, &v| m.min(v));
    let max_excess = u2.iter().zip(&u1).fold(T::neg_infinity(), |m, (&b, &a)| m.max(b - a));
    let weak = weak_form_residual(&d, lambda, Reaction::Full, &u2, 20, spec.seed ^ 0x5eed);
    let lambda_1 = estimate_lambda_1(&d, T::lit(hypotheses.phi_lower), 100, spec.seed);
    let two_solutions = energy_u1 < T::zero()
        && energy_u2 > T::zero()
        && separation > T::lit(spec.mountain.separation_tol)
        && first.converged
        && residual_u1 <= tol
        && residual_u2 <= tol;
    Ok(SolveReport {
        grid: spec.grid.descriptor(),
        phi: spec.phi.label().to_string(),
        p: spec.p.as_f64(),
        q: spec.q.as_f64(),
        lambda: lambda.as_f64(),
        lambda_star: star.as_ref().map(|s| s.lambda_star.as_f64()),
        lambda_1,
        norm_u1: chain_report(&d, &u1, hypotheses.phi_lower, hypotheses.phi_upper),
        norm_u2: chain_report(&d, &u2, hypotheses.phi_lower, hypotheses.phi_upper),
        hypotheses,
        energy_u1: energy_u1.as_f64(),
        energy_u2: energy_u2.as_f64(),
        truncated_energy_u2: mp.level.as_f64(),
        c_discrete: mp.c_discrete.as_f64(),
        residual_u1: residual_u1.as_f64(),
        residual_u2: residual_u2.as_f64(),
        truncated_residual_u2: mp.residual.as_f64(),
        converged_u1: first.converged && residual_u1 <= tol,
        converged_u2: mp.converged && residual_u2 <= tol,
        iterations: IterationCounts {
            lambda_star_bisection: star.as_ref().map_or(0, |s| s.iterations),
            descent: first.iterations,
            newton_steps: first.newton_steps,
            string_sweeps: mp.sweeps,
            polish: mp.polish_iterations,
        },
        retries: mp.retries,
        separation: separation.as_f64(),
        min_u2: min_u2.as_f64(),
        max_excess_u2: max_excess.as_f64(),
        weak_form_max: weak.as_f64(),
        two_solutions,
        u1: u1.iter().map(|v| v.as_f64()).collect(),
        u2: u2.iter().map(|v| v.as_f64()).collect(),
        path: mp.path,
    })
}
