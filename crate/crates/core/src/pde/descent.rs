use serde::{Deserialize, Serialize};

use super::{Discretization, ProblemSpec, Reaction};
use crate::grid::GridFunction;
use crate::{Error, Result, Scalar};

/// Inner product in which steepest descent directions are taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `∫∇u·∇v`: the direction is `-K⁻¹ ∂E` with `K` the Laplacian stiffness.
    Sobolev,
    /// Grid `L²` product: the direction is the negative Riesz gradient.
    Euclidean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DescentOptions {
    /// Armijo constant.
    pub c1: f64,
    /// Step reduction factor in the line search.
    pub backtrack: f64,
    /// Target for the sup norm of the Riesz gradient.
    pub tol_res: f64,
    pub max_iter: usize,
    pub metric: Metric,
    /// Try a Newton step before each gradient step.
    pub newton: bool,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { c1: 1e-4, backtrack: 0.5, tol_res: 1e-6, max_iter: 50_000, metric: Metric::Sobolev, newton: true }
    }
}

impl DescentOptions {
    pub(crate) fn check(&self) -> Result<()> {
        if !(self.c1 > 0.0 && self.c1 < 0.5) {
            return Err(Error::Config(format!("descent.c1 must lie in (0, 0.5), got {}", self.c1)));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!("descent.backtrack must lie in (0, 1), got {}", self.backtrack)));
        }
        if !(self.tol_res > 0.0) {
            return Err(Error::Config(format!("descent.tol_res must be positive, got {}", self.tol_res)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DescentOutcome<T> {
    pub u: Vec<T>,
    pub energy: T,
    /// Sup norm of the Riesz gradient at `u`.
    pub residual: T,
    pub iterations: usize,
    pub newton_steps: usize,
    pub converged: bool,
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn axpy<T: Scalar>(u: &[T], a: T, d: &[T]) -> Vec<T> {
    u.iter().zip(d).map(|(&x, &y)| x + a * y).collect()
}

/// Sup norm of `∂E/∂uᵢ / wᵢ` over interior nodes.
pub(crate) fn riesz_sup<T: Scalar>(d: &Discretization<T>, partials: &[T]) -> T {
    let w = d.grid().weights();
    d.interior().iter().fold(T::zero(), |m, &k| m.max((partials[k] / w[k]).abs()))
}

/// Descent direction for `E` in the chosen metric.
pub(crate) fn steepest<T: Scalar>(d: &Discretization<T>, partials: &[T], metric: Metric) -> Vec<T> {
    match metric {
        Metric::Sobolev => d.solve_stiffness(partials).into_iter().map(|v| -v).collect(),
        Metric::Euclidean => {
            let w = d.grid().weights();
            let mut g: Vec<T> = partials.iter().zip(w).map(|(&p, &w)| -p / w).collect();
            for (k, v) in g.iter_mut().enumerate() {
                if d.grid().is_boundary(k) {
                    *v = T::zero();
                }
            }
            g
        }
    }
}

/// Below this value `t ↦ -f(t)` is increasing, so the equation at a single
/// node is monotone in the value at that node.
pub(crate) fn monotone_threshold<T: Scalar>(d: &Discretization<T>) -> T {
    let (p, q) = d.exponents();
    let t = ((q - T::one()) / (p - T::one())).powf(T::one() / (p - q)) * T::lit(0.5);
    if t.is_finite() && t > T::zero() {
        t
    } else {
        T::zero()
    }
}

/// One nonlinear Gauss–Seidel sweep over `nodes`, which should lie below
/// [`monotone_threshold`]: each node is moved to the root of its own
/// equation, found by bracketing and bisection below twice the threshold
/// (where the nodal equation is still monotone), or to that bound. Newton's
/// method converges poorly there because `f` has an infinite slope at `0⁺`.
pub(crate) fn relax_nodes<T: Scalar>(d: &Discretization<T>, lambda: T, reaction: Reaction<'_, T>, u: &mut [T], nodes: &[usize]) {
    let top = monotone_threshold(d);
    if !(top > T::zero()) {
        return;
    }
    let w = d.grid().weights();
    for &k in nodes {
        let at = |s: T, u: &mut [T]| {
            u[k] = s;
            d.node_partial(lambda, reaction, u, k)
        };
        let start = u[k];
        let r0 = at(start, u);
        if (r0 / w[k]).abs() <= T::epsilon() {
            continue;
        }
        let (mut lo, mut hi) = if r0 > T::zero() {
            let mut step = start.abs().max(T::lit(1e-12));
            let mut lo = start - step;
            let mut found = false;
            for _ in 0..200 {
                if at(lo, u) <= T::zero() {
                    found = true;
                    break;
                }
                step = step * T::lit(2.0);
                lo = start - step;
            }
            if !found {
                u[k] = start;
                continue;
            }
            (lo, start)
        } else {
            let cap = top * T::lit(2.0);
            if at(cap, u) < T::zero() {
                u[k] = cap;
                continue;
            }
            (start, cap)
        };
        for _ in 0..200 {
            let mid = lo + (hi - lo) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if at(mid, u) > T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let rl = at(lo, u).abs();
        let rh = at(hi, u).abs();
        u[k] = if rl <= rh { lo } else { hi };
    }
}

/// Minimizes `E_λ` (with the given reaction) starting from `u0`.
///
/// Each iteration first tries a Newton step on the interior unknowns and
/// keeps it if it passes the Armijo test, or, once energy differences are
/// below rounding, if it halves the residual. Otherwise a steepest descent
/// step in the chosen metric is taken with backtracking, starting from
/// twice the previous accepted step.
pub fn minimize<T: Scalar>(
    d: &Discretization<T>,
    lambda: T,
    reaction: Reaction<'_, T>,
    u0: &[T],
    opts: &DescentOptions,
) -> DescentOutcome<T> {
    let c1 = T::lit(opts.c1);
    let shrink = T::lit(opts.backtrack);
    let tol = T::lit(opts.tol_res);
    let tiny = T::epsilon() * T::lit(64.0);
    let mut u: Vec<T> = u0.to_vec();
    for (k, v) in u.iter_mut().enumerate() {
        if d.grid().is_boundary(k) {
            *v = T::zero();
        }
    }
    let mut e = d.energy(lambda, reaction, &u);
    let mut partials = d.partials(lambda, reaction, &u);
    let mut res = riesz_sup(d, &partials);
    let mut step = T::one();
    let mut newton_steps = 0;
    let mut iterations = 0;
    let mut stalled = false;
    while res > tol && iterations < opts.max_iter {
        iterations += 1;
        let mut accepted = None;
        if opts.newton {
            let rhs: Vec<T> = partials.iter().map(|&v| -v).collect();
            if let Some(dir) = d.solve_with(d.hessian(lambda, reaction, &u), &rhs) {
                let slope = dot(&partials, &dir);
                if slope < T::zero() {
                    let mut a = T::one();
                    for _ in 0..40 {
                        let trial = axpy(&u, a, &dir);
                        let et = d.energy(lambda, reaction, &trial);
                        if et <= e + c1 * a * slope {
                            accepted = Some((trial, et));
                            break;
                        }
                        if et <= e + tiny * e.abs().max(T::one()) {
                            let pt = d.partials(lambda, reaction, &trial);
                            if riesz_sup(d, &pt) < res * T::lit(0.5) {
                                accepted = Some((trial, et));
                                break;
                            }
                        }
                        a = a * shrink;
                    }
                }
            }
            if accepted.is_some() {
                newton_steps += 1;
            }
        }
        if accepted.is_none() {
            let dir = steepest(d, &partials, opts.metric);
            let slope = dot(&partials, &dir);
            let mut a = (step * T::lit(2.0)).min(T::lit(1e12));
            while a > T::lit(1e-30) {
                let trial = axpy(&u, a, &dir);
                let et = d.energy(lambda, reaction, &trial);
                if et <= e + c1 * a * slope {
                    step = a;
                    accepted = Some((trial, et));
                    break;
                }
                a = a * shrink;
            }
        }
        match accepted {
            Some((trial, et)) => {
                u = trial;
                e = et;
                partials = d.partials(lambda, reaction, &u);
                res = riesz_sup(d, &partials);
            }
            None => {
                stalled = true;
                break;
            }
        }
    }
    DescentOutcome { u, energy: e, residual: res, iterations, newton_steps, converged: res <= tol && !stalled }
}

/// Minimizes `I` from `u_init` at the configured `λ` (zero when unset).
pub fn global_minimize<T: Scalar>(spec: &ProblemSpec<T>, u_init: &GridFunction<T>) -> Result<DescentOutcome<T>> {
    let d = spec.discretize()?;
    let values = d.dirichlet_values(u_init)?;
    Ok(minimize(&d, spec.lambda.unwrap_or(T::zero()), Reaction::Full, values, &spec.descent))
}
