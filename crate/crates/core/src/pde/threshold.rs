use std::sync::Arc;

use serde::Serialize;

use super::{Discretization, Reaction};
use crate::grid::{Grid, GridFunction};
use crate::nfunction::log_space;
use crate::numeric::golden_section_min;
use crate::{Error, Result, Scalar};

const LAMBDA_MAX: f64 = 1e12;

/// Plateau `t0 · min(1, dist(x, ∂Ω) / δ)` with `δ = margin · (shortest side)`.
pub fn plateau<T: Scalar>(grid: &Arc<Grid<T>>, t0: T, margin: T) -> GridFunction<T> {
    let side = grid.bounds().iter().map(|&(a, b)| b - a).fold(T::infinity(), T::min);
    let delta = margin * side;
    let values = (0..grid.len())
        .map(|k| {
            let x = grid.coords(k);
            let dist = grid
                .bounds()
                .iter()
                .enumerate()
                .map(|(axis, &(a, b))| (x[axis] - a).min(b - x[axis]))
                .fold(T::infinity(), T::min);
            t0 * (dist / delta).min(T::one()).max(T::zero())
        })
        .collect();
    GridFunction::from_parts(grid.clone(), values)
}

/// Result of the threshold search.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaStar<T> {
    /// Smallest bracketed `λ` with `min_t I(t u0) < 0`.
    pub lambda_star: T,
    /// Plateau height used.
    pub t0: T,
    /// Minimizing scale `t` at `λ*`.
    pub scale: T,
    pub iterations: usize,
    /// `(λ, min_t I(t u0))` for every probed `λ`.
    pub trace: Vec<(f64, f64)>,
}

/// `min_{t>0} I_λ(t u0)` and its argmin, from a logarithmic scan of
/// `t ∈ [1e-4, 1e4]` refined by golden section.
pub(crate) fn min_along_ray<T: Scalar>(d: &Discretization<T>, lambda: T, u0: &[T]) -> (T, T) {
    let energy = |t: T| {
        let v: Vec<T> = u0.iter().map(|&x| x * t).collect();
        d.energy(lambda, Reaction::Full, &v)
    };
    let ts = log_space(T::lit(1e-4), T::lit(1e4), 16);
    let es: Vec<T> = ts.iter().map(|&t| energy(t)).collect();
    let k = (0..ts.len()).fold(0, |b, i| if es[i] < es[b] { i } else { b });
    let lo = ts[k.saturating_sub(1)].ln();
    let hi = ts[(k + 1).min(ts.len() - 1)].ln();
    let (s, e, _) = golden_section_min(|s: T| energy(s.exp()), lo, hi, T::lit(1e-10), 200);
    if e < es[k] {
        (s.exp(), e)
    } else {
        (ts[k], es[k])
    }
}

/// Bisection in `λ` on the sign of `min_t I_λ(t u0)`.
///
/// `u0` is the plateau of height `t0 = 2 (p/q)^{1/(p-q)}`, which makes
/// `t0^p/p - t0^q/q > 0`. The upper end of the bracket is found by
/// doubling from `λ = 1`; if the energy along the ray is still nonnegative
/// at `λ = 1e12` the scan trace is returned in the error.
pub fn lambda_star_search<T: Scalar>(d: &Discretization<T>, margin: T) -> Result<(LambdaStar<T>, GridFunction<T>)> {
    let (p, q) = d.exponents();
    let t0 = T::lit(2.0) * (p / q).powf(T::one() / (p - q));
    let u0 = plateau(d.grid(), t0, margin);
    let mut trace = Vec::new();
    let mut probe = |lambda: T| {
        let (t, e) = min_along_ray(d, lambda, u0.values());
        trace.push((lambda.as_f64(), e.as_f64()));
        (t, e)
    };
    let mut lo = T::zero();
    let mut hi = T::one();
    let (mut scale, mut e) = probe(hi);
    while !(e < T::zero()) {
        lo = hi;
        hi = hi * T::lit(2.0);
        if hi > T::lit(LAMBDA_MAX) {
            return Err(Error::NoSignChange { lambda_max: LAMBDA_MAX, trace });
        }
        (scale, e) = probe(hi);
    }
    let mut iterations = 0;
    while hi - lo > T::lit(1e-10) * hi && iterations < 200 {
        iterations += 1;
        let mid = lo + (hi - lo) * T::lit(0.5);
        let (t, e) = probe(mid);
        if e < T::zero() {
            hi = mid;
            scale = t;
        } else {
            lo = mid;
        }
    }
    Ok((LambdaStar { lambda_star: hi, t0, scale, iterations, trace }, u0))
}
