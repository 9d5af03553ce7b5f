//! Modulars, Orlicz-space norms and the inequalities relating them.
//!
//! Everything here works on weighted samples through the [`Sampled`] trait:
//! grid functions use their quadrature weights, and any other collection of
//! `(value, weight)` pairs can be wrapped in [`WeightedSamples`].

mod holder;
mod norms;
mod poincare;
mod steklov;

pub use holder::{holder_check, modular_norm_inequalities, sandwich_check, HolderReport, ModularNormReport, SandwichReport};
pub use norms::{amemiya_multiplier, luxemburg_norm, orlicz_norm, NormValue};
pub use poincare::{poincare_check, PoincareReport};
pub use steklov::{steklov, SteklovOperator};

use std::sync::Arc;

use serde::Serialize;

use crate::grid::{Grid, GridFunction};
use crate::nfunction::NFunction;
use crate::{Error, Result, Scalar};

/// Node values with nonnegative quadrature weights.
pub trait Sampled<T: Scalar> {
    fn values(&self) -> &[T];
    fn weights(&self) -> &[T];
}

impl<T: Scalar> Sampled<T> for GridFunction<T> {
    fn values(&self) -> &[T] {
        GridFunction::values(self)
    }

    fn weights(&self) -> &[T] {
        self.grid().weights()
    }
}

/// Values paired with weights, for measure spaces that are not grids.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSamples<T> {
    values: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> WeightedSamples<T> {
    pub fn new(values: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::GridMismatch);
        }
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidGrid("weights must be finite and nonnegative".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("values must be finite".into()));
        }
        Ok(Self { values, weights })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), weights: self.weights.clone() }
    }
}

impl<T: Scalar> Sampled<T> for WeightedSamples<T> {
    fn values(&self) -> &[T] {
        &self.values
    }

    fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// `ρ(u; G) = Σ wᵢ G(|uᵢ|)`; `+∞` when a term overflows.
pub fn modular<T: Scalar, S: Sampled<T> + ?Sized>(u: &S, g: &NFunction<T>) -> T {
    scaled_modular(u, g, T::one())
}

/// `ρ(k u; G)`.
pub(crate) fn scaled_modular<T: Scalar, S: Sampled<T> + ?Sized>(u: &S, g: &NFunction<T>, k: T) -> T {
    let mut acc = T::zero();
    for (&v, &w) in u.values().iter().zip(u.weights()) {
        if w == T::zero() || v == T::zero() {
            continue;
        }
        let term = w * g.at(k * v);
        if !term.is_finite() {
            return T::infinity();
        }
        acc = acc + term;
    }
    if acc.is_finite() {
        acc
    } else {
        T::infinity()
    }
}

/// Membership in the Orlicz class: finite modular at this resolution.
pub fn is_in_orlicz_class<T: Scalar, S: Sampled<T> + ?Sized>(u: &S, g: &NFunction<T>) -> bool {
    modular(u, g).is_finite()
}

/// `Σ wᵢ |uᵢ vᵢ|`.
pub fn integral_abs_product<T: Scalar, S: Sampled<T> + ?Sized>(u: &S, v: &S) -> Result<T> {
    if u.values().len() != v.values().len() || u.weights() != v.weights() {
        return Err(Error::GridMismatch);
    }
    Ok(u.values()
        .iter()
        .zip(v.values())
        .zip(u.weights())
        .fold(T::zero(), |acc, ((&a, &b), &w)| acc + w * (a * b).abs()))
}

/// Indicator of the nodes where `inside(x, y)` holds, and the measure of
/// that set under the grid weights.
pub fn characteristic<T: Scalar>(grid: &Arc<Grid<T>>, inside: impl Fn(T, T) -> bool) -> (GridFunction<T>, T) {
    let values: Vec<T> = (0..grid.len())
        .map(|k| {
            let [x, y] = grid.coords(k);
            if inside(x, y) {
                T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    let measure = grid.quadrature(&values);
    (GridFunction::from_parts(grid.clone(), values), measure)
}

/// Partial sums of `ρ(f; G)` and `ρ(2f; G)` for the step function
/// `f = n/2` on `(2⁻ⁿ, 2⁻ⁿ⁺¹)`, `n = 1..=levels`.
#[derive(Clone, Debug, Serialize)]
pub struct DyadicDemo<T> {
    pub partial_f: Vec<T>,
    pub partial_2f: Vec<T>,
}

pub fn dyadic_demo<T: Scalar>(g: &NFunction<T>, levels: usize) -> DyadicDemo<T> {
    let mut partial_f = Vec::with_capacity(levels);
    let mut partial_2f = Vec::with_capacity(levels);
    let (mut sf, mut s2f) = (T::zero(), T::zero());
    for n in 1..=levels {
        let level = T::from_usize_lossy(n);
        let width = T::lit(2.0).powf(-level);
        let f = level * T::lit(0.5);
        sf = sf + width * g.at(f);
        s2f = s2f + width * g.at(f + f);
        partial_f.push(sf);
        partial_2f.push(s2f);
    }
    DyadicDemo { partial_f, partial_2f }
}

/// The same step function as weighted samples (`values`, `2^{-n}` weights).
pub fn dyadic_step<T: Scalar>(levels: usize, scale: T) -> WeightedSamples<T> {
    let values = (1..=levels).map(|n| scale * T::from_usize_lossy(n) * T::lit(0.5)).collect();
    let weights = (1..=levels).map(|n| T::lit(2.0).powf(-T::from_usize_lossy(n))).collect();
    WeightedSamples { values, weights }
}

#[cfg(test)]
mod tests;
