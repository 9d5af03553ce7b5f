use serde::Serialize;

use super::modular;
use crate::grid::GridFunction;
use crate::nfunction::NFunction;
use crate::{Result, Scalar};

/// `∫ G(|u|) <= ∫ G(d |∇u|)` with `d = 2 diam Ω`.
#[derive(Clone, Debug, Serialize)]
pub struct PoincareReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub d: T,
    pub pass: bool,
}

/// Checks the Poincaré inequality for a function vanishing on the boundary.
pub fn poincare_check<T: Scalar>(u: &GridFunction<T>, g: &NFunction<T>, atol: T) -> Result<PoincareReport<T>> {
    u.require_dirichlet(T::lit(1e-12) * u.max_abs().max(T::one()))?;
    let d = T::lit(2.0) * u.grid().diam();
    let grad = u.gradient_magnitude()?.scale(d);
    let lhs = modular(u, g);
    let rhs = modular(&grad, g);
    Ok(PoincareReport { lhs, rhs, d, pass: lhs <= rhs + atol })
}
