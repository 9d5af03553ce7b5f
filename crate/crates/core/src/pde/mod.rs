//! Variational solver for the Dirichlet problem
//!
//! ```text
//! -div(a(|∇u|) ∇u) = λ (u₊^{p-1} - u₊^{q-1})  in Ω,   u = 0 on ∂Ω,
//! ```
//!
//! with `a(t) = φ(t)/t` for an N-function `Φ` with density `φ`. The energy
//! `I(u) = ∫Φ(|∇u|) - λ∫(u₊^p/p - u₊^q/q)` is discretized with piecewise
//! linear elements. A global minimizer `u₁` with negative energy is found
//! by preconditioned descent, and a second critical point `u₂` of positive
//! energy by a string-type mountain pass between `0` and `u₁` on the
//! truncated functional `J`.

mod descent;
mod discrete;
mod mountain;
mod report;
mod threshold;

#[cfg(test)]
mod tests;

pub use descent::{global_minimize, minimize, DescentOptions, DescentOutcome, Metric};
pub use discrete::{Discretization, Reaction};
pub use mountain::{mountain_pass, MountainOptions, MountainPass, PathSnapshot};
pub use report::{
    estimate_lambda_1, growth_indices, norm_modular_bounds, solve_two_solutions, weak_form_residual, ChainCase,
    HypothesisReport, Lambda1Estimate, Lambda1Sample, NormModularReport, SolveReport,
};
pub use threshold::{lambda_star_search, plateau, LambdaStar};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, GridDescriptor, GridFunction};
use crate::nfunction::{NFunction, NFunctionSpec};
use crate::{Error, Result, Scalar};

/// Everything that defines one discrete problem and how to solve it.
#[derive(Clone, Debug)]
pub struct ProblemSpec<T: Scalar> {
    pub phi: NFunction<T>,
    pub p: T,
    pub q: T,
    /// `None` means `2 λ*` with `λ*` from [`lambda_star_search`].
    pub lambda: Option<T>,
    pub grid: Arc<Grid<T>>,
    pub eps_a: T,
    /// Width of the ramp of the plateau function, relative to the domain.
    pub plateau_margin: f64,
    pub descent: DescentOptions,
    pub mountain: MountainOptions,
    pub seed: u64,
    /// Solve even when the growth hypotheses fail.
    pub force: bool,
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(phi: NFunction<T>, p: T, q: T, grid: Arc<Grid<T>>) -> Self {
        Self {
            phi,
            p,
            q,
            lambda: None,
            grid,
            eps_a: T::lit(1e-8),
            plateau_margin: 0.25,
            descent: DescentOptions::default(),
            mountain: MountainOptions::default(),
            seed: 0,
            force: false,
        }
    }

    /// `Φ = t^1.8/1.8`, `p = 1.5`, `q = 1.2` on the unit square with 33×33 nodes.
    pub fn desk_scale() -> Result<Self> {
        ProblemConfig::default().build()
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn discretize(&self) -> Result<Discretization<T>> {
        Discretization::new(self.grid.clone(), self.phi.clone(), self.p, self.q, self.eps_a)
    }

    /// `I(u)` at the configured `λ` (zero when unset).
    pub fn energy(&self, u: &GridFunction<T>) -> Result<T> {
        let d = self.discretize()?;
        let values = d.dirichlet_values(u)?;
        Ok(d.energy(self.lambda.unwrap_or(T::zero()), Reaction::Full, values))
    }

    /// Riesz representer of `I'(u)` in the grid inner product.
    pub fn energy_gradient(&self, u: &GridFunction<T>) -> Result<GridFunction<T>> {
        let d = self.discretize()?;
        let values = d.dirichlet_values(u)?;
        GridFunction::new(self.grid.clone(), d.riesz_gradient(self.lambda.unwrap_or(T::zero()), Reaction::Full, values))
    }
}

/// JSON form of a [`ProblemSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema: u32,
    pub phi: NFunctionSpec,
    pub p: f64,
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub grid: GridDescriptor,
    pub eps_a: f64,
    pub plateau_margin: f64,
    pub descent: DescentOptions,
    pub mountain: MountainOptions,
    pub seed: u64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            schema: 1,
            phi: NFunctionSpec::Power { alpha: 1.8, coef: None },
            p: 1.5,
            q: 1.2,
            lambda: None,
            grid: GridDescriptor { dim: 2, bounds: vec![[0.0, 1.0], [0.0, 1.0]], nodes: vec![33, 33] },
            eps_a: 1e-8,
            plateau_margin: 0.25,
            descent: DescentOptions::default(),
            mountain: MountainOptions::default(),
            seed: 0,
        }
    }
}

impl ProblemConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Config(format!("unsupported schema {}", self.schema)));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("p", self.p)?;
        positive("q", self.q)?;
        positive("eps_a", self.eps_a)?;
        if !(self.plateau_margin > 0.0 && self.plateau_margin < 0.5) {
            return Err(Error::Config(format!("plateau_margin must lie in (0, 0.5), got {}", self.plateau_margin)));
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::Config(format!("lambda must be nonnegative, got {l}")));
            }
        }
        self.descent.check()?;
        self.mountain.check()
    }

    pub fn build<T: Scalar>(&self) -> Result<ProblemSpec<T>> {
        self.check()?;
        let grid = Arc::new(Grid::from_descriptor(&self.grid)?);
        Ok(ProblemSpec {
            phi: self.phi.build()?,
            p: T::lit(self.p),
            q: T::lit(self.q),
            lambda: self.lambda.map(T::lit),
            grid,
            eps_a: T::lit(self.eps_a),
            plateau_margin: self.plateau_margin,
            descent: self.descent.clone(),
            mountain: self.mountain.clone(),
            seed: self.seed,
            force: false,
        })
    }
}
