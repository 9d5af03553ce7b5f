//! Numerical toolkit for Orlicz and Orlicz–Sobolev computations.
//!
//! The crate is organised bottom-up:
//!
//! * [`nfunction`] – N-functions given by their densities: evaluation,
//!   inversion, Young conjugates, Δ₂ certificates, growth comparison and the
//!   Sobolev conjugate.
//! * [`grid`] – uniform 1D/2D grids with trapezoid weights, grid functions,
//!   finite-difference gradients and serialization.
//! * [`modular`] – modulars, Luxemburg and Orlicz (Amemiya) norms, Hölder-type
//!   checks, the Steklov average and the Poincaré inequality.
//! * [`pde`] – the energy of `-div(a(|∇u|)∇u) = λ(u^{p-1} - u^{q-1})` with
//!   Dirichlet data, global minimization and a string-based mountain pass
//!   that produces two distinct nonnegative critical points.
//!
//! All numerical code is generic over the scalar type through [`Scalar`];
//! the `*64` and `*32` aliases below are the concrete instantiations.

pub mod error;
pub mod grid;
pub mod modular;
pub mod nfunction;
pub mod numeric;
pub mod pde;
mod scalar;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use modular::{Sampled, WeightedSamples};
pub use nfunction::{NFunction, NFunctionSpec};
pub use scalar::Scalar;

pub type NFunction64 = NFunction<f64>;
pub type NFunction32 = NFunction<f32>;
pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type ProblemSpec64 = pde::ProblemSpec<f64>;
pub type SolveReport64 = pde::SolveReport;
