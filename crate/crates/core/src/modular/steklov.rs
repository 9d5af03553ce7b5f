use serde::Serialize;

use crate::grid::{Grid, GridFunction};
use crate::{Error, Result, Scalar};

/// Ball average `S_r u(x) = (1/m_r) ∫_{B_r(x)} ũ`, with `ũ` the extension
/// of `u` by zero outside the domain.
///
/// The stencil is the set of lattice offsets in the closed ball of radius
/// `r` and `m_r` is the lattice mass of the whole ball (one cell volume per
/// offset). Node weights of the grid are used inside the domain, so
/// `Σ w G(|S_r u|) <= Σ w G(|u|)` for every N-function `G`.
#[derive(Clone, Debug, Serialize)]
pub struct SteklovOperator<T> {
    radius: T,
    offsets: Vec<(isize, isize)>,
    mass: T,
}

impl<T: Scalar> SteklovOperator<T> {
    pub fn new(grid: &Grid<T>, radius: T) -> Result<Self> {
        let h_min = grid.min_spacing();
        if !(radius >= h_min) {
            return Err(Error::EmptyStencil { radius: radius.as_f64(), spacing: h_min.as_f64() });
        }
        let h = grid.spacing();
        let reach = |axis: usize| (radius / h[axis]).floor().to_isize().unwrap_or(0);
        let rx = reach(0);
        let ry = if grid.dim() == 2 { reach(1) } else { 0 };
        let slack = T::one() + T::lit(1e-12);
        let mut offsets = Vec::new();
        for dj in -ry..=ry {
            for di in -rx..=rx {
                let dx = T::from_isize(di).unwrap() * h[0];
                let dy = if grid.dim() == 2 { T::from_isize(dj).unwrap() * h[1] } else { T::zero() };
                if dx * dx + dy * dy <= radius * radius * slack {
                    offsets.push((di, dj));
                }
            }
        }
        let cell: T = h.iter().copied().fold(T::one(), |a, b| a * b);
        let mass = cell * T::from_usize_lossy(offsets.len());
        Ok(Self { radius, offsets, mass })
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn stencil_size(&self) -> usize {
        self.offsets.len()
    }

    /// `m_r`
    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn apply(&self, u: &GridFunction<T>) -> GridFunction<T> {
        let grid = u.grid();
        let (w, vals) = (grid.weights(), u.values());
        let nx = grid.nodes_per_axis()[0] as isize;
        let ny = if grid.dim() == 2 { grid.nodes_per_axis()[1] as isize } else { 1 };
        let out = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.axis_indices(k);
                let (i, j) = (i as isize, j as isize);
                let mut acc = T::zero();
                for &(di, dj) in &self.offsets {
                    let (a, b) = (i + di, j + dj);
                    if a >= 0 && a < nx && b >= 0 && b < ny {
                        let m = grid.index(a as usize, b as usize);
                        acc = acc + w[m] * vals[m];
                    }
                }
                acc / self.mass
            })
            .collect();
        GridFunction::from_parts(grid.clone(), out)
    }
}

/// One-shot [`SteklovOperator`] application.
pub fn steklov<T: Scalar>(u: &GridFunction<T>, radius: T) -> Result<GridFunction<T>> {
    Ok(SteklovOperator::new(u.grid(), radius)?.apply(u))
}
