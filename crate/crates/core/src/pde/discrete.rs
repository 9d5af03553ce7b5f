//! Piecewise-linear discretization of the energy on the grid.
//!
//! In 1D every cell is an element. In 2D every grid square is split along
//! its anti-diagonal into two right triangles, so that each element carries
//! a constant gradient `ξ_T = Σ_k c_k u(n_k)`. With `a ≡ 1` the assembled
//! stiffness reduces to the 5-point Laplacian.

use std::sync::Arc;

use crate::grid::{Grid, GridFunction};
use crate::modular::WeightedSamples;
use crate::nfunction::NFunction;
use crate::numeric::{BandedLu, BandedMatrix};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug)]
struct Element<T> {
    area: T,
    nodes: [usize; 3],
    coef: [[T; 2]; 3],
}

impl<T: Scalar> Element<T> {
    fn gradient(&self, u: &[T]) -> [T; 2] {
        let mut g = [T::zero(); 2];
        for k in 0..3 {
            let v = u[self.nodes[k]];
            g[0] = g[0] + self.coef[k][0] * v;
            g[1] = g[1] + self.coef[k][1] * v;
        }
        g
    }
}

fn add_element_block<T: Scalar>(slot: &[Option<usize>], dim: usize, h: &mut BandedMatrix<T>, e: &Element<T>, m: &[[T; 2]; 2]) {
    let count = if dim == 1 { 2 } else { 3 };
    for a in 0..count {
        let Some(sa) = slot[e.nodes[a]] else { continue };
        let ca = e.coef[a];
        let mca = [m[0][0] * ca[0] + m[0][1] * ca[1], m[1][0] * ca[0] + m[1][1] * ca[1]];
        for b in 0..count {
            let Some(sb) = slot[e.nodes[b]] else { continue };
            let cb = e.coef[b];
            h.add(sb, sa, cb[0] * mca[0] + cb[1] * mca[1]);
        }
    }
}

/// Right-hand side of the equation, `λ f(x, u)` with primitive `λ F(x, u)`.
#[derive(Clone, Copy, Debug)]
pub enum Reaction<'a, T> {
    /// `f(t) = t₊^{p-1} − t₊^{q-1}`
    Full,
    /// `f` frozen at its value at `u₁(x)` above `u₁(x)`.
    Truncated(&'a [T]),
}

/// Grid, constitutive function and exponents of the discrete problem.
#[derive(Clone, Debug)]
pub struct Discretization<T: Scalar> {
    grid: Arc<Grid<T>>,
    phi: NFunction<T>,
    p: T,
    q: T,
    eps_a: T,
    elements: Vec<Element<T>>,
    /// `(element, local vertex)` pairs touching each node.
    touching: Vec<Vec<(usize, usize)>>,
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
    band: usize,
    stiffness: BandedLu<T>,
}

impl<T: Scalar> Discretization<T> {
    pub fn new(grid: Arc<Grid<T>>, phi: NFunction<T>, p: T, q: T, eps_a: T) -> Result<Self> {
        if grid.nodes_per_axis().iter().any(|&n| n < 3) {
            return Err(Error::InvalidGrid("need at least one interior node per axis".into()));
        }
        let h = grid.spacing().to_vec();
        let nx = grid.nodes_per_axis()[0];
        let mut elements = Vec::new();
        if grid.dim() == 1 {
            let c = T::one() / h[0];
            for i in 0..nx - 1 {
                elements.push(Element {
                    area: h[0],
                    nodes: [i, i + 1, i],
                    coef: [[-c, T::zero()], [c, T::zero()], [T::zero(); 2]],
                });
            }
        } else {
            let ny = grid.nodes_per_axis()[1];
            let (cx, cy) = (T::one() / h[0], T::one() / h[1]);
            let area = h[0] * h[1] * T::lit(0.5);
            let z = T::zero();
            for j in 0..ny - 1 {
                for i in 0..nx - 1 {
                    let a = grid.index(i, j);
                    let b = grid.index(i + 1, j);
                    let c = grid.index(i, j + 1);
                    let d = grid.index(i + 1, j + 1);
                    elements.push(Element { area, nodes: [a, b, c], coef: [[-cx, -cy], [cx, z], [z, cy]] });
                    elements.push(Element { area, nodes: [d, c, b], coef: [[cx, cy], [-cx, z], [z, -cy]] });
                }
            }
        }
        let interior: Vec<usize> = (0..grid.len()).filter(|&k| !grid.is_boundary(k)).collect();
        let mut slot = vec![None; grid.len()];
        for (s, &k) in interior.iter().enumerate() {
            slot[k] = Some(s);
        }
        let band = if grid.dim() == 1 { 1 } else { nx - 2 };
        let mut k = BandedMatrix::zeros(interior.len(), band, band);
        for e in &elements {
            let m = [[e.area, T::zero()], [T::zero(), e.area]];
            add_element_block(&slot, grid.dim(), &mut k, e, &m);
        }
        let stiffness = k.lu().ok_or_else(|| Error::InvalidGrid("singular stiffness matrix".into()))?;
        let mut touching = vec![Vec::new(); grid.len()];
        let corners = if grid.dim() == 1 { 2 } else { 3 };
        for (k, e) in elements.iter().enumerate() {
            for (local, &n) in e.nodes.iter().enumerate().take(corners) {
                touching[n].push((k, local));
            }
        }
        Ok(Self { grid, phi, p, q, eps_a, elements, touching, interior, slot, band, stiffness })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn phi(&self) -> &NFunction<T> {
        &self.phi
    }

    pub fn exponents(&self) -> (T, T) {
        (self.p, self.q)
    }

    pub fn eps_a(&self) -> T {
        self.eps_a
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `a(t) = φ(t)/t` evaluated at `max(t, eps_a)`.
    pub fn a(&self, t: T) -> T {
        let t = t.max(self.eps_a);
        self.phi.density_at(t) / t
    }

    /// Flux `a(|ξ|) ξ`.
    pub fn flux(&self, xi: [T; 2]) -> [T; 2] {
        let a = self.a((xi[0] * xi[0] + xi[1] * xi[1]).sqrt());
        [a * xi[0], a * xi[1]]
    }

    /// `Φ` continued below `eps_a` by the quadratic whose derivative is
    /// `a(eps_a) t`, so that energy and flux stay consistent.
    fn phi_reg(&self, t: T) -> T {
        if t >= self.eps_a {
            self.phi.at(t)
        } else {
            let e = self.eps_a;
            self.phi.at(e) - self.a(e) * (e * e - t * t) * T::lit(0.5)
        }
    }

    fn f_full(&self, t: T) -> T {
        if t > T::zero() {
            t.powf(self.p - T::one()) - t.powf(self.q - T::one())
        } else {
            T::zero()
        }
    }

    fn big_f_full(&self, t: T) -> T {
        if t > T::zero() {
            t.powf(self.p) / self.p - t.powf(self.q) / self.q
        } else {
            T::zero()
        }
    }

    fn df_full(&self, t: T) -> T {
        if t > T::zero() {
            let t = t.max(T::min_positive_value().sqrt());
            (self.p - T::one()) * t.powf(self.p - T::lit(2.0)) - (self.q - T::one()) * t.powf(self.q - T::lit(2.0))
        } else {
            T::zero()
        }
    }

    /// `f(x_node, t)`.
    pub fn nonlinearity(&self, reaction: Reaction<'_, T>, node: usize, t: T) -> T {
        match reaction {
            Reaction::Full => self.f_full(t),
            Reaction::Truncated(u1) => {
                let cap = u1[node].max(T::zero());
                if t > cap {
                    self.f_full(cap)
                } else {
                    self.f_full(t)
                }
            }
        }
    }

    /// `F(x_node, t) = ∫₀ᵗ f(x_node, s) ds`.
    pub fn primitive(&self, reaction: Reaction<'_, T>, node: usize, t: T) -> T {
        match reaction {
            Reaction::Full => self.big_f_full(t),
            Reaction::Truncated(u1) => {
                let cap = u1[node].max(T::zero());
                if t > cap {
                    self.big_f_full(cap) + self.f_full(cap) * (t - cap)
                } else {
                    self.big_f_full(t)
                }
            }
        }
    }

    fn nonlinearity_slope(&self, reaction: Reaction<'_, T>, node: usize, t: T) -> T {
        match reaction {
            Reaction::Full => self.df_full(t),
            Reaction::Truncated(u1) => {
                if t > u1[node].max(T::zero()) {
                    T::zero()
                } else {
                    self.df_full(t)
                }
            }
        }
    }

    /// `∫ Φ(|∇u|)` over the elements, shifted so that `u = 0` has zero energy.
    pub fn dirichlet_energy(&self, u: &[T]) -> T {
        let floor = self.phi_reg(T::zero());
        self.elements.iter().fold(T::zero(), |acc, e| {
            let g = e.gradient(u);
            acc + e.area * (self.phi_reg((g[0] * g[0] + g[1] * g[1]).sqrt()) - floor)
        })
    }

    /// `Σ wᵢ F(xᵢ, uᵢ)` over interior nodes.
    pub fn reaction_integral(&self, reaction: Reaction<'_, T>, u: &[T]) -> T {
        let w = self.grid.weights();
        self.interior.iter().fold(T::zero(), |acc, &k| acc + w[k] * self.primitive(reaction, k, u[k]))
    }

    /// `∫ Φ(|∇u|) − λ ∫ F(x, u)`; boundary values of `u` are ignored.
    pub fn energy(&self, lambda: T, reaction: Reaction<'_, T>, u: &[T]) -> T {
        self.dirichlet_energy(u) - lambda * self.reaction_integral(reaction, u)
    }

    /// Partial derivatives `∂E/∂uᵢ`, zero at boundary nodes.
    pub fn partials(&self, lambda: T, reaction: Reaction<'_, T>, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); u.len()];
        for e in &self.elements {
            let fl = self.flux(e.gradient(u));
            for k in 0..3 {
                let c = e.coef[k];
                out[e.nodes[k]] = out[e.nodes[k]] + e.area * (fl[0] * c[0] + fl[1] * c[1]);
            }
        }
        let w = self.grid.weights();
        for (k, v) in out.iter_mut().enumerate() {
            if self.slot[k].is_none() {
                *v = T::zero();
            } else {
                *v = *v - lambda * w[k] * self.nonlinearity(reaction, k, u[k]);
            }
        }
        out
    }

    /// `∂E/∂u_k` alone, from the elements around node `k`.
    pub fn node_partial(&self, lambda: T, reaction: Reaction<'_, T>, u: &[T], k: usize) -> T {
        let diffusion = self.touching[k].iter().fold(T::zero(), |acc, &(e, local)| {
            let e = &self.elements[e];
            let fl = self.flux(e.gradient(u));
            let c = e.coef[local];
            acc + e.area * (fl[0] * c[0] + fl[1] * c[1])
        });
        diffusion - lambda * self.grid.weights()[k] * self.nonlinearity(reaction, k, u[k])
    }

    /// Riesz representer of the derivative in the grid inner product:
    /// `(∂E/∂uᵢ)/wᵢ` at interior nodes.
    pub fn riesz_gradient(&self, lambda: T, reaction: Reaction<'_, T>, u: &[T]) -> Vec<T> {
        let w = self.grid.weights();
        let mut g = self.partials(lambda, reaction, u);
        for &k in &self.interior {
            g[k] = g[k] / w[k];
        }
        g
    }

    /// Hessian of the energy over the interior unknowns.
    pub fn hessian(&self, lambda: T, reaction: Reaction<'_, T>, u: &[T]) -> BandedMatrix<T> {
        self.hessian_frozen(lambda, reaction, u, None)
    }

    /// Hessian with the rows and columns of `frozen` nodes replaced by
    /// those of the identity.
    pub(crate) fn hessian_frozen(
        &self,
        lambda: T,
        reaction: Reaction<'_, T>,
        u: &[T],
        frozen: Option<&[bool]>,
    ) -> BandedMatrix<T> {
        let slot: Vec<Option<usize>> = match frozen {
            Some(f) => self.slot.iter().zip(f).map(|(&s, &fz)| if fz { None } else { s }).collect(),
            None => self.slot.clone(),
        };
        let mut h = BandedMatrix::zeros(self.interior.len(), self.band, self.band);
        for e in &self.elements {
            let xi = e.gradient(u);
            let t = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
            let a = self.a(t);
            let mut m = [[e.area * a, T::zero()], [T::zero(), e.area * a]];
            if t >= self.eps_a {
                let extra = e.area * (self.phi.density_slope(t) - a) / (t * t);
                for r in 0..2 {
                    for c in 0..2 {
                        m[r][c] = m[r][c] + extra * xi[r] * xi[c];
                    }
                }
            }
            add_element_block(&slot, self.grid.dim(), &mut h, e, &m);
        }
        let w = self.grid.weights();
        for (s, &k) in self.interior.iter().enumerate() {
            if slot[k].is_some() {
                h.add(s, s, -lambda * w[k] * self.nonlinearity_slope(reaction, k, u[k]));
            } else {
                h.add(s, s, T::one());
            }
        }
        h
    }

    /// Solves `K x = r` with the `a ≡ 1` stiffness matrix; `r` and the
    /// result are full node vectors, zero on the boundary.
    pub fn solve_stiffness(&self, r: &[T]) -> Vec<T> {
        let rhs: Vec<T> = self.interior.iter().map(|&k| r[k]).collect();
        self.scatter(&self.stiffness.solve(&rhs))
    }

    /// Solves `H x = r` for a Hessian from [`Self::hessian`]; `None` when
    /// the matrix is numerically singular.
    pub fn solve_with(&self, h: BandedMatrix<T>, r: &[T]) -> Option<Vec<T>> {
        let lu = h.lu()?;
        let rhs: Vec<T> = self.interior.iter().map(|&k| r[k]).collect();
        let x = lu.solve(&rhs);
        if x.iter().all(|v| v.is_finite()) {
            Some(self.scatter(&x))
        } else {
            None
        }
    }

    fn scatter(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for (s, &k) in self.interior.iter().enumerate() {
            out[k] = x[s];
        }
        out
    }

    /// `∫ |∇u|²` with the element gradients.
    pub fn h1_seminorm_sq(&self, u: &[T]) -> T {
        self.elements.iter().fold(T::zero(), |acc, e| {
            let g = e.gradient(u);
            acc + e.area * (g[0] * g[0] + g[1] * g[1])
        })
    }

    /// `Σ wᵢ uᵢ vᵢ`.
    pub fn l2_dot(&self, u: &[T], v: &[T]) -> T {
        self.grid.quadrature(&u.iter().zip(v).map(|(&a, &b)| a * b).collect::<Vec<_>>())
    }

    /// Element gradient magnitudes weighted by element areas.
    pub fn gradient_field(&self, u: &[T]) -> WeightedSamples<T> {
        let (values, weights) = self
            .elements
            .iter()
            .map(|e| {
                let g = e.gradient(u);
                ((g[0] * g[0] + g[1] * g[1]).sqrt(), e.area)
            })
            .unzip();
        WeightedSamples::new(values, weights).expect("element areas are positive")
    }

    /// Checks the Dirichlet condition and returns the node values.
    pub fn dirichlet_values<'a>(&self, u: &'a GridFunction<T>) -> Result<&'a [T]> {
        if u.grid().as_ref() != self.grid.as_ref() {
            return Err(Error::GridMismatch);
        }
        u.require_dirichlet(T::lit(1e-12) * u.max_abs().max(T::one()))?;
        Ok(u.values())
    }
}
