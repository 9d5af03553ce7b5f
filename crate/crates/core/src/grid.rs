//! Uniform 1D/2D grids and sampled functions on them.
//!
//! Nodes of a 2D grid are stored row-major with `x` varying fastest: node
//! `(i, j)` has index `j * nx + i`. Quadrature weights are the
//! tensor-product trapezoid weights, so they sum to the measure of the
//! domain.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// Serializable description of a grid: the data needed to rebuild it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub dim: usize,
    pub bounds: Vec<[f64; 2]>,
    pub nodes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    bounds: Vec<(T, T)>,
    nodes: Vec<usize>,
    spacing: Vec<T>,
    weights: Vec<T>,
    boundary: Vec<bool>,
}

impl<T: Scalar> Grid<T> {
    /// Uniform grid on `[a, b]` with `n >= 2` nodes.
    pub fn line(a: T, b: T, n: usize) -> Result<Self> {
        Self::build(vec![(a, b)], vec![n])
    }

    /// Uniform `nx × ny` grid on `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x: (T, T), y: (T, T), nx: usize, ny: usize) -> Result<Self> {
        Self::build(vec![x, y], vec![nx, ny])
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::rectangle((T::zero(), T::one()), (T::zero(), T::one()), n, n)
    }

    pub fn from_descriptor(d: &GridDescriptor) -> Result<Self> {
        if d.bounds.len() != d.dim || d.nodes.len() != d.dim {
            return Err(Error::InvalidGrid(format!(
                "descriptor has dim {} but {} bounds and {} node counts",
                d.dim,
                d.bounds.len(),
                d.nodes.len()
            )));
        }
        Self::build(d.bounds.iter().map(|b| (T::lit(b[0]), T::lit(b[1]))).collect(), d.nodes.clone())
    }

    fn build(bounds: Vec<(T, T)>, nodes: Vec<usize>) -> Result<Self> {
        let dim = bounds.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not supported")));
        }
        for (axis, (&(a, b), &n)) in bounds.iter().zip(&nodes).enumerate() {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidGrid(format!("axis {axis}: bounds [{a}, {b}] are not an interval")));
            }
            if n < 2 {
                return Err(Error::InvalidGrid(format!("axis {axis}: need at least 2 nodes, got {n}")));
            }
        }
        let spacing: Vec<T> =
            bounds.iter().zip(&nodes).map(|(&(a, b), &n)| (b - a) / T::from_usize_lossy(n - 1)).collect();
        let axis_weights: Vec<Vec<T>> = spacing
            .iter()
            .zip(&nodes)
            .map(|(&h, &n)| {
                (0..n).map(|i| if i == 0 || i == n - 1 { h * T::lit(0.5) } else { h }).collect()
            })
            .collect();
        let total: usize = nodes.iter().product();
        let mut weights = Vec::with_capacity(total);
        let mut boundary = Vec::with_capacity(total);
        if dim == 1 {
            let n = nodes[0];
            weights.extend_from_slice(&axis_weights[0]);
            boundary.extend((0..n).map(|i| i == 0 || i == n - 1));
        } else {
            let (nx, ny) = (nodes[0], nodes[1]);
            for j in 0..ny {
                for i in 0..nx {
                    weights.push(axis_weights[0][i] * axis_weights[1][j]);
                    boundary.push(i == 0 || i == nx - 1 || j == 0 || j == ny - 1);
                }
            }
        }
        Ok(Self { bounds, nodes, spacing, weights, boundary })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes_per_axis(&self) -> &[usize] {
        &self.nodes
    }

    pub fn bounds(&self) -> &[(T, T)] {
        &self.bounds
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    /// Smallest spacing over the axes.
    pub fn min_spacing(&self) -> T {
        self.spacing.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    /// Index of node `(i, j)`; `j` is ignored in 1D.
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.dim() == 1 {
            i
        } else {
            j * self.nodes[0] + i
        }
    }

    /// Axis indices `(i, j)` of a node (`j = 0` in 1D).
    pub fn axis_indices(&self, node: usize) -> (usize, usize) {
        if self.dim() == 1 {
            (node, 0)
        } else {
            (node % self.nodes[0], node / self.nodes[0])
        }
    }

    /// Coordinates of a node; the second entry is 0 in 1D.
    pub fn coords(&self, node: usize) -> [T; 2] {
        let (i, j) = self.axis_indices(node);
        let x = self.bounds[0].0 + self.spacing[0] * T::from_usize_lossy(i);
        let y = if self.dim() == 2 { self.bounds[1].0 + self.spacing[1] * T::from_usize_lossy(j) } else { T::zero() };
        [x, y]
    }

    /// Lebesgue measure of the domain.
    pub fn measure(&self) -> T {
        self.bounds.iter().map(|&(a, b)| b - a).fold(T::one(), |acc, l| acc * l)
    }

    /// Euclidean diameter of the domain.
    pub fn diam(&self) -> T {
        self.bounds.iter().map(|&(a, b)| (b - a) * (b - a)).sum::<T>().sqrt()
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            dim: self.dim(),
            bounds: self.bounds.iter().map(|&(a, b)| [a.as_f64(), b.as_f64()]).collect(),
            nodes: self.nodes.clone(),
        }
    }

    /// Quadrature of node values: `Σ wᵢ fᵢ` in node order.
    pub fn quadrature(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).fold(T::zero(), |acc, (&w, &v)| acc + w * v)
    }

    pub fn integrate(&self, f: &GridFunction<T>) -> Result<T> {
        if f.grid.as_ref() != self {
            return Err(Error::GridMismatch);
        }
        Ok(self.quadrature(&f.values))
    }
}

/// Real values sampled at the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct JsonForm {
    schema: u32,
    grid: GridDescriptor,
    values: Vec<f64>,
}

impl<T: Scalar> GridFunction<T> {
    /// Wraps `values`, which must be finite and one per node.
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<Grid<T>>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![T::zero(); n] }
    }

    pub fn constant(grid: Arc<Grid<T>>, c: T) -> Self {
        let n = grid.len();
        Self { grid, values: vec![c; n] }
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|k| {
            let [x, y] = grid.coords(k);
            f(x, y)
        });
        let values = values.collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn integral(&self) -> T {
        self.grid.quadrature(&self.values)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Node-wise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| c * v)
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.zip_with(other, |x, y| a * x + b * y)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max(u, 0)` node-wise.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(T::zero()))
    }

    /// `max(−u, 0)` node-wise.
    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(T::zero()))
    }

    /// Largest `|u|` over boundary nodes.
    pub fn boundary_max_abs(&self) -> T {
        self.values
            .iter()
            .zip(self.grid.boundary_mask())
            .filter(|(_, &b)| b)
            .fold(T::zero(), |m, (v, _)| m.max(v.abs()))
    }

    /// Fails with [`Error::NotDirichlet`] unless `|u| <= tol` on the boundary.
    pub fn require_dirichlet(&self, tol: T) -> Result<()> {
        let m = self.boundary_max_abs();
        if m > tol {
            Err(Error::NotDirichlet { max_boundary: m.as_f64() })
        } else {
            Ok(())
        }
    }

    /// Copy with boundary values set to zero.
    pub fn with_zero_boundary(&self) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.grid.boundary_mask())
            .map(|(&v, &b)| if b { T::zero() } else { v })
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Partial derivatives, one field per axis: central differences at
    /// interior nodes and first-order one-sided differences at the ends.
    pub fn gradient_components(&self) -> Result<Vec<Self>> {
        let g = &*self.grid;
        if g.nodes_per_axis().iter().any(|&n| n < 3) {
            return Err(Error::InvalidGrid("gradients need at least 3 nodes per axis".into()));
        }
        let nx = g.nodes_per_axis()[0];
        let ny = if g.dim() == 2 { g.nodes_per_axis()[1] } else { 1 };
        let u = &self.values;
        let diff = |n: usize, h: T, at: &dyn Fn(usize) -> T, k: usize| -> T {
            if k == 0 {
                (at(1) - at(0)) / h
            } else if k == n - 1 {
                (at(n - 1) - at(n - 2)) / h
            } else {
                (at(k + 1) - at(k - 1)) / (T::lit(2.0) * h)
            }
        };
        let mut out = Vec::with_capacity(g.dim());
        let hx = g.spacing()[0];
        let mut dx = vec![T::zero(); u.len()];
        for j in 0..ny {
            let row = |i: usize| u[j * nx + i];
            for i in 0..nx {
                dx[j * nx + i] = diff(nx, hx, &row, i);
            }
        }
        out.push(Self { grid: self.grid.clone(), values: dx });
        if g.dim() == 2 {
            let hy = g.spacing()[1];
            let mut dy = vec![T::zero(); u.len()];
            for i in 0..nx {
                let col = |j: usize| u[j * nx + i];
                for j in 0..ny {
                    dy[j * nx + i] = diff(ny, hy, &col, j);
                }
            }
            out.push(Self { grid: self.grid.clone(), values: dy });
        }
        Ok(out)
    }

    /// `|∇u|` node-wise, the Euclidean norm of [`Self::gradient_components`].
    pub fn gradient_magnitude(&self) -> Result<Self> {
        let parts = self.gradient_components()?;
        let values = (0..self.len()).map(|k| parts.iter().map(|p| p.values[k] * p.values[k]).sum::<T>().sqrt());
        Ok(Self { grid: self.grid.clone(), values: values.collect() })
    }

    /// Writes `x,value` (1D) or `x,y,value` (2D) rows in node order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.grid.dim() == 1 {
            w.write_record(["x", "value"])?;
        } else {
            w.write_record(["x", "y", "value"])?;
        }
        for (k, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.coords(k);
            if self.grid.dim() == 1 {
                w.write_record([fmt(x), fmt(*v)])?;
            } else {
                w.write_record([fmt(x), fmt(y), fmt(*v)])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`Self::write_csv`]; the uniform grid is
    /// inferred from the coordinates, and rows may come in any order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let width = r.headers()?.len();
        if !(width == 2 || width == 3) {
            return Err(Error::InvalidGrid(format!("expected 2 or 3 CSV columns, found {width}")));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            let parsed = parsed.map_err(|e| Error::InvalidGrid(format!("bad number in CSV: {e}")))?;
            if parsed.len() != width {
                return Err(Error::InvalidGrid("ragged CSV row".into()));
            }
            rows.push(parsed);
        }
        let dim = width - 1;
        let mut axes = Vec::with_capacity(dim);
        for a in 0..dim {
            axes.push(uniform_axis(rows.iter().map(|r| r[a]).collect(), a)?);
        }
        let bounds: Vec<[f64; 2]> = axes.iter().map(|ax| [ax.0, ax.1]).collect();
        let nodes: Vec<usize> = axes.iter().map(|ax| ax.2).collect();
        let grid = Arc::new(Grid::from_descriptor(&GridDescriptor { dim, bounds, nodes })?);
        if rows.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} rows for a grid of {} nodes", rows.len(), grid.len())));
        }
        let mut values = vec![None; grid.len()];
        for row in &rows {
            let idx: Vec<usize> = axes
                .iter()
                .enumerate()
                .map(|(a, &(lo, hi, n))| ((row[a] - lo) / (hi - lo) * (n - 1) as f64).round() as usize)
                .collect();
            let k = grid.index(idx[0], *idx.get(1).unwrap_or(&0));
            if values[k].replace(T::lit(row[dim])).is_some() {
                return Err(Error::InvalidGrid("duplicate node in CSV".into()));
            }
        }
        let values = values.into_iter().collect::<Option<Vec<T>>>().ok_or_else(|| {
            Error::InvalidGrid("CSV does not cover every grid node".into())
        })?;
        Self::new(grid, values)
    }

    pub fn to_json(&self) -> Result<String> {
        let form = JsonForm {
            schema: 1,
            grid: self.grid.descriptor(),
            values: self.values.iter().map(|v| v.as_f64()).collect(),
        };
        Ok(serde_json::to_string(&form)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let form: JsonForm = serde_json::from_str(s)?;
        if form.schema != 1 {
            return Err(Error::Config(format!("unsupported schema {}", form.schema)));
        }
        let grid = Arc::new(Grid::from_descriptor(&form.grid)?);
        Self::new(grid, form.values.into_iter().map(T::lit).collect())
    }
}

fn fmt<T: Scalar>(v: T) -> String {
    format!("{}", v.as_f64())
}

/// `(min, max, count)` of a uniformly spaced coordinate set.
fn uniform_axis(mut coords: Vec<f64>, axis: usize) -> Result<(f64, f64, usize)> {
    coords.sort_by(|a, b| a.total_cmp(b));
    coords.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    if coords.len() < 2 {
        return Err(Error::InvalidGrid(format!("axis {axis}: fewer than two distinct coordinates")));
    }
    let n = coords.len();
    let (lo, hi) = (coords[0], coords[n - 1]);
    let h = (hi - lo) / (n - 1) as f64;
    for (k, c) in coords.iter().enumerate() {
        if (c - (lo + h * k as f64)).abs() > 1e-9 * h.max(1e-300) * (n as f64) {
            return Err(Error::InvalidGrid(format!("axis {axis}: coordinates are not uniformly spaced")));
        }
    }
    Ok((lo, hi, n))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn line(n: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::line(0.0, 1.0, n).unwrap())
    }

    #[test]
    fn weights_sum_to_measure() {
        let g = Grid::rectangle((0.0, 2.0), (-1.0, 0.5), 17, 9).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 3.0).abs() <= 1e-12 * 3.0);
        assert_eq!(g.measure(), 3.0);
        assert!((g.diam() - (4.0f64 + 2.25).sqrt()).abs() < 1e-15);
        let g1 = Grid::line(-1.0, 3.0, 5).unwrap();
        assert_eq!(g1.weights().iter().sum::<f64>(), 4.0);
        assert_eq!(g1.diam(), 4.0);
    }

    #[test]
    fn boundary_mask_is_outer_layer() {
        let g = Grid::<f64>::rectangle((0.0, 1.0), (0.0, 1.0), 5, 4).unwrap();
        let count = g.boundary_mask().iter().filter(|b| **b).count();
        assert_eq!(count, 2 * 5 + 2 * 4 - 4);
        for k in 0..g.len() {
            let (i, j) = g.axis_indices(k);
            assert_eq!(g.is_boundary(k), i == 0 || j == 0 || i == 4 || j == 3);
            assert_eq!(g.index(i, j), k);
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid::line(0.0, 1.0, 1).is_err());
        assert!(Grid::line(1.0, 1.0, 5).is_err());
        assert!(Grid::line(0.0, f64::NAN, 5).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = line(1025);
        let one = GridFunction::constant(g.clone(), 1.0);
        assert!((g.integrate(&one).unwrap() - 1.0).abs() < 1e-15);
        let x = GridFunction::from_fn(g.clone(), |x, _| x).unwrap();
        assert!((x.integral() - 0.5).abs() < 1e-6);
        let chi = GridFunction::from_fn(g.clone(), |x, _| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
        assert!((chi.integral() - 0.5).abs() <= 1.0 / 1024.0);
        let other = GridFunction::constant(line(9), 1.0);
        assert!(matches!(g.integrate(&other), Err(Error::GridMismatch)));
    }

    #[test]
    fn gradient_examples() {
        let g = line(11);
        let u = GridFunction::from_fn(g.clone(), |x, _| 3.0 * x).unwrap();
        for v in u.gradient_magnitude().unwrap().values() {
            assert!((v - 3.0).abs() < 1e-10);
        }
        let g = line(257);
        let u = GridFunction::from_fn(g.clone(), |x, _| (PI * x).sin()).unwrap();
        let du = u.gradient_magnitude().unwrap();
        let err = (0..g.len())
            .filter(|&k| !g.is_boundary(k))
            .map(|k| (du.values()[k] - PI * (PI * g.coords(k)[0]).cos().abs()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "{err}");
        let c = GridFunction::constant(g, 4.2);
        assert!(c.gradient_magnitude().unwrap().max_abs() == 0.0);
        assert!(GridFunction::constant(line(2), 1.0).gradient_magnitude().is_err());
    }

    #[test]
    fn gradient_2d_linear() {
        let g = Arc::new(Grid::rectangle((0.0, 1.0), (0.0, 2.0), 7, 9).unwrap());
        let u = GridFunction::from_fn(g, |x: f64, y| 3.0 * x - 4.0 * y).unwrap();
        let parts = u.gradient_components().unwrap();
        assert!(parts[0].values().iter().all(|v| (v - 3.0).abs() < 1e-12));
        assert!(parts[1].values().iter().all(|v| (v + 4.0).abs() < 1e-12));
        assert!(u.gradient_magnitude().unwrap().values().iter().all(|v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn interior_gradient_ignores_boundary_ghosts() {
        let g = Arc::new(Grid::unit_square(9).unwrap());
        let u = GridFunction::from_fn(g.clone(), |x: f64, y: f64| (PI * x).sin() * (PI * y).sin()).unwrap().with_zero_boundary();
        let shifted = u.map(|v| v + 1.0);
        let (a, b) = (u.gradient_magnitude().unwrap(), shifted.gradient_magnitude().unwrap());
        for k in 0..g.len() {
            assert!((a.values()[k] - b.values()[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn parts_examples() {
        let g = line(5);
        let u = GridFunction::constant(g.clone(), -2.0);
        assert!(u.positive_part().values().iter().all(|&v| v == 0.0));
        assert!(u.negative_part().values().iter().all(|&v| v == 2.0));
        let u = GridFunction::from_fn(g, |x, _| x - 0.5).unwrap();
        let p = u.positive_part();
        for k in 0..5 {
            if u.grid().coords(k)[0] < 0.5 {
                assert_eq!(p.values()[k], 0.0);
            }
        }
    }

    #[test]
    fn dirichlet_checks() {
        let g = line(5);
        let u = GridFunction::new(g.clone(), vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap();
        u.require_dirichlet(0.0).unwrap();
        let v = GridFunction::new(g, vec![0.5, 1.0, 2.0, 1.0, 0.0]).unwrap();
        assert!(matches!(v.require_dirichlet(1e-12), Err(Error::NotDirichlet { .. })));
        assert_eq!(v.with_zero_boundary().values()[0], 0.0);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(GridFunction::new(line(3), vec![0.0, 1.0]).is_err());
        assert!(GridFunction::new(line(3), vec![0.0, f64::INFINITY, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = Arc::new(Grid::rectangle((0.0, 1.0), (-1.0, 1.0), 5, 4).unwrap());
        let u = GridFunction::from_fn(g, |x, y| x * x - 0.3 * y).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let back = GridFunction::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid().nodes_per_axis(), &[5, 4]);
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        let header = lines.remove(0);
        lines.reverse();
        let shuffled = format!("{header}\n{}\n", lines.join("\n"));
        let again = GridFunction::<f64>::read_csv(shuffled.as_bytes()).unwrap();
        assert_eq!(again.values(), back.values());
    }

    #[test]
    fn csv_rejects_irregular_data() {
        assert!(GridFunction::<f64>::read_csv("x,value\n0,1\n0.1,2\n0.5,3\n".as_bytes()).is_err());
        assert!(GridFunction::<f64>::read_csv("x,y,value\n0,0,1\n1,0,2\n0,1,3\n".as_bytes()).is_err());
        assert!(GridFunction::<f64>::read_csv("a,b,c,d\n".as_bytes()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = Arc::new(Grid::rectangle((0.0, 1.0), (0.0, 1.0), 3, 3).unwrap());
        let u = GridFunction::from_fn(g, |x, y| x + 10.0 * y).unwrap();
        let s = u.to_json().unwrap();
        assert!(s.starts_with(r#"{"schema":1,"grid":{"dim":2"#));
        let back = GridFunction::<f64>::from_json(&s).unwrap();
        assert_eq!(back, u);
        assert!(GridFunction::<f64>::from_json(&s.replace("\"schema\":1", "\"schema\":2")).is_err());
    }

    proptest! {
        #[test]
        fn integrate_is_linear(vals in proptest::collection::vec(-1e3f64..1e3, 33 * 2), a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let g = line(33);
            let f = GridFunction::new(g.clone(), vals[..33].to_vec()).unwrap();
            let h = GridFunction::new(g, vals[33..].to_vec()).unwrap();
            let combo = f.axpby(a, &h, b).unwrap();
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let lhs = combo.integral() - a * f.integral() - b * h.integral();
            prop_assert!(lhs.abs() <= 1e-12 * (a.abs() + b.abs()) * scale);
        }

        #[test]
        fn parts_reconstruct(vals in proptest::collection::vec(-1e6f64..1e6, 9)) {
            let u = GridFunction::new(line(9), vals).unwrap();
            let back = u.positive_part().axpby(1.0, &u.negative_part(), -1.0).unwrap();
            prop_assert_eq!(back.values(), u.values());
        }
    }
}
