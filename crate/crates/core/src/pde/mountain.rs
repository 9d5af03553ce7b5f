use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::descent::{axpy, dot, monotone_threshold, relax_nodes, riesz_sup, steepest};
use super::{DescentOptions, Discretization, Metric, Reaction};
use crate::nfunction::log_space;
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MountainOptions {
    /// Number of images on the path, endpoints included.
    pub images: usize,
    /// Sweeps between two arc-length reparametrizations.
    pub reparam_every: usize,
    pub max_sweeps: usize,
    /// Residual of the highest image at which the path is considered settled.
    pub string_tol: f64,
    pub polish_iter: usize,
    pub retries: usize,
    /// Amplitude of the perturbation before a retry, relative to `max |u₁|`.
    pub noise: f64,
    /// Sup distance below which a critical point counts as `0` or `u₁`.
    pub separation_tol: f64,
}

impl Default for MountainOptions {
    fn default() -> Self {
        Self {
            images: 21,
            reparam_every: 10,
            max_sweeps: 5_000,
            string_tol: 1e-3,
            polish_iter: 200,
            retries: 5,
            noise: 1e-3,
            separation_tol: 1e-2,
        }
    }
}

impl MountainOptions {
    pub(crate) fn check(&self) -> Result<()> {
        if self.images < 3 {
            return Err(Error::Config(format!("mountain.images must be at least 3, got {}", self.images)));
        }
        if self.reparam_every == 0 {
            return Err(Error::Config("mountain.reparam_every must be positive".into()));
        }
        if !(self.separation_tol > 0.0) {
            return Err(Error::Config(format!("mountain.separation_tol must be positive, got {}", self.separation_tol)));
        }
        if !(self.string_tol > 0.0) {
            return Err(Error::Config(format!("mountain.string_tol must be positive, got {}", self.string_tol)));
        }
        Ok(())
    }
}

/// Energies of all images after a given sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSnapshot {
    pub sweep: usize,
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MountainPass<T> {
    pub u2: Vec<T>,
    /// `J(u₂)`.
    pub level: T,
    /// Highest energy on the final path.
    pub c_discrete: T,
    /// Sup norm of the Riesz gradient of `J` at `u₂`.
    pub residual: T,
    pub sweeps: usize,
    pub polish_iterations: usize,
    pub retries: usize,
    pub converged: bool,
    pub path: Vec<PathSnapshot>,
}

const STALL_WINDOW: usize = 3;

fn sup_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

fn argmax<T: Scalar>(e: &[T]) -> usize {
    (1..e.len() - 1).fold(1, |b, k| if e[k] > e[b] { k } else { b })
}

/// Half the `L²` distance from image `k` to its nearer neighbour, the
/// longest move image `k` may make in one sweep.
fn reach<T: Scalar>(d: &Discretization<T>, path: &[Vec<T>], k: usize) -> T {
    let gap = |j: usize| {
        let diff: Vec<T> = path[j].iter().zip(&path[k]).map(|(&x, &y)| x - y).collect();
        d.l2_dot(&diff, &diff).sqrt()
    };
    T::lit(0.5) * gap(k - 1).min(gap(k + 1))
}

/// Redistributes the images strictly between `from` and `to` so that they
/// are equally spaced in `L²` arc length along the current polygon.
fn reparametrize<T: Scalar>(d: &Discretization<T>, path: &mut [Vec<T>], from: usize, to: usize) {
    if to <= from + 1 {
        return;
    }
    let mut s = vec![T::zero(); to - from + 1];
    for k in from + 1..=to {
        let diff: Vec<T> = path[k].iter().zip(&path[k - 1]).map(|(&a, &b)| a - b).collect();
        s[k - from] = s[k - from - 1] + d.l2_dot(&diff, &diff).sqrt();
    }
    let total = s[to - from];
    if !(total > T::zero()) {
        return;
    }
    let old: Vec<Vec<T>> = path[from..=to].to_vec();
    let n = T::from_usize_lossy(to - from);
    let mut seg = 0;
    for k in from + 1..to {
        let target = total * T::from_usize_lossy(k - from) / n;
        while seg + 1 < s.len() - 1 && s[seg + 1] < target {
            seg += 1;
        }
        let len = s[seg + 1] - s[seg];
        let theta = if len > T::zero() { ((target - s[seg]) / len).min(T::one()).max(T::zero()) } else { T::zero() };
        path[k] = old[seg].iter().zip(&old[seg + 1]).map(|(&a, &b)| a + theta * (b - a)).collect();
    }
}

/// Newton iteration for `J'(u) = 0` with the nodes below the monotone
/// threshold eliminated: those are always brought back onto their own
/// nodal equations by relaxation (to a tolerance that tightens with the
/// outer residual), and the Newton step on the remaining
/// nodes uses the full Hessian with zero right-hand side on the eliminated
/// ones, which is the Schur-complement step of the reduced system. The step
/// is globalized by backtracking on the squared residual of the free nodes.
/// The iteration stops early once the residual fails to halve over
/// `STALL_WINDOW` steps. Returns the final iterate, its residual and the
/// iteration count.
fn polish<T: Scalar>(
    d: &Discretization<T>,
    lambda: T,
    reaction: Reaction<'_, T>,
    u0: Vec<T>,
    tol: T,
    max_iter: usize,
) -> (Vec<T>, T, usize) {
    let small = monotone_threshold(d);
    let below = |u: &[T]| -> Vec<usize> { d.interior().iter().copied().filter(|&k| u[k] < small).collect() };
    let settle = |u: &mut [T], nodes: &[usize], outer: T| {
        relax_until(d, lambda, reaction, u, nodes, (tol.max(outer) * T::lit(1e-3)).min(outer))
    };
    let mut u = u0;
    let mut nodes = below(&u);
    let mut res = riesz_sup(d, &d.partials(lambda, reaction, &u));
    settle(&mut u, &nodes, res);
    let mut g = d.partials(lambda, reaction, &u);
    res = riesz_sup(d, &g);
    let mut it = 0;
    let mut history = vec![res];
    while res > tol && it < max_iter {
        if it >= STALL_WINDOW && res > T::lit(0.5) * history[it - STALL_WINDOW] {
            break;
        }
        it += 1;
        let mut frozen = vec![false; u.len()];
        for &k in &nodes {
            frozen[k] = true;
        }
        let free_merit = |g: &[T]| {
            g.iter().zip(&frozen).fold(T::zero(), |acc, (&x, &fz)| if fz { acc } else { acc + x * x })
        };
        let merit = free_merit(&g);
        let rhs: Vec<T> = g.iter().zip(&frozen).map(|(&v, &fz)| if fz { T::zero() } else { -v }).collect();
        let Some(dir) = d.solve_with(d.hessian(lambda, reaction, &u), &rhs) else { break };
        let mut a = T::one();
        let mut next = None;
        for _ in 0..24 {
            let mut trial = axpy(&u, a, &dir);
            settle(&mut trial, &nodes, res);
            let gt = d.partials(lambda, reaction, &trial);
            if free_merit(&gt) <= merit * (T::one() - T::lit(2e-4) * a) {
                next = Some((trial, gt));
                break;
            }
            a = a * T::lit(0.5);
        }
        let Some((trial, gt)) = next else { break };
        u = trial;
        g = gt;
        let moved = below(&u);
        if moved != nodes {
            nodes = moved;
            settle(&mut u, &nodes, riesz_sup(d, &g));
            g = d.partials(lambda, reaction, &u);
        }
        res = riesz_sup(d, &g);
        history.push(res);
    }
    (u, res, it)
}

/// Relaxation sweeps over `nodes` until each satisfies its own equation to
/// `tol` (in Riesz scale) or 200 sweeps have run.
fn relax_until<T: Scalar>(d: &Discretization<T>, lambda: T, reaction: Reaction<'_, T>, u: &mut [T], nodes: &[usize], tol: T) {
    let w = d.grid().weights();
    for _ in 0..200 {
        let worst = nodes.iter().fold(T::zero(), |m, &k| m.max((d.node_partial(lambda, reaction, u, k) / w[k]).abs()));
        if worst <= tol {
            break;
        }
        relax_nodes(d, lambda, reaction, u, nodes);
    }
}

/// Mountain pass between `0` and `u₁` for the functional `J` truncated at `u₁`.
///
/// The path starts on the segment `t u₁`, with half of the images below
/// the maximizer of `J(t u₁)` and the rest spaced geometrically above it. In every sweep each inner image
/// takes one Armijo step of preconditioned descent on `J`, except the
/// highest image, which moves uphill along the path tangent and downhill
/// across it. The images on either side of the highest one are respaced by
/// arc length every `reparam_every` sweeps. Once the highest image is
/// nearly critical it is polished by Newton's method; if that lands on `0`
/// or `u₁` the start point is perturbed and the polish repeated.
pub fn mountain_pass<T: Scalar>(
    d: &Discretization<T>,
    lambda: T,
    u1: &[T],
    opts: &MountainOptions,
    descent: &DescentOptions,
    seed: u64,
) -> Result<MountainPass<T>> {
    let reaction = Reaction::Truncated(u1);
    let m = opts.images;
    let c1 = T::lit(descent.c1);
    let shrink = T::lit(descent.backtrack);
    let sep = T::lit(opts.separation_tol);
    let energy = |u: &[T]| d.energy(lambda, reaction, u);
    let scaled = |t: T| -> Vec<T> { u1.iter().map(|&v| v * t).collect() };
    let probes = log_space(T::lit(1e-10), T::one(), 16);
    let peak = probes.iter().map(|&t| (t, energy(&scaled(t)))).fold((T::one(), T::neg_infinity()), |b, x| {
        if x.1 > b.1 {
            x
        } else {
            b
        }
    });
    let mid = (m - 1) / 2;
    let mut path: Vec<Vec<T>> = (0..m)
        .map(|k| {
            let t = if k <= mid {
                peak.0 * T::from_usize_lossy(k) / T::from_usize_lossy(mid)
            } else {
                let s = T::from_usize_lossy(k - mid) / T::from_usize_lossy(m - 1 - mid);
                peak.0 * (T::one() / peak.0).powf(s)
            };
            scaled(t)
        })
        .collect();
    let mut e: Vec<T> = path.iter().map(|u| energy(u)).collect();
    let snapshot = |sweep: usize, e: &[T]| PathSnapshot { sweep, energies: e.iter().map(|v| v.as_f64()).collect() };
    let mut snapshots = vec![snapshot(0, &e)];
    let top = argmax(&e);
    if !(e[top] > e[0].max(e[m - 1])) {
        return Err(Error::NoMountainPass("the segment from 0 to u1 has no energy barrier".into()));
    }
    let tol = T::lit(descent.tol_res);
    let zero = vec![T::zero(); u1.len()];
    let acceptable = |u: &[T], res: T| {
        res <= tol && sup_dist(u, &zero) >= sep && sup_dist(u, u1) >= sep && energy(u) > T::zero()
    };
    let mut steps = vec![T::one(); m];
    let mut sweeps = 0;
    let mut polish_iterations = 0;
    let string_tol = T::lit(opts.string_tol);
    let mut early = None;
    loop {
        let top = argmax(&e);
        let g_top = d.partials(lambda, reaction, &path[top]);
        if riesz_sup(d, &g_top) <= string_tol || sweeps >= opts.max_sweeps {
            break;
        }
        sweeps += 1;
        let mut smallest = T::infinity();
        for k in (1..m - 1).filter(|&k| k != top) {
            let g = d.partials(lambda, reaction, &path[k]);
            let dir = steepest(d, &g, Metric::Sobolev);
            let slope = dot(&g, &dir);
            let mut a = (steps[k] * T::lit(2.0)).min(T::lit(1e6));
            a = a.min(reach(d, &path, k) / d.l2_dot(&dir, &dir).sqrt());
            while a > T::lit(1e-20) {
                let trial = axpy(&path[k], a, &dir);
                let et = energy(&trial);
                if et <= e[k] + c1 * a * slope {
                    path[k] = trial;
                    e[k] = et;
                    steps[k] = a;
                    smallest = smallest.min(a);
                    break;
                }
                a = a * shrink;
            }
        }
        let tau: Vec<T> = path[top + 1].iter().zip(&path[top - 1]).map(|(&a, &b)| a - b).collect();
        let tt = d.h1_seminorm_sq(&tau);
        let mut dir = steepest(d, &g_top, Metric::Sobolev);
        if tt > T::zero() {
            let along = T::lit(2.0) * dot(&g_top, &tau) / tt;
            dir = axpy(&dir, along, &tau);
        }
        let a = if smallest.is_finite() { smallest * T::lit(0.5) } else { steps[top] * T::lit(0.5) };
        let a = a.min(reach(d, &path, top) / d.l2_dot(&dir, &dir).sqrt());
        steps[top] = a;
        path[top] = axpy(&path[top], a, &dir);
        e[top] = energy(&path[top]);
        if sweeps % opts.reparam_every == 0 {
            let top = argmax(&e);
            reparametrize(d, &mut path, 0, top);
            reparametrize(d, &mut path, top, m - 1);
            for k in 1..m - 1 {
                e[k] = energy(&path[k]);
            }
            snapshots.push(snapshot(sweeps, &e));
            let top = argmax(&e);
            let (u2, res, it) = polish(d, lambda, reaction, path[top].clone(), tol, opts.polish_iter);
            polish_iterations += it;
            if acceptable(&u2, res) {
                early = Some((u2, res));
                break;
            }
        }
    }
    if snapshots.last().map(|s| s.sweep) != Some(sweeps) {
        snapshots.push(snapshot(sweeps, &e));
    }
    let top = argmax(&e);
    let c_discrete = e[top];
    let finish = |u2: Vec<T>, res: T, retries: usize, polish_iterations: usize, path: Vec<PathSnapshot>| MountainPass {
        level: energy(&u2),
        u2,
        c_discrete,
        residual: res,
        sweeps,
        polish_iterations,
        retries,
        converged: res <= tol,
        path,
    };
    if let Some((u2, res)) = early {
        return Ok(finish(u2, res, 0, polish_iterations, snapshots));
    }
    if sup_dist(&path[top], &zero) < sep || sup_dist(&path[top], u1) < sep {
        return Err(Error::NoMountainPass("the highest image collapsed onto an endpoint".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = T::lit(opts.noise) * sup_dist(&path[top], &zero);
    let mut start = path[top].clone();
    for attempt in 0..=opts.retries {
        let (u2, res, it) = polish(d, lambda, reaction, start, tol, opts.polish_iter);
        polish_iterations += it;
        if acceptable(&u2, res) {
            return Ok(finish(u2, res, attempt, polish_iterations, snapshots));
        }
        start = path[top]
            .iter()
            .enumerate()
            .map(|(k, &v)| if d.grid().is_boundary(k) { T::zero() } else { v + scale * T::lit(rng.gen_range(-1.0..1.0)) })
            .collect();
    }
    Err(Error::NoMountainPass(format!(
        "no nontrivial critical point after {sweeps} sweeps and {} perturbed restarts",
        opts.retries
    )))
}
