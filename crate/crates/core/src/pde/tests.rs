use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::descent::riesz_sup;
use super::*;
use crate::grid::{Grid, GridFunction};
use crate::nfunction::NFunction;
use crate::Error;

type F = NFunction<f64>;

fn square(n: usize) -> Arc<Grid<f64>> {
    Arc::new(Grid::unit_square(n).unwrap())
}

fn spec_on(grid: Arc<Grid<f64>>, phi: F) -> ProblemSpec<f64> {
    ProblemSpec::new(phi, 1.5, 1.2, grid)
}

fn random_dirichlet(grid: &Arc<Grid<f64>>, rng: &mut ChaCha8Rng, amp: f64) -> GridFunction<f64> {
    let vals = (0..grid.len()).map(|k| if grid.is_boundary(k) { 0.0 } else { rng.gen_range(-amp..amp) }).collect();
    GridFunction::new(grid.clone(), vals).unwrap()
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

#[test]
fn energy_of_zero_is_zero() {
    let spec = spec_on(square(9), F::power(1.8).unwrap()).with_lambda(3.0);
    let zero = GridFunction::zeros(spec.grid.clone());
    assert_eq!(spec.energy(&zero).unwrap(), 0.0);
    assert!(spec.energy_gradient(&zero).unwrap().values().iter().all(|&v| v == 0.0));
}

#[test]
fn energy_rejects_boundary_values() {
    let spec = spec_on(square(9), F::power(1.8).unwrap());
    let u = GridFunction::constant(spec.grid.clone(), 1.0);
    assert!(matches!(spec.energy(&u), Err(Error::NotDirichlet { .. })));
}

#[test]
fn dirichlet_energy_of_sine() {
    let grid = Arc::new(Grid::line(0.0, 1.0, 1001).unwrap());
    let spec = spec_on(grid.clone(), F::power(2.0).unwrap()).with_lambda(0.0);
    let u = GridFunction::from_fn(grid, |x, _| (PI * x).sin()).unwrap().with_zero_boundary();
    let e = spec.energy(&u).unwrap();
    assert!((e - PI * PI / 4.0).abs() < 1e-4, "{e}");
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (phi, grid) in [
        (F::power(1.8).unwrap(), square(9)),
        (F::exp_minus(), square(7)),
        (F::power_log(2.0).unwrap(), Arc::new(Grid::line(0.0, 2.0, 15).unwrap())),
    ] {
        let spec = spec_on(grid.clone(), phi).with_lambda(7.0);
        for _ in 0..10 {
            let u = random_dirichlet(&grid, &mut rng, 2.0);
            let v = random_dirichlet(&grid, &mut rng, 1.0);
            let g = spec.energy_gradient(&u).unwrap();
            let pairing = grid.quadrature(&g.values().iter().zip(v.values()).map(|(a, b)| a * b).collect::<Vec<_>>());
            let h = 1e-5;
            let plus = spec.energy(&u.axpby(1.0, &v, h).unwrap()).unwrap();
            let minus = spec.energy(&u.axpby(1.0, &v, -h).unwrap()).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            assert!((pairing - fd).abs() <= 1e-4 * fd.abs().max(1.0), "{pairing} vs {fd}");
        }
    }
}

#[test]
fn quadratic_case_is_five_point_laplacian() {
    let grid = Arc::new(Grid::rectangle((0.0, 1.0), (0.0, 2.0), 9, 13).unwrap());
    let (p, q, lambda) = (1.5, 1.2, 4.0);
    let spec = ProblemSpec::new(F::power(2.0).unwrap(), p, q, grid.clone()).with_lambda(lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_dirichlet(&grid, &mut rng, 1.0);
    let g = spec.energy_gradient(&u).unwrap();
    let (hx, hy) = (grid.spacing()[0], grid.spacing()[1]);
    let at = |i: usize, j: usize| u.values()[grid.index(i, j)];
    for j in 1..12 {
        for i in 1..8 {
            let lap = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (hx * hx)
                + (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (hy * hy);
            let s = at(i, j).max(0.0);
            let expected = -lap - lambda * (s.powf(p - 1.0) - s.powf(q - 1.0));
            let got = g.values()[grid.index(i, j)];
            assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "({i},{j}) {got} vs {expected}");
        }
    }
    for k in (0..grid.len()).filter(|&k| grid.is_boundary(k)) {
        assert_eq!(g.values()[k], 0.0);
    }
}

#[test]
fn hessian_matches_differences_of_partials() {
    let grid = square(7);
    let d = Discretization::new(grid.clone(), F::power(1.8).unwrap(), 1.5, 1.2, 1e-8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u: Vec<f64> = random_dirichlet(&grid, &mut rng, 1.0).values().iter().map(|v| v.abs() + 0.5).collect();
    let u: Vec<f64> = u.iter().enumerate().map(|(k, &v)| if grid.is_boundary(k) { 0.0 } else { v }).collect();
    let v = random_dirichlet(&grid, &mut rng, 1.0).into_values();
    let h = d.hessian(3.0, Reaction::Full, &u);
    let vi: Vec<f64> = d.interior().iter().map(|&k| v[k]).collect();
    let hv = h.mul_vec(&vi);
    let eps = 1e-6;
    let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + eps * b).collect();
    let um: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - eps * b).collect();
    let gp = d.partials(3.0, Reaction::Full, &up);
    let gm = d.partials(3.0, Reaction::Full, &um);
    for (s, &k) in d.interior().iter().enumerate() {
        let fd = (gp[k] - gm[k]) / (2.0 * eps);
        assert!((hv[s] - fd).abs() <= 1e-6 * fd.abs().max(1e-3), "{} vs {fd}", hv[s]);
    }
}

#[test]
fn truncated_nonlinearity_branches() {
    let grid = square(5);
    let (p, q) = (1.5, 1.2);
    let d = Discretization::new(grid.clone(), F::power(1.8).unwrap(), p, q, 1e-8).unwrap();
    let u1 = vec![2.0; grid.len()];
    let r = Reaction::Truncated(&u1);
    let k = grid.index(2, 2);
    assert_eq!(d.nonlinearity(r, k, -1.0), 0.0);
    assert_eq!(d.primitive(r, k, -1.0), 0.0);
    let t: f64 = 1.3;
    assert!(close(d.primitive(r, k, t), t.powf(p) / p - t.powf(q) / q, 1e-14));
    assert!(close(d.nonlinearity(r, k, t), t.powf(p - 1.0) - t.powf(q - 1.0), 1e-14));
    let (c, t) = (2.0f64, 3.5);
    let expected = c.powf(p) / p - c.powf(q) / q + (c.powf(p - 1.0) - c.powf(q - 1.0)) * (t - c);
    assert!(close(d.primitive(r, k, t), expected, 1e-14));
    assert_eq!(d.nonlinearity(r, k, t), d.nonlinearity(r, k, c));
    let below = d.primitive(r, k, c * (1.0 - 1e-12));
    assert!(close(below, d.primitive(r, k, c), 1e-10));
}

#[test]
fn full_and_truncated_agree_below_u1() {
    let grid = square(9);
    let d = Discretization::new(grid.clone(), F::power(1.8).unwrap(), 1.5, 1.2, 1e-8).unwrap();
    let u1: Vec<f64> = (0..grid.len()).map(|k| if grid.is_boundary(k) { 0.0 } else { 3.0 }).collect();
    let u: Vec<f64> = u1.iter().map(|v| 0.5 * v).collect();
    let a = d.energy(2.0, Reaction::Full, &u);
    let b = d.energy(2.0, Reaction::Truncated(&u1), &u);
    assert_eq!(a, b);
    assert_eq!(d.partials(2.0, Reaction::Full, &u), d.partials(2.0, Reaction::Truncated(&u1), &u));
}

#[test]
fn monotone_flux_on_grid_of_vectors() {
    let d = Discretization::new(square(5), F::power(1.8).unwrap(), 1.5, 1.2, 1e-8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let scale = 10f64.powf(rng.gen_range(-9.0..3.0));
        let xi = [rng.gen_range(-1.0..1.0) * scale, rng.gen_range(-1.0..1.0) * scale];
        let psi = [rng.gen_range(-1.0..1.0) * scale, rng.gen_range(-1.0..1.0) * scale];
        let (fa, fb) = (d.flux(xi), d.flux(psi));
        let m = (fa[0] - fb[0]) * (xi[0] - psi[0]) + (fa[1] - fb[1]) * (xi[1] - psi[1]);
        assert!(m >= -1e-12, "{m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn flux_is_monotone(x0 in -50.0..50.0f64, x1 in -50.0..50.0f64, y0 in -50.0..50.0f64, y1 in -50.0..50.0f64,
                        which in 0usize..3) {
        let phi = match which {
            0 => F::power(1.8).unwrap(),
            1 => F::exp_power(2.0).unwrap(),
            _ => F::llog(),
        };
        let d = Discretization::new(square(3), phi, 1.5, 1.2, 1e-8).unwrap();
        let s = if which == 1 { 0.05 } else { 1.0 };
        let (x0, x1, y0, y1) = (s * x0, s * x1, s * y0, s * y1);
        let (a, b) = (d.flux([x0, x1]), d.flux([y0, y1]));
        let m = (a[0] - b[0]) * (x0 - y0) + (a[1] - b[1]) * (x1 - y1);
        prop_assert!(m >= -1e-12 * (1.0 + a[0].abs() + a[1].abs() + b[0].abs() + b[1].abs()));
    }

    #[test]
    fn growth_indices_of_powers(s in 1.1..6.0f64) {
        let (lo, hi) = growth_indices(&F::power(s).unwrap());
        prop_assert!((lo - s).abs() < 1e-9 && (hi - s).abs() < 1e-9);
    }
}

#[test]
fn truncated_energy_is_coercive() {
    let grid = square(9);
    let d = Discretization::new(grid.clone(), F::power(1.8).unwrap(), 1.5, 1.2, 1e-8).unwrap();
    let u1: Vec<f64> = (0..grid.len()).map(|k| if grid.is_boundary(k) { 0.0 } else { 5.0 }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let w = random_dirichlet(&grid, &mut rng, 1.0).into_values();
        let along: Vec<f64> = [1e2, 1e3, 1e4, 1e5]
            .iter()
            .map(|&t| d.energy(50.0, Reaction::Truncated(&u1), &w.iter().map(|v| v * t).collect::<Vec<_>>()))
            .collect();
        assert!(along.windows(2).all(|p| p[1] > p[0]), "{along:?}");
        assert!(along[3] > 1e3);
    }
}

#[test]
fn norm_modular_chain_for_homogeneous_phi() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for s in [1.5, 1.8, 3.0] {
        let spec = spec_on(square(9), F::power(s).unwrap());
        for _ in 0..5 {
            let u = random_dirichlet(&spec.grid, &mut rng, 3.0);
            let r = norm_modular_bounds(&spec, &u).unwrap();
            assert!(r.holds);
            assert!(close(r.norm.powf(s), r.modular, 1e-6), "{r:?}");
        }
    }
}

#[test]
fn norm_modular_chain_inside_and_outside() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for phi in [F::power(1.8).unwrap(), F::power_log(2.0).unwrap(), F::exp_power(2.0).unwrap()] {
        let spec = spec_on(square(9), phi);
        for target in [0.5, 2.0] {
            let u = random_dirichlet(&spec.grid, &mut rng, 1.0);
            let n = norm_modular_bounds(&spec, &u).unwrap().norm;
            let r = norm_modular_bounds(&spec, &u.scale(target / n)).unwrap();
            assert!(close(r.norm, target, 1e-9));
            let case = if target < 1.0 { ChainCase::InsideUnitBall } else { ChainCase::OutsideUnitBall };
            assert_eq!(r.case, case);
            assert!(r.holds, "{r:?}");
        }
    }
}

#[test]
fn minimize_without_reaction_returns_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for phi in [F::power(2.0).unwrap(), F::power(1.8).unwrap()] {
        let spec = spec_on(square(9), phi).with_lambda(0.0);
        let u0 = random_dirichlet(&spec.grid, &mut rng, 1.0);
        let out = global_minimize(&spec, &u0).unwrap();
        assert!(out.converged);
        assert!(out.u.iter().all(|v| v.abs() < 1e-5), "{:?}", out.u.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        assert!(out.energy >= 0.0 && out.energy < 1e-8);
    }
}

#[test]
fn zero_is_critical_for_small_lambda() {
    let spec = spec_on(square(9), F::power(1.8).unwrap());
    let d = spec.discretize().unwrap();
    let (star, _) = lambda_star_search(&d, 0.25).unwrap();
    let spec = spec.with_lambda(0.5 * star.lambda_star);
    let zero = GridFunction::zeros(spec.grid.clone());
    let out = global_minimize(&spec, &zero).unwrap();
    assert!(out.converged && out.iterations == 0);
    assert!(out.u.iter().all(|&v| v == 0.0));
}

#[test]
fn lambda_star_search_brackets_the_sign_change() {
    let spec = spec_on(square(13), F::power(1.8).unwrap());
    let d = spec.discretize().unwrap();
    let (p, q) = (1.5f64, 1.2f64);
    let (star, u0) = lambda_star_search(&d, 0.25).unwrap();
    assert!(star.t0.powf(p) / p - star.t0.powf(q) / q > 0.0);
    assert!(d.energy(0.0, Reaction::Full, u0.values()) > 0.0);
    let ray_min = |lambda: f64| {
        (0..400)
            .map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 399.0))
            .map(|t| d.energy(lambda, Reaction::Full, &u0.values().iter().map(|v| v * t).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min)
    };
    assert!(ray_min(0.99 * star.lambda_star) > 0.0);
    assert!(ray_min(1.01 * star.lambda_star) < 0.0);
    assert!(ray_min(1.0) > 0.0);
    assert!(ray_min(1e3) < ray_min(1e2) && ray_min(1e3) < 0.0);
}

#[test]
fn lambda_star_search_reports_trace_when_no_flip() {
    let spec = ProblemSpec::new(F::power(1.8).unwrap(), 1.5, 1.2, square(9));
    let d = Discretization::new(spec.grid.clone(), F::power(1.8).unwrap(), 1.5, 1.5, 1e-8).unwrap();
    match lambda_star_search(&d, 0.25) {
        Err(Error::NoSignChange { trace, lambda_max }) => {
            assert!(lambda_max >= 1e12);
            assert!(!trace.is_empty() && trace.iter().all(|&(_, e)| e >= 0.0));
        }
        other => panic!("expected NoSignChange, got {other:?}"),
    }
}

#[test]
fn plateau_profile() {
    let g = square(9);
    let u = plateau(&g, 3.0, 0.25);
    assert_eq!(u.values()[g.index(4, 4)], 3.0);
    assert_eq!(u.values()[g.index(0, 4)], 0.0);
    assert!((u.values()[g.index(1, 4)] - 1.5).abs() < 1e-12);
}

#[test]
fn global_minimizer_is_negative_and_nonnegative() {
    let spec = spec_on(square(13), F::power(1.8).unwrap());
    let d = spec.discretize().unwrap();
    let (star, u0) = lambda_star_search(&d, 0.25).unwrap();
    let spec = spec.with_lambda(2.0 * star.lambda_star);
    let init = u0.scale(star.scale);
    let out = global_minimize(&spec, &init).unwrap();
    assert!(out.converged && out.energy < 0.0);
    let sup = out.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(out.u.iter().all(|&v| v >= -1e-8 * sup));
}

#[test]
fn euclidean_metric_still_descends() {
    let spec = spec_on(square(7), F::power(2.0).unwrap()).with_lambda(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u0 = random_dirichlet(&spec.grid, &mut rng, 1.0);
    let d = spec.discretize().unwrap();
    let opts = DescentOptions { metric: Metric::Euclidean, newton: false, max_iter: 200, ..Default::default() };
    let out = minimize(&d, 0.0, Reaction::Full, u0.values(), &opts);
    assert!(out.energy < d.energy(0.0, Reaction::Full, u0.values()));
    assert_eq!(out.newton_steps, 0);
}

#[test]
fn two_solutions_on_small_grid() {
    let mut spec = ProblemSpec::desk_scale().unwrap();
    spec.grid = square(17);
    let r = solve_two_solutions(&spec).unwrap();
    assert!(r.two_solutions);
    assert!(r.energy_u1 < 0.0 && r.energy_u2 > 0.0);
    assert!(r.residual_u1 <= 1e-6 && r.residual_u2 <= 1e-6);
    assert!(r.min_u2 >= -1e-6 && r.max_excess_u2 <= 1e-6);
    assert!(r.separation > 1e-2);
    assert!(close(r.energy_u2, r.truncated_energy_u2, 1e-12));
    assert!(r.c_discrete >= r.energy_u2 * (1.0 - 1e-9));
    assert!(r.weak_form_max < 1e-6);
    assert!(r.lambda_1.estimate > 0.0 && r.lambda_1.samples.len() == 100);
    assert!(!r.path.is_empty() && r.path.iter().all(|s| s.energies.len() == 21));
    let first = &r.path[0].energies;
    assert_eq!(first[0], 0.0);
    assert!(close(first[20], r.energy_u1, 1e-12));
    assert!(first.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 0.0);
}

#[test]
fn mountain_pass_critical_point_of_both_functionals() {
    let mut spec = ProblemSpec::desk_scale().unwrap();
    spec.grid = square(13);
    let d = spec.discretize().unwrap();
    let (star, u0) = lambda_star_search(&d, 0.25).unwrap();
    let lambda = 2.0 * star.lambda_star;
    let first = minimize(&d, lambda, Reaction::Full, &u0.scale(star.scale).into_values(), &spec.descent);
    let mp = mountain_pass(&d, lambda, &first.u, &spec.mountain, &spec.descent, 0).unwrap();
    assert!(mp.converged && mp.level > 0.0);
    let full = riesz_sup(&d, &d.partials(lambda, Reaction::Full, &mp.u2));
    assert!(full <= 1e-6);
    assert!(mp.u2.iter().zip(&first.u).all(|(&b, &a)| b >= -1e-6 && b <= a + 1e-6));
}

#[test]
fn zero_lambda_is_refused() {
    let spec = ProblemSpec::desk_scale().unwrap().with_lambda(0.0);
    assert!(matches!(solve_two_solutions(&spec), Err(Error::NoNegativeEnergy(_))));
}

#[test]
fn hypotheses_of_the_default_problem() {
    let h = HypothesisReport::evaluate(&F::power(1.8).unwrap(), 1.5, 1.2, 2);
    assert!(h.exponents_ordered && h.upper_index_ok);
    assert!(!h.sqrt_convex);
    assert!((h.upper_index_bound - 2.0).abs() < 1e-9);
    let h = HypothesisReport::evaluate(&F::power(2.5).unwrap(), 1.5, 1.2, 3);
    assert!(h.sqrt_convex && h.upper_index_ok);
    let h = HypothesisReport::evaluate(&F::power(1.8).unwrap(), 1.9, 1.2, 2);
    assert!(!h.exponents_ordered);
}

#[test]
fn one_dimensional_problem_is_refused_unless_forced() {
    let grid = Arc::new(Grid::line(0.0, 1.0, 41).unwrap());
    let mut spec = spec_on(grid, F::power(1.8).unwrap());
    assert!(matches!(solve_two_solutions(&spec), Err(Error::Hypothesis(_))));
    spec.force = true;
    let r = solve_two_solutions(&spec).unwrap();
    assert!(!r.hypotheses.upper_index_ok);
    assert!(r.energy_u1 < 0.0);
}

#[test]
fn weak_form_residual_vanishes_only_at_solutions() {
    let grid = square(9);
    let d = Discretization::new(grid.clone(), F::power(2.0).unwrap(), 1.5, 1.2, 1e-8).unwrap();
    let zero = vec![0.0; grid.len()];
    assert_eq!(weak_form_residual(&d, 1.0, Reaction::Full, &zero, 20, 0), 0.0);
    let bump = plateau(&grid, 1.0, 0.25).into_values();
    assert!(weak_form_residual(&d, 1.0, Reaction::Full, &bump, 20, 0) > 1e-3);
}

#[test]
fn lambda_1_estimate_is_scale_free_for_powers() {
    let grid = square(9);
    let d = Discretization::new(grid, F::power(2.0).unwrap(), 1.5, 1.2, 1e-8).unwrap();
    let est = estimate_lambda_1(&d, 2.0, 10, 3);
    assert_eq!(est.samples.len(), 10);
    let half_first_eigenvalue = PI * PI;
    assert!(close(est.estimate, half_first_eigenvalue, 0.03), "{}", est.estimate);
}

#[test]
fn config_round_trip_and_validation() {
    let c = ProblemConfig::default();
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(ProblemConfig::from_json(&text).unwrap(), c);
    let minimal = ProblemConfig::from_json(r#"{"schema": 1, "lambda": 3.0}"#).unwrap();
    assert_eq!(minimal.lambda, Some(3.0));
    assert_eq!(minimal.grid.nodes, vec![33, 33]);
    assert!(matches!(ProblemConfig::from_json(r#"{"schema": 2}"#), Err(Error::Config(_))));
    assert!(ProblemConfig::from_json(r#"{"schema": 1, "bogus": 1}"#).is_err());
    assert!(matches!(ProblemConfig::from_json(r#"{"schema": 1, "p": -1}"#), Err(Error::Config(_))));
    let spec: ProblemSpec<f64> = c.build().unwrap();
    assert_eq!(spec.grid.len(), 33 * 33);
    assert_eq!(spec.phi.label(), F::power(1.8).unwrap().label());
}

#[test]
fn single_precision_energy() {
    let grid = Arc::new(Grid::<f32>::unit_square(9).unwrap());
    let spec = ProblemSpec::new(NFunction::<f32>::power(2.0).unwrap(), 1.5f32, 1.2, grid.clone()).with_lambda(0.0);
    let u = GridFunction::from_fn(grid, |x, y| (std::f32::consts::PI * x).sin() * (std::f32::consts::PI * y).sin())
        .unwrap()
        .with_zero_boundary();
    let e = spec.energy(&u).unwrap();
    let exact = std::f32::consts::PI.powi(2) / 4.0;
    assert!((e - exact).abs() < 0.05 * exact, "{e}");
}
