use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

type F = NFunction<f64>;

fn line(n: usize) -> Arc<Grid<f64>> {
    Arc::new(Grid::line(0.0, 1.0, n).unwrap())
}

fn square(n: usize) -> Arc<Grid<f64>> {
    Arc::new(Grid::unit_square(n).unwrap())
}

fn random_fn(grid: &Arc<Grid<f64>>, rng: &mut ChaCha8Rng, amp: f64) -> GridFunction<f64> {
    let vals = (0..grid.len()).map(|_| rng.gen_range(-amp..amp)).collect();
    GridFunction::new(grid.clone(), vals).unwrap()
}

fn lp_norm(u: &GridFunction<f64>, p: f64) -> f64 {
    u.values().iter().zip(u.grid().weights()).map(|(v, w)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

fn close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs())
}

#[test]
fn modular_examples() {
    let g = line(11);
    assert_eq!(modular(&GridFunction::zeros(g.clone()), &F::exp_minus()), 0.0);
    let sq = F::scaled_power(1.0, 2.0).unwrap();
    assert!(close(modular(&GridFunction::constant(g, 1.0), &sq), 1.0, 1e-15));
}

#[test]
fn overflow_means_outside_the_class() {
    let u = GridFunction::constant(line(5), 1000.0);
    assert_eq!(modular(&u, &F::exp_minus()), f64::INFINITY);
    assert!(!is_in_orlicz_class(&u, &F::exp_minus()));
    assert!(is_in_orlicz_class(&u, &F::power(2.0).unwrap()));
    assert_eq!(luxemburg_norm(&GridFunction::zeros(line(5)), &F::exp_minus()).norm_value, 0.0);
}

#[test]
fn dyadic_step_modular_is_not_homogeneous() {
    let g = F::exp_minus();
    let demo = dyadic_demo(&g, 80);
    // Σ 2⁻ⁿ (e^{n/2} − n/2 − 1) = q/(1−q) − 2 with q = √e/2.
    let q = 0.5f64.exp() / 2.0;
    let limit = q / (1.0 - q) - 2.0;
    assert!(close(*demo.partial_f.last().unwrap(), limit, 1e-6));
    let tail = demo.partial_f[79] - demo.partial_f[59];
    assert!(tail < 1e-4);
    // ρ(2f) partial sums grow like (e/2)ⁿ.
    assert!(demo.partial_2f[79] > 1e9);
    assert!(demo.partial_2f.windows(2).all(|w| w[1] > w[0]));
    let f = dyadic_step(80, 1.0);
    assert!(close(modular(&f, &g), *demo.partial_f.last().unwrap(), 1e-12));
    let f2 = dyadic_step(2000, 2.0);
    assert!(!is_in_orlicz_class(&f2, &g));
}

#[test]
fn luxemburg_matches_lp_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = square(9);
    for &p in &[1.5, 2.0, 4.0] {
        let gp = F::scaled_power(1.0, p).unwrap();
        for _ in 0..10 {
            let u = random_fn(&g, &mut rng, 3.0);
            let n = luxemburg_norm(&u, &gp);
            assert!(close(n.norm_value, lp_norm(&u, p), 1e-12), "p={p}");
            assert!(n.residual <= 0.0 && n.residual > -1e-12);
        }
    }
}

#[test]
fn characteristic_function_norms() {
    let g = square(17);
    let (chi, m) = characteristic(&g, |x, y| x < 0.5 && y < 0.25);
    assert!(m > 0.0 && m < 1.0);
    let half = F::power(2.0).unwrap();
    // G = t²/2: G⁻¹(y) = (G*)⁻¹(y) = √(2y).
    let lux = luxemburg_norm(&chi, &half).norm_value;
    assert!(close(lux, 1.0 / (2.0 / m).sqrt(), 1e-12));
    let orl = orlicz_norm(&chi, &half).norm_value;
    assert!(close(orl, m * (2.0 / m).sqrt(), 1e-9));
    for gf in [F::exp_minus(), F::power(3.0).unwrap(), F::llog()] {
        let orl = orlicz_norm(&chi, &gf).norm_value;
        let formula = m * gf.conjugate().inverse(1.0 / m).unwrap();
        assert!(close(orl, formula, 1e-8), "{gf}: {orl} vs {formula}");
        let lux = luxemburg_norm(&chi, &gf).norm_value;
        assert!(close(lux, 1.0 / gf.inverse(1.0 / m).unwrap(), 1e-12));
    }
}

#[test]
fn quadratic_norms_in_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = line(33);
    let half = F::power(2.0).unwrap();
    for _ in 0..20 {
        let u = random_fn(&g, &mut rng, 2.0);
        let l2 = lp_norm(&u, 2.0);
        assert!(close(luxemburg_norm(&u, &half).norm_value, l2 / 2f64.sqrt(), 1e-12));
        let o = orlicz_norm(&u, &half);
        assert!(close(o.norm_value, 2f64.sqrt() * l2, 1e-12));
        assert!(o.residual.abs() < 1e-8);
    }
}

#[test]
fn holder_reduces_to_cauchy_schwarz() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = line(17);
    let half = F::power(2.0).unwrap();
    for _ in 0..100 {
        let u = random_fn(&g, &mut rng, 2.0);
        let v = random_fn(&g, &mut rng, 5.0);
        let r = holder_check(&u, &v, &half, 1e-8).unwrap();
        assert!(r.pass);
        let (nu, nv) = (lp_norm(&u, 2.0), lp_norm(&v, 2.0));
        assert!(close(r.orlicz_orlicz, 2.0 * nu * nv, 1e-9));
        assert!(close(r.twice_luxemburg_luxemburg, nu * nv, 1e-9));
        assert!(close(r.orlicz_luxemburg, nu * nv, 1e-9));
        assert!(r.lhs <= nu * nv * (1.0 + 1e-12));
    }
    let zero = GridFunction::zeros(g.clone());
    let r = holder_check(&zero, &random_fn(&g, &mut rng, 1.0), &half, 1e-8).unwrap();
    assert!(r.pass && r.lhs == 0.0);
}

#[test]
fn young_modular_equality_at_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = square(9);
    for gf in [F::exp_minus(), F::power(3.0).unwrap(), F::power_log(2.0).unwrap()] {
        let u = random_fn(&g, &mut rng, 1.5);
        let v = u.map(|x| gf.density_at(x));
        let r = holder_check(&u, &v, &gf, 1e-8).unwrap();
        assert!(close(r.lhs, r.young_modular, 1e-9), "{gf}");
        // At the Amemiya multiplier the dual function has unit conjugate
        // modular and attains the dual supremum.
        let (k, norm, _) = amemiya_multiplier(&u, &gf).unwrap();
        let w = u.map(|x| gf.density_at(k * x));
        assert!(close(modular(&w, &gf.conjugate()), 1.0, 1e-6));
        assert!(close(integral_abs_product(&u, &w).unwrap(), norm, 1e-6));
    }
}

#[test]
fn modular_norm_branches() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let g = square(9);
    let profile = random_fn(&g, &mut rng, 1.0);
    for gf in [F::exp_minus(), F::llog(), F::scaled_power(1.0, 2.5).unwrap()] {
        let base = luxemburg_norm(&profile, &gf).norm_value;
        for &target in &[0.5, 2.0] {
            // Scale by bisection on the norm itself.
            let (mut lo, mut hi) = (1e-3f64, 1e3f64);
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if luxemburg_norm(&profile.scale(mid / base), &gf).norm_value < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let u = profile.scale(hi / base);
            let r = modular_norm_inequalities(&u, &gf, 1e-10);
            assert!(close(r.luxemburg, target, 1e-9));
            assert_eq!(r.inside_unit_ball, target < 1.0);
            assert!(r.pass, "{gf} at {target}: {r:?}");
        }
    }
    let gp = F::scaled_power(1.0, 3.0).unwrap();
    for &target in &[0.5, 2.0] {
        let u = profile.scale(target / lp_norm(&profile, 3.0));
        let r = modular_norm_inequalities(&u, &gp, 1e-10);
        assert!(close(r.modular, f64::powf(target, 3.0), 1e-10));
        assert!(r.pass);
    }
}

#[test]
fn sandwich_on_random_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = square(7);
    for gf in [F::exp_minus(), F::llog(), F::power(1.5).unwrap(), F::power_log(2.0).unwrap()] {
        for _ in 0..10 {
            let u = random_fn(&g, &mut rng, 4.0);
            let r = sandwich_check(&u, &gf, 1e-8);
            assert!(r.pass, "{gf}: {r:?}");
        }
    }
}

#[test]
fn steklov_examples() {
    let g = square(21);
    let c = GridFunction::constant(g.clone(), 2.5);
    let op = SteklovOperator::new(&g, 0.12).unwrap();
    let s = op.apply(&c);
    let reach = 3;
    for k in 0..g.len() {
        let (i, j) = g.axis_indices(k);
        if i > reach && j > reach && i < 20 - reach && j < 20 - reach {
            assert!((s.values()[k] - 2.5).abs() < 1e-12);
        }
    }
    let g1 = line(101);
    let u = GridFunction::from_fn(g1.clone(), |x, _| x).unwrap();
    let s = steklov(&u, 0.03).unwrap();
    for k in [20usize, 50, 77] {
        assert!((s.values()[k] - g1.coords(k)[0]).abs() <= 1e-4);
    }
    assert!(matches!(steklov(&u, 0.001), Err(Error::EmptyStencil { .. })));
    assert_eq!(SteklovOperator::new(&g1, 0.03).unwrap().stencil_size(), 7);
}

#[test]
fn steklov_contracts_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let g = square(13);
    for gf in [F::exp_minus(), F::power(2.0).unwrap(), F::llog()] {
        for r in [0.1, 0.25] {
            let op = SteklovOperator::new(&g, r).unwrap();
            for _ in 0..5 {
                let u = random_fn(&g, &mut rng, 3.0);
                let su = op.apply(&u);
                assert!(modular(&su, &gf) <= modular(&u, &gf) + 1e-12);
                assert!(orlicz_norm(&su, &gf).norm_value <= orlicz_norm(&u, &gf).norm_value + 1e-8);
                assert!(luxemburg_norm(&su, &gf).norm_value <= luxemburg_norm(&u, &gf).norm_value + 1e-8);
            }
        }
    }
}

#[test]
fn poincare_examples() {
    let g = line(201);
    let sq = F::scaled_power(1.0, 2.0).unwrap();
    let z = poincare_check(&GridFunction::zeros(g.clone()), &sq, 1e-12).unwrap();
    assert!(z.pass && z.lhs == 0.0 && z.rhs == 0.0);
    let u = GridFunction::from_fn(g.clone(), |x, _| (PI * x).sin()).unwrap().with_zero_boundary();
    let r = poincare_check(&u, &sq, 1e-12).unwrap();
    assert!((r.lhs - 0.5).abs() < 1e-4);
    // d = 2, ∫ (2π cos πx)² = 2π².
    assert!((r.rhs - 2.0 * PI * PI).abs() < 1e-2);
    assert!(r.pass && r.d == 2.0);
    let bad = GridFunction::constant(g, 1.0);
    assert!(matches!(poincare_check(&bad, &sq, 1e-12), Err(Error::NotDirichlet { .. })));
}

#[test]
fn poincare_random_bumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let g = square(17);
    for _ in 0..20 {
        let u = random_fn(&g, &mut rng, 5.0).with_zero_boundary();
        for gf in [F::exp_minus(), F::power(2.0).unwrap()] {
            assert!(poincare_check(&u, &gf, 1e-12).unwrap().pass);
        }
    }
}

#[test]
fn weighted_samples_validation() {
    assert!(WeightedSamples::new(vec![1.0, 2.0], vec![1.0]).is_err());
    assert!(WeightedSamples::new(vec![1.0], vec![-1.0]).is_err());
    let s = WeightedSamples::new(vec![1.0, -2.0], vec![0.5, 0.25]).unwrap();
    let sq = F::scaled_power(1.0, 2.0).unwrap();
    assert!(close(modular(&s, &sq), 1.5, 1e-15));
    assert!(close(modular(&s.map(|v| 2.0 * v), &sq), 6.0, 1e-15));
}

#[test]
fn single_precision_norms() {
    let g = Arc::new(Grid::<f32>::line(0.0, 1.0, 9).unwrap());
    let u = GridFunction::from_fn(g, |x, _| x).unwrap();
    let gp = NFunction::<f32>::scaled_power(1.0, 2.0).unwrap();
    let exact = u.values().iter().zip(u.grid().weights()).map(|(v, w)| w * v * v).sum::<f32>().sqrt();
    assert!((luxemburg_norm(&u, &gp).norm_value - exact).abs() < 1e-5);
}

fn funcs() -> Vec<F> {
    vec![F::exp_minus(), F::llog(), F::power(1.5).unwrap(), F::power_log(2.0).unwrap()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn luxemburg_is_a_norm(
        a in proptest::collection::vec(-3.0f64..3.0, 9),
        b in proptest::collection::vec(-3.0f64..3.0, 9),
        c in -5.0f64..5.0,
        idx in 0usize..4,
    ) {
        let g = line(9);
        let gf = &funcs()[idx];
        let u = GridFunction::new(g.clone(), a).unwrap();
        let v = GridFunction::new(g, b).unwrap();
        let nu = luxemburg_norm(&u, gf).norm_value;
        let ncu = luxemburg_norm(&u.scale(c), gf).norm_value;
        prop_assert!((ncu - c.abs() * nu).abs() <= 1e-8 * (1.0 + c.abs() * nu));
        let sum = u.axpby(1.0, &v, 1.0).unwrap();
        prop_assert!(luxemburg_norm(&sum, gf).norm_value <= nu + luxemburg_norm(&v, gf).norm_value + 1e-8);
        prop_assert_eq!(nu == 0.0, u.max_abs() == 0.0);
    }

    #[test]
    fn norms_are_monotone(a in proptest::collection::vec(-3.0f64..3.0, 9), shrink in proptest::collection::vec(0.0f64..1.0, 9), idx in 0usize..4) {
        let g = line(9);
        let gf = &funcs()[idx];
        let big = GridFunction::new(g.clone(), a.clone()).unwrap();
        let small = GridFunction::new(g, a.iter().zip(&shrink).map(|(x, s)| x * s).collect()).unwrap();
        prop_assert!(luxemburg_norm(&small, gf).norm_value <= luxemburg_norm(&big, gf).norm_value + 1e-8);
        prop_assert!(orlicz_norm(&small, gf).norm_value <= orlicz_norm(&big, gf).norm_value + 1e-8);
    }

    #[test]
    fn bounded_modular_bounds_norm(a in proptest::collection::vec(-4.0f64..4.0, 9), idx in 0usize..4) {
        let u = GridFunction::new(line(9), a).unwrap();
        let gf = &funcs()[idx];
        prop_assert!(orlicz_norm(&u, gf).norm_value <= modular(&u, gf) + 1.0 + 1e-9);
    }

    #[test]
    fn norm_convergence_implies_modular_convergence(a in proptest::collection::vec(-4.0f64..4.0, 9), idx in 0usize..4) {
        let u = GridFunction::new(line(9), a).unwrap();
        let gf = &funcs()[idx];
        let mut prev = f64::INFINITY;
        for n in 1..8 {
            let d = u.scale(0.5f64.powi(n));
            let (norm, rho) = (luxemburg_norm(&d, gf).norm_value, modular(&d, gf));
            prop_assert!(rho <= prev + 1e-15);
            if norm <= 1.0 {
                prop_assert!(rho <= norm + 1e-12);
            }
            prev = rho;
        }
        prop_assert!(prev <= 1e-2 * (1.0 + modular(&u, gf)));
    }

    #[test]
    fn modular_convergence_implies_norm_convergence_for_powers(a in proptest::collection::vec(-4.0f64..4.0, 9), p in 1.2f64..4.0) {
        let u = GridFunction::new(line(9), a).unwrap();
        let gp = F::scaled_power(1.0, p).unwrap();
        for n in 1..6 {
            let d = u.scale(0.1f64.powi(n));
            let rho = modular(&d, &gp);
            prop_assert!((luxemburg_norm(&d, &gp).norm_value - rho.powf(1.0 / p)).abs() <= 1e-10 * (1.0 + rho));
        }
    }
}
