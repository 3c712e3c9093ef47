//! Property tests for the invariants of each layer.

mod common;

use approx::assert_relative_eq;
use orlicz_core::constants::{kp_pair, KConstantReport};
use orlicz_core::function::{PiecewiseBilinear2D, PiecewiseLinear1D};
use orlicz_core::measure::{tail_moment, Anchor, Density, Side, WeightedMeasure1D};
use orlicz_core::norms::{gauge_norm_1d, gauge_norm_2d, modular_1d, ProductMeasure};
use orlicz_core::verify::{
    check_first_variable_sandwich, check_iterated_bound, check_minkowski, check_poincare,
    check_second_variable_sandwich, ExperimentConfig, Status,
};
use orlicz_core::young::{sample_grid, YoungFunction};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    // integration tests have no lib.rs to anchor the default regression directory
    let persistence = prop::test_runner::FileFailurePersistence::WithSource("regressions");
    ProptestConfig { cases, failure_persistence: Some(Box::new(persistence)), ..ProptestConfig::default() }
}

fn density() -> impl Strategy<Value = Density> {
    prop_oneof![
        (0.3..3.0f64).prop_map(Density::Constant),
        (0.0..2.0f64, any::<bool>()).prop_map(|(alpha, left)| Density::PowerLaw {
            alpha,
            anchor: if left { Anchor::Left } else { Anchor::Right },
        }),
        prop::collection::vec(0.2..2.0f64, 4).prop_map(|w| Density::Tabulated { t: vec![0.0, 0.3, 0.6, 1.0], w }),
    ]
}

fn measure() -> impl Strategy<Value = WeightedMeasure1D> {
    density().prop_map(|d| WeightedMeasure1D::new(0.0, 1.0, d).unwrap())
}

/// Whether the tail-moment integrand behaves like `t^e` at a zero of `w` with
/// `e` within 0.1 of the divergence threshold `-1`. Most of such an integral
/// sits below the floating-point resolution of the far endpoint.
fn near_critical(nu: &WeightedMeasure1D, w: &WeightedMeasure1D, p: f64) -> bool {
    let pc = p / (p - 1.0);
    let mass_order = match nu.density() {
        Density::PowerLaw { alpha, .. } => alpha + 1.0,
        _ => 1.0,
    };
    match w.density() {
        Density::PowerLaw { alpha, .. } => {
            let e = pc * mass_order + alpha * (1.0 - pc);
            e > -1.1 && e < -0.9
        }
        _ => false,
    }
}

fn function_1d() -> impl Strategy<Value = PiecewiseLinear1D> {
    prop::collection::vec(-2.0..2.0f64, 5)
        .prop_map(|v| PiecewiseLinear1D::from_nodes(common::uniform_knots(0.0, 1.0, 4), v).unwrap())
}

fn function_2d() -> impl Strategy<Value = PiecewiseBilinear2D> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 4), 4).prop_map(|v| {
        let k = common::uniform_knots(0.0, 1.0, 3);
        PiecewiseBilinear2D::from_nodes(k.clone(), k, &v).unwrap()
    })
}

fn phi() -> impl Strategy<Value = YoungFunction> {
    prop_oneof![
        (1.0..4.0f64).prop_map(|q| YoungFunction::power(q).unwrap()),
        Just(YoungFunction::tabulate_fn(|t| t + t * t, 1e3, 400).unwrap()),
        Just(YoungFunction::tabulate_fn(|t| (t * t).max(t * t * t), 1e3, 400).unwrap()),
    ]
}

fn nonzero(f: &PiecewiseLinear1D) -> bool {
    f.max_abs() > 1e-3
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn power_inverse_is_root(q in 1.0..6.0f64, e in -6.0..6.0f64) {
        let y = 10f64.powf(e);
        let phi = YoungFunction::power(q).unwrap();
        let t = phi.inverse(y).unwrap();
        prop_assert!(common::rel(t, y.powf(1.0 / q)) <= 1e-10);
    }

    #[test]
    fn eval_inverts_inverse(f in phi(), e in -4.0..4.0f64) {
        let y = 10f64.powf(e);
        let t = f.inverse(y).unwrap();
        prop_assert!((f.eval(t).unwrap() - y).abs() <= 1e-10 * (1.0 + y));
    }

    #[test]
    fn power_c0_closed_form(q in 1.0..8.0f64) {
        let c0 = YoungFunction::power(q).unwrap().c0().unwrap();
        prop_assert!(common::rel(c0, 2.0 * 2f64.powf(1.0 / q)) <= 1e-10);
    }

    #[test]
    fn power_is_exactly_submultiplicative(q in 1.0..5.0f64) {
        let check = YoungFunction::power(q).unwrap().check_submultiplicative(&sample_grid(1e-3, 1e3, 32)).unwrap();
        prop_assert!(check.holds);
        prop_assert!((check.max_ratio - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn cumulative_is_monotone(m in measure(), xs in prop::collection::vec(0.0..1.0f64, 2..12)) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let values: Vec<f64> = xs.iter().map(|&x| m.cumulative(x).unwrap()).collect();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
    }

    #[test]
    fn tail_moments_swap_under_reflection(nu in measure(), w in measure(), p in 1.2..4.0f64, x in 0.05..0.95f64) {
        prop_assume!(!near_critical(&nu, &w, p));
        let left = tail_moment(&nu, &w, p, Side::Left, x).unwrap();
        let right = tail_moment(&nu.reflected(), &w.reflected(), p, Side::Right, 1.0 - x).unwrap();
        prop_assert!(common::rel(right, left) <= 1e-6, "{left} vs {right}");
    }

    #[test]
    fn constant_tail_moment_closed_form(cn in 0.2..3.0f64, cw in 0.2..3.0f64, p in 1.1..5.0f64, x in 0.0..1.0f64) {
        let nu = WeightedMeasure1D::new(0.0, 1.0, Density::Constant(cn)).unwrap();
        let w = WeightedMeasure1D::new(0.0, 1.0, Density::Constant(cw)).unwrap();
        let pc = p / (p - 1.0);
        let expected = x.powf(pc + 1.0) / (pc + 1.0) * cn.powf(pc) * cw.powf(1.0 - pc);
        let got = tail_moment(&nu, &w, p, Side::Left, x).unwrap();
        prop_assert!((got - expected).abs() <= 1e-8 * expected.max(1e-300), "{got} vs {expected}");
    }

    #[test]
    fn modular_is_nonincreasing_in_k(f in phi(), m in measure(), g in function_1d(), k in 0.05..5.0f64, r in 1.0..3.0f64) {
        let small = modular_1d(&f, &m, &g, k).unwrap();
        let large = modular_1d(&f, &m, &g, k * r).unwrap();
        prop_assert!(large <= small * (1.0 + 1e-12), "{small} then {large}");
    }

    #[test]
    fn gauge_norm_is_a_norm(f in phi(), m in measure(), g in function_1d(), h in function_1d(), c in -5.0..5.0f64) {
        let ng = gauge_norm_1d(&f, &m, &g).unwrap();
        let nh = gauge_norm_1d(&f, &m, &h).unwrap();
        if nonzero(&g) {
            prop_assert!(ng > 0.0);
        }
        let scaled = gauge_norm_1d(&f, &m, &g.map(|v| c * v)).unwrap();
        prop_assert!((scaled - c.abs() * ng).abs() <= 1e-8 * c.abs() * ng + 1e-300);
        let sum = PiecewiseLinear1D::from_nodes(
            g.knots().to_vec(),
            g.knots().iter().map(|&x| g.eval(x) + h.eval(x)).collect(),
        )
        .unwrap();
        prop_assert!(gauge_norm_1d(&f, &m, &sum).unwrap() <= ng + nh + 1e-7);
    }

    #[test]
    fn zero_function_has_zero_norm(f in phi(), m in measure()) {
        let z = PiecewiseLinear1D::constant(0.0, 1.0, 0.0).unwrap();
        prop_assert_eq!(gauge_norm_1d(&f, &m, &z).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn product_norm_below_iterated(f in phi(), m1 in measure(), m2 in measure(), g in function_2d()) {
        let r = check_iterated_bound(&f, &ProductMeasure::new(m1, m2), &g).unwrap();
        prop_assert!(r.relative_slack >= -1e-6, "{r:?}");
    }

    #[test]
    fn one_variable_sandwiches(f in phi(), m1 in measure(), m2 in measure(), g in function_1d()) {
        let pm = ProductMeasure::new(m1, m2);
        let power = matches!(f.kind(), orlicz_core::young::YoungKind::Power { .. });
        for r in check_second_variable_sandwich(&f, &pm, &g).unwrap().into_iter()
            .chain(check_first_variable_sandwich(&f, &pm, &g).unwrap())
        {
            prop_assert!(r.relative_slack >= -1e-6, "{r:?}");
            if power && nonzero(&g) {
                prop_assert!(common::rel(r.lhs, r.rhs) <= 1e-7, "{r:?}");
            }
        }
    }

    #[test]
    fn minkowski_with_factor_two(f in phi(), mu in measure(), nu in measure(), g in function_2d()) {
        let r = check_minkowski(&f, &mu, &nu, &g).unwrap();
        prop_assert!(r.relative_slack >= -1e-6, "{r:?}");
    }

    #[test]
    fn tilde_constant_is_smaller(f in phi(), mu in measure(), nu in measure(), w in measure(), p in 1.2..4.0f64) {
        let (k, kt) = kp_pair(&f, &mu, &nu, &w, p).unwrap();
        prop_assert!(kt.value <= k.value * (1.0 + 1e-6), "{} > {}", kt.value, k.value);
        if matches!(f.kind(), orlicz_core::young::YoungKind::Power { .. }) && k.value.is_finite() {
            prop_assert!(common::rel(kt.value, k.value) <= 1e-6);
        }
    }

    #[test]
    fn reflection_swaps_the_suprema(f in phi(), mu in measure(), nu in measure(), w in measure(), p in 1.2..4.0f64) {
        let (k, _) = kp_pair(&f, &mu, &nu, &w, p).unwrap();
        let (r, _) = kp_pair(&f, &mu.reflected(), &nu.reflected(), &w.reflected(), p).unwrap();
        prop_assume!(k.value.is_finite());
        prop_assert!(common::rel(r.value, k.value) <= 1e-6);
        prop_assert!(common::rel(r.sup_terms.0, k.sup_terms.1) <= 1e-6);
        prop_assert!(common::rel(r.sup_terms.1, k.sup_terms.0) <= 1e-6);
    }

    #[test]
    fn nu_scaling_cancels(f in phi(), mu in measure(), nu in measure(), w in measure(), p in 1.2..4.0f64, c in 0.1..10.0f64) {
        let (k, _) = kp_pair(&f, &mu, &nu, &w, p).unwrap();
        let (ks, _) = kp_pair(&f, &mu, &nu.scaled(c).unwrap(), &w, p).unwrap();
        prop_assume!(k.value.is_finite());
        prop_assert!(common::rel(ks.value, k.value) <= 1e-8, "{} vs {}", ks.value, k.value);
        prop_assert!(common::rel(ks.sup_terms.0, c * k.sup_terms.0) <= 1e-8);
    }

    #[test]
    fn refinement_never_lowers_the_sup(f in phi(), mu in measure(), nu in measure(), w in measure(), p in 1.2..4.0f64) {
        let (k, kt): (KConstantReport, KConstantReport) = kp_pair(&f, &mu, &nu, &w, p).unwrap();
        for r in [&k, &kt] {
            let h: Vec<f64> = r.refinement_history.iter().map(|&(_, v)| v).collect();
            prop_assert!(h.windows(2).all(|w| w[1] >= w[0]), "{h:?}");
        }
    }
}

/// Relative closeness that treats equal infinities as equal.
fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(1e-12)
}

fn lebesgue_cfg(shift: (f64, f64), dens: &Density, p: f64) -> ExperimentConfig {
    let m = |a: f64| WeightedMeasure1D::new(0.0, 1.0, dens.clone()).unwrap().shifted(a).unwrap();
    let pm = ProductMeasure::new(m(shift.0), m(shift.1));
    ExperimentConfig::new(YoungFunction::power(2.0).unwrap(), pm.clone(), pm.clone(), pm, p, p, 2.0).unwrap()
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn translation_invariance(d in density(), g in function_2d(), dx in -5.0..5.0f64, dy in -5.0..5.0f64, p in prop_oneof![Just(1.0), Just(2.0)]) {
        let base = check_poincare(&lebesgue_cfg((0.0, 0.0), &d, p), &g).unwrap();
        let moved = check_poincare(&lebesgue_cfg((dx, dy), &d, p), &g.translated(dx, dy)).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            prop_assert!(close(a.lhs, b.lhs, 1e-8), "{} {} {}", a.name, a.lhs, b.lhs);
            prop_assert!(close(a.rhs, b.rhs, 1e-8), "{} {} {}", a.name, a.rhs, b.rhs);
        }
    }

    #[test]
    fn grid_refinement_stability(d in density(), g in function_2d(), p in prop_oneof![Just(1.0), Just(2.0)]) {
        let cfg = lebesgue_cfg((0.0, 0.0), &d, p);
        let coarse = check_poincare(&cfg, &g).unwrap();
        let fine = check_poincare(&cfg, &g.refined(2, 2)).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            prop_assert!(a.status != Status::Failed && b.status != Status::Failed);
            prop_assert!(close(a.lhs, b.lhs, 1e-5), "{} {} {}", a.name, a.lhs, b.lhs);
            prop_assert!(close(a.rhs, b.rhs, 1e-5), "{} {} {}", a.name, a.rhs, b.rhs);
        }
    }
}

#[test]
fn power_norm_ignores_axis_order() {
    let m = WeightedMeasure1D::new(0.0, 1.0, Density::PowerLaw { alpha: 0.5, anchor: Anchor::Left }).unwrap();
    let l = WeightedMeasure1D::lebesgue(0.0, 1.0).unwrap();
    let f = PiecewiseBilinear2D::from_fn(vec![0.0, 0.4, 1.0], vec![0.0, 0.5, 1.0], |x, y| x - 2.0 * y + x * y).unwrap();
    let phi = YoungFunction::power(3.0).unwrap();
    let a = gauge_norm_2d(&phi, &ProductMeasure::new(m.clone(), l.clone()), &f).unwrap();
    let b = gauge_norm_2d(&phi, &ProductMeasure::new(l, m), &f.transposed()).unwrap();
    assert_relative_eq!(a, b, max_relative = 1e-9);
}
