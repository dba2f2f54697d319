use levelset_decay::growth::{estimate_mu, verify_axioms, GrowthSpec};
use levelset_decay::GrowthFunction;
use proptest::prelude::*;

fn builtins() -> Vec<GrowthFunction> {
    vec![
        GrowthFunction::identity(),
        GrowthFunction::loglinear(),
        GrowthFunction::power(1.5).unwrap(),
        GrowthFunction::power(3.0).unwrap(),
    ]
}

#[test]
fn frozen_values() {
    let g = GrowthFunction::loglinear();
    assert_eq!(g.value(0.0), 0.0);
    assert_eq!(GrowthFunction::identity().value(0.0), 0.0);
    assert!((g.value(1.0) - 1.3132616875182228).abs() < 1e-15);
    assert!((g.value(10.0) - 25.430404724093343).abs() < 1e-13);
    assert!((g.value(1000.0) - 6910.469872964105).abs() < 1e-10);
    assert!((g.derivative(1.0) - 1.5822031088882178).abs() < 1e-15);
    assert!((g.derivative(10.0) - 3.329310200889758).abs() < 1e-14);
    assert!((g.value(1.0) - 1.31326).abs() < 1e-5);
}

#[test]
fn loglinear_passes_with_mu_two() {
    let r = verify_axioms(&GrowthFunction::loglinear(), 1e3, 10_000, 1e-12);
    assert!(r.all_passed, "{r:?}");
    assert_eq!(r.mu, 2.0);
}

#[test]
fn identity_is_exact() {
    let r = verify_axioms(&GrowthFunction::identity(), 1e3, 2_500, 0.0);
    assert!(r.all_passed, "{r:?}");
    assert_eq!(r.violations(), 0);
    assert_eq!(r.mu, 1.0);
}

#[test]
fn sublinear_power_fails_convexity() {
    let r = verify_axioms(&GrowthFunction::power(2f64.ln()).unwrap(), 10.0, 1_000, 1e-12);
    assert!(!r.check("convexity").unwrap().passed);
    assert!(!r.all_passed);
}

#[test]
fn mu_estimate_is_consistent() {
    for g in builtins() {
        let est = estimate_mu(&g, 1e3, 400);
        assert!(est <= g.mu() * (1.0 + 1e-12), "{}: {est}", g.name());
    }
}

#[test]
fn json_specs() {
    let g: GrowthFunction = serde_json::from_str(r#"{"kind":"power","p":2.5}"#).unwrap();
    assert_eq!(g.spec(), GrowthSpec::Power { p: 2.5 });
    assert_eq!(g.mu(), 2.5);
    let g: GrowthFunction = serde_json::from_str(r#"{"kind":"log-linear"}"#).unwrap();
    assert_eq!(g.name(), "loglinear");
    assert!(serde_json::from_str::<GrowthFunction>(r#"{"kind":"power","p":-1}"#).is_err());
}

#[test]
fn eval_rejects_negative() {
    assert!(GrowthFunction::loglinear().eval(-1.0).is_err());
    assert!(GrowthFunction::loglinear().eval(f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_bound(lt in -6.0f64..3.0, idx in 0usize..4) {
        let g = &builtins()[idx];
        let t = 10f64.powf(lt);
        let lhs = g.derivative(t) * t;
        prop_assert!(lhs <= g.mu() * g.value(t) * (1.0 + 1e-12), "{} at {t}", g.name());
    }

    #[test]
    fn derivative_pair_bound(l1 in -6.0f64..3.0, l2 in -6.0f64..3.0, idx in 0usize..4) {
        let g = &builtins()[idx];
        let (t1, t2) = (10f64.powf(l1), 10f64.powf(l2));
        let (d1, d2) = (g.derivative(t1), g.derivative(t2));
        prop_assert!(d1 * t2 <= d1 * t1 + d2 * t2 + 1e-12 * (1.0 + d1 * t2));
    }

    #[test]
    fn doubling(ll in 0.0f64..3.0, lt in -3.0f64..3.0, idx in 0usize..4) {
        let g = &builtins()[idx];
        let (l, t) = (10f64.powf(ll), 10f64.powf(lt));
        prop_assert!(g.value(l * t) <= l.powf(g.mu()) * g.value(t) * (1.0 + 1e-12));
    }

    #[test]
    fn monotone_and_convex(lt in -5.0f64..3.0, idx in 0usize..4) {
        let g = &builtins()[idx];
        let t = 10f64.powf(lt);
        let (a, b, c) = (g.value(t), g.value(1.5 * t), g.value(2.0 * t));
        prop_assert!(a < b && b < c);
        prop_assert!(b <= 0.5 * (a + c) * (1.0 + 1e-12));
    }

    #[test]
    fn evaluation_is_pure(t in 0.0f64..1e6, idx in 0usize..4) {
        let g = &builtins()[idx];
        prop_assert_eq!(g.value(t).to_bits(), g.value(t).to_bits());
        prop_assert_eq!(g.derivative(t).to_bits(), g.clone().derivative(t).to_bits());
    }

    #[test]
    fn log_value_agrees(lt in -6.0f64..6.0, idx in 0usize..4) {
        let g = &builtins()[idx];
        let t = 10f64.powf(lt);
        prop_assert!((g.ln_value(t) - g.value(t).ln()).abs() <= 1e-12 * (1.0 + g.value(t).ln().abs()));
    }
}
