mod common;

use common::synthetic_profile;
use levelset_decay::levelset::{
    classify_decay, distribution_function, predicted_regime, weak_quasi_norm, ClassifierConfig, DecayClass,
    DistributionProfile, RegimeKind, RegimeSpec,
};
use levelset_decay::numeric::log_space;
use levelset_decay::{Error, GrowthFunction};
use proptest::prelude::*;
use std::f64::consts::PI;

fn cube_samples(n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.push(f((i as f64 + 0.5) * h, (j as f64 + 0.5) * h, (k as f64 + 0.5) * h));
            }
        }
    }
    out
}

#[test]
fn refinement_changes_measures_by_one_boundary_layer() {
    let inv = |x: f64, y: f64, z: f64| 1.0 / (x * x + y * y + z * z).sqrt();
    let levels = log_space(1.25, 8.0, 24);
    let coarse = distribution_function(&cube_samples(16, inv), 1.0 / 4096.0, &levels).unwrap();
    let fine = distribution_function(&cube_samples(32, inv), 1.0 / 32768.0, &levels).unwrap();
    let h = 1.0 / 16.0;
    for (j, &k) in levels.iter().enumerate() {
        let r = 1.0 / k;
        let layer = 0.5 * PI * r * r * 3f64.sqrt() * h;
        let diff = (coarse.measures[j] - fine.measures[j]).abs();
        assert!(diff <= layer, "k = {k}: {diff} > {layer}");
    }
}

#[test]
fn unit_ball_source_norm() {
    let m = 4.0;
    let n = 48;
    let h = 2.0 / n as f64;
    let mut vals = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = [(i as f64 + 0.5) * h - 1.0, (j as f64 + 0.5) * h - 1.0, (k as f64 + 0.5) * h - 1.0];
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if r <= 1.0 {
                    vals.push(r.powf(-3.0 / m));
                }
            }
        }
    }
    let levels = log_space((0.9f64).powf(-0.75), (4.0 * h).powf(-0.75), 40);
    let prof = distribution_function(&vals, h * h * h, &levels).unwrap();
    let q = weak_quasi_norm(&prof, m, None).unwrap();
    assert!((q - 4.0 * PI / 3.0).abs() <= 0.15 * 4.0 * PI / 3.0, "{q}");
}

#[test]
fn bounded_profile() {
    let p = synthetic_profile(0.5, 10.0, 40, |k| if k < 3.0 { 1.0 } else { 0.0 });
    let c = classify_decay(&p, &GrowthFunction::loglinear(), &ClassifierConfig::default()).unwrap();
    match c.class {
        DecayClass::Bounded { level: Some(l) } => assert!((3.0..3.3).contains(&l)),
        other => panic!("{other:?}"),
    }
    let exact = DistributionProfile::from_samples(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 0.5, 0.0, 0.0], 1.0).unwrap();
    let c = classify_decay(&exact, &GrowthFunction::identity(), &ClassifierConfig::default()).unwrap();
    assert_eq!(c.class, DecayClass::Bounded { level: Some(3.0) });
}

#[test]
fn stretched_exponential_families() {
    let g = GrowthFunction::loglinear();
    for rho in [0.25, 0.5, 1.0] {
        let p = synthetic_profile(1.0, 50.0, 64, |k| (-k.powf(rho)).exp());
        match classify_decay(&p, &g, &ClassifierConfig::default()).unwrap().class {
            DecayClass::ExpIntegrable { lambda: Some(l), rho: r, .. } => {
                assert!((r - rho).abs() <= 0.05 * rho, "{rho}: {r}");
                assert!((l - 1.0).abs() <= 0.05, "{rho}: lambda {l}");
            }
            other => panic!("{rho}: {other:?}"),
        }
    }
}

#[test]
fn weak_families() {
    let g = GrowthFunction::loglinear();
    for rho in [2.0, 5.0, 12.0] {
        let p = synthetic_profile(1.0, 1e4, 64, |k| g.value(k).powf(-rho));
        match classify_decay(&p, &g, &ClassifierConfig::default()).unwrap().class {
            DecayClass::WeakLebesgue { exponent, composed_with_g, quasi_norm, .. } => {
                assert!((exponent - rho).abs() <= 0.05 * rho);
                assert!(composed_with_g);
                assert!((quasi_norm.unwrap() - 1.0).abs() < 1e-9);
            }
            other => panic!("{rho}: {other:?}"),
        }
    }
}

#[test]
fn too_few_levels() {
    let p = synthetic_profile(1.0, 10.0, 5, |k| 1.0 / k);
    let r = classify_decay(&p, &GrowthFunction::identity(), &ClassifierConfig::default());
    assert!(matches!(r, Err(Error::InsufficientData(_))));
}

#[test]
fn critical_boundaries_are_exact() {
    let v = |s: f64| predicted_regime(&RegimeSpec { n: 4, p: 2.0, sigma_or_m: s, theta_deg: 0.0 }, RegimeKind::Variational);
    assert!(matches!(v(2.0).unwrap(), DecayClass::ExpIntegrable { .. }));
    assert!(matches!(v(2.0 + 1e-9).unwrap(), DecayClass::Bounded { .. }));
    assert!(matches!(v(2.0 - 1e-9).unwrap(), DecayClass::WeakLebesgue { .. }));
    let d = |m: f64| {
        predicted_regime(&RegimeSpec { n: 3, p: 2.0, sigma_or_m: m, theta_deg: 0.25 }, RegimeKind::DegeneratePde)
    };
    match d(1.5).unwrap() {
        DecayClass::ExpIntegrable { rho, open, .. } => assert!(rho == 0.75 && open),
        other => panic!("{other:?}"),
    }
    assert!(matches!(d(4.0).unwrap(), DecayClass::Bounded { .. }));
    assert!(matches!(d(1.2), Err(Error::Applicability(_))));
    assert!(matches!(
        predicted_regime(&RegimeSpec { n: 4, p: 5.0, sigma_or_m: 2.0, theta_deg: 0.0 }, RegimeKind::Variational),
        Err(Error::Applicability(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distribution_is_monotone_and_permutation_invariant(
        field in prop::collection::vec(-100.0f64..100.0, 1..200),
        seed in any::<u64>(),
    ) {
        let levels = log_space(0.01, 150.0, 30);
        let a = distribution_function(&field, 0.5, &levels).unwrap();
        prop_assert!(a.measures.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(a.measures.iter().all(|&m| m >= 0.0 && m <= a.total_measure));
        let mut shuffled = field.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b = distribution_function(&shuffled, 0.5, &levels).unwrap();
        prop_assert_eq!(a.measures, b.measures);
    }

    #[test]
    fn quasi_norm_is_homogeneous(
        field in prop::collection::vec(0.01f64..100.0, 1..200),
        scale in 0.1f64..10.0,
        m in 0.5f64..6.0,
    ) {
        let levels = log_space(0.01, 150.0, 30);
        let scaled_levels: Vec<f64> = levels.iter().map(|l| l * scale).collect();
        let scaled: Vec<f64> = field.iter().map(|v| v * scale).collect();
        let a = weak_quasi_norm(&distribution_function(&field, 1.0, &levels).unwrap(), m, None).unwrap();
        let b = weak_quasi_norm(&distribution_function(&scaled, 1.0, &scaled_levels).unwrap(), m, None).unwrap();
        prop_assert!((b - scale.powf(m) * a).abs() <= 1e-9 * b.max(1e-300));
    }

    #[test]
    fn regime_is_total(n in 3usize..8, p in 1.05f64..2.9, s in 1.01f64..10.0, theta in 0.0f64..0.99) {
        let spec = RegimeSpec { n, p: p.min(n as f64 - 0.01), sigma_or_m: s, theta_deg: theta };
        let a = predicted_regime(&spec, RegimeKind::Variational);
        prop_assert!(a.is_ok());
        prop_assert_eq!(a.unwrap(), predicted_regime(&spec, RegimeKind::Variational).unwrap());
    }
}
