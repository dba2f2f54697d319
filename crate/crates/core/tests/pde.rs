use levelset_decay::levelset::DecayClass;
use levelset_decay::pde::{
    analyze_solution, build_source, coefficient_a, conjugate_gradient, read_field_binary, solve_picard,
    source_weak_norm, write_field_binary, FaceAveraging, PdeProblem, SourceSpec, Stencil,
};
use levelset_decay::Error;
use std::f64::consts::PI;

fn singular(m: f64) -> SourceSpec {
    SourceSpec::RadialSingular { m_target: m, center: None, cap: None }
}

#[test]
fn zero_source_converges_in_one_step() {
    let p = PdeProblem::new(3, 9, 0.5, SourceSpec::Zero);
    let s = solve_picard(&p, 1e-10, 1e-10, 5).unwrap();
    assert_eq!(s.picard_iterations, 1);
    assert!(s.field.iter().all(|&v| v == 0.0));
    let a = analyze_solution(&s, &p).unwrap();
    assert_eq!(a.measured, DecayClass::Bounded { level: Some(0.0) });
    assert!(a.agreement);
}

#[test]
fn linear_case_matches_direct_solve() {
    let p = PdeProblem::new(3, 15, 0.0, SourceSpec::Constant { value: 1.0 });
    let tol = 1e-10;
    let s = solve_picard(&p, 1e-12, tol, 200).unwrap();
    let f = build_source(&p).unwrap();
    let op = Stencil::new(&p, vec![1.0; f.len()], 1.0);
    let mut direct = vec![0.0; f.len()];
    conjugate_gradient(&op, &f, &mut direct, 1e-13, 10_000).unwrap();
    let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = s.field.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-8 * scale, "{err}");
    assert!(s.linear_residual <= tol);
    // center value of the unit-cube Poisson problem, about 0.0562
    let mid = s.field[s.field.len() / 2];
    assert!((mid - 0.0562).abs() < 2e-3, "{mid}");
}

#[test]
fn symmetric_source_gives_symmetric_field() {
    let p = PdeProblem::new(3, 17, 0.25, singular(4.0));
    let s = solve_picard(&p, 1e-10, 1e-12, 200).unwrap();
    let r = 17;
    let mut worst: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let a = s.field[(i * r + j) * r + k];
                let b = s.field[((r - 1 - i) * r + j) * r + k];
                let c = s.field[(j * r + i) * r + k];
                worst = worst.max((a - b).abs()).max((a - c).abs());
            }
        }
    }
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn linear_case_scales_with_the_source() {
    let tol = 1e-11;
    let p1 = PdeProblem::new(3, 11, 0.0, SourceSpec::Constant { value: 1.0 });
    let p3 = PdeProblem::new(3, 11, 0.0, SourceSpec::Constant { value: 3.0 });
    let u1 = solve_picard(&p1, 1e-12, tol, 100).unwrap();
    let u3 = solve_picard(&p3, 1e-12, tol, 100).unwrap();
    let scale = u3.max_abs;
    for (a, b) in u1.field.iter().zip(&u3.field) {
        assert!((3.0 * a - b).abs() <= 10.0 * tol * scale);
    }
}

#[test]
fn residual_and_coefficient_band() {
    let p = PdeProblem::new(3, 17, 0.25, singular(1.4));
    let s = solve_picard(&p, 1e-8, 1e-10, 500).unwrap();
    assert!(s.final_update_norm <= 1e-8);
    assert!(s.linear_residual <= 1e-10);
    let (lo, hi) = s.face_coefficient_range;
    let floor = coefficient_a(s.max_abs, p.a_low, p.theta_deg);
    assert!(lo >= floor * (1.0 - 1e-12) && hi <= p.a_low * (1.0 + 1e-12) && lo > 0.0, "{lo} {hi} {floor}");
}

#[test]
fn harmonic_faces_also_converge() {
    let mut p = PdeProblem::new(3, 11, 0.25, singular(4.0));
    p.averaging = FaceAveraging::Harmonic;
    let s = solve_picard(&p, 1e-8, 1e-10, 200).unwrap();
    assert!(s.final_update_norm <= 1e-8);
}

#[test]
fn non_convergence_carries_history() {
    let p = PdeProblem::new(3, 9, 0.5, singular(1.4));
    match solve_picard(&p, 1e-14, 1e-10, 2) {
        Err(Error::Convergence { iterations, history, .. }) => {
            assert_eq!(iterations, 2);
            assert_eq!(history.len(), 2);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn singular_source_norm_and_cap() {
    let p = PdeProblem::new(3, 33, 0.0, singular(4.0));
    let f = build_source(&p).unwrap();
    let r = source_weak_norm(&p, &f).unwrap();
    assert!((r.reference - 4.0 * PI / 3.0).abs() < 1e-14);
    assert!(r.relative_error <= 0.15, "{r:?}");
    let coarse = build_source(&p.with_resolution(17)).unwrap();
    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    assert!(max(&f) > max(&coarse));
    assert!(matches!(build_source(&PdeProblem::new(3, 9, 0.0, singular(1.2))), Err(Error::Applicability(_))));
}

#[test]
fn binary_round_trip() {
    let p = PdeProblem::new(3, 9, 0.25, singular(4.0));
    let s = solve_picard(&p, 1e-8, 1e-10, 100).unwrap();
    let mut buf = Vec::new();
    write_field_binary(&s, &mut buf).unwrap();
    assert_eq!(buf.len(), 16 + 8 * 729);
    let (n, r, field) = read_field_binary(&buf[..]).unwrap();
    assert_eq!((n, r), (3, 9));
    assert_eq!(field, s.field);
    assert!(read_field_binary(&buf[..20]).is_err());
}

#[test]
fn bounded_regime_is_resolution_stable() {
    let p = PdeProblem::new(3, 17, 0.25, singular(4.0));
    let s = solve_picard(&p, 1e-8, 1e-10, 200).unwrap();
    let a = analyze_solution(&s, &p).unwrap();
    let st = a.stability.unwrap();
    assert_eq!(st.coarse_resolution, 9);
    assert!(st.relative_change < 0.1, "{st:?}");
    assert_eq!(a.measured.tag(), "bounded");
    assert!(a.agreement);
}

#[test]
fn subcritical_max_grows_with_resolution() {
    let p = PdeProblem::new(3, 17, 0.25, singular(1.4));
    let fine = solve_picard(&p, 1e-8, 1e-10, 300).unwrap();
    let coarse = solve_picard(&p.with_resolution(9), 1e-8, 1e-10, 300).unwrap();
    assert!(fine.max_abs > coarse.max_abs * 1.1);
}
