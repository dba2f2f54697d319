//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use common::*;
use levelset_decay::counterexample::{
    doubling_envelope, equivalence_backward_constant, verify_full_form, witness_beta_gt_one, witness_beta_one,
    DoublingParams, DEFAULT_LAMBDAS,
};
use levelset_decay::growth::verify_axioms;
use levelset_decay::lemma::{giusti_iterate_at_threshold, giusti_threshold, Variant};
use levelset_decay::levelset::{classify_decay, ClassifierConfig, DecayClass};
use levelset_decay::numeric::log_space;
use levelset_decay::pde::{
    analyze_with_companion, build_source, solve_picard, source_weak_norm, PdeProblem, SourceSpec,
};
use levelset_decay::GrowthFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn growth_axioms() -> Outcome {
    let g = GrowthFunction::loglinear();
    let r = verify_axioms(&g, 1e3, 10_000, 1e-12);
    let worst = r.checks.iter().map(|c| c.worst_violation).fold(0.0, f64::max);
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let needed = ["doubling", "derivative_bound", "derivative_pair_bound", "convexity", "monotonicity"];
    let present = needed.iter().all(|n| r.check(n).is_some());
    ok(
        r.all_passed && present && r.mu == 2.0,
        format!("mu = {}, {} checks, worst relative violation {worst:.3e}, failed {failed:?}", r.mu, r.checks.len()),
    )
}

fn giusti() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let (c, b, beta) = (rng.gen_range(0.1..10.0), rng.gen_range(1.5..4.0), rng.gen_range(1.1..3.0));
        let run = giusti_iterate_at_threshold(c, b, beta, 51).unwrap();
        let x0 = giusti_threshold(c, b, beta);
        let expected_x0_ok = (run.values[0] - x0).abs() <= 1e-12 * x0;
        worst = worst.max(run.max_rel_excess);
        let held = run.decay_held && run.values.len() == 51 && expected_x0_ok;
        if !held {
            failures += 1;
        }
    }
    ok(failures == 0, format!("100 triples, {failures} failures, worst relative excess {worst:.3e}"))
}

fn vanishing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut parts = Vec::new();
    let mut passed = true;
    for v in Variant::ALL {
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let p = sample_superlinear(&mut rng, v);
            worst = worst.max(vanishing_ratio(&p));
        }
        passed &= worst <= 1e-10;
        parts.push(format!("{v}: {worst:.2e}"));
    }
    ok(passed, format!("worst envelope(level)/phi0 per variant [{}]", parts.join(", ")))
}

fn dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut passed = true;
    let mut parts = Vec::new();
    for linear in [true, false] {
        for v in Variant::ALL {
            let (mut fails, mut refine_up, mut worst) = (0, 0, 0.0f64);
            for _ in 0..200 {
                let p = sample_sub(&mut rng, v, linear);
                let run = dominance_run(&p);
                if !run.coarse.passed {
                    fails += 1;
                }
                if run.refined_worst_shared > run.coarse.worst_ratio {
                    refine_up += 1;
                }
                worst = worst.max(run.coarse.worst_ratio);
            }
            passed &= fails == 0 && refine_up == 0;
            parts.push(format!(
                "{v}/{}: fails {fails}, refinement increases {refine_up}, worst {worst:.3}",
                if linear { "beta=1" } else { "beta<1" }
            ));
        }
    }
    ok(passed, parts.join("; "))
}

fn witness_one() -> Outcome {
    let r = witness_beta_one(&log_space(1.0, 1e6, 200), &DEFAULT_LAMBDAS).unwrap();
    let probes_ok = r.probes.len() == 4 && r.probes.iter().all(|p| p.exceeds_million && p.k_at_max <= 1e6);
    let min_log = r.probes.iter().map(|p| p.log_max).fold(f64::INFINITY, f64::min);
    ok(
        r.rows.len() == 200 && r.max_residual <= 1e-15 && probes_ok,
        format!("max identity residual {:.3e}, smallest log max over lambdas {min_log:.1}", r.max_residual),
    )
}

fn witness_gt_one() -> Outcome {
    let r = witness_beta_gt_one(1.0, false).unwrap();
    let independent = 81f64.ln() <= 4.5 && 64f64.ln() > 4.0;
    let grid_ok = r.rows.len() == 100
        && r.rows.first().map(|x| x.k) == Some(9.0)
        && r.rows.last().map(|x| x.k) == Some(1e3);
    let holds = r.rows.iter().all(|x| x.log_residual <= 1e-12);
    ok(
        r.k0 == 9.0 && r.fails_below && r.tail_certified && r.increasing_from <= 4.0 && independent && grid_ok && holds && r.phi_positive,
        format!(
            "k0 = {}, increasing from {}, max log residual {:.3e}, min ln phi {:.1}",
            r.k0, r.increasing_from, r.max_log_residual, r.min_log_phi
        ),
    )
}

fn equivalence() -> Outcome {
    let dp = DoublingParams {
        c_tilde: 1.0,
        alpha: 1.0,
        beta: 0.5,
        k0: 1.0,
        growth: GrowthFunction::identity(),
        phi0: 1.0,
    };
    let bc = equivalence_backward_constant(&dp).unwrap();
    let expected = 4f64.max(1088f64.sqrt());
    let prof = doubling_envelope(&dp, 20, 16).unwrap();
    let r = verify_full_form(&dp, bc.c, &prof, 10_000, 0).unwrap();
    ok(
        (bc.c - expected).abs() <= 1e-12 * expected && r.pairs_checked == 10_000 && r.violations == 0,
        format!("c = {:.6}, {} pairs, {} violations", bc.c, r.pairs_checked, r.violations),
    )
}

fn singular_norm() -> Outcome {
    let p = PdeProblem::new(3, 33, 0.0, SourceSpec::RadialSingular { m_target: 4.0, center: None, cap: None });
    let f = build_source(&p).unwrap();
    let r = source_weak_norm(&p, &f).unwrap();
    ok(
        r.relative_error <= 0.15,
        format!("quasi-norm {:.5} vs {:.5}, relative error {:.4}", r.quasi_norm, r.reference, r.relative_error),
    )
}

fn pde_case(m: f64) -> (PdeProblem, Result<levelset_decay::pde::PdeAnalysis, String>, f64) {
    let src = SourceSpec::RadialSingular { m_target: m, center: None, cap: None };
    let fine_p = PdeProblem::new(3, 33, 0.25, src);
    let coarse_p = fine_p.with_resolution(17);
    let run = || -> Result<(levelset_decay::pde::PdeAnalysis, f64), String> {
        let fine = solve_picard(&fine_p, 1e-8, 1e-10, 500).map_err(|e| e.to_string())?;
        let coarse = solve_picard(&coarse_p, 1e-8, 1e-10, 500).map_err(|e| e.to_string())?;
        let a = analyze_with_companion(&fine, &fine_p, Some(&coarse), &ClassifierConfig::default())
            .map_err(|e| e.to_string())?;
        Ok((a, fine.final_update_norm))
    };
    match run() {
        Ok((a, u)) => (fine_p, Ok(a), u),
        Err(e) => (fine_p, Err(e), f64::NAN),
    }
}

fn pde_bounded() -> Outcome {
    let (_, a, upd) = pde_case(4.0);
    match a {
        Err(e) => ok(false, format!("error: {e}")),
        Ok(a) => {
            let s = a.stability.unwrap();
            ok(
                upd <= 1e-8 && a.measured.tag() == "bounded" && s.relative_change < 0.10 && a.agreement,
                format!(
                    "update {upd:.2e}, measured {}, max|u| {:.5} (33) vs {:.5} (17), change {:.2}%",
                    a.measured.tag(),
                    s.fine_max,
                    s.coarse_max,
                    100.0 * s.relative_change
                ),
            )
        }
    }
}

fn pde_weak() -> Outcome {
    let (_, a, upd) = pde_case(1.4);
    match a {
        Err(e) => ok(false, format!("error: {e}")),
        Ok(a) => {
            let fit = a.weak_fit.map(|f| (f.slope, f.max_rel_residual));
            let exp_fit = a.exp_fit.map(|f| (f.slope, f.max_rel_residual));
            let passed = match (&a.measured, a.exponent) {
                (DecayClass::WeakLebesgue { .. }, Some(cmp)) => {
                    cmp.below_bound && fit.is_some_and(|(_, r)| r <= 0.1)
                }
                _ => false,
            };
            let band = a.exponent.map(|c| format!(", exponent {:.3} vs bound {:.2}, within 35%: {}", c.measured, c.bound, c.within_band));
            ok(
                passed,
                format!(
                    "update {upd:.2e}, measured {}, composed-g fit (slope, residual) {fit:?}, exp fit {exp_fit:?}{}",
                    a.measured.tag(),
                    band.unwrap_or_default()
                ),
            )
        }
    }
}

fn classifier() -> Outcome {
    let cfg = ClassifierConfig::default();
    let g = GrowthFunction::loglinear();
    let mut notes = Vec::new();
    let mut passed = true;

    let b = synthetic_profile(0.5, 10.0, 40, |k| if k < 3.0 { 1.0 } else { 0.0 });
    let c = classify_decay(&b, &g, &cfg).unwrap();
    let level = match c.class {
        DecayClass::Bounded { level: Some(l) } => l,
        _ => f64::NAN,
    };
    let b_ok = level >= 3.0 && b.levels.iter().filter(|&&k| k < level).all(|&k| k < 3.0);
    passed &= b_ok;
    notes.push(format!("bounded at {level:.4}"));

    let e = synthetic_profile(1.0, 50.0, 64, |k| (-k).exp());
    match classify_decay(&e, &g, &cfg).unwrap().class {
        DecayClass::ExpIntegrable { lambda: Some(l), rho, .. } => {
            passed &= (l - 1.0).abs() <= 0.05 && (rho - 1.0).abs() <= 0.05;
            notes.push(format!("exp lambda {l:.4} rho {rho:.4}"));
        }
        other => {
            passed = false;
            notes.push(format!("exp family gave {}", other.tag()));
        }
    }
    for rho in [2.0, 5.0, 12.0] {
        let w = synthetic_profile(1.0, 1e4, 64, |k| g.value(k).powf(-rho));
        match classify_decay(&w, &g, &cfg).unwrap().class {
            DecayClass::WeakLebesgue { exponent, composed_with_g: true, .. } => {
                passed &= (exponent - rho).abs() <= 0.05 * rho;
                notes.push(format!("weak {rho} -> {exponent:.4}"));
            }
            other => {
                passed = false;
                notes.push(format!("weak {rho} gave {}", other.tag()));
            }
        }
    }
    ok(passed, notes.join(", "))
}

type Check = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Check; 11] = [
        ("1 growth axioms", growth_axioms, Duration::from_secs(1)),
        ("2 geometric iteration", giusti, Duration::from_secs(1)),
        ("3 vanishing certification", vanishing, Duration::from_secs(30)),
        ("4 envelope dominance", dominance, Duration::from_secs(60)),
        ("5 counterexample beta = 1", witness_one, Duration::from_secs(1)),
        ("6 counterexample beta > 1", witness_gt_one, Duration::from_secs(1)),
        ("7 equivalence constant", equivalence, Duration::from_secs(5)),
        ("8 singular source weak norm", singular_norm, Duration::from_secs(2)),
        ("9a pde bounded regime", pde_bounded, Duration::from_secs(90)),
        ("9b pde weak regime", pde_weak, Duration::from_secs(90)),
        ("10 classifier round trip", classifier, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let t = Instant::now();
        let out = f();
        let el = t.elapsed();
        let pass = out.passed && el < limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.3} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            el.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
