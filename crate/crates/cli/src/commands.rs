use crate::config::{
    read_json_file, split_keys, typed, CommandTag, CounterKind, CounterexampleInput, EnvelopeOptions, EquivalenceInput,
    GcheckInput, LemmaInput, PdeInput, RunConfig, ENVELOPE_KEYS,
};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_num, json_bytes, to_json, write_bytes, Artifact, Cell, Table};
use levelset_decay::counterexample::{
    doubling_envelope, equivalence_backward_constant, equivalence_forward, random_doubling_profile, verify_full_form,
    witness_beta_gt_one, witness_beta_one, DoublingParams, VerifierReport,
};
use levelset_decay::envelope::{
    build_grid, check_admissible, check_dominance, extremal_envelope, AdmissibilityReport, DominanceReport,
    EnvelopeProfile, PairFilter, VANISH_TOL,
};
use levelset_decay::growth::verify_axioms;
use levelset_decay::lemma::{compute_bound, Conclusion, DecayBound};
use levelset_decay::levelset::DecayClass;
use levelset_decay::numeric::log_space;
use levelset_decay::pde::{
    analyze_with_companion, build_source, coarse_resolution, solve_picard, source_weak_norm, write_field_binary,
    PdeSolution, SourceSpec,
};
use levelset_decay::LemmaParams;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufWriter;

/// Environment variable capping sweep concurrency.
pub const THREADS_ENV: &str = "LEVELSET_DECAY_THREADS";
/// Envelope grids above this size skip the quadratic admissibility pass.
const ADMISSIBILITY_MAX_LEVELS: usize = 2000;

pub fn execute(cfg: RunConfig) -> CliResult<()> {
    let RunConfig { command, params, output_path, format, seed } = cfg;
    let art = match command {
        CommandTag::Gcheck => gcheck(params)?,
        CommandTag::Bound => bound(params)?,
        CommandTag::Envelope => return envelope(params, format, output_path.as_deref()),
        CommandTag::Equivalence => equivalence(params, seed)?,
        CommandTag::Counterexample => counterexample(params)?,
        CommandTag::PdeSolve => pde_solve(params)?,
        CommandTag::PdeAnalyze => pde_analyze(params)?,
    };
    write_bytes(output_path.as_deref(), &art.render(format)?)
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn gcheck(params: Map<String, Value>) -> CliResult<Artifact> {
    let inp: GcheckInput = typed(Value::Object(params), "gcheck parameters")?;
    if !(inp.t_max.is_finite() && inp.t_max > 0.0) {
        return Err(config_err(format!("gcheck parameters: t_max must be finite and > 0, got {}", inp.t_max)));
    }
    if inp.tol.is_nan() || inp.tol < 0.0 {
        return Err(config_err(format!("gcheck parameters: tol must be >= 0, got {}", inp.tol)));
    }
    let rep = verify_axioms(&inp.growth, inp.t_max, inp.samples, inp.tol);
    let mut table = Table::new(&["check", "passed", "worst_violation", "witness"]);
    let mut text = format!(
        "growth {} (mu = {}): {} of {} checks passed\n",
        rep.growth,
        rep.mu,
        rep.checks.len() - rep.violations(),
        rep.checks.len()
    );
    for c in &rep.checks {
        let witness: Vec<String> = c.witness.iter().map(|&w| fmt_num(w)).collect();
        table.push(vec![c.name.as_str().into(), c.passed.into(), c.worst_violation.into(), witness.join(";").into()]);
        let _ = writeln!(text, "  {:<28} {:<5} worst {:e}", c.name, if c.passed { "ok" } else { "FAIL" }, c.worst_violation);
    }
    for n in &rep.notes {
        let _ = writeln!(text, "note: {n}");
    }
    Ok(Artifact { json: to_json(&rep)?, table, text })
}

fn bound_cells(b: &DecayBound) -> CliResult<Vec<(String, Cell)>> {
    let mut out = Vec::new();
    if let Value::Object(m) = to_json(b)? {
        for (k, v) in m {
            let cell = match v {
                Value::Number(n) => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
                Value::Bool(b) => Cell::Bool(b),
                Value::String(s) => Cell::Str(s),
                Value::Null => Cell::Empty,
                other => Cell::Str(other.to_string()),
            };
            out.push((k, cell));
        }
    }
    Ok(out)
}

fn branch_name(c: &Conclusion) -> String {
    serde_json::to_value(c.branch).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn conclusion_text(c: &Conclusion) -> String {
    let mut s = format!("{} / {}: {}\n", c.variant, branch_name(c), c.formula);
    for n in &c.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

fn bound(params: Map<String, Value>) -> CliResult<Artifact> {
    let inp: LemmaInput = typed(Value::Object(params), "bound parameters")?;
    let p = inp.params();
    let c = compute_bound(&p, &inp.options())?;
    let mut table = Table::new(&["field", "value"]);
    table.push(vec!["variant".into(), c.variant.as_str().into()]);
    table.push(vec!["branch".into(), branch_name(&c).into()]);
    for (k, v) in bound_cells(&c.bound)? {
        table.push(vec![k.into(), v]);
    }
    let text = conclusion_text(&c);
    Ok(Artifact { json: json!({ "params": p, "conclusion": c }), table, text })
}

/// Upper end of the envelope grid when none is given.
pub fn default_k_max(p: &LemmaParams, b: &DecayBound) -> f64 {
    match *b {
        DecayBound::Vanishes { level } => 2.0 * level.max(p.k0),
        DecayBound::StretchedExp { k0, tau, power, .. } => k0 + tau * 40f64.powf(1.0 / power),
        DecayBound::PowerEnvelope { .. } => p.k0 * 1e6,
    }
}

struct EnvelopeRun {
    params: LemmaParams,
    conclusion: Conclusion,
    k_max: f64,
    profile: EnvelopeProfile,
    dominance: DominanceReport,
    refined_worst_ratio: Option<f64>,
    admissibility: Option<AdmissibilityReport>,
}

fn run_envelope(inp: &LemmaInput, opts: &EnvelopeOptions) -> levelset_decay::Result<EnvelopeRun> {
    let p = inp.params();
    let conclusion = compute_bound(&p, &inp.options())?;
    let k_max = opts.k_max.unwrap_or_else(|| default_k_max(&p, &conclusion.bound));
    let grid = build_grid(&p, k_max, opts.levels, Some(&conclusion.bound))?;
    let profile = extremal_envelope(&p, &grid)?;
    let dominance = check_dominance(&conclusion.bound, &profile, &p.growth, opts.slack, VANISH_TOL);
    let refined_worst_ratio = if opts.refine {
        let fine = extremal_envelope(&p, &grid.refined()?)?;
        let rep = check_dominance(&conclusion.bound, &fine, &p.growth, opts.slack, VANISH_TOL);
        Some(rep.worst_ratio)
    } else {
        None
    };
    let admissibility =
        (grid.len() <= ADMISSIBILITY_MAX_LEVELS).then(|| check_admissible(&profile, &p, PairFilter::All));
    Ok(EnvelopeRun { params: p, conclusion, k_max, profile, dominance, refined_worst_ratio, admissibility })
}

fn dominance_summary(run: &EnvelopeRun) -> Value {
    let d = &run.dominance;
    json!({
        "passed": d.passed,
        "slack": d.slack,
        "levels_checked": d.levels_checked,
        "worst_ratio": d.worst_ratio,
        "worst_level": d.worst_level,
        "failures": d.failures,
        "refined_worst_ratio": run.refined_worst_ratio,
    })
}

fn envelope_options(params: &mut Map<String, Value>, context: &str) -> CliResult<EnvelopeOptions> {
    typed(split_keys(params, &ENVELOPE_KEYS), context)
}

fn envelope(mut params: Map<String, Value>, format: crate::output::Format, out: Option<&std::path::Path>) -> CliResult<()> {
    let opts = envelope_options(&mut params, "envelope parameters")?;
    if let Some(sweep) = &opts.sweep {
        return envelope_sweep(sweep, params, format, out);
    }
    let inp: LemmaInput = typed(Value::Object(params), "envelope parameters")?;
    let run = run_envelope(&inp, &opts)?;

    let by_level: HashMap<u64, (f64, f64)> =
        run.dominance.rows.iter().map(|r| (r.level.to_bits(), (r.bound, r.ratio))).collect();
    let mut table = Table::new(&["level", "tag", "envelope", "bound", "ratio"]);
    let mut rows = Vec::with_capacity(run.profile.values.len());
    for ((&k, &v), tag) in run.profile.levels().iter().zip(&run.profile.values).zip(run.profile.grid.provenance()) {
        let tag = serde_json::to_value(tag).unwrap_or_default().as_str().unwrap_or("").to_string();
        let (b, r) = by_level.get(&k.to_bits()).copied().unzip();
        table.push(vec![k.into(), tag.clone().into(), v.into(), b.into(), r.into()]);
        rows.push(json!({ "level": k, "tag": tag, "envelope": v, "bound": b, "ratio": r }));
    }
    let json = json!({
        "params": run.params,
        "conclusion": run.conclusion,
        "k_max": run.k_max,
        "dominance": dominance_summary(&run),
        "admissibility": run.admissibility,
        "rows": rows,
    });
    let mut text = conclusion_text(&run.conclusion);
    let _ = writeln!(
        text,
        "dominance {} at slack {}: worst ratio {} over {} levels (k_max {})",
        if run.dominance.passed { "passed" } else { "FAILED" },
        run.dominance.slack,
        run.dominance.worst_ratio,
        run.dominance.levels_checked,
        run.k_max
    );
    if let Some(r) = run.refined_worst_ratio {
        let _ = writeln!(text, "refined grid worst ratio {r}");
    }
    if let Some(a) = &run.admissibility {
        let _ = writeln!(text, "admissibility: worst residual {:e} over {} pairs", a.worst_residual, a.pairs_checked);
    }
    write_bytes(out, &Artifact { json, table, text }.render(format)?)
}

fn sweep_threads() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(config_err(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

fn envelope_sweep(
    path: &std::path::Path,
    shared: Map<String, Value>,
    format: crate::output::Format,
    out: Option<&std::path::Path>,
) -> CliResult<()> {
    let Value::Array(entries) = read_json_file(path)? else {
        return Err(config_err(format!("{}: sweep file must hold a JSON array", path.display())));
    };
    let mut jobs = Vec::with_capacity(entries.len());
    for (i, e) in entries.into_iter().enumerate() {
        let ctx = format!("{} entry {i}", path.display());
        let Value::Object(entry) = e else {
            return Err(config_err(format!("{ctx}: expected an object")));
        };
        // shared flags and params act as defaults for every entry
        let mut merged = shared.clone();
        merged.extend(entry);
        let opts = envelope_options(&mut merged, &ctx)?;
        if opts.sweep.is_some() {
            return Err(config_err(format!("{ctx}: nested sweep")));
        }
        let inp: LemmaInput = typed(Value::Object(merged), &ctx)?;
        jobs.push((inp, opts));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads()?)
        .build()
        .map_err(|e| CliError::Output(e.to_string()))?;
    let results: Vec<_> = pool.install(|| jobs.par_iter().map(|(inp, opts)| run_envelope(inp, opts)).collect());

    let mut table = Table::new(&[
        "index",
        "variant",
        "branch",
        "shape",
        "passed",
        "worst_ratio",
        "worst_level",
        "levels_checked",
        "refined_worst_ratio",
        "admissibility_residual",
        "error",
    ]);
    let mut json_rows = Vec::new();
    let mut text = String::new();
    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        let variant = jobs[i].0.variant.as_str();
        match r {
            Ok(run) => {
                let d = &run.dominance;
                let branch = branch_name(&run.conclusion);
                table.push(vec![
                    i.into(),
                    variant.into(),
                    branch.clone().into(),
                    run.conclusion.bound.tag().into(),
                    d.passed.into(),
                    d.worst_ratio.into(),
                    d.worst_level.into(),
                    d.levels_checked.into(),
                    run.refined_worst_ratio.into(),
                    run.admissibility.as_ref().map(|a| a.worst_residual).into(),
                    Cell::Empty,
                ]);
                json_rows.push(json!({
                    "index": i,
                    "params": run.params,
                    "conclusion": run.conclusion,
                    "k_max": run.k_max,
                    "dominance": dominance_summary(run),
                    "admissibility": run.admissibility,
                }));
                let _ = writeln!(
                    text,
                    "[{i}] {variant} {branch}: {} worst ratio {}",
                    if d.passed { "passed" } else { "FAILED" },
                    d.worst_ratio
                );
            }
            Err(e) => {
                failed += 1;
                let mut row = vec![i.into(), variant.into()];
                row.extend(std::iter::repeat_with(|| Cell::Empty).take(8));
                row.push(e.to_string().into());
                table.push(row);
                json_rows.push(json!({ "index": i, "error": e.to_string() }));
                let _ = writeln!(text, "[{i}] {variant}: error: {e}");
            }
        }
    }
    write_bytes(out, &Artifact { json: Value::Array(json_rows), table, text }.render(format)?)?;
    if failed > 0 {
        return Err(CliError::SweepFailures { failed, total: results.len() });
    }
    Ok(())
}

fn equivalence(params: Map<String, Value>, seed: u64) -> CliResult<Artifact> {
    let inp: EquivalenceInput = typed(Value::Object(params), "equivalence parameters")?;
    let dp = DoublingParams {
        c_tilde: inp.c_tilde,
        alpha: inp.alpha,
        beta: inp.beta,
        k0: inp.k0,
        growth: inp.growth.clone(),
        phi0: inp.phi0,
    };
    let forward = equivalence_forward(dp.c_tilde)?;
    let backward = equivalence_backward_constant(&dp)?;
    let mut checks: Vec<(String, VerifierReport)> = Vec::new();
    let env = doubling_envelope(&dp, inp.octaves, inp.per_octave)?;
    checks.push(("extremal".into(), verify_full_form(&dp, backward.c, &env, inp.pairs, seed)?));
    for i in 0..inp.random_profiles {
        let s = seed.wrapping_add(1 + i as u64);
        let prof = random_doubling_profile(&dp, inp.octaves, inp.per_octave, s)?;
        checks.push((format!("random-{i}"), verify_full_form(&dp, backward.c, &prof, inp.pairs, s)?));
    }
    let mut table =
        Table::new(&["profile", "constant", "pairs_checked", "violations", "worst_residual", "worst_k", "worst_h"]);
    let mut text = format!(
        "forward constant {forward}\nbackward constant {} = max(c_case1 {}, c_bar^(1-beta) with c_bar {})\n",
        backward.c, backward.c_case1, backward.c_bar
    );
    for (name, r) in &checks {
        table.push(vec![
            name.as_str().into(),
            r.constant.into(),
            r.pairs_checked.into(),
            r.violations.into(),
            r.worst_residual.into(),
            r.worst_pair.map(|p| p.0).into(),
            r.worst_pair.map(|p| p.1).into(),
        ]);
        let _ = writeln!(
            text,
            "{name}: {} violations over {} pairs, worst residual {:e}",
            r.violations, r.pairs_checked, r.worst_residual
        );
    }
    let json = json!({
        "params": dp,
        "seed": seed,
        "forward_constant": forward,
        "backward": backward,
        "checks": checks.iter().map(|(n, r)| json!({ "profile": n, "report": r })).collect::<Vec<_>>(),
    });
    Ok(Artifact { json, table, text })
}

fn counterexample(params: Map<String, Value>) -> CliResult<Artifact> {
    let inp: CounterexampleInput = typed(Value::Object(params), "counterexample parameters")?;
    match inp.kind {
        CounterKind::BetaOne => {
            if !(inp.k_min >= 1.0 && inp.k_max > inp.k_min && inp.points >= 2) {
                return Err(config_err("counterexample parameters: need 1 <= k_min < k_max and points >= 2"));
            }
            let ks = log_space(inp.k_min, inp.k_max, inp.points);
            let rep = witness_beta_one(&ks, &inp.lambdas)?;
            let mut table = Table::new(&["k", "phi_k", "phi_2k", "residual", "residual_f64"]);
            let mut text = format!(
                "phi(k) = exp(-(ln k)^2), c_tilde = {}, g(k) = k^ln2, alpha = {}\nidentity residuals (max {:e}):\n",
                rep.c_tilde, rep.alpha, rep.max_residual
            );
            for r in &rep.rows {
                table.push(vec![r.k.into(), r.phi_k.into(), r.phi_2k.into(), r.residual.into(), r.residual_f64.into()]);
                let _ = writeln!(text, "  k = {:<24e} residual {:e}", r.k, r.residual);
            }
            let _ = writeln!(text, "failure witnesses for exp(lambda k) phi(k) <= C, k <= {:e}:", rep.k_max);
            for p in &rep.probes {
                let _ = writeln!(
                    text,
                    "  lambda = {:e}: k = {:e} gives ln(exp(lambda k) phi(k)) = {:.6}{}",
                    p.lambda,
                    p.k_at_max,
                    p.log_max,
                    if p.exceeds_million { " > ln 1e6" } else { "" }
                );
            }
            Ok(Artifact { json: to_json(&rep)?, table, text })
        }
        CounterKind::BetaGtOne => {
            let rep = witness_beta_gt_one(inp.alpha, inp.real_threshold)?;
            let mut table = Table::new(&["k", "log_residual"]);
            for r in &rep.rows {
                table.push(vec![r.k.into(), r.log_residual.into()]);
            }
            let text = format!(
                "alpha = {}: smallest admissible k0 = {}{}\nfails below k0: {}\nk/2 - 2 alpha ln k increasing from {} (certified: {})\n\
                 doubling inequality: max log residual {:e} over {} levels\nphi positive at every probe: {} (min ln phi {})\n",
                rep.alpha,
                rep.k0,
                rep.k0_real.map(|r| format!(" (real threshold {r})")).unwrap_or_default(),
                rep.fails_below,
                rep.increasing_from,
                rep.tail_certified,
                rep.max_log_residual,
                rep.rows.len(),
                rep.phi_positive,
                rep.min_log_phi
            );
            Ok(Artifact { json: to_json(&rep)?, table, text })
        }
    }
}

fn solution_summary(sol: &PdeSolution) -> Value {
    json!({
        "n": sol.n,
        "resolution": sol.resolution,
        "picard_iterations": sol.picard_iterations,
        "final_update_norm": sol.final_update_norm,
        "linear_residual": sol.linear_residual,
        "nonlinear_residual": sol.nonlinear_residual,
        "omega": sol.omega,
        "face_coefficient_range": sol.face_coefficient_range,
        "max_abs": sol.max_abs,
        "update_history": sol.update_history,
    })
}

fn pde_input(params: Map<String, Value>, context: &str) -> CliResult<PdeInput> {
    let inp: PdeInput = typed(Value::Object(params), context)?;
    if !(inp.picard_tol > 0.0 && inp.linear_tol > 0.0) {
        return Err(config_err(format!("{context}: tolerances must be > 0")));
    }
    Ok(inp)
}

fn pde_solve(params: Map<String, Value>) -> CliResult<Artifact> {
    let inp = pde_input(params, "pde-solve parameters")?;
    if inp.report.is_some() {
        return Err(config_err("pde-solve parameters: `report` belongs to pde-analyze"));
    }
    let prob = inp.problem();
    let sol = solve_picard(&prob, inp.picard_tol, inp.linear_tol, inp.max_picard)?;
    if let Some(path) = &inp.field_output {
        let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        write_field_binary(&sol, BufWriter::new(f)).map_err(|e| CliError::io(path, e))?;
    }
    let source_norm = match prob.source {
        SourceSpec::RadialSingular { .. } => Some(source_weak_norm(&prob, &build_source(&prob)?)?),
        _ => None,
    };
    let mut table = Table::new(&["iteration", "update_norm"]);
    for (i, &u) in sol.update_history.iter().enumerate() {
        table.push(vec![(i + 1).into(), u.into()]);
    }
    let mut text = format!(
        "{}^{} grid: {} Picard steps, last update {:e}, nonlinear residual {:e}, max|u| = {}\n",
        sol.resolution, sol.n, sol.picard_iterations, sol.final_update_norm, sol.nonlinear_residual, sol.max_abs
    );
    if let Some(s) = &source_norm {
        let _ = writeln!(
            text,
            "source weak L^{} quasi-norm {} (reference {}, relative error {:.4})",
            s.m, s.quasi_norm, s.reference, s.relative_error
        );
    }
    let json = json!({ "problem": prob, "solution": solution_summary(&sol), "source_norm": source_norm });
    Ok(Artifact { json, table, text })
}

fn class_text(c: &DecayClass) -> String {
    match c {
        DecayClass::Bounded { level } => match level {
            Some(l) => format!("bounded (level {l})"),
            None => "bounded".into(),
        },
        DecayClass::ExpIntegrable { rho, open, .. } => {
            format!("exponentially integrable, rho {} {rho}", if *open { "<" } else { "=" })
        }
        DecayClass::WeakLebesgue { exponent, open, .. } => {
            format!("weak Lebesgue, exponent {} {exponent}", if *open { "<" } else { "=" })
        }
        DecayClass::Unclassified { diagnostics } => format!("unclassified ({diagnostics})"),
    }
}

fn pde_analyze(params: Map<String, Value>) -> CliResult<Artifact> {
    let inp = pde_input(params, "pde-analyze parameters")?;
    if inp.field_output.is_some() {
        return Err(config_err("pde-analyze parameters: `field_output` belongs to pde-solve"));
    }
    let prob = inp.problem();
    let sol = solve_picard(&prob, inp.picard_tol, inp.linear_tol, inp.max_picard)?;
    let companion = match coarse_resolution(prob.grid_points_per_axis) {
        Some(c) if sol.max_abs > 0.0 => {
            Some(solve_picard(&prob.with_resolution(c), inp.picard_tol, inp.linear_tol, inp.max_picard)?)
        }
        _ => None,
    };
    let an = analyze_with_companion(&sol, &prob, companion.as_ref(), &Default::default())?;

    let report = json!({
        "problem": prob,
        "measured": an.measured,
        "predicted": an.predicted,
        "agreement": an.agreement,
        "exponent": an.exponent,
        "stability": an.stability,
        "exp_fit": an.exp_fit,
        "weak_fit": an.weak_fit,
        "max_abs": an.max_abs,
        "notes": an.notes,
        "solution": solution_summary(&sol),
    });
    if let Some(path) = &inp.report {
        std::fs::write(path, json_bytes(&report)?).map_err(|e| CliError::io(path, e))?;
    }

    let min_measure = levelset_decay::levelset::ClassifierConfig::default().min_cells * prob.cell_volume();
    let g = levelset_decay::GrowthFunction::loglinear();
    let mut table = Table::new(&["level", "measure", "resolved", "weak_fit"]);
    for (&k, &m) in an.profile.levels.iter().zip(&an.profile.measures) {
        let fit = an.weak_fit.filter(|_| k > 0.0).map(|f| (f.intercept + f.slope * g.ln_value(k)).exp());
        table.push(vec![k.into(), m.into(), (k > 0.0 && m >= min_measure).into(), fit.into()]);
    }
    let mut text = format!(
        "measured: {}\npredicted: {}\nagreement: {}\n",
        class_text(&an.measured),
        an.predicted.as_ref().map_or("none".into(), class_text),
        an.agreement
    );
    if let Some(s) = &an.stability {
        let _ = writeln!(
            text,
            "max|u| {} on {}^n against {} on {}^n (change {:.4})",
            s.fine_max, prob.grid_points_per_axis, s.coarse_max, s.coarse_resolution, s.relative_change
        );
    }
    if let Some(e) = &an.exponent {
        let _ = writeln!(
            text,
            "exponent {} against bound {} (gap {:.3}, within band {})",
            e.measured, e.bound, e.relative_gap, e.within_band
        );
    }
    for n in &an.notes {
        let _ = writeln!(text, "note: {n}");
    }
    let mut json = report;
    json["profile"] = to_json(&an.profile)?;
    Ok(Artifact { json, table, text })
}
