//! One handler per subcommand. Each builds a report, writes it, and then
//! fails with an invariant error if a checked property does not hold.

use serde_json::json;
use srbench::kk::{
    disk_pairs, kk_distance, matrix_pairs, perturb_algebra, sr_stability_experiment, KkBudget,
};
use srbench::logic::{build_phi_n, eval_formula, parse_formula, EvalOptions};
use srbench::stablerank::{dist_to_lg, estimate_sr, max_distance_witness, DistBudget};
use srbench::suites::{run_suite, Suite};

use crate::config::{self, check_common, CliError, CliResult};
use crate::report::{cell, common_config, emit, opt_cell, to_value, Table};
use crate::Common;

/// Estimates inside this band contradict the 0-or-at-least-1 dichotomy.
const BAND: (f64, f64) = (0.15, 0.85);

fn default_instances(s: Suite) -> usize {
    match s {
        Suite::Shift | Suite::Polar => 1000,
        Suite::Section | Suite::DistanceFormula => 500,
        Suite::Eigen => 256,
    }
}

fn dist_budget(c: &Common) -> DistBudget {
    DistBudget {
        levels: c.budget,
        seed: c.seed,
        ..DistBudget::default()
    }
}

fn kk_budget(c: &Common) -> KkBudget {
    KkBudget {
        starts: c.budget,
        seed: c.seed,
        ..KkBudget::default()
    }
}

fn violation(failed: Vec<String>) -> CliResult<()> {
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failed.join("; ")))
    }
}

pub fn verify_lemmas(c: &Common, instances: Option<usize>, suites: Option<&str>) -> CliResult<()> {
    check_common(c)?;
    let selected: Vec<Suite> = match suites {
        None => Suite::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(|s| Suite::from_name(s.trim()).ok_or_else(|| config::config(format!("unknown suite `{s}`"))))
            .collect::<CliResult<_>>()?,
    };
    if instances == Some(0) {
        return Err(config::config("--instances must be positive"));
    }
    let reports: Vec<_> = selected
        .iter()
        .map(|&s| run_suite(s, instances.unwrap_or_else(|| default_instances(s)), c.seed))
        .collect();
    let mut table = Table::new(&["suite", "instances", "passed", "checks", "tolerance", "worst"]);
    for r in &reports {
        table.push(vec![
            cell(r.suite.name()),
            cell(r.instances),
            cell(r.passed),
            cell(r.checks),
            cell(r.tolerance),
            cell(r.worst),
        ]);
    }
    let all_passed = reports.iter().all(|r| r.all_passed());
    let mut cfg = common_config(c);
    cfg["instances"] = json!(instances);
    cfg["suites"] = json!(selected.iter().map(|s| s.name()).collect::<Vec<_>>());
    emit(c, "verify-lemmas", &cfg, &json!({ "suites": reports, "all_passed": all_passed }), &table)?;
    violation(
        reports
            .iter()
            .filter(|r| !r.all_passed())
            .map(|r| format!("suite {} passed {}/{}", r.suite.name(), r.passed, r.instances))
            .collect(),
    )
}

pub fn dist(c: &Common, element: &str) -> CliResult<()> {
    check_common(c)?;
    let (spec, alg) = config::algebra(c)?;
    let a = config::element(&alg, c.n, element, c.seed)?;
    let cert = dist_to_lg(&a, &dist_budget(c))?;
    let s = cert.summary();
    let norm = a.norm();
    let mut table = Table::new(&["algebra", "element", "n", "norm", "lower", "upper", "lower_method"]);
    table.push(vec![
        alg.label(),
        cell(element),
        cell(c.n),
        cell(norm),
        cell(s.lower),
        cell(s.upper),
        to_value(&s.lower_method).as_str().unwrap_or_default().to_string(),
    ]);
    let mut cfg = common_config(c);
    cfg["element"] = json!(element);
    cfg["algebra_spec"] = to_value(&spec);
    let result = json!({ "algebra": alg.label(), "element_norm": norm, "certificate": s });
    emit(c, "dist", &cfg, &result, &table)?;
    let mut failed = Vec::new();
    if !(0.0 <= s.lower && s.lower <= s.upper) {
        failed.push(format!("certificate bounds out of order: [{}, {}]", s.lower, s.upper));
    }
    if s.upper > norm + c.tolerance {
        failed.push(format!("upper {} exceeds ‖a‖ = {norm}", s.upper));
    }
    violation(failed)
}

pub fn witness(c: &Common, element: &str) -> CliResult<()> {
    check_common(c)?;
    let (spec, alg) = config::algebra(c)?;
    let a = config::element(&alg, c.n, element, c.seed)?;
    let cert = dist_to_lg(&a, &dist_budget(c))?;
    let b = max_distance_witness(&a, &cert)?;
    let recert = dist_to_lg(&b, &dist_budget(c))?;
    let norm = b.norm();
    let mut table = Table::new(&["algebra", "element", "lower", "upper", "witness_norm", "witness_lower", "witness_upper"]);
    table.push(vec![
        alg.label(),
        cell(element),
        cell(cert.lower),
        cell(cert.upper),
        cell(norm),
        cell(recert.lower),
        cell(recert.upper),
    ]);
    let mut cfg = common_config(c);
    cfg["element"] = json!(element);
    cfg["algebra_spec"] = to_value(&spec);
    let result = json!({
        "algebra": alg.label(),
        "certificate": cert.summary(),
        "witness_norm": norm,
        "witness_certificate": recert.summary(),
    });
    emit(c, "witness", &cfg, &result, &table)?;
    violation(if norm > 1.0 + c.tolerance {
        vec![format!("witness norm {norm} exceeds 1")]
    } else {
        Vec::new()
    })
}

fn in_band(lower: f64, upper: f64) -> bool {
    lower <= BAND.1 && upper >= BAND.0
}

pub fn phi(c: &Common) -> CliResult<()> {
    check_common(c)?;
    let (spec, alg) = config::algebra(c)?;
    let f = build_phi_n(c.n);
    let r = eval_formula(&alg, &f, &EvalOptions::new(c.budget, c.seed))?;
    let band = in_band(r.lower, r.upper);
    let mut table = Table::new(&["algebra", "n", "lower", "upper", "certified_lower", "in_band"]);
    table.push(vec![
        alg.label(),
        cell(c.n),
        cell(r.lower),
        cell(r.upper),
        cell(r.certified_lower),
        cell(band),
    ]);
    let mut cfg = common_config(c);
    cfg["algebra_spec"] = to_value(&spec);
    let result = json!({
        "algebra": alg.label(),
        "formula": f.to_string(),
        "estimate": r.summary(),
        "in_band": band,
    });
    emit(c, "phi", &cfg, &result, &table)?;
    violation(if band {
        vec![format!("φ_{} estimate [{}, {}] meets the band {BAND:?}", c.n, r.lower, r.upper)]
    } else {
        Vec::new()
    })
}

pub fn sr(c: &Common) -> CliResult<()> {
    check_common(c)?;
    let (spec, alg) = config::algebra(c)?;
    let est = estimate_sr(&alg, c.n, &EvalOptions::new(c.budget, c.seed))?;
    let mut table = Table::new(&["algebra", "n", "lower", "upper", "sr"]);
    for e in &est.estimates {
        table.push(vec![alg.label(), cell(e.n), cell(e.lower), cell(e.upper), est.label()]);
    }
    let mut cfg = common_config(c);
    cfg["algebra_spec"] = to_value(&spec);
    let result = json!({ "algebra": alg.label(), "sr": est.label(), "estimate": est });
    emit(c, "sr", &cfg, &result, &table)?;
    violation(
        est.estimates
            .iter()
            .filter(|e| in_band(e.lower, e.upper))
            .map(|e| format!("φ_{} estimate [{}, {}] meets the band {BAND:?}", e.n, e.lower, e.upper))
            .collect(),
    )
}

pub fn kk(c: &Common, first: &str, second: Option<&str>, epsilon: f64) -> CliResult<()> {
    check_common(c)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(config::config("--epsilon must be a finite non-negative number"));
    }
    let a = config::subalgebra(first)?;
    let b = config::subalgebra(second.unwrap_or(first))?;
    let b = perturb_algebra(&b, epsilon, c.seed)?;
    let cert = kk_distance(&a, &b, &kk_budget(c))?;
    let mut table = Table::new(&["d", "first_dim", "second_dim", "epsilon", "lower", "upper"]);
    table.push(vec![
        cell(a.d()),
        cell(a.dim()),
        cell(b.dim()),
        cell(epsilon),
        cell(cert.lower),
        cell(cert.upper),
    ]);
    let mut cfg = common_config(c);
    cfg["first"] = json!(first);
    cfg["second"] = json!(second.unwrap_or(first));
    cfg["epsilon"] = json!(epsilon);
    let result = json!({
        "first": a.to_doc(),
        "second": b.to_doc(),
        "certificate": cert.summary(),
    });
    emit(c, "kk", &cfg, &result, &table)?;
    violation(if !(0.0 <= cert.lower && cert.lower <= cert.upper && cert.upper <= 2.0) {
        vec![format!("kk bounds [{}, {}] outside 0 ≤ lower ≤ upper ≤ 2", cert.lower, cert.upper)]
    } else {
        Vec::new()
    })
}

pub fn perturb_experiment(c: &Common, matrix_count: usize, disk_count: usize) -> CliResult<()> {
    check_common(c)?;
    let mut pairs = matrix_pairs(matrix_count, c.seed, &KkBudget {
        seed: c.seed,
        ..KkBudget::default()
    })?;
    pairs.extend(disk_pairs(disk_count, c.mesh_res)?);
    let report = sr_stability_experiment(&pairs, c.n, &EvalOptions::new(c.budget, c.seed))?;
    let mut table = Table::new(&["label", "epsilon", "kk_lower", "kk_upper", "sr_first", "sr_second", "agree"]);
    for r in &report.rows {
        table.push(vec![
            r.label.clone(),
            cell(r.epsilon),
            opt_cell(r.kk_lower),
            opt_cell(r.kk_upper),
            r.sr_first.clone(),
            r.sr_second.clone(),
            cell(r.agree),
        ]);
    }
    let mut cfg = common_config(c);
    cfg["matrix_pairs"] = json!(matrix_count);
    cfg["disk_pairs"] = json!(disk_count);
    emit(c, "perturb-experiment", &cfg, &to_value(&report), &table)?;
    // Disagreements are findings of the experiment, not invariant breaches.
    Ok(())
}

pub fn parse(c: &Common, text: &str) -> CliResult<()> {
    let f = parse_formula(text)?;
    let canonical = f.to_string();
    let round_trip = parse_formula(&canonical).map(|g| g == f).unwrap_or(false);
    let mut table = Table::new(&["canonical", "round_trip"]);
    table.push(vec![canonical.clone(), cell(round_trip)]);
    let cfg = json!({ "formula": text });
    let result = json!({ "canonical": canonical, "round_trip": round_trip, "quantifiers": f.bindings.len() });
    emit(c, "parse", &cfg, &result, &table)?;
    violation(if round_trip {
        Vec::new()
    } else {
        vec!["canonical form does not parse back to the same sentence".into()]
    })
}
