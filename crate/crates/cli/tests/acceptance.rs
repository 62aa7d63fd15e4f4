//! Acceptance gate. Every criterion runs to completion and prints one
//! `PASS`/`FAIL` line; the test fails at the end if any line failed.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::Value;
use srbench::algebra::{probes, Algebra};
use srbench::kk::{disk_pairs, kk_distance, matrix_pairs, perturb_algebra, sr_stability_experiment, KkBudget, Subalgebra};
use srbench::logic::{build_phi_n, eval_formula, EvalOptions};
use srbench::stablerank::{dist_to_lg, estimate_sr, max_distance_witness, DistBudget};
use srbench::suites::{run_suite, Suite};

const SEED: u64 = 42;
const BAND: (f64, f64) = (0.15, 0.85);
/// Rounding slack on the witness norm ceiling.
const NORM_SLACK: f64 = 1e-9;

struct Gate {
    failed: Vec<String>,
}

impl Gate {
    /// Written past the test harness capture so the lines always show.
    fn record(&mut self, id: &str, ok: bool, detail: String) {
        let line = format!("[{}] {id}: {detail}\n", if ok { "PASS" } else { "FAIL" });
        let _ = std::io::stdout().write_all(line.as_bytes());
        if !ok {
            self.failed.push(id.to_string());
        }
    }
}

fn opts() -> EvalOptions {
    EvalOptions::new(32, 0)
}

fn arc(a: Algebra) -> Arc<Algebra> {
    a.into_arc()
}

fn meets_band(lower: f64, upper: f64) -> bool {
    lower <= BAND.1 && upper >= BAND.0
}

fn shift_suite(g: &mut Gate) {
    let t = Instant::now();
    let r = run_suite(Suite::Shift, 1000, SEED);
    let el = t.elapsed();
    g.record(
        "1 shift",
        r.all_passed() && el < Duration::from_secs(60),
        format!("{}/{} certified at margin 1e-8, min σ² {:.3e}, {el:.1?}", r.passed, r.instances, r.worst),
    );
}

fn section_suite(g: &mut Gate) {
    let r = run_suite(Suite::Section, 500, SEED);
    g.record(
        "2 section",
        r.all_passed(),
        format!("{}/{} with residual ≤ 1e-7 and certified s, worst residual {:.3e}", r.passed, r.instances, r.worst),
    );
}

fn distance_formula_suite(g: &mut Gate) {
    let r = run_suite(Suite::DistanceFormula, 500, SEED);
    g.record(
        "3 distance formula",
        r.all_passed(),
        format!(
            "{}/{} over 9 levels ({} checks), worst candidate excess {:.3e}",
            r.passed, r.instances, r.checks, r.worst
        ),
    );
}

fn disk_benchmark(g: &mut Gate) {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for res in [32, 64, 128] {
        let disk = arc(Algebra::disk(res, 1).unwrap());
        let z = probes(&disk, 1).remove(0);
        let cert = dist_to_lg(&z, &DistBudget::default()).unwrap();
        let floor = 1.0 - 10.0 / res as f64;
        ok &= cert.lower >= floor && cert.upper <= 1.0 + 1e-6;
        detail.push(format!("res {res} [{:.4}, {:.9}]", cert.lower, cert.upper));
        if res == 64 {
            let b = max_distance_witness(&z, &cert).unwrap();
            let norm = b.norm();
            let recert = dist_to_lg(&b, &DistBudget::default()).unwrap();
            ok &= (0.99..=1.0 + NORM_SLACK).contains(&norm) && recert.lower >= 0.9;
            detail.push(format!("witness ‖b‖ = {norm:.12}, lower {:.4}", recert.lower));
        }
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(300);
    g.record("4 disk benchmark", ok, format!("{}, {el:.1?}", detail.join("; ")));
}

fn phi_dichotomy(g: &mut Gate, intervals: &mut Vec<(String, f64, f64)>) {
    let phi = |alg: &Arc<Algebra>, n: usize| eval_formula(alg, &build_phi_n(n), &opts()).unwrap();
    let m3 = phi(&arc(Algebra::full_matrix(3).unwrap()), 1);
    let interval = phi(&arc(Algebra::interval(64, 1).unwrap()), 1);
    let disk = arc(Algebra::disk(64, 1).unwrap());
    let d1 = phi(&disk, 1);
    let d2 = phi(&disk, 2);
    for (name, r) in [("φ_1(M_3)", &m3), ("φ_1(interval)", &interval), ("φ_1(disk)", &d1), ("φ_2(disk)", &d2)] {
        intervals.push((name.to_string(), r.lower, r.upper));
    }
    let ok = m3.upper <= 0.05 && interval.upper <= 0.1 && d1.certified_lower >= 0.9 && d2.upper <= 0.1;
    g.record(
        "5 phi values",
        ok,
        format!(
            "M_3 ≤ {:.4}, interval ≤ {:.4}, disk φ_1 ≥ {:.4} (certified), disk φ_2 ≤ {:.4}",
            m3.upper, interval.upper, d1.certified_lower, d2.upper
        ),
    );
}

fn stable_rank(g: &mut Gate, intervals: &mut Vec<(String, f64, f64)>) {
    let cases = [
        ("M_2", arc(Algebra::full_matrix(2).unwrap()), Some(1)),
        ("M_3", arc(Algebra::full_matrix(3).unwrap()), Some(1)),
        ("M_4", arc(Algebra::full_matrix(4).unwrap()), Some(1)),
        ("interval", arc(Algebra::interval(64, 1).unwrap()), Some(1)),
        ("disk", arc(Algebra::disk(64, 1).unwrap()), Some(2)),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, alg, want) in cases {
        let est = estimate_sr(&alg, 3, &opts()).unwrap();
        ok &= est.value == want;
        detail.push(format!("{name} → {}", est.label()));
        for e in &est.estimates {
            intervals.push((format!("φ_{}({name})", e.n), e.lower, e.upper));
        }
    }
    g.record("6 stable rank", ok, detail.join(", "));
}

fn band(g: &mut Gate, intervals: &[(String, f64, f64)]) {
    let hits: Vec<String> = intervals
        .iter()
        .filter(|(_, lo, hi)| meets_band(*lo, *hi))
        .map(|(n, lo, hi)| format!("{n} [{lo:.4}, {hi:.4}]"))
        .collect();
    g.record(
        "5 dichotomy band",
        hits.is_empty(),
        if hits.is_empty() {
            format!("{} estimates, none meets [0.15, 0.85]", intervals.len())
        } else {
            hits.join(", ")
        },
    );
}

fn kk_suite(g: &mut Gate) {
    let budget = KkBudget::default();
    let algebras = [
        Subalgebra::full(2).unwrap(),
        Subalgebra::diagonal(3).unwrap(),
        Subalgebra::block_diagonal(&[1, 2]).unwrap(),
        Subalgebra::block_diagonal(&[2, 2]).unwrap(),
    ];
    let self_zero = algebras.iter().all(|a| {
        let c = kk_distance(a, a, &budget).unwrap();
        c.lower == 0.0 && c.upper == 0.0
    });
    let dm = kk_distance(&Subalgebra::diagonal(2).unwrap(), &Subalgebra::full(2).unwrap(), &budget).unwrap();
    let mut worst_ratio: f64 = 0.0;
    let mut conj_ok = true;
    for a in &algebras {
        for eps in [0.01, 0.05] {
            for seed in 0..3 {
                let b = perturb_algebra(a, eps, seed).unwrap();
                let c = kk_distance(a, &b, &budget).unwrap();
                conj_ok &= c.upper <= 2.0 * eps + 1e-6;
                worst_ratio = worst_ratio.max(c.upper / eps);
            }
        }
    }
    g.record(
        "7 kk distance",
        self_zero && dm.lower >= 0.99 && conj_ok,
        format!(
            "self distance exact zero: {self_zero}; diagonal vs M_2 [{:.4}, {:.4}]; conjugation upper ≤ {worst_ratio:.3}·ε",
            dm.lower, dm.upper
        ),
    );

    let t = Instant::now();
    let mut pairs = matrix_pairs(50, SEED, &budget).unwrap();
    pairs.extend(disk_pairs(10, 64).unwrap());
    let r = sr_stability_experiment(&pairs, 2, &EvalOptions::new(16, SEED)).unwrap();
    g.record(
        "7 perturbation experiment",
        r.disagreements == 0 && r.pairs == 60,
        format!("{} pairs, {} disagreements, {:.1?}", r.pairs, r.disagreements, t.elapsed()),
    );
}

fn numerics(g: &mut Gate) {
    let eig = run_suite(Suite::Eigen, 256, SEED);
    let pol = run_suite(Suite::Polar, 1000, SEED);
    g.record(
        "8 numerics",
        eig.all_passed() && pol.all_passed(),
        format!(
            "eigen {}/{} (k ≤ 32) worst residual {:.2e}; polar {}/{} worst relative residual {:.2e}",
            eig.passed, eig.instances, eig.worst, pol.passed, pol.instances, pol.worst
        ),
    );
}

fn run_cli(args: &[&str], out: &Path) -> (i32, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_srbench"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .expect("binary runs");
    (status.code().unwrap_or(-1), std::fs::read(out).unwrap_or_default())
}

fn without_timestamp(bytes: &[u8]) -> Option<Value> {
    let mut v: Value = serde_json::from_slice(bytes).ok()?;
    v.as_object_mut()?.remove("timestamp")?;
    Some(v)
}

fn determinism(g: &mut Gate) {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 8] = [
        &["verify-lemmas", "--instances", "25", "--seed", "5"],
        &["dist", "--algebra", "disk", "--mesh-res", "16", "--seed", "5"],
        &["witness", "--algebra", "disk", "--mesh-res", "16", "--seed", "5"],
        &["phi", "--algebra", "m3", "--seed", "5", "--budget", "8"],
        &["sr", "--algebra", "interval", "--mesh-res", "16", "--n", "2", "--seed", "5"],
        &["kk", "--first", "blocks:1,2", "--epsilon", "0.05", "--seed", "5", "--budget", "4"],
        &["perturb-experiment", "--matrix-pairs", "4", "--disk-pairs", "1", "--mesh-res", "16", "--n", "2", "--budget", "4"],
        &["parse", "--formula", "sup x:ball1(A^2). norm(x)"],
    ];
    let mut bad = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        for format in ["json", "csv"] {
            let mut full = args.to_vec();
            full.extend(["--format", format]);
            let (c1, r1) = run_cli(&full, &dir.path().join(format!("{i}a.{format}")));
            let (c2, r2) = run_cli(&full, &dir.path().join(format!("{i}b.{format}")));
            let same = if format == "json" {
                let (v1, v2) = (without_timestamp(&r1), without_timestamp(&r2));
                v1.is_some() && v1 == v2
            } else {
                !r1.is_empty() && r1 == r2
            };
            if c1 != 0 || c2 != 0 || !same {
                bad.push(format!("{} ({format}, exit {c1}/{c2})", args[0]));
            }
        }
    }
    g.record(
        "9 determinism",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} commands × json/csv byte-identical modulo timestamp", commands.len())
        } else {
            format!("differs: {}", bad.join(", "))
        },
    );
}

#[test]
fn acceptance() {
    let mut g = Gate { failed: Vec::new() };
    let mut intervals = Vec::new();
    shift_suite(&mut g);
    section_suite(&mut g);
    distance_formula_suite(&mut g);
    disk_benchmark(&mut g);
    phi_dichotomy(&mut g, &mut intervals);
    stable_rank(&mut g, &mut intervals);
    band(&mut g, &intervals);
    kk_suite(&mut g);
    numerics(&mut g);
    determinism(&mut g);
    assert!(g.failed.is_empty(), "failed criteria: {:?}", g.failed);
}
