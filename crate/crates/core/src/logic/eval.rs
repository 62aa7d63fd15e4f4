//! Budgeted evaluation of sentences over a represented algebra.
//!
//! Every quantifier block returns three numbers: a certified lower bound, a
//! certified upper bound and a heuristic estimate. A sup over any set of
//! tried points certifies its largest lower bound; an inf certifies its
//! smallest upper bound. The opposite side falls back to the static range
//! of the body unless an obstruction oracle supplies something better.
//!
//! Norms are evaluated on the stored fibers, so on sampled fields the
//! values are vertex values of the underlying continuous functions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::Serialize;

use super::ast::{Body, Formula, Quantifier, Sort, Term};
use super::parse::check_sentence;
use super::phi::{phi_inner, phi_tail_variable};
use crate::algebra::{probes, random_tuple, Algebra, Tuple};
use crate::linalg::Complex64;
use crate::{par, rng, Error, Result};

/// Most multistart points per quantifier block.
pub const MAX_STARTS: usize = 32;
/// Coordinate descent runs only below this many real coordinates.
const DESCENT_MAX_COORDS: usize = 128;
const SORT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalOptions {
    pub budget: usize,
    pub seed: u64,
}

impl EvalOptions {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self { budget, seed }
    }
}

/// Which side of an [`EvalResult`] is certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifiedSide {
    Lower,
    Upper,
}

/// A point for the outermost variable reproducing a certified bound.
#[derive(Debug, Clone)]
pub struct Witness {
    pub var: String,
    pub element: Tuple,
    /// The bound this witness certifies.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct EvalResult {
    pub lower: f64,
    pub upper: f64,
    /// The side of `[lower, upper]` that is certified; the other side is a
    /// heuristic estimate.
    pub certified: CertifiedSide,
    /// Bounds that hold unconditionally (the uncertified side falls back to
    /// the static range or an obstruction oracle).
    pub certified_lower: f64,
    pub certified_upper: f64,
    pub static_range: (f64, f64),
    pub witnesses: Vec<Witness>,
    pub budget_used: usize,
    /// Set when the φ_n structure was recognized and its inner oracle used.
    pub structural_phi: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub lower: f64,
    pub upper: f64,
    pub certified: CertifiedSide,
    pub certified_lower: f64,
    pub certified_upper: f64,
    pub static_range: (f64, f64),
    pub witness_vars: Vec<String>,
    pub witness_values: Vec<f64>,
    pub budget_used: usize,
    pub structural_phi: bool,
}

impl EvalResult {
    pub fn summary(&self) -> EvalSummary {
        EvalSummary {
            lower: self.lower,
            upper: self.upper,
            certified: self.certified,
            certified_lower: self.certified_lower,
            certified_upper: self.certified_upper,
            static_range: self.static_range,
            witness_vars: self.witnesses.iter().map(|w| w.var.clone()).collect(),
            witness_values: self.witnesses.iter().map(|w| w.value).collect(),
            budget_used: self.budget_used,
            structural_phi: self.structural_phi,
        }
    }
}

/// Bounds for one quantifier block at a fixed outer assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub est: f64,
}

impl Bounds {
    fn exact(v: f64) -> Self {
        Self { lo: v, hi: v, est: v }
    }
}

type Env = Vec<(String, Tuple)>;

fn lookup<'a>(env: &'a Env, v: &str) -> Result<&'a Tuple> {
    env.iter()
        .rev()
        .find(|(name, _)| name == v)
        .map(|(_, t)| t)
        .ok_or_else(|| Error::UnboundVariable(v.to_string()))
}

pub(crate) fn eval_term(alg: &Arc<Algebra>, t: &Term, env: &Env) -> Result<Tuple> {
    Ok(match t {
        Term::Var(v) => lookup(env, v)?.clone(),
        Term::One => Tuple::identity(alg.clone(), 1)?,
        Term::Add(l, r) => eval_term(alg, l, env)?.add(&eval_term(alg, r, env)?),
        Term::Sub(l, r) => eval_term(alg, l, env)?.sub(&eval_term(alg, r, env)?),
        Term::Scale(c, x) => eval_term(alg, x, env)?.scale_real(*c),
        Term::Mul(l, r) => eval_term(alg, l, env)?.mul(&eval_term(alg, r, env)?),
        Term::Adj(x) => eval_term(alg, x, env)?.adjoint(),
        Term::Tuple(parts) => Tuple::stack(
            &parts
                .iter()
                .map(|p| eval_term(alg, p, env))
                .collect::<Result<Vec<_>>>()?,
        )?,
    })
}

pub(crate) fn eval_body(alg: &Arc<Algebra>, b: &Body, env: &Env) -> Result<f64> {
    Ok(match b {
        Body::Const(c) => *c,
        Body::Norm(t) => eval_term(alg, t, env)?.norm(),
        Body::Max(l, r) => eval_body(alg, l, env)?.max(eval_body(alg, r, env)?),
        Body::Min(l, r) => eval_body(alg, l, env)?.min(eval_body(alg, r, env)?),
        Body::TSub(l, r) => (eval_body(alg, l, env)? - eval_body(alg, r, env)?).max(0.0),
        Body::Add(l, r) => eval_body(alg, l, env)? + eval_body(alg, r, env)?,
        Body::Sub(l, r) => eval_body(alg, l, env)? - eval_body(alg, r, env)?,
        Body::Scale(c, x) => c * eval_body(alg, x, env)?,
    })
}

fn term_bound(t: &Term) -> f64 {
    match t {
        Term::Var(_) | Term::One => 1.0,
        Term::Add(l, r) | Term::Sub(l, r) => term_bound(l) + term_bound(r),
        Term::Scale(c, x) => c.abs() * term_bound(x),
        Term::Mul(l, r) => term_bound(l) * term_bound(r),
        Term::Adj(x) => term_bound(x),
        Term::Tuple(parts) => parts.iter().map(|p| term_bound(p).powi(2)).sum::<f64>().sqrt(),
    }
}

/// Interval containing every value of the body on the quantifier sorts.
pub fn static_range(b: &Body) -> (f64, f64) {
    match b {
        Body::Const(c) => (*c, *c),
        Body::Norm(t) => (0.0, term_bound(t)),
        Body::Max(l, r) => {
            let (a, b) = (static_range(l), static_range(r));
            (a.0.max(b.0), a.1.max(b.1))
        }
        Body::Min(l, r) => {
            let (a, b) = (static_range(l), static_range(r));
            (a.0.min(b.0), a.1.min(b.1))
        }
        Body::TSub(l, r) => {
            let (a, b) = (static_range(l), static_range(r));
            ((a.0 - b.1).max(0.0), (a.1 - b.0).max(0.0))
        }
        Body::Add(l, r) => {
            let (a, b) = (static_range(l), static_range(r));
            (a.0 + b.0, a.1 + b.1)
        }
        Body::Sub(l, r) => {
            let (a, b) = (static_range(l), static_range(r));
            (a.0 - b.1, a.1 - b.0)
        }
        Body::Scale(c, x) => {
            let (lo, hi) = static_range(x);
            if *c >= 0.0 {
                (c * lo, c * hi)
            } else {
                (c * hi, c * lo)
            }
        }
    }
}

/// Nearest point of the sort: unit-ball projection rescales, positive-ball
/// projection takes the Hermitian part and clips its spectrum to `[0, 1]`.
pub fn project_to_sort(t: &Tuple, sort: Sort) -> Result<Tuple> {
    match sort {
        Sort::Ball { .. } => {
            let n = t.norm();
            Ok(if n > 1.0 { t.scale_real(1.0 / n) } else { t.clone() })
        }
        Sort::PosBall => {
            let h = t.add(&t.adjoint()).scale_real(0.5);
            h.hermitian_calc(|x| Complex64::new(x.clamp(0.0, 1.0), 0.0), 1.0)
        }
    }
}

fn check_sort(t: &Tuple, sort: Sort) -> Result<()> {
    if t.shape() != sort.shape() {
        return Err(Error::Contract(format!(
            "element of shape {:?} assigned to sort {sort}",
            t.shape()
        )));
    }
    if t.norm() > 1.0 + SORT_TOLERANCE {
        return Err(Error::Contract(format!("element of norm {} outside {sort}", t.norm())));
    }
    if sort == Sort::PosBall {
        let defect = t.sub(&t.adjoint()).norm();
        let neg = t.fibers().iter().try_fold(0.0f64, |acc, f| {
            crate::linalg::herm_eig(&f.hermitian_part()).map(|e| acc.max(-e.min()))
        })?;
        if defect > SORT_TOLERANCE || neg > SORT_TOLERANCE {
            return Err(Error::Contract(format!("element is not positive (defect {defect:.2e})")));
        }
    }
    Ok(())
}

fn normalized(t: Tuple) -> Tuple {
    let n = t.norm();
    if n > 0.0 {
        t.scale_real(1.0 / n)
    } else {
        t
    }
}

/// Deterministic start list for a sort; longer lists extend shorter ones.
fn starts(alg: &Arc<Algebra>, sort: Sort, count: usize, seed: u64) -> Result<Vec<Tuple>> {
    let mut out = Vec::new();
    match sort {
        Sort::Ball { n } => {
            out.extend(probes(alg, n));
            out.push(Tuple::zeros(alg.clone(), n, 1));
        }
        Sort::PosBall => {
            out.push(Tuple::zeros(alg.clone(), 1, 1));
            if alg.is_unital() {
                out.push(Tuple::identity(alg.clone(), 1)?);
            }
            for p in probes(alg, 1) {
                out.push(project_to_sort(&p, sort)?);
            }
        }
    }
    out.truncate(count);
    let mut j = 0u64;
    while out.len() < count {
        let mut r = rng::stream(seed, j);
        let (rows, _) = sort.shape();
        let raw = normalized(random_tuple(alg, rows, &mut r, 1.0));
        let t = match sort {
            Sort::Ball { .. } => raw,
            Sort::PosBall => project_to_sort(&raw, sort)?,
        };
        out.push(t);
        j += 1;
    }
    Ok(out)
}

fn better(maximize: bool, a: f64, b: f64) -> bool {
    if maximize {
        a > b
    } else {
        a < b
    }
}

/// Coordinate-wise derivative-free search from `start`; returns every
/// accepted iterate. The path depends only on `objective` and `steps`.
fn descend(
    alg: &Arc<Algebra>,
    start: &Tuple,
    sort: Sort,
    steps: usize,
    maximize: bool,
    objective: &dyn Fn(&Tuple) -> Result<f64>,
) -> Result<Vec<Tuple>> {
    let mut coords = start.to_coords();
    let dim = coords.len();
    if dim == 0 || dim > DESCENT_MAX_COORDS || alg.is_field() {
        return Ok(Vec::new());
    }
    let (rows, cols) = start.shape();
    let mut current = objective(start)?;
    let mut accepted = Vec::new();
    let mut h = 0.25;
    let mut improved_in_sweep = false;
    for s in 0..steps {
        let i = s % dim;
        for sign in [1.0, -1.0] {
            let mut trial = coords.clone();
            trial[i] += sign * h;
            let t = project_to_sort(&Tuple::from_coords(alg.clone(), rows, cols, &trial)?, sort)?;
            let val = objective(&t)?;
            if better(maximize, val, current) {
                current = val;
                coords = t.to_coords();
                accepted.push(t);
                improved_in_sweep = true;
                break;
            }
        }
        if i == dim - 1 {
            if !improved_in_sweep {
                h *= 0.5;
            }
            improved_in_sweep = false;
        }
    }
    Ok(accepted)
}

struct Evaluator<'a> {
    alg: &'a Arc<Algebra>,
    formula: &'a Formula,
    range: (f64, f64),
    phi_level: Option<usize>,
    seed: u64,
    used: AtomicUsize,
}

impl Evaluator<'_> {
    fn level(&self, i: usize, env: &Env, budget: usize) -> Result<Bounds> {
        if i == self.formula.bindings.len() {
            self.used.fetch_add(1, Ordering::Relaxed);
            return Ok(Bounds::exact(eval_body(self.alg, &self.formula.body, env)?));
        }
        if Some(i) == self.phi_level {
            self.used.fetch_add(1, Ordering::Relaxed);
            let name = phi_tail_variable(self.formula).expect("recognized φ_n tail");
            let x = lookup(env, &name)?;
            return Ok(phi_inner(x)?.bounds);
        }
        Ok(self.block(i, env, budget)?.0)
    }

    /// Evaluates quantifier block `i`; also returns the point certifying the
    /// block's certified side and that point's certified value.
    fn block(&self, i: usize, env: &Env, budget: usize) -> Result<(Bounds, Option<(Tuple, f64)>)> {
        let binding = &self.formula.bindings[i];
        let maximize = binding.quantifier == Quantifier::Sup;
        let count = budget.clamp(1, MAX_STARTS);
        let inner_budget = (budget / count).max(1);
        let stream = self.seed ^ ((i as u64 + 1) << 40) ^ env.len() as u64;
        let mut candidates = starts(self.alg, binding.sort, count, stream)?;

        let evaluate = |t: &Tuple, b: usize| -> Result<Bounds> {
            check_sort(t, binding.sort)?;
            let mut e = env.clone();
            e.push((binding.var.clone(), t.clone()));
            self.level(i + 1, &e, b)
        };
        let steps = 2 * inner_budget;
        let paths = par::map_slice(&candidates, |c| {
            descend(self.alg, c, binding.sort, steps, maximize, &|t| {
                evaluate(t, 1).map(|b| b.est)
            })
        });
        for p in paths {
            candidates.extend(p?);
        }

        let results = par::map_slice(&candidates, |c| evaluate(c, inner_budget));
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let mut best_cert: Option<usize> = None;
        let mut est = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
        for (j, r) in results.iter().enumerate() {
            let key = if maximize { r.lo } else { r.hi };
            if best_cert.is_none_or(|b| {
                let prev = if maximize { results[b].lo } else { results[b].hi };
                better(maximize, key, prev)
            }) {
                best_cert = Some(j);
            }
            if better(maximize, r.est, est) {
                est = r.est;
            }
        }
        let b = best_cert.expect("at least one start");
        let bounds = if maximize {
            let lo = results[b].lo;
            Bounds {
                lo,
                hi: self.range.1,
                est: est.max(lo),
            }
        } else {
            let hi = results[b].hi;
            Bounds {
                lo: self.range.0,
                hi,
                est: est.min(hi),
            }
        };
        let value = if maximize { bounds.lo } else { bounds.hi };
        Ok((bounds, Some((candidates[b].clone(), value))))
    }
}

/// Evaluates a sentence. The outermost quantifier determines which side is
/// certified: a sup is certified from below, an inf from above.
pub fn eval_formula(alg: &Arc<Algebra>, f: &Formula, opts: &EvalOptions) -> Result<EvalResult> {
    if opts.budget == 0 {
        return Err(Error::Budget);
    }
    check_sentence(f)?;
    let range = static_range(&f.body);
    let phi_level = super::phi::phi_tail_level(f);
    let ev = Evaluator {
        alg,
        formula: f,
        range,
        phi_level,
        seed: opts.seed,
        used: AtomicUsize::new(0),
    };
    let (bounds, witness) = ev.block(0, &Vec::new(), opts.budget)?;
    let certified = match f.bindings[0].quantifier {
        Quantifier::Sup => CertifiedSide::Lower,
        Quantifier::Inf => CertifiedSide::Upper,
    };
    let (lower, upper) = match certified {
        CertifiedSide::Lower => (bounds.lo, bounds.est.max(bounds.lo)),
        CertifiedSide::Upper => (bounds.est.min(bounds.hi), bounds.hi),
    };
    let witnesses = witness
        .map(|(element, value)| Witness {
            var: f.bindings[0].var.clone(),
            element,
            value,
        })
        .into_iter()
        .collect();
    Ok(EvalResult {
        lower,
        upper,
        certified,
        certified_lower: bounds.lo,
        certified_upper: bounds.hi,
        static_range: range,
        witnesses,
        budget_used: ev.used.load(Ordering::Relaxed),
        structural_phi: phi_level.is_some(),
    })
}

/// Re-evaluates the formula with its outermost variable fixed to `element`;
/// the certified side reproduces the bound the element was reported with.
pub fn evaluate_at(alg: &Arc<Algebra>, f: &Formula, element: &Tuple, opts: &EvalOptions) -> Result<Bounds> {
    if opts.budget == 0 {
        return Err(Error::Budget);
    }
    check_sentence(f)?;
    let ev = Evaluator {
        alg,
        formula: f,
        range: static_range(&f.body),
        phi_level: super::phi::phi_tail_level(f),
        seed: opts.seed,
        used: AtomicUsize::new(0),
    };
    let count = opts.budget.clamp(1, MAX_STARTS);
    let env = vec![(f.bindings[0].var.clone(), element.clone())];
    ev.level(1, &env, (opts.budget / count).max(1))
}

/// Shapes of the bound variables, for callers building assignments.
pub fn sort_table(f: &Formula) -> HashMap<String, Sort> {
    f.bindings.iter().map(|b| (b.var.clone(), b.sort)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{build_phi_n, parse_formula};

    #[test]
    fn norm_sup_on_matrices() {
        let alg = Algebra::full_matrix(2).unwrap().into_arc();
        let f = parse_formula("sup x:ball1(A^1). norm(x)").unwrap();
        let r = eval_formula(&alg, &f, &EvalOptions::new(8, 1)).unwrap();
        assert!(r.lower >= 1.0 - 1e-6);
        assert!(r.upper <= 1.0 + 1e-12);
        assert_eq!(r.certified, CertifiedSide::Lower);
        let w = &r.witnesses[0];
        let again = evaluate_at(&alg, &f, &w.element, &EvalOptions::new(8, 1)).unwrap();
        assert!((again.lo - w.value).abs() <= 1e-6);
    }

    #[test]
    fn inf_side_is_certified_from_above() {
        let alg = Algebra::full_matrix(2).unwrap().into_arc();
        let f = parse_formula("inf y:posball1(A). norm(sub(y, one))").unwrap();
        let r = eval_formula(&alg, &f, &EvalOptions::new(16, 3)).unwrap();
        assert_eq!(r.certified, CertifiedSide::Upper);
        assert!(r.upper <= 1e-12);
        assert!(r.lower <= r.upper);
    }

    #[test]
    fn zero_budget_is_an_error() {
        let alg = Algebra::full_matrix(1).unwrap().into_arc();
        assert_eq!(
            eval_formula(&alg, &build_phi_n(1), &EvalOptions::new(0, 0)).unwrap_err(),
            Error::Budget
        );
    }

    #[test]
    fn static_range_of_phi() {
        assert_eq!(static_range(&build_phi_n(2).body), (0.0, 2.0));
    }

    #[test]
    fn projection_lands_in_sort() {
        let alg = Algebra::full_matrix(3).unwrap().into_arc();
        let mut r = rng::stream(2, 0);
        let t = random_tuple(&alg, 1, &mut r, 3.0);
        check_sort(&project_to_sort(&t, Sort::PosBall).unwrap(), Sort::PosBall).unwrap();
        check_sort(&project_to_sort(&t, Sort::Ball { n: 1 }).unwrap(), Sort::Ball { n: 1 }).unwrap();
        assert!(check_sort(&t, Sort::Ball { n: 1 }).is_err());
    }

    #[test]
    fn certified_lower_is_monotone_in_budget() {
        let alg = Algebra::full_matrix(2).unwrap().into_arc();
        let f = parse_formula("sup x:ball1(A^1). norm(sub(adj(x)*x, x*adj(x)))").unwrap();
        let mut prev = f64::NEG_INFINITY;
        for budget in [1, 2, 4, 8, 16, 64] {
            let r = eval_formula(&alg, &f, &EvalOptions::new(budget, 5)).unwrap();
            assert!(r.certified_lower >= prev, "budget {budget}");
            prev = r.certified_lower;
        }
    }
}
