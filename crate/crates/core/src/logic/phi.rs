//! Inner oracle for `inf v. inf y. max(‖x − v·y‖, ‖v*v − 1‖)`.
//!
//! Upper bounds come from explicit pairs `(v, y)`. The lower bound is
//! `min(1, dist(x, Lg_n))`: when `‖v*v − 1‖ < 1` the tuple `v` is left
//! invertible, so `v·(y + ε)` lies in `Lg_n` for every `ε > 0` and
//! `‖x − v·y‖ ≥ dist(x, Lg_n)`.

use super::ast::{Body, Formula, Quantifier, Sort, Term};
use super::eval::Bounds;
use crate::algebra::Tuple;
use crate::linalg::Profile;
use crate::stablerank::{perturbation_witness_at_margin, winding_lower_bound, DistBudget};
use crate::Result;

/// Regularization levels tried by the warm start.
const EPS_LADDER: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Warm-start values above this trigger the perturbation fallback.
const RETRY_ABOVE: f64 = 1e-2;
/// Smallest singular value, relative to `‖x‖`, of fallback members; keeps
/// `b(b*b)^{-1/2}` accurate.
const FALLBACK_CONDITION: f64 = 1e-3;

fn inner_budget() -> DistBudget {
    DistBudget {
        levels: 4,
        extra_directions: 2,
        refine_steps: 16,
        seed: 0,
    }
}

/// Level at which the φ_n tail `inf v. inf y. max(…)` starts, with `x`
/// bound by an earlier quantifier over the same ball.
pub fn phi_tail_level(f: &Formula) -> Option<usize> {
    let m = f.bindings.len();
    if m < 3 {
        return None;
    }
    let (bv, by) = (&f.bindings[m - 2], &f.bindings[m - 1]);
    let n = match bv.sort {
        Sort::Ball { n } => n,
        Sort::PosBall => return None,
    };
    if bv.quantifier != Quantifier::Inf || by.quantifier != Quantifier::Inf || by.sort != Sort::PosBall {
        return None;
    }
    let x = tail_variable(&f.body, &bv.var, &by.var)?;
    let bound_x = f.bindings[..m - 2]
        .iter()
        .any(|b| b.var == x && b.sort == Sort::Ball { n });
    bound_x.then_some(m - 2)
}

fn tail_variable(body: &Body, v: &str, y: &str) -> Option<String> {
    let Body::Max(l, r) = body else { return None };
    let Body::Norm(Term::Sub(x, vy)) = &**l else { return None };
    let Term::Var(x) = &**x else { return None };
    let want_vy = Term::mul(Term::var(v), Term::var(y));
    let want_iso = Body::Norm(Term::sub(Term::mul(Term::adj(Term::var(v)), Term::var(v)), Term::One));
    (**vy == want_vy && **r == want_iso).then(|| x.clone())
}

/// Name of the outer variable fed into the φ_n tail.
pub fn phi_tail_variable(f: &Formula) -> Option<String> {
    let m = f.bindings.len();
    if m < 2 {
        return None;
    }
    tail_variable(&f.body, &f.bindings[m - 2].var, &f.bindings[m - 1].var)
}

/// `max(‖x − v·y‖, ‖v*v − 1‖)`.
pub fn phi_value(x: &Tuple, v: &Tuple, y: &Tuple) -> Result<f64> {
    let one = Tuple::identity(x.algebra().clone(), 1)?;
    Ok(x.sub(&v.mul(y)).norm().max(v.adjoint().mul(v).sub(&one).norm()))
}

fn into_ball(t: Tuple) -> Tuple {
    let n = t.norm();
    if n > 1.0 {
        t.scale_real(1.0 / n)
    } else {
        t
    }
}

/// Warm start `y = |x|` (clipped to the unit ball) and
/// `v = x·min{ε⁻¹, t⁻¹}(|x|)`, so that `v·y = x·min{t/ε, 1}(|x|)`.
pub fn inner_inf_candidate(x: &Tuple, eps: f64) -> Result<(Tuple, Tuple)> {
    let y = x.modulus()?.func_calc(Profile::Clip01)?;
    let v = into_ball(x.right_mult_calc(Profile::Regularized { eps })?);
    Ok((v, y))
}

/// The pair `(b·(b*b)^{-1/2}, |b|)` for a nearby certified member `b`.
fn perturbed_candidate(x: &Tuple) -> Option<(Tuple, Tuple)> {
    if !x.algebra().is_unital() {
        return None;
    }
    let margin = (FALLBACK_CONDITION * x.norm().max(f64::MIN_POSITIVE)).powi(2);
    let (_, b, _) = perturbation_witness_at_margin(x, &inner_budget(), margin).ok()?;
    let scale = b.norm().max(1.0);
    let b = b.scale_real(1.0 / scale);
    let v = into_ball(b.mul(&b.gram().func_calc(Profile::InvSqrt).ok()?));
    let y = b.modulus().ok()?.func_calc(Profile::Clip01).ok()?;
    Some((v, y))
}

#[derive(Debug, Clone)]
pub struct PhiInner {
    pub bounds: Bounds,
    pub v: Tuple,
    pub y: Tuple,
}

/// Bounds on the φ_n inner infimum at `x`.
pub fn phi_inner(x: &Tuple) -> Result<PhiInner> {
    let mut best: Option<(f64, Tuple, Tuple)> = None;
    let consider = |best: &mut Option<(f64, Tuple, Tuple)>, v: Tuple, y: Tuple| -> Result<()> {
        let val = phi_value(x, &v, &y)?;
        if best.as_ref().is_none_or(|b| val < b.0) {
            *best = Some((val, v, y));
        }
        Ok(())
    };
    for eps in EPS_LADDER {
        let (v, y) = inner_inf_candidate(x, eps)?;
        consider(&mut best, v, y)?;
    }
    if best.as_ref().is_some_and(|b| b.0 > RETRY_ABOVE) {
        if let Some((v, y)) = perturbed_candidate(x) {
            consider(&mut best, v, y)?;
        }
    }
    let (hi, v, y) = best.expect("warm start always yields a candidate");
    let lo = winding_lower_bound(x).map_or(0.0, |d| d.min(1.0));
    Ok(PhiInner {
        bounds: Bounds {
            lo,
            hi,
            est: hi.max(lo),
        },
        v,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_tuple, Algebra};
    use crate::linalg::ComplexMatrix;
    use crate::logic::{build_phi_n, parse_formula};
    use crate::rng;

    #[test]
    fn recognizes_phi() {
        assert_eq!(phi_tail_level(&build_phi_n(1)), Some(1));
        assert_eq!(phi_tail_level(&build_phi_n(3)), Some(1));
        let f = parse_formula("sup x:ball1(A^1). norm(x)").unwrap();
        assert_eq!(phi_tail_level(&f), None);
        let g = parse_formula(
            "sup x:ball1(A^2). inf v:ball1(A^1). inf y:posball1(A). max(norm(sub(v, v*y)), norm(sub(adj(v)*v, one)))",
        )
        .unwrap();
        assert_eq!(phi_tail_level(&g), None);
    }

    #[test]
    fn isometry_decomposes_exactly() {
        let alg = Algebra::full_matrix(2).unwrap().into_arc();
        let s = 1.0 / 2f64.sqrt();
        let x = Tuple::from_fibers(
            alg,
            2,
            1,
            vec![ComplexMatrix::from_real_rows(&[&[s, 0.0], &[0.0, s], &[0.0, s], &[s, 0.0]])],
            0.0,
        )
        .unwrap();
        let (v, y) = inner_inf_candidate(&x, 1e-3).unwrap();
        assert!(v.sub(&x).norm() < 1e-12);
        assert!(phi_value(&x, &v, &y).unwrap() < 1e-12);
    }

    #[test]
    fn zero_tuple() {
        let alg = Algebra::full_matrix(3).unwrap().into_arc();
        let x = Tuple::zeros(alg, 1, 1);
        let (v, y) = inner_inf_candidate(&x, 1e-2).unwrap();
        assert_eq!(y.norm(), 0.0);
        assert!(phi_value(&x, &v, &y).unwrap() <= 1.0);
        assert!(phi_inner(&x).unwrap().bounds.hi < 1e-6);
    }

    #[test]
    fn full_rank_warm_start() {
        let alg = Algebra::full_matrix(4).unwrap().into_arc();
        for seed in 0..20 {
            let mut r = rng::stream(seed, 3);
            let x = random_tuple(&alg, 1, &mut r, 1.0);
            let x = x.scale_real(1.0 / x.norm());
            let smin = x.min_gram_eigenvalue().sqrt();
            let eps = smin / 2.0;
            let (v, y) = inner_inf_candidate(&x, eps).unwrap();
            assert!(phi_value(&x, &v, &y).unwrap() <= 2.0 * eps, "seed {seed}");
        }
    }

    #[test]
    fn disk_coordinate_is_obstructed() {
        let alg = Algebra::disk(32, 1).unwrap().into_arc();
        let z = crate::algebra::probes(&alg, 1).remove(0);
        let inner = phi_inner(&z).unwrap();
        assert!(inner.bounds.lo >= 0.9);
        assert!(inner.bounds.est >= inner.bounds.lo);
    }
}
