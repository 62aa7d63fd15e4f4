//! Kadison–Kastler distance between subalgebras of `M_d`.
//!
//! For `x` in the unit ball of `P`, the inner problem `min ‖x − y‖` over the
//! unit ball of `Q` is convex. Its value is bounded above by the best `y`
//! found, and below by the dual certificate
//! `Re tr(Z*x) − ‖E_Q(Z)‖_1` for any `Z` of trace norm one, where `E_Q` is
//! the trace-orthogonal projection onto `Q`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::subalgebra::Subalgebra;
use crate::linalg::{herm_eig, Complex64, ComplexMatrix, MatrixDoc};
use crate::{par, rng, Error, Result};

/// Schatten exponents of the smoothed inner objective.
const SMOOTHING: [f64; 3] = [8.0, 32.0, 128.0];
const SAME_SPAN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KkBudget {
    /// Outer starting points per direction.
    pub starts: usize,
    /// Hill-climbing steps from each start.
    pub climb_steps: usize,
    /// Descent steps per smoothing level of the inner problem.
    pub inner_iterations: usize,
    pub seed: u64,
}

impl Default for KkBudget {
    fn default() -> Self {
        Self {
            starts: 16,
            climb_steps: 8,
            inner_iterations: 40,
            seed: 0,
        }
    }
}

/// Bounds on the Kadison–Kastler distance, with `0 ≤ lower ≤ upper ≤ 2`.
/// The lower bound is certified; the upper bound is the largest certified
/// inner value over the points tried and so estimates the outer sup.
#[derive(Debug, Clone, PartialEq)]
pub struct KkCertificate {
    pub lower: f64,
    pub upper: f64,
    /// `(x, y)` attaining the lower bound: `x` in one unit ball, `y` the
    /// best point found in the other.
    pub attaining: Option<(ComplexMatrix, ComplexMatrix)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KkSummary {
    pub lower: f64,
    pub upper: f64,
    pub attaining_x: Option<MatrixDoc>,
    pub attaining_y: Option<MatrixDoc>,
}

impl KkCertificate {
    pub fn summary(&self) -> KkSummary {
        KkSummary {
            lower: self.lower,
            upper: self.upper,
            attaining_x: self.attaining.as_ref().map(|p| p.0.to_doc()),
            attaining_y: self.attaining.as_ref().map(|p| p.1.to_doc()),
        }
    }
}

/// Certified bracket for `min_{y ∈ Q_1} ‖x − y‖`.
#[derive(Debug, Clone)]
pub struct InnerBounds {
    pub lower: f64,
    pub upper: f64,
    pub y: ComplexMatrix,
}

fn into_ball(y: ComplexMatrix) -> ComplexMatrix {
    let n = y.op_norm();
    if n > 1.0 {
        y.scale_real(1.0 / n)
    } else {
        y
    }
}

fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(herm_eig(&m.gram())?.values.iter().map(|v| v.max(0.0).sqrt()).sum())
}

/// Schatten-`p` norm of `m` and its gradient in the trace inner product.
fn schatten(m: &ComplexMatrix, p: f64) -> Result<(f64, ComplexMatrix)> {
    let e = herm_eig(&m.gram())?;
    let s: Vec<f64> = e.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok((0.0, ComplexMatrix::zeros(m.rows(), m.cols())));
    }
    let r: Vec<f64> = s.iter().map(|v| v / smax).collect();
    let sum: f64 = r.iter().map(|v| v.powf(p)).sum();
    let value = smax * sum.powf(1.0 / p);
    let weights: Vec<Complex64> = r.iter().map(|v| Complex64::new(v.powf(p - 2.0), 0.0)).collect();
    let grad = (m * &e.reconstruct_weights(&weights)).scale_real(1.0 / (smax * sum.powf((p - 1.0) / p)));
    Ok((value, grad))
}

/// `Re tr(Z*x) − ‖E_Q(Z)‖_1` for `Z` rescaled to trace norm one.
fn dual_bound(x: &ComplexMatrix, q: &Subalgebra, z: &ComplexMatrix) -> Result<f64> {
    let tn = trace_norm(z)?;
    if tn == 0.0 {
        return Ok(0.0);
    }
    let z = z.scale_real(1.0 / tn);
    Ok(z.inner(x).re - trace_norm(&q.project(&z))?)
}

/// Top singular pair `(u, w)` of `m`, returned as `u·w*`.
fn top_singular_direction(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = herm_eig(&m.gram())?;
    let k = e.values.len() - 1;
    let sigma = e.values[k].max(0.0).sqrt();
    if sigma == 0.0 {
        return Ok(ComplexMatrix::zeros(m.rows(), m.cols()));
    }
    let w = ComplexMatrix::from_fn(m.cols(), 1, |i, _| e.vectors.get(i, k));
    let u = (m * &w).scale_real(1.0 / sigma);
    Ok(&u * &w.adjoint())
}

/// Minimizes `‖x − y‖` over `y ∈ Q_1` by projected descent on Schatten
/// smoothings, starting from the projection of `x`.
pub fn inner_distance(x: &ComplexMatrix, q: &Subalgebra, iterations: usize) -> Result<InnerBounds> {
    let mut y = into_ball(q.project(x));
    let mut best_val = (x - &y).op_norm();
    let mut best_y = y.clone();
    let mut last_grad = None;
    for p in SMOOTHING {
        let (mut f, mut g) = schatten(&(x - &y), p)?;
        let mut step = 0.5 * best_val.max(1e-12);
        for _ in 0..iterations {
            let dir = q.project(&g);
            let dn = dir.frobenius_norm();
            if dn < 1e-15 || f == 0.0 {
                break;
            }
            let dir = dir.scale_real(1.0 / dn);
            let mut accepted = false;
            for _ in 0..30 {
                let cand = into_ball(&y + &dir.scale_real(step));
                let (fc, gc) = schatten(&(x - &cand), p)?;
                if fc < f {
                    y = cand;
                    f = fc;
                    g = gc;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            let v = (x - &y).op_norm();
            if v < best_val {
                best_val = v;
                best_y = y.clone();
            }
        }
        last_grad = Some(g);
    }
    let mut lower = dual_bound(x, q, &top_singular_direction(&(x - &best_y))?)?;
    if let Some(g) = last_grad {
        lower = lower.max(dual_bound(x, q, &g)?);
    }
    Ok(InnerBounds {
        lower: lower.clamp(0.0, best_val),
        upper: best_val,
        y: best_y,
    })
}

fn normalized(m: ComplexMatrix) -> ComplexMatrix {
    let n = m.op_norm();
    if n > 0.0 {
        m.scale_real(1.0 / n)
    } else {
        m
    }
}

/// Deterministic outer starts: basis elements, unitaries, random elements.
fn outer_starts(p: &Subalgebra, count: usize, stream: u64) -> Result<Vec<ComplexMatrix>> {
    let mut out: Vec<ComplexMatrix> = p.basis().iter().cloned().map(normalized).collect();
    out.truncate(count);
    let mut j = 0u64;
    while out.len() < count {
        let mut r = rng::stream(stream, j);
        let x = if p.contains_unit() && j.is_multiple_of(2) {
            let h = p.random_hermitian(&mut r);
            let e = herm_eig(&h)?;
            let phases: Vec<Complex64> = e.values.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
            p.project(&e.reconstruct_weights(&phases))
        } else {
            let c: Vec<Complex64> = (0..p.dim()).map(|_| rng::complex_normal(&mut r)).collect();
            normalized(p.from_coords(&c))
        };
        out.push(into_ball(x));
        j += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct Directed {
    lower: f64,
    upper: f64,
    attaining: (ComplexMatrix, ComplexMatrix),
}

/// Bounds on `sup_{x ∈ P_1} min_{y ∈ Q_1} ‖x − y‖`.
fn directed(p: &Subalgebra, q: &Subalgebra, budget: &KkBudget, stream: u64) -> Result<Directed> {
    let starts = outer_starts(p, budget.starts.max(1), stream)?;
    let climbs = par::map_indexed(starts.len(), |s| -> Result<Vec<(ComplexMatrix, InnerBounds)>> {
        let mut x = starts[s].clone();
        let mut cur = inner_distance(&x, q, budget.inner_iterations)?;
        let mut seen = vec![(x.clone(), cur.clone())];
        let mut h = 0.2;
        for step in 0..budget.climb_steps {
            let mut r = rng::stream(stream ^ 0x5eed, (s as u64) << 32 | step as u64);
            let c: Vec<Complex64> = (0..p.dim()).map(|_| rng::complex_normal(&mut r)).collect();
            let dir = normalized(p.from_coords(&c));
            let cand = normalized(&x + &dir.scale_real(h));
            let val = inner_distance(&cand, q, budget.inner_iterations)?;
            if val.upper > cur.upper {
                x = cand.clone();
                cur = val.clone();
            } else {
                h *= 0.7;
            }
            seen.push((cand, val));
        }
        Ok(seen)
    });
    let mut best_lower: Option<(f64, (ComplexMatrix, ComplexMatrix))> = None;
    let mut upper: f64 = 0.0;
    for c in climbs {
        for (x, b) in c? {
            upper = upper.max(b.upper);
            if best_lower.as_ref().is_none_or(|(l, _)| b.lower > *l) {
                best_lower = Some((b.lower, (x, b.y)));
            }
        }
    }
    let (lower, attaining) = best_lower.expect("at least one start");
    Ok(Directed {
        lower,
        upper,
        attaining,
    })
}

fn cmp_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> Ordering {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn canonical_order(a: &Subalgebra, b: &Subalgebra) -> Ordering {
    a.dim()
        .cmp(&b.dim())
        .then(a.contains_unit().cmp(&b.contains_unit()))
        .then_with(|| {
            a.basis()
                .iter()
                .zip(b.basis())
                .map(|(x, y)| cmp_matrices(x, y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Bounds on `d_KK(A, B)`, the Hausdorff distance between unit balls.
/// Both directed distances are computed with the pair in canonical order,
/// so the result does not depend on argument order.
pub fn kk_distance(a: &Subalgebra, b: &Subalgebra, budget: &KkBudget) -> Result<KkCertificate> {
    if a.d() != b.d() {
        return Err(Error::Contract(format!(
            "ambient dimensions differ: {} vs {}",
            a.d(),
            b.d()
        )));
    }
    if a.same_span(b, SAME_SPAN) {
        return Ok(KkCertificate {
            lower: 0.0,
            upper: 0.0,
            attaining: None,
        });
    }
    let (p, q) = if canonical_order(a, b).is_le() { (a, b) } else { (b, a) };
    let forward = directed(p, q, budget, budget.seed.wrapping_mul(2))?;
    let backward = directed(q, p, budget, budget.seed.wrapping_mul(2) + 1)?;
    let best = if backward.lower > forward.lower { &backward } else { &forward };
    let lower = best.lower.clamp(0.0, 2.0);
    Ok(KkCertificate {
        lower,
        upper: forward.upper.max(backward.upper).clamp(lower, 2.0),
        attaining: Some(best.attaining.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kk::perturb_algebra;

    #[test]
    fn identical_algebras_are_at_distance_zero() {
        let a = Subalgebra::block_diagonal(&[1, 2]).unwrap();
        let c = kk_distance(&a, &a.clone(), &KkBudget::default()).unwrap();
        assert_eq!((c.lower, c.upper), (0.0, 0.0));
    }

    #[test]
    fn diagonal_versus_full() {
        let a = Subalgebra::diagonal(2).unwrap();
        let b = Subalgebra::full(2).unwrap();
        let c = kk_distance(&a, &b, &KkBudget::default()).unwrap();
        assert!(c.lower >= 0.99, "{c:?}");
        assert!(c.upper <= 2.0);
    }

    #[test]
    fn inner_problem_on_off_diagonal_unit() {
        let q = Subalgebra::diagonal(2).unwrap();
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = inner_distance(&x, &q, 40).unwrap();
        assert!((r.lower - 1.0).abs() < 1e-12 && (r.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugation_bound_and_symmetry() {
        let a = Subalgebra::block_diagonal(&[1, 2]).unwrap();
        for (eps, seed) in [(0.01, 1), (0.05, 2), (0.2, 3)] {
            let b = perturb_algebra(&a, eps, seed).unwrap();
            let ab = kk_distance(&a, &b, &KkBudget::default()).unwrap();
            let ba = kk_distance(&b, &a, &KkBudget::default()).unwrap();
            assert!(ab.upper <= 2.0 * eps * (1.0 + 1e-3), "{eps}: {ab:?}");
            assert!(ab.lower <= ab.upper);
            assert_eq!((ab.lower, ab.upper), (ba.lower, ba.upper));
        }
    }

    #[test]
    fn lower_is_monotone_in_budget() {
        let a = Subalgebra::diagonal(3).unwrap();
        let b = perturb_algebra(&a, 0.1, 4).unwrap();
        let mut prev = 0.0;
        for (starts, climb_steps) in [(1, 0), (2, 2), (4, 4), (8, 8)] {
            let budget = KkBudget {
                starts,
                climb_steps,
                ..KkBudget::default()
            };
            let c = kk_distance(&a, &b, &budget).unwrap();
            assert!(c.lower >= prev);
            prev = c.lower;
        }
    }

    #[test]
    fn dimension_mismatch() {
        let a = Subalgebra::diagonal(2).unwrap();
        let b = Subalgebra::diagonal(3).unwrap();
        assert!(matches!(kk_distance(&a, &b, &KkBudget::default()), Err(Error::Contract(_))));
    }
}
