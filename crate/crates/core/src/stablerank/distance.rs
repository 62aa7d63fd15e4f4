//! Two-sided bounds on `dist(a, Lg_n(A))`.

use serde::{Deserialize, Serialize};

use crate::algebra::{is_lg, unitary_directions, winding_number, Tuple};
use crate::linalg::{Complex64, Profile};
use crate::{par, Error, Result};

/// How the lower bound of a [`DistanceCertificate`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerMethod {
    /// Nonzero winding of the boundary loop of a disk field.
    Winding,
    /// `a` is the zero tuple, so the distance is exactly zero.
    NormBound,
    /// No obstruction available.
    TrivialZero,
}

/// Certified interval `[lower, upper]` containing `dist(a, Lg_n(A))`.
#[derive(Debug, Clone)]
pub struct DistanceCertificate {
    pub lower: f64,
    pub upper: f64,
    /// A certified member of `Lg_n(A)` at distance `upper` from `a`.
    pub upper_witness: Tuple,
    pub lower_method: LowerMethod,
    /// Number of membership checks performed by the search.
    pub checks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: LowerMethod,
    pub witness_norm: f64,
    pub witness_sigma_min: f64,
    pub checks: usize,
}

impl DistanceCertificate {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            lower: self.lower,
            upper: self.upper,
            lower_method: self.lower_method,
            witness_norm: self.upper_witness.norm(),
            witness_sigma_min: self.upper_witness.min_gram_eigenvalue(),
            checks: self.checks,
        }
    }
}

/// Search budget for [`dist_to_lg`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistBudget {
    /// Number of spectral cut levels `λ` used as search bases.
    pub levels: usize,
    /// Random unitary directions on top of the constant phases.
    pub extra_directions: usize,
    /// Bisection steps after the first certified step of a ladder.
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for DistBudget {
    fn default() -> Self {
        Self {
            levels: 32,
            extra_directions: 4,
            refine_steps: 24,
            seed: 0,
        }
    }
}

/// Relative size of the first perturbation step.
const LADDER_START: f64 = 1e-10;
/// Smallest cut level relative to `‖a‖`.
const LEVEL_FLOOR: f64 = 1e-4;

/// `a·(1 − λ/|a|)₊`, the candidate `(|a*| − λ)₊ v` of the cut at `λ`,
/// together with its distance `‖a − candidate‖ ≤ λ`.
pub fn dist_upper_candidate(a: &Tuple, lambda: f64) -> Result<(Tuple, f64)> {
    if !(lambda >= 0.0) {
        return Err(Error::Contract(format!("cut level must be ≥ 0, got {lambda}")));
    }
    let c = a.right_mult_calc(Profile::PosPart { lambda })?;
    let d = a.sub(&c).norm();
    Ok((c, d))
}

/// `((|a*| − λ)₊ + ε)·s`: lies in `Lg_n(A)` for any `s ∈ Lg_n(A)`, and sits
/// within `λ + ε‖s‖ + residual` of `a` when `s` is a section at level `λ`.
pub fn section_candidate(a: &Tuple, s: &Tuple, lambda: f64, eps: f64) -> Result<Tuple> {
    let cut = a.star_modulus()?.func_calc(Profile::PosPart { lambda })?;
    let shift = Tuple::identity(a.algebra().clone(), a.n())?.scale_real(eps);
    Ok(cut.add(&shift).mul(s))
}

fn certifies(w: &Tuple, margin: f64) -> bool {
    is_lg(w, margin).member
}

struct LadderHit {
    dist: f64,
    witness: Tuple,
    checks: usize,
}

/// Walks `base + β·dir` up a doubling ladder and bisects the first
/// certified step.
fn ladder(a: &Tuple, base: &Tuple, dir: &Tuple, start: f64, cap: f64, refine: usize, margin: f64) -> LadderHit {
    let base_dist = a.sub(base).norm();
    let mut checks = 0;
    let mut lo = 0.0;
    let mut beta = start;
    loop {
        let w = base.add(&dir.scale_real(beta));
        checks += 1;
        if certifies(&w, margin) {
            let mut best = w;
            let mut hi = beta;
            for _ in 0..refine {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let cand = base.add(&dir.scale_real(mid));
                checks += 1;
                if certifies(&cand, margin) {
                    hi = mid;
                    best = cand;
                } else {
                    lo = mid;
                }
            }
            return LadderHit {
                dist: a.sub(&best).norm(),
                witness: best,
                checks,
            };
        }
        // ‖a − base − β·dir‖ ≥ β − ‖a − base‖ for isometric dir.
        if beta - base_dist >= cap || !beta.is_finite() {
            return LadderHit {
                dist: f64::INFINITY,
                witness: w,
                checks,
            };
        }
        lo = beta;
        beta *= 2.0;
    }
}

/// Upper bound by perturbation search: bases are `a`, the cut candidates
/// `a·(1 − λ/|a|)₊` on a log grid of `λ ∈ (0, ‖a‖]`, and `0`; directions
/// are isometric unit tuples. Only certified members are accepted.
pub fn perturbation_witness(a: &Tuple, budget: &DistBudget) -> Result<(f64, Tuple, usize)> {
    let scale = if a.norm() > 0.0 { a.norm() } else { 1.0 };
    perturbation_witness_at_margin(a, budget, (0.5 * LADDER_START * scale).powi(2))
}

/// As [`perturbation_witness`], accepting only members whose `σ²_min`
/// clears `margin`.
pub fn perturbation_witness_at_margin(a: &Tuple, budget: &DistBudget, margin: f64) -> Result<(f64, Tuple, usize)> {
    let norm = a.norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    if norm > 0.0 && certifies(a, margin) {
        return Ok((0.0, a.clone(), 1));
    }
    let mut bases = vec![a.clone()];
    let levels = budget.levels;
    for i in 0..levels {
        let frac = if levels == 1 {
            1.0
        } else {
            LEVEL_FLOOR.powf((levels - 1 - i) as f64 / (levels - 1) as f64)
        };
        bases.push(dist_upper_candidate(a, frac * norm)?.0);
    }
    bases.push(Tuple::zeros(a.algebra().clone(), a.n(), 1));
    let dirs = unitary_directions(a.algebra(), a.n(), budget.extra_directions, budget.seed)?;
    let pairs: Vec<(usize, usize)> = (0..bases.len())
        .flat_map(|b| (0..dirs.len()).map(move |d| (b, d)))
        .collect();
    let cap = norm + 2.0 * LADDER_START * scale;
    let hits = par::map_slice(&pairs, |&(b, d)| {
        ladder(a, &bases[b], &dirs[d], LADDER_START * scale, cap, budget.refine_steps, margin)
    });
    let checks = hits.iter().map(|h| h.checks).sum::<usize>() + 1;
    let best = hits
        .into_iter()
        .filter(|h| h.dist.is_finite())
        .reduce(|x, y| if y.dist < x.dist { y } else { x })
        .ok_or_else(|| Error::Certificate("perturbation search found no certified member".into()))?;
    Ok((best.dist, best.witness, checks))
}

/// Winding obstruction for scalar tuples on a disk field: if the boundary
/// loop of `a` winds around `0`, every member of `Lg_1` is at distance at
/// least the smallest boundary modulus, less the sampling slack.
pub fn winding_lower_bound(a: &Tuple) -> Option<f64> {
    let mesh = a.algebra().mesh()?;
    if mesh.dimension() != 2 || a.shape() != (1, 1) || a.algebra().max_fiber_dim() != 1 {
        return None;
    }
    let samples: Vec<Complex64> = mesh
        .boundary_cycle()
        .iter()
        .map(|&v| a.fibers()[v].get(0, 0))
        .collect();
    let turns = winding_number(&samples).ok()?;
    if turns == 0 {
        return None;
    }
    let rho = samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let step_slack = a.lipschitz() * mesh.max_boundary_step();
    // The boundary segments stay inside discs avoiding 0 only when the
    // full step slack is below the smallest sample modulus.
    if !(step_slack < rho) {
        return None;
    }
    Some((rho - 0.5 * step_slack).max(0.0))
}

/// Certified bounds on `dist(a, Lg_n(A))`.
pub fn dist_to_lg(a: &Tuple, budget: &DistBudget) -> Result<DistanceCertificate> {
    if a.shape().1 != 1 {
        return Err(Error::Shape("distance is defined for column tuples".into()));
    }
    let (upper, witness, checks) = perturbation_witness(a, budget)?;
    let (lower, method) = if a.norm() == 0.0 {
        (0.0, LowerMethod::NormBound)
    } else if let Some(l) = winding_lower_bound(a) {
        (l.min(upper), LowerMethod::Winding)
    } else {
        (0.0, LowerMethod::TrivialZero)
    };
    Ok(DistanceCertificate {
        lower,
        upper,
        upper_witness: witness,
        lower_method: method,
        checks,
    })
}

/// `b = a·h(|a|)` with `h(t) = min{t/γ, 1}` and `γ` the midpoint of the
/// certificate, so `‖b‖ ≤ 1` and `dist(b, Lg_n) ≥ γ⁻¹·dist(a, Lg_n)`.
pub fn max_distance_witness(a: &Tuple, cert: &DistanceCertificate) -> Result<Tuple> {
    if !(cert.lower > 0.0) {
        return Err(Error::Precondition(
            "witness needs a certificate with positive lower bound".into(),
        ));
    }
    let gamma = 0.5 * (cert.lower + cert.upper);
    a.right_mult_calc(Profile::HCap { gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_tuple, Algebra};
    use crate::linalg::ComplexMatrix;
    use crate::rng;
    use std::sync::Arc;

    fn coordinate(alg: &Arc<Algebra>, f: impl Fn(f64, f64) -> Complex64, lip: f64) -> Tuple {
        let fibers = alg
            .mesh()
            .unwrap()
            .vertices()
            .iter()
            .map(|p| ComplexMatrix::scalar(f(p[0], p[1])))
            .collect();
        Tuple::from_fibers(alg.clone(), 1, 1, fibers, lip).unwrap()
    }

    #[test]
    fn members_have_zero_distance() {
        let alg = Algebra::full_matrix(3).unwrap().into_arc();
        let a = Tuple::identity(alg, 1).unwrap();
        let c = dist_to_lg(&a, &DistBudget::default()).unwrap();
        assert_eq!((c.lower, c.upper), (0.0, 0.0));
        assert_eq!(c.upper_witness, a);
    }

    #[test]
    fn singular_matrices_are_close_to_members() {
        let alg = Algebra::full_matrix(3).unwrap().into_arc();
        let a = Tuple::from_fibers(alg, 1, 1, vec![ComplexMatrix::from_real_diag(&[1.0, 0.5, 0.0])], 0.0).unwrap();
        let c = dist_to_lg(&a, &DistBudget::default()).unwrap();
        assert!(c.upper < 1e-6, "{}", c.upper);
        assert!(is_lg(&c.upper_witness, 0.0).member);
    }

    #[test]
    fn zero_tuple() {
        let alg = Algebra::full_matrix(2).unwrap().into_arc();
        let c = dist_to_lg(&Tuple::zeros(alg, 2, 1), &DistBudget::default()).unwrap();
        assert_eq!(c.lower_method, LowerMethod::NormBound);
        assert!(c.upper <= 1e-9);
    }

    #[test]
    fn disk_coordinate_is_at_distance_one() {
        let alg = Algebra::disk(32, 1).unwrap().into_arc();
        let z = coordinate(&alg, Complex64::new, 1.0);
        let c = dist_to_lg(&z, &DistBudget::default()).unwrap();
        assert_eq!(c.lower_method, LowerMethod::Winding);
        assert!(c.lower >= 1.0 - 10.0 / 32.0, "{}", c.lower);
        assert!(c.upper <= 1.0 + 1e-6, "{}", c.upper);
        assert!(is_lg(&c.upper_witness, 0.0).member);

        let zbar = coordinate(&alg, |x, y| Complex64::new(x, -y), 1.0);
        assert_eq!(dist_to_lg(&zbar, &DistBudget::default()).unwrap().lower_method, LowerMethod::Winding);
    }

    #[test]
    fn upper_is_at_most_norm_and_scales() {
        let alg = Algebra::disk(16, 1).unwrap().into_arc();
        let z = coordinate(&alg, Complex64::new, 1.0);
        let base = dist_to_lg(&z, &DistBudget::default()).unwrap();
        for s in [0.25, 3.0] {
            let c = dist_to_lg(&z.scale_real(s), &DistBudget::default()).unwrap();
            assert!(c.upper <= s * z.norm() + 1e-9);
            assert!((c.upper - s * base.upper).abs() <= 1e-8 * s.max(1.0), "{s}");
        }
    }

    #[test]
    fn cut_candidates() {
        let alg = Algebra::full_matrix(4).unwrap().into_arc();
        let mut r = rng::stream(9, 0);
        let a = random_tuple(&alg, 2, &mut r, 1.0);
        for lambda in [0.0, 0.1, 0.5, 2.0] {
            let (c, d) = dist_upper_candidate(&a, lambda).unwrap();
            assert!(d <= lambda + 1e-12);
            assert_eq!(c.shape(), a.shape());
        }
        assert!(dist_upper_candidate(&a, -1.0).is_err());
    }

    #[test]
    fn max_distance_witness_on_disk() {
        let alg = Algebra::disk(16, 1).unwrap().into_arc();
        let z = coordinate(&alg, Complex64::new, 1.0);
        let exact = |a: &Tuple, v: f64| DistanceCertificate {
            lower: v,
            upper: v,
            upper_witness: a.clone(),
            lower_method: LowerMethod::Winding,
            checks: 0,
        };
        let b = max_distance_witness(&z, &exact(&z, 1.0)).unwrap();
        assert!(b.sub(&z).norm() < 1e-12);
        let z2 = z.scale_real(2.0);
        let b = max_distance_witness(&z2, &exact(&z2, 2.0)).unwrap();
        assert!(b.sub(&z).norm() < 1e-12);
        let mut zero = exact(&z, 0.0);
        zero.upper = 1.0;
        assert!(matches!(max_distance_witness(&z, &zero), Err(Error::Precondition(_))));
    }
}
