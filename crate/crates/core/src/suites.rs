//! Randomized verification suites over matrix algebras.
//!
//! Instance `i` of every suite draws from its own RNG stream keyed by the
//! suite, the seed and `i`, so reports do not depend on scheduling.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{is_lg, random_tuple, Algebra, Tuple};
use crate::linalg::{herm_eig, polar, ComplexMatrix};
use crate::rng::{self, StreamRng};
use crate::stablerank::{
    dist_to_lg, dist_upper_candidate, section_at_level, shift_into_lg, DistBudget, INPUT_MARGIN,
};
use crate::{par, Error, Result};

/// Margin the shifted tuples must clear.
pub const SHIFT_MARGIN: f64 = 1e-8;
pub const SECTION_TOLERANCE: f64 = 1e-7;
pub const CANDIDATE_TOLERANCE: f64 = 1e-8;
pub const DISTANCE_TOLERANCE: f64 = 1e-6;
pub const EIG_TOLERANCE: f64 = 1e-10;
/// Relative to `‖a‖`.
pub const POLAR_TOLERANCE: f64 = 1e-8;
/// Levels checked by the distance-formula suite.
pub const LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
/// Largest fiber size and tuple length drawn by the construction suites.
pub const MAX_FIBER: usize = 5;
pub const MAX_LENGTH: usize = 3;
const MAX_EIG_DIM: usize = 32;
const NUDGE: f64 = 1e-3;
const GAP_ATTEMPTS: u64 = 32;
/// Failures listed individually in a report.
const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Shift,
    Section,
    DistanceFormula,
    Eigen,
    Polar,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Shift,
        Suite::Section,
        Suite::DistanceFormula,
        Suite::Eigen,
        Suite::Polar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Shift => "shift",
            Suite::Section => "section",
            Suite::DistanceFormula => "distance_formula",
            Suite::Eigen => "eigen",
            Suite::Polar => "polar",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    fn salt(self) -> u64 {
        match self {
            Suite::Shift => 1,
            Suite::Section => 2,
            Suite::DistanceFormula => 3,
            Suite::Eigen => 4,
            Suite::Polar => 5,
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Suite::Shift => SHIFT_MARGIN,
            Suite::Section => SECTION_TOLERANCE,
            Suite::DistanceFormula => CANDIDATE_TOLERANCE,
            Suite::Eigen => EIG_TOLERANCE,
            Suite::Polar => POLAR_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceFailure {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub instances: usize,
    pub passed: usize,
    /// Individual checks performed across all instances.
    pub checks: usize,
    pub tolerance: f64,
    /// Worst value of the suite's measured quantity; for the shift suite the
    /// smallest `σ²_min`, otherwise the largest residual.
    pub worst: f64,
    pub failures: Vec<InstanceFailure>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.instances
    }
}

struct Outcome {
    checks: usize,
    measure: f64,
    failure: Option<String>,
}

fn stream(suite: Suite, seed: u64, index: usize, attempt: u64) -> StreamRng {
    rng::stream(seed, suite.salt() << 56 | (index as u64) << 8 | attempt)
}

/// Fiber size and tuple length of instance `i`, cycling through all pairs.
pub fn instance_shape(i: usize) -> (usize, usize) {
    (1 + i % MAX_FIBER, 1 + (i / MAX_FIBER) % MAX_LENGTH)
}

fn matrix_algebra(k: usize) -> Arc<Algebra> {
    Algebra::full_matrix(k).expect("k ≥ 1").into_arc()
}

fn unit_scaled(t: Tuple) -> Tuple {
    let n = t.norm();
    if n > 0.0 {
        t.scale_real(1.0 / n)
    } else {
        t
    }
}

/// `a` and a certified nearby `b = a + 10⁻³·g`.
fn nudged_pair(alg: &Arc<Algebra>, n: usize, r: &mut StreamRng) -> (Tuple, Tuple) {
    let a = unit_scaled(random_tuple(alg, n, r, 1.0));
    let b = a.add(&random_tuple(alg, n, r, NUDGE));
    (a, b)
}

fn shift_instance(seed: u64, i: usize) -> Result<Outcome> {
    let (k, n) = instance_shape(i);
    let alg = matrix_algebra(k);
    let mut r = stream(Suite::Shift, seed, i, 0);
    let a = random_tuple(&alg, n, &mut r, 1.0);
    let b = random_tuple(&alg, n, &mut r, 1.0);
    let beta = a.sub(&b).norm() + 0.1;
    let out = shift_into_lg(&a, &b, beta)?;
    let cert = is_lg(&out, SHIFT_MARGIN);
    Ok(Outcome {
        checks: 1,
        measure: cert.sigma_min,
        failure: (!cert.member).then(|| format!("σ²_min = {:.3e} below margin", cert.sigma_min)),
    })
}

/// Spectrum of `|a*|` on the single fiber, ascending, with 0 included.
fn star_spectrum(a: &Tuple) -> Result<Vec<f64>> {
    let mut s: Vec<f64> = herm_eig(&a.fibers()[0].gram())?
        .values
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    s.insert(0, 0.0);
    Ok(s)
}

/// Midpoint of the widest spectral gap of `|a*|` lying above `floor`.
fn widest_gap_level(spectrum: &[f64], floor: f64) -> Option<f64> {
    spectrum
        .windows(2)
        .map(|w| (w[1] - w[0], 0.5 * (w[0] + w[1])))
        .filter(|&(width, mid)| width > 1e-3 && mid > floor)
        .max_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, mid)| mid)
}

fn section_instance(seed: u64, i: usize) -> Result<Outcome> {
    let (k, n) = instance_shape(i);
    let alg = matrix_algebra(k);
    for attempt in 0..GAP_ATTEMPTS {
        let mut r = stream(Suite::Section, seed, i, attempt);
        let (a, b) = nudged_pair(&alg, n, &mut r);
        let Some(gamma) = widest_gap_level(&star_spectrum(&a)?, a.sub(&b).norm()) else {
            continue;
        };
        let sec = section_at_level(&a, gamma, &b)?;
        let member = is_lg(&sec.s, INPUT_MARGIN).member;
        let failure = if sec.residual > SECTION_TOLERANCE {
            Some(format!("residual {:.3e} at γ = {gamma}", sec.residual))
        } else if !member {
            Some("section is not certified".to_string())
        } else {
            None
        };
        return Ok(Outcome {
            checks: 2,
            measure: sec.residual,
            failure,
        });
    }
    Err(Error::Precondition(format!("no gap instance in {GAP_ATTEMPTS} attempts")))
}

/// Odd instances are made rank deficient so the distance search has work
/// to do.
fn distance_formula_instance(seed: u64, i: usize, budget: &DistBudget) -> Result<Outcome> {
    let (k, n) = instance_shape(i);
    let alg = matrix_algebra(k);
    let mut r = stream(Suite::DistanceFormula, seed, i, 0);
    let (mut a, _) = nudged_pair(&alg, n, &mut r);
    if i % 2 == 1 {
        let mut diag = vec![1.0; k];
        diag[k - 1] = 0.0;
        let p = ComplexMatrix::from_real_diag(&diag);
        let f = a.fibers()[0].clone();
        let cut = ComplexMatrix::vstack(&(0..n).map(|j| &f.block(j * k, 0, k, k) * &p).collect::<Vec<_>>());
        a = unit_scaled(Tuple::from_fibers(alg.clone(), n, 1, vec![cut], 0.0)?);
    }
    let b = a.add(&random_tuple(&alg, n, &mut r, NUDGE));
    let cert = dist_to_lg(&a, budget)?;
    let mut checks = 1;
    let mut worst: f64 = 0.0;
    let mut failure = (cert.lower > cert.upper).then(|| format!("lower {} exceeds upper {}", cert.lower, cert.upper));
    for lambda in LEVELS {
        let (_, bound) = dist_upper_candidate(&a, lambda)?;
        checks += 1;
        worst = worst.max(bound - lambda);
        if bound > lambda + CANDIDATE_TOLERANCE && failure.is_none() {
            failure = Some(format!("candidate bound {bound} at λ = {lambda}"));
        }
        match section_at_level(&a, lambda, &b) {
            Ok(_) => {
                checks += 1;
                if cert.upper > lambda + DISTANCE_TOLERANCE && failure.is_none() {
                    failure = Some(format!("distance upper {} above section level {lambda}", cert.upper));
                }
            }
            Err(Error::Gap { .. } | Error::Precondition(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Outcome {
        checks,
        measure: worst,
        failure,
    })
}

fn random_hermitian(k: usize, r: &mut StreamRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(k, k, |_, _| rng::complex_normal(r)).hermitian_part()
}

fn eigen_instance(seed: u64, i: usize) -> Result<Outcome> {
    let k = 1 + i % MAX_EIG_DIM;
    let mut r = stream(Suite::Eigen, seed, i, 0);
    let h = random_hermitian(k, &mut r);
    let e = herm_eig(&h)?;
    let lambda = ComplexMatrix::from_real_diag(&e.values);
    let residual = (&(&h * &e.vectors) - &(&e.vectors * &lambda)).op_norm();
    let orth = (&e.vectors.adjoint_mul(&e.vectors) - &ComplexMatrix::identity(k)).op_norm();
    let worst = residual.max(orth);
    Ok(Outcome {
        checks: 2,
        measure: worst,
        failure: (worst > EIG_TOLERANCE).then(|| format!("residual {residual:.3e}, orthogonality {orth:.3e}")),
    })
}

/// Every fourth instance has a zero column.
fn polar_instance(seed: u64, i: usize) -> Result<Outcome> {
    let k = 1 + i % 8;
    let rows = k * (1 + (i / 8) % MAX_LENGTH);
    let mut r = stream(Suite::Polar, seed, i, 0);
    let mut a = ComplexMatrix::from_fn(rows, k, |_, _| rng::complex_normal(&mut r));
    if i % 4 == 3 {
        for row in 0..rows {
            a.set(row, k - 1, 0.0.into());
        }
    }
    let norm = a.op_norm();
    let p = polar(&a, 1e-12 * norm.max(f64::MIN_POSITIVE))?;
    let residual = (&a - &(&p.partial_isometry * &p.modulus)).op_norm() / norm.max(f64::MIN_POSITIVE);
    Ok(Outcome {
        checks: 1,
        measure: residual,
        failure: (residual > POLAR_TOLERANCE).then(|| format!("relative residual {residual:.3e}")),
    })
}

/// Runs `instances` instances of `suite` from `seed`.
pub fn run_suite(suite: Suite, instances: usize, seed: u64) -> SuiteReport {
    let budget = DistBudget {
        seed,
        ..DistBudget::default()
    };
    let outcomes = par::map_indexed(instances, |i| match suite {
        Suite::Shift => shift_instance(seed, i),
        Suite::Section => section_instance(seed, i),
        Suite::DistanceFormula => distance_formula_instance(seed, i, &budget),
        Suite::Eigen => eigen_instance(seed, i),
        Suite::Polar => polar_instance(seed, i),
    });
    let mut passed = 0;
    let mut checks = 0;
    let mut worst = if suite == Suite::Shift { f64::INFINITY } else { 0.0 };
    let mut failures = Vec::new();
    for (index, o) in outcomes.into_iter().enumerate() {
        let reason = match o {
            Ok(o) => {
                checks += o.checks;
                worst = if suite == Suite::Shift {
                    worst.min(o.measure)
                } else {
                    worst.max(o.measure)
                };
                o.failure
            }
            Err(e) => Some(e.to_string()),
        };
        match reason {
            None => passed += 1,
            Some(reason) if failures.len() < MAX_LISTED => failures.push(InstanceFailure { index, reason }),
            Some(_) => {}
        }
    }
    if instances == 0 {
        worst = 0.0;
    }
    SuiteReport {
        suite,
        seed,
        instances,
        passed,
        checks,
        tolerance: suite.tolerance(),
        worst,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for suite in Suite::ALL {
            let r = run_suite(suite, 30, 7);
            assert!(r.all_passed(), "{r:?}");
            assert!(r.checks >= r.instances);
        }
    }

    #[test]
    fn reports_are_reproducible() {
        assert_eq!(run_suite(Suite::Section, 10, 3), run_suite(Suite::Section, 10, 3));
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn gap_level_respects_floor() {
        assert_eq!(widest_gap_level(&[0.0, 1.0, 1.1], 0.2), Some(0.5));
        assert_eq!(widest_gap_level(&[0.0, 1.0, 3.0], 0.2), Some(2.0));
        assert_eq!(widest_gap_level(&[0.0, 0.1], 0.2), None);
    }
}
