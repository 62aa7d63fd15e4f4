use std::sync::Arc;

use serde::Serialize;

use crate::algebra::Algebra;
use crate::logic::{build_phi_n, eval_formula, EvalOptions};
use crate::{Error, Result};

/// φ_n estimates at or below this count as "φ_n = 0".
pub const SR_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiEstimate {
    pub n: usize,
    /// Certified lower bound.
    pub lower: f64,
    /// Heuristic estimate from the best decompositions found.
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrEstimate {
    /// Smallest `n` with φ_n estimated at most [`SR_THRESHOLD`]; `None`
    /// means "greater than `n_max`".
    pub value: Option<usize>,
    pub n_max: usize,
    pub estimates: Vec<PhiEstimate>,
}

impl SrEstimate {
    pub fn label(&self) -> String {
        match self.value {
            Some(n) => n.to_string(),
            None => format!("> {}", self.n_max),
        }
    }
}

/// Estimates the stable rank through the φ_n dichotomy, testing
/// `n = 1, 2, …, n_max` in order.
pub fn estimate_sr(alg: &Arc<Algebra>, n_max: usize, opts: &EvalOptions) -> Result<SrEstimate> {
    if n_max == 0 {
        return Err(Error::Contract("n_max must be at least 1".into()));
    }
    let mut estimates = Vec::new();
    for n in 1..=n_max {
        let r = eval_formula(alg, &build_phi_n(n), opts)?;
        estimates.push(PhiEstimate {
            n,
            lower: r.lower,
            upper: r.upper,
        });
        if r.upper <= SR_THRESHOLD {
            return Ok(SrEstimate {
                value: Some(n),
                n_max,
                estimates,
            });
        }
    }
    Ok(SrEstimate {
        value: None,
        n_max,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_have_stable_rank_one() {
        for k in [2, 3] {
            let alg = Algebra::full_matrix(k).unwrap().into_arc();
            let est = estimate_sr(&alg, 2, &EvalOptions::new(16, 0)).unwrap();
            assert_eq!(est.value, Some(1), "{est:?}");
        }
    }

    #[test]
    fn rejects_zero_n_max() {
        let alg = Algebra::full_matrix(1).unwrap().into_arc();
        assert!(estimate_sr(&alg, 0, &EvalOptions::new(4, 0)).is_err());
    }
}
