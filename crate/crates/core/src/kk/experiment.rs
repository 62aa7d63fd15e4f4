//! Stable-rank stability under small perturbations of the algebra.

use std::sync::Arc;

use serde::Serialize;

use super::distance::{kk_distance, KkBudget};
use super::subalgebra::{perturb_algebra, Subalgebra};
use crate::algebra::Algebra;
use crate::logic::EvalOptions;
use crate::stablerank::estimate_sr;
use crate::{par, Result};

/// Perturbation sizes swept by the pair builders, in order.
pub const EPSILON_SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.01];

/// Two algebras compared by the experiment, with their distance if known.
#[derive(Debug, Clone)]
pub struct ExperimentPair {
    pub label: String,
    pub epsilon: f64,
    pub first: Arc<Algebra>,
    pub second: Arc<Algebra>,
    pub kk: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub label: String,
    pub epsilon: f64,
    pub kk_lower: Option<f64>,
    pub kk_upper: Option<f64>,
    pub sr_first: String,
    pub sr_second: String,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCount {
    pub epsilon: f64,
    pub pairs: usize,
    pub disagreements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub pairs: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub by_epsilon: Vec<EpsilonCount>,
}

fn matrix_bases() -> Result<Vec<(&'static str, Subalgebra)>> {
    Ok(vec![
        ("M2", Subalgebra::full(2)?),
        ("D3", Subalgebra::diagonal(3)?),
        ("M1+M2", Subalgebra::block_diagonal(&[1, 2])?),
        ("M3", Subalgebra::full(3)?),
        ("D2", Subalgebra::diagonal(2)?),
        ("M2+M2", Subalgebra::block_diagonal(&[2, 2])?),
    ])
}

/// `count` pairs `(A, uAu*)` over a fixed list of subalgebras of `M_d`,
/// cycling through [`EPSILON_SWEEP`]. Pair `i` uses perturbation seed
/// `seed + i`.
pub fn matrix_pairs(count: usize, seed: u64, budget: &KkBudget) -> Result<Vec<ExperimentPair>> {
    let bases = matrix_bases()?;
    let built = par::map_indexed(count, |i| -> Result<ExperimentPair> {
        let (name, a) = &bases[i % bases.len()];
        let epsilon = EPSILON_SWEEP[i % EPSILON_SWEEP.len()];
        let b = perturb_algebra(a, epsilon, seed.wrapping_add(i as u64))?;
        let kk = kk_distance(a, &b, budget)?;
        Ok(ExperimentPair {
            label: format!("{name}#{i}"),
            epsilon,
            first: a.to_algebra()?.into_arc(),
            second: b.to_algebra()?.into_arc(),
            kk: Some((kk.lower, kk.upper)),
        })
    });
    built.into_iter().collect()
}

/// `count` pairs of the disk field `C(D)` against its pointwise conjugate.
/// With one-dimensional fibers every unitary conjugation acts trivially, so
/// the second member samples the same field and the distance is zero.
pub fn disk_pairs(count: usize, resolution: usize) -> Result<Vec<ExperimentPair>> {
    let disk = Algebra::disk(resolution, 1)?.into_arc();
    Ok((0..count)
        .map(|i| ExperimentPair {
            label: format!("disk{resolution}#{i}"),
            epsilon: EPSILON_SWEEP[i % EPSILON_SWEEP.len()],
            first: disk.clone(),
            second: Arc::new((*disk).clone()),
            kk: Some((0.0, 0.0)),
        })
        .collect())
}

/// Estimates the stable rank of both members of every pair and reports
/// agreement. Pair `i` evaluates with seed `opts.seed + i`.
pub fn sr_stability_experiment(pairs: &[ExperimentPair], n_max: usize, opts: &EvalOptions) -> Result<ExperimentReport> {
    let indexed: Vec<(usize, &ExperimentPair)> = pairs.iter().enumerate().collect();
    let rows = par::map_slice(&indexed, |(i, p)| -> Result<ExperimentRow> {
        let o = EvalOptions::new(opts.budget, opts.seed.wrapping_add(*i as u64));
        let first = estimate_sr(&p.first, n_max, &o)?;
        let second = estimate_sr(&p.second, n_max, &o)?;
        Ok(ExperimentRow {
            label: p.label.clone(),
            epsilon: p.epsilon,
            kk_lower: p.kk.map(|k| k.0),
            kk_upper: p.kk.map(|k| k.1),
            sr_first: first.label(),
            sr_second: second.label(),
            agree: first.value == second.value,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut by_epsilon: Vec<EpsilonCount> = Vec::new();
    for r in &rows {
        let idx = match by_epsilon.iter().position(|c| c.epsilon == r.epsilon) {
            Some(idx) => idx,
            None => {
                by_epsilon.push(EpsilonCount {
                    epsilon: r.epsilon,
                    pairs: 0,
                    disagreements: 0,
                });
                by_epsilon.len() - 1
            }
        };
        by_epsilon[idx].pairs += 1;
        by_epsilon[idx].disagreements += usize::from(!r.agree);
    }
    let agreements = rows.iter().filter(|r| r.agree).count();
    Ok(ExperimentReport {
        pairs: rows.len(),
        agreements,
        disagreements: rows.len() - agreements,
        rows,
        by_epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_experiment() {
        let r = sr_stability_experiment(&[], 2, &EvalOptions::new(4, 0)).unwrap();
        assert_eq!((r.pairs, r.agreements, r.disagreements), (0, 0, 0));
        assert!(r.by_epsilon.is_empty());
    }

    #[test]
    fn small_matrix_sweep_agrees() {
        let budget = KkBudget {
            starts: 4,
            climb_steps: 2,
            ..KkBudget::default()
        };
        let pairs = matrix_pairs(6, 1, &budget).unwrap();
        for p in &pairs {
            let (lo, hi) = p.kk.unwrap();
            assert!(lo <= hi && hi <= 2.0 * p.epsilon * (1.0 + 1e-3), "{}: {lo} {hi}", p.label);
        }
        let r = sr_stability_experiment(&pairs, 2, &EvalOptions::new(8, 0)).unwrap();
        assert_eq!(r.disagreements, 0, "{:?}", r.rows);
        assert!(r.rows.iter().all(|row| row.sr_first == "1"));
        assert_eq!(r.by_epsilon.iter().map(|c| c.pairs).sum::<usize>(), 6);
    }
}
