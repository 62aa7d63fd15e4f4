//! Kadison–Kastler distance between *-subalgebras of `M_d` and the
//! stable-rank perturbation experiment.

mod distance;
mod experiment;
mod subalgebra;

pub use distance::{inner_distance, kk_distance, InnerBounds, KkBudget, KkCertificate, KkSummary};
pub use experiment::{
    disk_pairs, matrix_pairs, sr_stability_experiment, EpsilonCount, ExperimentPair, ExperimentReport,
    ExperimentRow, EPSILON_SWEEP,
};
pub use subalgebra::{perturb_algebra, random_unitary_near_one, Subalgebra, SubalgebraDoc};
