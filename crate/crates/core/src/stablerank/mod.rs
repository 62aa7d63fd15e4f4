//! Constructions in `Lg_n(A)` and certified stable-rank estimates.

mod construct;
mod distance;
mod estimate;

pub use construct::{
    polar_unit, section_at_level, section_at_level_with_gap, shift_into_lg, Section, SectionReport,
    INPUT_MARGIN,
};
pub use distance::{
    dist_to_lg, dist_upper_candidate, max_distance_witness, perturbation_witness, perturbation_witness_at_margin, section_candidate,
    winding_lower_bound, CertificateSummary, DistBudget, DistanceCertificate, LowerMethod,
};
pub use estimate::{estimate_sr, PhiEstimate, SrEstimate, SR_THRESHOLD};
