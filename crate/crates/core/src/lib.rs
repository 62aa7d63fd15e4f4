//! Numerical workbench for stable rank of finite-dimensionally represented
//! C*-algebras.
//!
//! The crate is layered bottom-up:
//!
//! * [`linalg`]: dense complex matrices, a cyclic Jacobi Hermitian
//!   eigensolver, functional calculus, spectral projections and polar parts.
//! * [`algebra`]: represented algebras (full matrix algebras, direct sums,
//!   sampled continuous fields over meshes, represented subalgebras) and
//!   block elements over them, including tuples in `A^n`.
//! * [`stablerank`]: distance to left-invertible tuples, the shift and
//!   section constructions, maximal-distance witnesses, stable-rank estimates.
//! * [`logic`]: a small language of continuous-logic sentences with a
//!   budgeted optimizing evaluator.
//! * [`kk`]: Kadison-Kastler distance between subalgebras of `M_d` and the
//!   perturbation experiment.
//! * [`suites`]: randomized verification suites shared by the CLI, the
//!   benches and the acceptance tests.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
mod error;
pub mod kk;
pub mod linalg;
pub mod logic;
pub mod par;
pub mod rng;
pub mod stablerank;
pub mod suites;

pub use error::{Error, Result};
