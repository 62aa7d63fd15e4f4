//! Sentences of continuous logic over represented algebras.

mod ast;
mod eval;
mod parse;
mod phi;

pub use ast::{build_phi_n, Binding, Body, Formula, Quantifier, Sort, Term};
pub use eval::{
    eval_formula, evaluate_at, project_to_sort, sort_table, static_range, Bounds, CertifiedSide,
    EvalOptions, EvalResult, EvalSummary, Witness, MAX_STARTS,
};
pub use parse::{check_sentence, parse_formula, term_shape};
pub use phi::{inner_inf_candidate, phi_inner, phi_tail_level, phi_value, PhiInner};
