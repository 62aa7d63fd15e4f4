//! Dense complex linear algebra.

mod calc;
mod eig;
mod matrix;

pub use calc::{
    func_calc, hermitian_calc, polar, pos_part, right_mult_calc, spectral_proj_leq, PolarParts,
    Profile, DEFAULT_GAP,
};
pub use eig::{herm_eig, EigenDecomposition};
pub use matrix::{ComplexMatrix, MatrixDoc};
pub use num_complex::Complex64;
