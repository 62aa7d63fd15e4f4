use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::linalg::{herm_eig, Complex64, ComplexMatrix, MatrixDoc};
use crate::{rng, Error, Result};

const GRAM_TOLERANCE: f64 = 1e-10;
const CLOSURE_TOLERANCE: f64 = 1e-8;
/// Gram–Schmidt drops directions shorter than this.
const RANK_TOLERANCE: f64 = 1e-10;

/// A *-subalgebra of `M_d` with a trace-orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subalgebra {
    d: usize,
    basis: Vec<ComplexMatrix>,
    contains_unit: bool,
}

/// Subalgebra spec document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubalgebraDoc {
    pub d: usize,
    pub basis: Vec<MatrixDoc>,
    pub contains_unit: bool,
}

fn unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m.set(i, j, Complex64::new(1.0, 0.0));
    m
}

/// Modified Gram–Schmidt under `⟨a, b⟩ = tr(a*b)`.
fn orthonormalize(mats: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for m in mats {
        let mut v = m.clone();
        for _ in 0..2 {
            for b in &out {
                v = &v - &b.scale(b.inner(&v));
            }
        }
        let n = v.frobenius_norm();
        if n > RANK_TOLERANCE * m.frobenius_norm().max(1.0) {
            out.push(v.scale_real(1.0 / n));
        }
    }
    out
}

impl Subalgebra {
    /// Validates an orthonormal basis: Gram identity to 1e-10, closure under
    /// adjoint and products to 1e-8, and the unit flag.
    pub fn new(d: usize, basis: Vec<ComplexMatrix>, contains_unit: bool) -> Result<Self> {
        if d == 0 || basis.is_empty() {
            return Err(Error::Invalid("subalgebra needs d ≥ 1 and a nonempty basis".into()));
        }
        if basis.iter().any(|b| b.shape() != (d, d)) {
            return Err(Error::Shape(format!("basis matrices must be {d}x{d}")));
        }
        let s = Self {
            d,
            basis,
            contains_unit,
        };
        let gram_defect = s
            .basis
            .iter()
            .enumerate()
            .flat_map(|(i, a)| {
                s.basis.iter().enumerate().map(move |(j, b)| {
                    let target = if i == j { 1.0 } else { 0.0 };
                    (a.inner(b) - Complex64::new(target, 0.0)).norm()
                })
            })
            .fold(0.0, f64::max);
        if gram_defect > GRAM_TOLERANCE {
            return Err(Error::Invalid(format!("basis is not orthonormal (defect {gram_defect:.2e})")));
        }
        for a in &s.basis {
            let r = s.projection_defect(&a.adjoint());
            if r > CLOSURE_TOLERANCE {
                return Err(Error::Invalid(format!("span is not closed under adjoint (defect {r:.2e})")));
            }
            for b in &s.basis {
                let r = s.projection_defect(&(a * b));
                if r > CLOSURE_TOLERANCE {
                    return Err(Error::Invalid(format!(
                        "span is not closed under products (defect {r:.2e})"
                    )));
                }
            }
        }
        let has_unit = s.projection_defect(&ComplexMatrix::identity(d)) <= CLOSURE_TOLERANCE;
        if contains_unit && !has_unit {
            return Err(Error::Invalid("unit flag set but the identity is not in the span".into()));
        }
        Ok(s)
    }

    /// Orthonormalizes a spanning set, then validates.
    pub fn from_spanning(d: usize, mats: &[ComplexMatrix], contains_unit: bool) -> Result<Self> {
        Self::new(d, orthonormalize(mats), contains_unit)
    }

    pub fn full(d: usize) -> Result<Self> {
        let basis = (0..d).flat_map(|i| (0..d).map(move |j| unit(d, i, j))).collect();
        Self::new(d, basis, true)
    }

    pub fn diagonal(d: usize) -> Result<Self> {
        Self::new(d, (0..d).map(|i| unit(d, i, i)).collect(), true)
    }

    /// `M_{k_1} ⊕ … ⊕ M_{k_r}` embedded block-diagonally.
    pub fn block_diagonal(blocks: &[usize]) -> Result<Self> {
        let d = blocks.iter().sum();
        let mut basis = Vec::new();
        let mut off = 0;
        for &k in blocks {
            for i in 0..k {
                for j in 0..k {
                    basis.push(unit(d, off + i, off + j));
                }
            }
            off += k;
        }
        Self::new(d, basis, true)
    }

    pub fn from_doc(doc: &SubalgebraDoc) -> Result<Self> {
        let basis = doc
            .basis
            .iter()
            .map(ComplexMatrix::from_doc)
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.d, basis, doc.contains_unit)
    }

    pub fn to_doc(&self) -> SubalgebraDoc {
        SubalgebraDoc {
            d: self.d,
            basis: self.basis.iter().map(ComplexMatrix::to_doc).collect(),
            contains_unit: self.contains_unit,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains_unit(&self) -> bool {
        self.contains_unit
    }

    /// Trace-orthogonal projection onto the span (the trace-preserving
    /// conditional expectation, contractive in operator norm).
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for b in &self.basis {
            out = &out + &b.scale(b.inner(x));
        }
        out
    }

    pub fn projection_defect(&self, x: &ComplexMatrix) -> f64 {
        (x - &self.project(x)).frobenius_norm()
    }

    pub fn coords(&self, x: &ComplexMatrix) -> Vec<Complex64> {
        self.basis.iter().map(|b| b.inner(x)).collect()
    }

    pub fn from_coords(&self, c: &[Complex64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for (b, z) in self.basis.iter().zip(c) {
            out = &out + &b.scale(*z);
        }
        out
    }

    /// Whether both spans agree to `tol` in Frobenius projection defect.
    pub fn same_span(&self, other: &Self, tol: f64) -> bool {
        self.d == other.d
            && self.dim() == other.dim()
            && self.basis.iter().all(|b| other.projection_defect(b) <= tol)
    }

    /// The subalgebra as a represented algebra.
    pub fn to_algebra(&self) -> Result<Algebra> {
        Algebra::represented(self.d, self.basis.clone(), self.contains_unit)
    }

    /// Random Hermitian element of the subalgebra.
    pub fn random_hermitian(&self, r: &mut rng::StreamRng) -> ComplexMatrix {
        let c: Vec<Complex64> = (0..self.dim()).map(|_| rng::complex_normal(r)).collect();
        self.project(&self.from_coords(&c).hermitian_part())
    }
}

/// `exp(iεH)` for a random Hermitian `H` with `‖H‖ = 1`.
pub fn random_unitary_near_one(d: usize, eps: f64, seed: u64) -> Result<ComplexMatrix> {
    let mut r = rng::stream(seed, 0x6b6b);
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng::complex_normal(&mut r));
    let h = g.hermitian_part();
    let e = herm_eig(&h)?;
    let norm = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm = if norm > 0.0 { norm } else { 1.0 };
    Ok(e.reconstruct_weights(
        &e.values
            .iter()
            .map(|t| Complex64::from_polar(1.0, eps * t / norm))
            .collect::<Vec<_>>(),
    ))
}

/// `uAu*` for `u = exp(iεH)`, `H` random Hermitian with `‖H‖ = 1`;
/// deterministic per seed. `ε = 0` returns the algebra unchanged.
pub fn perturb_algebra(a: &Subalgebra, eps: f64, seed: u64) -> Result<Subalgebra> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Contract(format!("perturbation size must be ≥ 0, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(a.clone());
    }
    let u = random_unitary_near_one(a.d, eps, seed)?;
    let ua = a.basis.iter().map(|b| &(&u * b) * &u.adjoint()).collect::<Vec<_>>();
    Subalgebra::from_spanning(a.d, &ua, a.contains_unit)
}
