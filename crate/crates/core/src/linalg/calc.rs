//! Functional calculus on positive matrices and the polar decomposition.

use num_complex::Complex64;

use super::{herm_eig, ComplexMatrix, EigenDecomposition};
use crate::{Error, Result};

/// Default half-width of the spectral gap demanded around projection cuts.
pub const DEFAULT_GAP: f64 = 1e-6;

/// Named scalar functions on `[0, ∞)` used in functional calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `t`
    Identity,
    /// `1`
    One,
    /// `√t`
    Sqrt,
    /// `t^{-1/2}`, defined for `t > 0`
    InvSqrt,
    /// `1/t`, defined for `t > 0`
    Reciprocal,
    /// `min{γ⁻¹, t⁻¹}`
    PhiLevel { gamma: f64 },
    /// `min{t·γ⁻², t⁻¹}`
    PsiLevel { gamma: f64 },
    /// `min{γ⁻¹·t, 1}`
    HCap { gamma: f64 },
    /// `max{t − λ, 0}`
    PosPart { lambda: f64 },
    /// `min{t/ε, 1}`
    Regularized { eps: f64 },
    /// `min{max{t, 0}, 1}`
    Clip01,
}

impl Profile {
    /// Value at `t`, or `None` outside the domain.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let v = match *self {
            Profile::Identity => t,
            Profile::One => 1.0,
            Profile::Sqrt => t.max(0.0).sqrt(),
            Profile::InvSqrt => {
                if t <= 0.0 {
                    return None;
                }
                1.0 / t.sqrt()
            }
            Profile::Reciprocal => {
                if t <= 0.0 {
                    return None;
                }
                1.0 / t
            }
            Profile::PhiLevel { gamma } => {
                if t <= gamma {
                    1.0 / gamma
                } else {
                    1.0 / t
                }
            }
            Profile::PsiLevel { gamma } => {
                if t <= gamma {
                    t / (gamma * gamma)
                } else {
                    1.0 / t
                }
            }
            Profile::HCap { gamma } => (t / gamma).min(1.0),
            Profile::PosPart { lambda } => (t - lambda).max(0.0),
            Profile::Regularized { eps } => (t / eps).min(1.0),
            Profile::Clip01 => t.clamp(0.0, 1.0),
        };
        Some(v)
    }

    /// Continuous extension of `ψ(t)/t` to `t = 0`; `None` when unbounded there.
    pub fn quotient(&self, t: f64) -> Option<f64> {
        if t > 0.0 {
            return self.eval(t).map(|v| v / t);
        }
        match *self {
            Profile::Identity => Some(1.0),
            Profile::PsiLevel { gamma } => Some(1.0 / (gamma * gamma)),
            Profile::HCap { gamma } => Some(1.0 / gamma),
            Profile::PosPart { lambda } => Some(if lambda > 0.0 { 0.0 } else { 1.0 }),
            Profile::Regularized { eps } => Some(1.0 / eps),
            Profile::Clip01 => Some(1.0),
            _ => None,
        }
    }

    /// Lipschitz constant of the profile on `[0, hi]`.
    pub fn lipschitz_on(&self, hi: f64) -> f64 {
        match *self {
            Profile::Identity | Profile::Clip01 => 1.0,
            Profile::One => 0.0,
            Profile::Sqrt | Profile::InvSqrt | Profile::Reciprocal => f64::INFINITY,
            Profile::PhiLevel { gamma } => {
                if hi > gamma {
                    1.0 / (gamma * gamma)
                } else {
                    0.0
                }
            }
            Profile::PsiLevel { gamma } => 1.0 / (gamma * gamma),
            Profile::HCap { gamma } => 1.0 / gamma,
            Profile::PosPart { lambda } => {
                if hi > lambda {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Regularized { eps } => 1.0 / eps,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = match *self {
            Profile::PhiLevel { gamma } | Profile::PsiLevel { gamma } | Profile::HCap { gamma } => {
                !(gamma > 0.0 && gamma.is_finite())
            }
            Profile::PosPart { lambda } => !(lambda >= 0.0 && lambda.is_finite()),
            Profile::Regularized { eps } => !(eps > 0.0 && eps.is_finite()),
            _ => false,
        };
        if bad {
            return Err(Error::Contract(format!("invalid profile parameter {self:?}")));
        }
        Ok(())
    }
}

fn positive_spectrum(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    let e = herm_eig(h)?;
    let tol = 1e-10 * e.max().abs().max(e.min().abs()).max(f64::MIN_POSITIVE);
    if e.min() < -tol {
        return Err(Error::Contract(format!(
            "expected a positive matrix, found eigenvalue {}",
            e.min()
        )));
    }
    Ok(e)
}

/// `U·diag(f(λ_i))·U*` for a positive semidefinite `h`.
pub fn func_calc(h: &ComplexMatrix, f: Profile) -> Result<ComplexMatrix> {
    f.validate()?;
    let e = positive_spectrum(h)?;
    let mut vals = Vec::with_capacity(e.values.len());
    for &l in &e.values {
        let t = l.max(0.0);
        let v = f
            .eval(t)
            .ok_or_else(|| Error::Domain(format!("{f:?} undefined at spectral value {t}")))?;
        vals.push(v);
    }
    let w: Vec<Complex64> = vals.into_iter().map(Complex64::from).collect();
    let mut out = e.reconstruct_weights(&w);
    out.symmetrize();
    Ok(out)
}

/// Functional calculus of an arbitrary Hermitian matrix with a complex
/// valued function (used for `exp(iH)` and spectral clipping).
pub fn hermitian_calc(h: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    let e = herm_eig(h)?;
    Ok(e.reconstruct(f))
}

/// `(H − λ)₊`.
pub fn pos_part(h: &ComplexMatrix, lambda: f64) -> Result<ComplexMatrix> {
    if !(lambda >= 0.0) {
        return Err(Error::Contract(format!("pos_part level {lambda} is negative")));
    }
    func_calc(h, Profile::PosPart { lambda })
}

/// Orthogonal projection onto the eigenspaces of `h` with eigenvalue `≤ λ`.
///
/// Fails with [`Error::Gap`] when an eigenvalue lies in `(λ − δ, λ + δ)`.
pub fn spectral_proj_leq(h: &ComplexMatrix, lambda: f64, delta: f64) -> Result<ComplexMatrix> {
    let e = herm_eig(h)?;
    if let Some(&bad) = e.values.iter().find(|&&l| (l - lambda).abs() < delta) {
        return Err(Error::Gap {
            eigenvalue: bad,
            level: lambda,
            tolerance: delta,
        });
    }
    let mut p = e.reconstruct(|l| if l <= lambda { 1.0.into() } else { 0.0.into() });
    p.symmetrize();
    Ok(p)
}

/// Polar parts `a = v·|a|` of a (typically tall) matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarParts {
    pub partial_isometry: ComplexMatrix,
    pub modulus: ComplexMatrix,
}

/// Polar decomposition with the truncation convention: singular directions
/// with singular value below `tau` are mapped to zero by `v`.
pub fn polar(a: &ComplexMatrix, tau: f64) -> Result<PolarParts> {
    if !(tau > 0.0) {
        return Err(Error::Contract(format!("polar threshold {tau} must be positive")));
    }
    let e = herm_eig(&a.gram())?;
    let sigma: Vec<f64> = e.values.iter().map(|&m| m.max(0.0).sqrt()).collect();
    let mod_w: Vec<Complex64> = sigma.iter().map(|&s| s.into()).collect();
    let mut modulus = e.reconstruct_weights(&mod_w);
    modulus.symmetrize();
    let inv_w: Vec<Complex64> = sigma
        .iter()
        .map(|&s| if s >= tau { (1.0 / s).into() } else { 0.0.into() })
        .collect();
    let inv_trunc = e.reconstruct_weights(&inv_w);
    Ok(PolarParts {
        partial_isometry: a * &inv_trunc,
        modulus,
    })
}

/// `a·q(|a|)` with `q(t) = ψ(t)/t`. When `a = v|a|` this equals `v·ψ(|a|)`,
/// but it never forms `v`, so entries stay in the algebra generated by `a`.
pub fn right_mult_calc(a: &ComplexMatrix, psi: Profile) -> Result<ComplexMatrix> {
    psi.validate()?;
    if psi.quotient(0.0).is_none() {
        return Err(Error::Domain(format!("{psi:?}: ψ(t)/t is unbounded near 0")));
    }
    let e = herm_eig(&a.gram())?;
    let q: Vec<Complex64> = e
        .values
        .iter()
        .map(|&m| psi.quotient(m.max(0.0).sqrt()).unwrap_or(0.0).into())
        .collect();
    let mult = e.reconstruct_weights(&q);
    Ok(a * &mult)
}
