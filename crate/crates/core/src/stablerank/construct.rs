//! The shift into `Lg_n(A)` and the section at a spectral level.

use serde::Serialize;

use crate::algebra::{is_lg, Tuple};
use crate::linalg::{polar, spectral_proj_leq, ComplexMatrix, Profile, DEFAULT_GAP};
use crate::{Error, Result};

/// Margin used when certifying tuples handed to the constructions.
pub const INPUT_MARGIN: f64 = 1e-12;

fn check_tuple_pair(a: &Tuple, b: &Tuple) -> Result<()> {
    if a.shape() != b.shape() || a.shape().1 != 1 {
        return Err(Error::Shape(format!(
            "expected two tuples of equal width, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if !a.same_algebra(b) {
        return Err(Error::Contract("tuples live in different algebras".into()));
    }
    Ok(())
}

/// The isometry `w = b·(b*b)^{-1/2}` of a certified `b ∈ Lg_n(A)`.
pub fn polar_unit(b: &Tuple) -> Result<Tuple> {
    let cert = is_lg(b, INPUT_MARGIN);
    if !cert.member {
        return Err(Error::Certificate(format!(
            "tuple is not certified left-invertible (σ²_min = {:.3e}, margin {:.3e})",
            cert.sigma_min, cert.margin
        )));
    }
    let gram = b.gram();
    let inv_sqrt = gram.func_calc(Profile::InvSqrt)?;
    // t^{-1/2} is (s^{-3}/2)-Lipschitz above s² = σ²_min of the continuous field.
    let lip = if gram.lipschitz() == 0.0 {
        0.0
    } else {
        let s = cert.sigma_min.sqrt() - b.lipschitz() * b.algebra().slack_radius();
        if s > 0.0 {
            let k = b.algebra().max_fiber_dim() as f64;
            k.sqrt() * 0.5 * s.powi(-3) * gram.lipschitz()
        } else {
            f64::INFINITY
        }
    };
    Ok(b.mul(&inv_sqrt.with_lipschitz(lip)))
}

/// `a + βw` where `b = w|b|`; left-invertible whenever `β > ‖a − b‖`.
pub fn shift_into_lg(a: &Tuple, b: &Tuple, beta: f64) -> Result<Tuple> {
    check_tuple_pair(a, b)?;
    let d = a.sub(b).norm();
    if !(beta > d) {
        return Err(Error::Precondition(format!(
            "shift requires β > ‖a − b‖ = {d}, got β = {beta}"
        )));
    }
    let w = polar_unit(b)?;
    Ok(a.add(&w.scale_real(beta)))
}

/// Result of [`section_at_level`].
#[derive(Debug, Clone)]
pub struct Section {
    /// The section `s ∈ Lg_n(A)`.
    pub s: Tuple,
    pub beta: f64,
    /// `max_fibers ‖(1 − f_γ)(v − s)‖` with `v` the partial isometry of `a`.
    pub residual: f64,
    /// `σ²_min(s*s)` over the fibers.
    pub sigma_min: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SectionReport {
    pub gamma: f64,
    pub beta: f64,
    pub residual: f64,
    pub sigma_min: f64,
}

impl Section {
    pub fn report(&self, gamma: f64) -> SectionReport {
        SectionReport {
            gamma,
            beta: self.beta,
            residual: self.residual,
            sigma_min: self.sigma_min,
        }
    }
}

/// Builds `s = (a + βw)(1 + β·ψ(|a|)v*w)^{-1}·φ(|a|)` with
/// `φ(t) = min{γ⁻¹, t⁻¹}`, `ψ(t) = min{tγ⁻², t⁻¹}` and `β` the midpoint of
/// `(‖a − b‖, γ)`. The product `ψ(|a|)v*` is formed as the adjoint of the
/// right multiplier `a·q(|a|)`, so `v` is never needed to build `s`; it is
/// used only to report the residual against the spectral projection `f_γ`
/// of `|a*|`.
pub fn section_at_level(a: &Tuple, gamma: f64, b: &Tuple) -> Result<Section> {
    section_at_level_with_gap(a, gamma, b, DEFAULT_GAP)
}

pub fn section_at_level_with_gap(a: &Tuple, gamma: f64, b: &Tuple, delta: f64) -> Result<Section> {
    check_tuple_pair(a, b)?;
    let d = a.sub(b).norm();
    if !(d < gamma) {
        return Err(Error::Precondition(format!(
            "section requires ‖a − b‖ = {d} < γ = {gamma}"
        )));
    }
    let star_mod = a.star_modulus()?;
    let projections = star_mod
        .fibers()
        .iter()
        .map(|f| spectral_proj_leq(f, gamma, delta))
        .collect::<Result<Vec<_>>>()?;

    let beta = 0.5 * (d + gamma);
    let w = polar_unit(b)?;
    let v_psi = a.right_mult_calc(Profile::PsiLevel { gamma })?;
    let one = Tuple::identity(a.algebra().clone(), 1)?;
    let middle = one.add(&v_psi.adjoint().mul(&w).scale_real(beta)).inverse()?;
    let phi = a.modulus()?.func_calc(Profile::PhiLevel { gamma })?;
    let s = a.add(&w.scale_real(beta)).mul(&middle).mul(&phi);

    let cert = is_lg(&s, INPUT_MARGIN);
    if !cert.member {
        return Err(Error::Contract(format!(
            "section failed certification (σ²_min = {:.3e})",
            cert.sigma_min
        )));
    }
    let tau = 1e-10 * a.norm().max(f64::MIN_POSITIVE);
    let mut residual: f64 = 0.0;
    for ((af, sf), p) in a.fibers().iter().zip(s.fibers()).zip(&projections) {
        let v = polar(af, tau)?.partial_isometry;
        let comp = &ComplexMatrix::identity(p.rows()) - p;
        residual = residual.max((&comp * &(&v - sf)).op_norm());
    }
    Ok(Section {
        s,
        beta,
        residual,
        sigma_min: cert.sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_tuple, Algebra};
    use crate::linalg::herm_eig;
    use crate::rng;
    use num_complex::Complex64;
    use std::sync::Arc;

    fn scalar(alg: &Arc<Algebra>, z: f64) -> Tuple {
        Tuple::from_fibers(alg.clone(), 1, 1, vec![ComplexMatrix::from_real_diag(&[z])], 0.0).unwrap()
    }

    #[test]
    fn scalar_shift() {
        let c = Algebra::full_matrix(1).unwrap().into_arc();
        let r = shift_into_lg(&scalar(&c, 0.5), &scalar(&c, 1.0), 0.6).unwrap();
        assert!((r.fibers()[0].get(0, 0).re - 1.1).abs() < 1e-14);
        assert!(is_lg(&r, 1e-8).member);
    }

    #[test]
    fn shift_boundary_is_rejected() {
        let c = Algebra::full_matrix(1).unwrap().into_arc();
        let (a, b) = (scalar(&c, 0.5), scalar(&c, 1.0));
        assert!(matches!(shift_into_lg(&a, &b, 0.5), Err(Error::Precondition(_))));
        let zero = scalar(&c, 0.0);
        assert!(matches!(shift_into_lg(&a, &zero, 1.0), Err(Error::Certificate(_))));
    }

    #[test]
    fn random_shifts_are_members() {
        let alg = Algebra::full_matrix(4).unwrap().into_arc();
        for seed in 0..200 {
            let mut r = rng::stream(seed, 1);
            let a = random_tuple(&alg, 2, &mut r, 1.0);
            let b = random_tuple(&alg, 2, &mut r, 1.0);
            let beta = a.sub(&b).norm() + 0.1;
            let out = shift_into_lg(&a, &b, beta).unwrap();
            let e = herm_eig(&out.fibers()[0].gram()).unwrap();
            assert!(e.min() > 0.0);
            assert!(is_lg(&out, 1e-8).member, "seed {seed}");
        }
    }

    #[test]
    fn scalar_section_degenerate_spectrum() {
        let c = Algebra::full_matrix(1).unwrap().into_arc();
        let sec = section_at_level(&scalar(&c, 0.0), 0.5, &scalar(&c, 0.2)).unwrap();
        assert_eq!(sec.residual, 0.0);
        assert!(is_lg(&sec.s, 1e-8).member);
    }

    #[test]
    fn random_section_identity() {
        let alg = Algebra::full_matrix(5).unwrap().into_arc();
        let mut r = rng::stream(4, 0);
        let a = random_tuple(&alg, 2, &mut r, 0.3);
        let b = a.add(&random_tuple(&alg, 2, &mut r, 1e-3));
        let sv = herm_eig(&a.fibers()[0].gram()).unwrap().values;
        let sv: Vec<f64> = sv.iter().map(|x| x.sqrt()).collect();
        let gamma = 0.5 * (sv[1] + sv[2]);
        let sec = section_at_level(&a, gamma, &b).unwrap();
        assert!(sec.residual <= 1e-7, "residual {}", sec.residual);
    }

    #[test]
    fn section_reports_gap() {
        let c = Algebra::full_matrix(1).unwrap().into_arc();
        let a = scalar(&c, 1.0);
        let b = scalar(&c, 1.05);
        assert!(matches!(
            section_at_level_with_gap(&a, 1.0 + 1e-9, &b, 1e-6),
            Err(Error::Gap { .. })
        ));
        let _ = Complex64::new(0.0, 0.0);
    }
}
