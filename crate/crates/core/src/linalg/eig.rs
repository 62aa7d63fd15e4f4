use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, in `values` order.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `U · diag(f(λ_i)) · U*`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        self.reconstruct_weights(&fv)
    }

    /// `U · diag(w) · U*` for explicit per-eigenvalue weights.
    pub fn reconstruct_weights(&self, fv: &[Complex64]) -> ComplexMatrix {
        let k = self.values.len();
        assert_eq!(fv.len(), k);
        let u = &self.vectors;
        let mut out = ComplexMatrix::zeros(k, k);
        for (l, &w) in fv.iter().enumerate() {
            if w.re == 0.0 && w.im == 0.0 {
                continue;
            }
            for i in 0..k {
                let a = u.get(i, l) * w;
                for j in 0..k {
                    let v = out.get(i, j) + a * u.get(j, l).conj();
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `h_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation, so the
/// combined 2x2 unitary annihilates `h_pq` exactly. Sweeps repeat until the
/// off-diagonal mass is below `1e-15·‖H‖_F`.
pub fn herm_eig(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::Contract(format!(
            "herm_eig expects a square matrix, got {:?}",
            h.shape()
        )));
    }
    let k = h.rows();
    let norm = h.frobenius_norm();
    if h.hermitian_defect() > 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::Contract("herm_eig input is not Hermitian".into()));
    }
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(k);
    let tol = 1e-15 * norm;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..k)
            .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= tol || off == 0.0 {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<(usize, f64)> = (0..k).map(|i| (i, a.get(i, i).re)).collect();
    // Stable sort keeps original index order among exact ties.
    order.sort_by(|x, y| x.1.total_cmp(&y.1));
    let values = order.iter().map(|&(_, l)| l).collect();
    let vectors = ComplexMatrix::from_fn(k, k, |i, j| v.get(i, order[j].0));
    Ok(EigenDecomposition { values, vectors })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    if r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a.set(p, q, Complex64::new(0.0, 0.0));
        a.set(q, p, Complex64::new(0.0, 0.0));
        return;
    }
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e_minus = phase.conj();
    let k = a.rows();

    // Columns: A <- A G with G = [[c, s], [-s e^{-ia}, c e^{-ia}]].
    for row in 0..k {
        let hp = a.get(row, p);
        let hq = a.get(row, q);
        a.set(row, p, hp * c - hq * e_minus * s);
        a.set(row, q, hp * s + hq * e_minus * c);
        let vp = v.get(row, p);
        let vq = v.get(row, q);
        v.set(row, p, vp * c - vq * e_minus * s);
        v.set(row, q, vp * s + vq * e_minus * c);
    }
    // Rows: A <- G* A.
    for col in 0..k {
        let hp = a.get(p, col);
        let hq = a.get(q, col);
        a.set(p, col, hp * c - hq * phase * s);
        a.set(q, col, hp * s + hq * phase * c);
    }
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    let dp = a.get(p, p).re;
    let dq = a.get(q, q).re;
    a.set(p, p, dp.into());
    a.set(q, q, dq.into());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_hermitian(k: usize, seed: u64) -> ComplexMatrix {
        let mut r = rng::stream(seed, 0);
        let m = ComplexMatrix::from_fn(k, k, |_, _| rng::complex_normal(&mut r));
        (&m + &m.adjoint()).scale_real(0.5)
    }

    fn residual(h: &ComplexMatrix, e: &EigenDecomposition) -> f64 {
        let k = h.rows();
        (0..k)
            .map(|j| {
                let col = e.vectors.block(0, j, k, 1);
                (&(h * &col) - &col.scale_real(e.values[j])).frobenius_norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_gives_sorted_permutation() {
        let h = ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0]);
        let e = herm_eig(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.vectors.get(1, 0).re, 1.0);
        assert_eq!(e.vectors.get(2, 1).re, 1.0);
        assert_eq!(e.vectors.get(0, 2).re, 1.0);
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let e = herm_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn two_by_two_matches_characteristic_polynomial() {
        // [[a, b], [b̄, d]]: λ = (a+d)/2 ± sqrt(((a-d)/2)^2 + |b|^2)
        let b = Complex64::new(0.7, -1.3);
        let (a, d) = (2.0, -0.5);
        let h = ComplexMatrix::new(2, 2, vec![a.into(), b, b.conj(), d.into()]).unwrap();
        let e = herm_eig(&h).unwrap();
        let mid = (a + d) / 2.0;
        let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        assert!((e.values[0] - (mid - rad)).abs() < 1e-13);
        assert!((e.values[1] - (mid + rad)).abs() < 1e-13);
    }

    #[test]
    fn random_residual_and_unitarity() {
        for (k, seed) in [(5, 1), (12, 2), (32, 3)] {
            let h = random_hermitian(k, seed);
            let e = herm_eig(&h).unwrap();
            let hn = h.op_norm();
            assert!(residual(&h, &e) <= 1e-10 * hn, "k={k}");
            let uu = e.vectors.adjoint_mul(&e.vectors);
            assert!((&uu - &ComplexMatrix::identity(k)).max_abs() <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn deterministic_bytes() {
        let h = random_hermitian(7, 9);
        assert_eq!(herm_eig(&h).unwrap(), herm_eig(&h).unwrap());
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(herm_eig(&m), Err(Error::Contract(_))));
    }
}
