//! Random elements, perturbation directions and probe elements.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::{Algebra, AlgebraKind, Tuple};
use crate::linalg::{hermitian_calc, ComplexMatrix};
use crate::rng::{self, StreamRng};
use crate::{Error, Result};

fn gaussian(rows: usize, cols: usize, rng: &mut StreamRng, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng::complex_normal(rng) * scale)
}

/// Random tuple in `A^n` drawn from `rng`.
///
/// Matrix fibers get independent complex Gaussian entries. Represented
/// algebras get Gaussian basis coefficients. Sampled fields are quadratic
/// polynomials in the vertex coordinates with Gaussian matrix coefficients;
/// their declared Lipschitz bound is read off the coefficients, valid on
/// the unit disk and on `[0, 1]`.
pub fn random_tuple(algebra: &Arc<Algebra>, n: usize, rng: &mut StreamRng, scale: f64) -> Tuple {
    match algebra.kind() {
        AlgebraKind::FullMatrix { .. } | AlgebraKind::DirectSum { .. } => {
            let fibers = algebra
                .fiber_dims()
                .iter()
                .map(|&k| gaussian(n * k, k, rng, scale))
                .collect();
            Tuple::raw(algebra.clone(), n, 1, fibers, 0.0)
        }
        AlgebraKind::Represented { d, basis, .. } => {
            let mut f = ComplexMatrix::zeros(n * d, *d);
            for i in 0..n {
                let mut blk = ComplexMatrix::zeros(*d, *d);
                for b in basis {
                    blk = &blk + &b.scale(rng::complex_normal(rng) * scale);
                }
                f.set_block(i * d, 0, &blk);
            }
            Tuple::raw(algebra.clone(), n, 1, vec![f], 0.0)
        }
        AlgebraKind::SampledField { mesh, k } => {
            let planar = mesh.dimension() == 2;
            let c: Vec<ComplexMatrix> = (0..6)
                .map(|i| {
                    if !planar && matches!(i, 2 | 4 | 5) {
                        ComplexMatrix::zeros(n * k, *k)
                    } else {
                        gaussian(n * k, *k, rng, scale)
                    }
                })
                .collect();
            let nrm: Vec<f64> = c.iter().map(ComplexMatrix::op_norm).collect();
            let lipschitz = (nrm[1].powi(2) + nrm[2].powi(2)).sqrt()
                + 2.0 * nrm[3]
                + 2f64.sqrt() * nrm[4]
                + 2.0 * nrm[5];
            let fibers = mesh
                .vertices()
                .iter()
                .map(|&[x, y]| {
                    let terms = [1.0, x, y, x * x, x * y, y * y];
                    let mut v = ComplexMatrix::zeros(n * k, *k);
                    for (m, &w) in c.iter().zip(&terms) {
                        if w != 0.0 {
                            v = &v + &m.scale_real(w);
                        }
                    }
                    v
                })
                .collect();
            Tuple::raw(algebra.clone(), n, 1, fibers, lipschitz)
        }
    }
}

/// Deterministic random tuple for a given seed.
pub fn random_element(algebra: &Arc<Algebra>, n: usize, seed: u64, scale: f64) -> Tuple {
    let mut r = rng::stream(seed, 0);
    random_tuple(algebra, n, &mut r, scale)
}

fn random_unitary(k: usize, rng: &mut StreamRng) -> ComplexMatrix {
    let g = gaussian(k, k, rng, 1.0);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    hermitian_calc(&h, |t| Complex64::from_polar(1.0, t)).expect("Hermitian by construction")
}

/// A random unitary of `A`, constant over the mesh for fields.
fn random_unitary_element(algebra: &Arc<Algebra>, rng: &mut StreamRng) -> Tuple {
    let fibers = match algebra.kind() {
        AlgebraKind::FullMatrix { k } => vec![random_unitary(*k, rng)],
        AlgebraKind::DirectSum { blocks } => blocks.iter().map(|&k| random_unitary(k, rng)).collect(),
        AlgebraKind::SampledField { k, .. } => {
            let u = random_unitary(*k, rng);
            vec![u; algebra.fiber_count()]
        }
        AlgebraKind::Represented { basis, .. } => {
            let mut x = ComplexMatrix::zeros(basis[0].rows(), basis[0].cols());
            for b in basis {
                x = &x + &b.scale(rng::complex_normal(rng));
            }
            let h = (&x + &x.adjoint()).scale_real(0.5);
            vec![hermitian_calc(&h, |t| Complex64::from_polar(1.0, t)).expect("Hermitian")]
        }
    };
    Tuple::raw(algebra.clone(), 1, 1, fibers, 0.0)
}

/// Isometry tuples `w ∈ A^n` (`w*w = 1`) used as perturbation directions.
///
/// The list starts with the four scalar phases in each slot, followed by
/// `extra` random isometries `(u_1, …, u_n)/√n` with unitary `u_i ∈ A`.
/// All directions are constant over meshes, so their Lipschitz bound is 0.
pub fn unitary_directions(algebra: &Arc<Algebra>, n: usize, extra: usize, seed: u64) -> Result<Vec<Tuple>> {
    if !algebra.is_unital() {
        return Err(Error::Contract(
            "perturbation directions need a unital algebra".into(),
        ));
    }
    let one = Tuple::identity(algebra.clone(), 1)?;
    let zero = Tuple::zeros(algebra.clone(), 1, 1);
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut out = Vec::new();
    for slot in 0..n {
        for &ph in &phases {
            let parts: Vec<Tuple> = (0..n)
                .map(|j| if j == slot { one.scale(ph) } else { zero.clone() })
                .collect();
            out.push(Tuple::stack(&parts)?);
        }
    }
    let mut r = rng::stream(seed, 0xd1);
    for _ in 0..extra {
        let parts: Vec<Tuple> = (0..n)
            .map(|_| random_unitary_element(algebra, &mut r).scale_real(1.0 / (n as f64).sqrt()))
            .collect();
        out.push(Tuple::stack(&parts)?);
    }
    Ok(out)
}

fn normalized(t: Tuple) -> Tuple {
    let n = t.norm();
    if n > 0.0 {
        t.scale_real(1.0 / n)
    } else {
        t
    }
}

fn pad(first: Tuple, n: usize) -> Tuple {
    let zero = Tuple::zeros(first.algebra().clone(), 1, 1);
    let mut parts = vec![first];
    parts.extend((1..n).map(|_| zero.clone()));
    Tuple::stack(&parts).expect("columns over one algebra")
}

/// Distinguished elements of the unit ball of `A^n`, used to seed searches
/// for large values of sup-quantified formulas. On the disk these include
/// the coordinate function `z`; on the interval the function `2t − 1`.
pub fn probes(algebra: &Arc<Algebra>, n: usize) -> Vec<Tuple> {
    let mut out = Vec::new();
    match algebra.kind() {
        AlgebraKind::SampledField { mesh, k } => {
            let k = *k;
            let scalar_fn = |f: &dyn Fn(f64, f64) -> Complex64, lip: f64| {
                Tuple::from_vertex_fn(algebra.clone(), 1, lip, |p| {
                    ComplexMatrix::identity(k).scale(f(p[0], p[1]))
                })
                .expect("field algebra")
            };
            if mesh.dimension() == 2 {
                let z = scalar_fn(&|x, y| Complex64::new(x, y), 1.0);
                let zb = scalar_fn(&|x, y| Complex64::new(x, -y), 1.0);
                let z2 = scalar_fn(&|x, y| Complex64::new(x, y).powi(2), 2.0);
                if n == 1 {
                    out.push(z);
                    out.push(zb);
                    out.push(z2);
                } else {
                    let s = 1.0 / 2f64.sqrt();
                    out.push(pad(z.clone(), n));
                    let mut pair = vec![z.scale_real(s), zb.scale_real(s)];
                    pair.extend((2..n).map(|_| Tuple::zeros(algebra.clone(), 1, 1)));
                    out.push(Tuple::stack(&pair).expect("columns"));
                    let mut pair = vec![z.scale_real(s), z2.scale_real(s)];
                    pair.extend((2..n).map(|_| Tuple::zeros(algebra.clone(), 1, 1)));
                    out.push(Tuple::stack(&pair).expect("columns"));
                }
            } else {
                let t = scalar_fn(&|x, _| Complex64::new(2.0 * x - 1.0, 0.0), 2.0);
                let e = scalar_fn(&|x, _| Complex64::from_polar(1.0, PI * x), PI);
                out.push(pad(t, n));
                out.push(pad(e, n));
            }
        }
        AlgebraKind::Represented { basis, .. } => {
            for b in basis.iter().take(4) {
                let el = Tuple::raw(algebra.clone(), 1, 1, vec![b.clone()], 0.0);
                out.push(pad(normalized(el), n));
            }
        }
        _ => {
            let unit = |i: usize, j: usize| {
                let fibers = algebra
                    .fiber_dims()
                    .iter()
                    .map(|&k| {
                        let mut m = ComplexMatrix::zeros(k, k);
                        if i < k && j < k {
                            m.set(i, j, 1.0.into());
                        }
                        m
                    })
                    .collect();
                Tuple::raw(algebra.clone(), 1, 1, fibers, 0.0)
            };
            out.push(pad(unit(0, 0), n));
            if algebra.max_fiber_dim() >= 2 {
                out.push(pad(normalized(unit(0, 1)), n));
            }
            if let Ok(one) = Tuple::identity(algebra.clone(), 1) {
                out.push(pad(one, n));
            }
        }
    }
    out.into_iter().map(normalized).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::is_lg;

    #[test]
    fn same_seed_same_tuple() {
        for alg in [Algebra::full_matrix(3).unwrap(), Algebra::disk(8, 1).unwrap()] {
            let a = alg.into_arc();
            assert_eq!(random_element(&a, 2, 5, 1.0), random_element(&a, 2, 5, 1.0));
        }
    }

    #[test]
    fn zero_scale_gives_zero() {
        let a = Algebra::full_matrix(2).unwrap().into_arc();
        assert_eq!(random_element(&a, 2, 1, 0.0).norm(), 0.0);
    }

    #[test]
    fn random_square_matrices_are_members() {
        let a = Algebra::full_matrix(4).unwrap().into_arc();
        for seed in 0..100 {
            let t = random_element(&a, 1, seed, 1.0);
            // rank oracle: smallest singular value well away from zero
            let c = is_lg(&t, 1e-12);
            assert!(c.member, "seed {seed}: {c:?}");
        }
    }

    #[test]
    fn field_lipschitz_dominates_measured_slope() {
        for alg in [Algebra::disk(16, 2).unwrap(), Algebra::interval(32, 1).unwrap()] {
            let a = alg.into_arc();
            for seed in 0..5 {
                let t = random_element(&a, 2, seed, 1.0);
                assert!(t.measured_slope() <= t.lipschitz() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn directions_are_isometries() {
        for alg in [Algebra::full_matrix(3).unwrap(), Algebra::direct_sum(vec![1, 2]).unwrap()] {
            let a = alg.into_arc();
            for w in unitary_directions(&a, 2, 3, 7).unwrap() {
                let g = w.gram();
                let id = Tuple::identity(a.clone(), 1).unwrap();
                assert!(g.sub(&id).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn probes_lie_in_unit_ball() {
        for alg in [
            Algebra::full_matrix(3).unwrap(),
            Algebra::disk(8, 1).unwrap(),
            Algebra::interval(8, 1).unwrap(),
        ] {
            let a = alg.into_arc();
            for n in 1..=2 {
                for p in probes(&a, n) {
                    assert!(p.norm() <= 1.0 + 1e-12);
                    assert_eq!(p.n(), n);
                }
            }
        }
    }
}
