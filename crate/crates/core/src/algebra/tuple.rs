use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{Algebra, AlgebraKind};
use crate::linalg::{self, herm_eig, ComplexMatrix, Profile};
use crate::{par, Error, Result};

/// Fields with more vertices than this are processed in parallel.
const PAR_FIBERS: usize = 64;

/// An element of `M_{rows,cols}(A)`. Tuples in `A^n` have `rows = n` and
/// `cols = 1`; algebra elements are `1 × 1`.
///
/// For sampled fields `lipschitz` bounds the operator-norm slope of the
/// underlying continuous function per unit distance. It is tracked through
/// every operation and is always zero for algebras without a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuple {
    algebra: Arc<Algebra>,
    rows: usize,
    cols: usize,
    fibers: Vec<ComplexMatrix>,
    lipschitz: f64,
}

/// Outcome of a left-invertibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LgCertificate {
    pub member: bool,
    /// Smallest eigenvalue of `a*a` over all fibers.
    pub sigma_min: f64,
    /// Effective margin that `sigma_min` had to exceed.
    pub margin: f64,
}

fn map_fibers<T, F>(fibers: &[ComplexMatrix], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&ComplexMatrix) -> T + Sync + Send,
{
    if fibers.len() > PAR_FIBERS {
        par::map_slice(fibers, f)
    } else {
        fibers.iter().map(f).collect()
    }
}

fn collect_fibers(results: Vec<Result<ComplexMatrix>>) -> Result<Vec<ComplexMatrix>> {
    results.into_iter().collect()
}

impl Tuple {
    pub fn from_fibers(
        algebra: Arc<Algebra>,
        rows: usize,
        cols: usize,
        fibers: Vec<ComplexMatrix>,
        lipschitz: f64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("block shape must be at least 1x1".into()));
        }
        if fibers.len() != algebra.fiber_count() {
            return Err(Error::Shape(format!(
                "{} fibers for an algebra with {}",
                fibers.len(),
                algebra.fiber_count()
            )));
        }
        for (f, &k) in fibers.iter().zip(algebra.fiber_dims()) {
            if f.shape() != (rows * k, cols * k) {
                return Err(Error::Shape(format!(
                    "fiber {:?} does not match block shape {rows}x{cols} over M_{k}",
                    f.shape()
                )));
            }
        }
        if let AlgebraKind::Represented { basis, .. } = algebra.kind() {
            // Entries must lie in the span of the basis.
            for f in &fibers {
                for i in 0..rows {
                    for j in 0..cols {
                        let d = basis[0].rows();
                        let blk = f.block(i * d, j * d, d, d);
                        let mut proj = ComplexMatrix::zeros(d, d);
                        for b in basis {
                            proj = &proj + &b.scale(b.inner(&blk));
                        }
                        if (&blk - &proj).frobenius_norm() > 1e-8 * blk.frobenius_norm().max(1.0) {
                            return Err(Error::Contract(
                                "entry lies outside the represented algebra".into(),
                            ));
                        }
                    }
                }
            }
        }
        let lipschitz = if algebra.is_field() { lipschitz } else { 0.0 };
        Ok(Self {
            algebra,
            rows,
            cols,
            fibers,
            lipschitz,
        })
    }

    /// Constructor for results of operations already known to be well formed.
    pub(crate) fn raw(
        algebra: Arc<Algebra>,
        rows: usize,
        cols: usize,
        fibers: Vec<ComplexMatrix>,
        lipschitz: f64,
    ) -> Self {
        debug_assert_eq!(fibers.len(), algebra.fiber_count());
        let lipschitz = if algebra.is_field() { lipschitz } else { 0.0 };
        Self {
            algebra,
            rows,
            cols,
            fibers,
            lipschitz,
        }
    }

    pub fn zeros(algebra: Arc<Algebra>, rows: usize, cols: usize) -> Self {
        let fibers = algebra
            .fiber_dims()
            .iter()
            .map(|&k| ComplexMatrix::zeros(rows * k, cols * k))
            .collect();
        Self::raw(algebra, rows, cols, fibers, 0.0)
    }

    /// Identity of `M_r(A)`.
    pub fn identity(algebra: Arc<Algebra>, r: usize) -> Result<Self> {
        if !algebra.is_unital() {
            return Err(Error::Contract("algebra does not contain the unit".into()));
        }
        let fibers = algebra
            .fiber_dims()
            .iter()
            .map(|&k| ComplexMatrix::identity(r * k))
            .collect();
        Ok(Self::raw(algebra, r, r, fibers, 0.0))
    }

    /// Builds a field element from a function of the vertex coordinates.
    pub fn from_vertex_fn(
        algebra: Arc<Algebra>,
        rows: usize,
        lipschitz: f64,
        f: impl Fn([f64; 2]) -> ComplexMatrix,
    ) -> Result<Self> {
        let mesh = algebra
            .mesh()
            .ok_or_else(|| Error::Contract("vertex functions need a sampled field".into()))?;
        let fibers = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self::from_fibers(algebra, rows, 1, fibers, lipschitz)
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of block rows (`n` for a tuple in `A^n`).
    pub fn n(&self) -> usize {
        self.rows
    }

    pub fn fibers(&self) -> &[ComplexMatrix] {
        &self.fibers
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        if self.algebra.is_field() {
            self.lipschitz = lipschitz;
        }
        self
    }

    fn assert_compatible(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra,
            "operands live in different algebras"
        );
    }

    /// Whether two elements share the same algebra.
    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra
    }

    fn zip_fibers(
        &self,
        other: &Self,
        f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix + Sync + Send,
    ) -> Vec<ComplexMatrix> {
        self.assert_compatible(other);
        let pairs: Vec<(&ComplexMatrix, &ComplexMatrix)> =
            self.fibers.iter().zip(&other.fibers).collect();
        if pairs.len() > PAR_FIBERS {
            par::map_slice(&pairs, |(a, b)| f(a, b))
        } else {
            pairs.iter().map(|(a, b)| f(a, b)).collect()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        let fibers = self.zip_fibers(other, |a, b| a + b);
        Self::raw(
            self.algebra.clone(),
            self.rows,
            self.cols,
            fibers,
            self.lipschitz + other.lipschitz,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "sub shape mismatch");
        let fibers = self.zip_fibers(other, |a, b| a - b);
        Self::raw(
            self.algebra.clone(),
            self.rows,
            self.cols,
            fibers,
            self.lipschitz + other.lipschitz,
        )
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let fibers = map_fibers(&self.fibers, |f| f.scale(c));
        Self::raw(self.algebra.clone(), self.rows, self.cols, fibers, c.norm() * self.lipschitz)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(c.into())
    }

    pub fn adjoint(&self) -> Self {
        let fibers = map_fibers(&self.fibers, ComplexMatrix::adjoint);
        Self::raw(self.algebra.clone(), self.cols, self.rows, fibers, self.lipschitz)
    }

    /// Block product; Lipschitz bounds follow the product rule
    /// `L_ab ≤ L_a·‖b‖ + ‖a‖·L_b` with sup bounds over the whole space.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "block product shape mismatch");
        let fibers = self.zip_fibers(other, |a, b| a * b);
        let lipschitz = if self.algebra.is_field() {
            self.lipschitz * other.sup_bound() + self.sup_bound() * other.lipschitz
        } else {
            0.0
        };
        Self::raw(self.algebra.clone(), self.rows, other.cols, fibers, lipschitz)
    }

    /// Largest operator norm over the fibers. For a tuple this is the
    /// `M_{n,1}(A)` norm `‖a*a‖^{1/2}`.
    pub fn norm(&self) -> f64 {
        map_fibers(&self.fibers, ComplexMatrix::op_norm)
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// Upper bound for the norm of the underlying continuous element.
    pub fn sup_bound(&self) -> f64 {
        self.norm() + self.lipschitz * self.algebra.slack_radius()
    }

    /// `a*a`, an element of `M_cols(A)`.
    pub fn gram(&self) -> Self {
        let fibers = map_fibers(&self.fibers, ComplexMatrix::gram);
        let lipschitz = 2.0 * self.sup_bound() * self.lipschitz;
        Self::raw(self.algebra.clone(), self.cols, self.cols, fibers, lipschitz)
    }

    fn frob_factor(&self, block: usize) -> f64 {
        ((block * self.algebra.max_fiber_dim()) as f64).sqrt()
    }

    /// `a·q(|a|)` fiberwise with `q(t) = ψ(t)/t`; equals `v·ψ(|a|)`.
    ///
    /// Lipschitz bound: through the Hermitian dilation of `a` the map is
    /// the odd extension of `ψ`, which is `Lip(ψ)`-Lipschitz in Frobenius
    /// norm; passing between operator and Frobenius norms costs `√(c·k)`.
    pub fn right_mult_calc(&self, psi: Profile) -> Result<Self> {
        let fibers = collect_fibers(map_fibers(&self.fibers, |f| linalg::right_mult_calc(f, psi)))?;
        let lipschitz = self.frob_factor(self.cols) * psi.lipschitz_on(self.sup_bound()) * self.lipschitz;
        Ok(Self::raw(self.algebra.clone(), self.rows, self.cols, fibers, lipschitz))
    }

    /// Functional calculus of a positive square element.
    pub fn func_calc(&self, f: Profile) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape("functional calculus needs a square element".into()));
        }
        let fibers = collect_fibers(map_fibers(&self.fibers, |m| linalg::func_calc(m, f)))?;
        let lipschitz = if self.lipschitz == 0.0 {
            0.0
        } else {
            self.frob_factor(self.rows) * f.lipschitz_on(self.sup_bound()) * self.lipschitz
        };
        Ok(Self::raw(self.algebra.clone(), self.rows, self.cols, fibers, lipschitz))
    }

    /// Functional calculus of a Hermitian square element with an arbitrary
    /// complex function of Lipschitz constant `lip`.
    pub fn hermitian_calc(&self, f: impl Fn(f64) -> Complex64 + Sync + Send, lip: f64) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape("functional calculus needs a square element".into()));
        }
        let fibers = collect_fibers(map_fibers(&self.fibers, |m| linalg::hermitian_calc(m, &f)))?;
        let lipschitz = if self.lipschitz == 0.0 {
            0.0
        } else {
            self.frob_factor(self.rows) * lip * self.lipschitz
        };
        Ok(Self::raw(self.algebra.clone(), self.rows, self.cols, fibers, lipschitz))
    }

    /// `|a| = (a*a)^{1/2}`. Lipschitz via `‖|A|−|B|‖_F ≤ √2·‖A−B‖_F`.
    pub fn modulus(&self) -> Result<Self> {
        let fibers = collect_fibers(map_fibers(&self.fibers, |f| {
            linalg::func_calc(&f.gram(), Profile::Sqrt)
        }))?;
        let lipschitz = 2f64.sqrt() * self.frob_factor(self.cols.max(self.rows)) * self.lipschitz;
        Ok(Self::raw(self.algebra.clone(), self.cols, self.cols, fibers, lipschitz))
    }

    /// `|a*| = (a·a*)^{1/2}`, an element of `M_rows(A)`.
    pub fn star_modulus(&self) -> Result<Self> {
        self.adjoint().modulus()
    }

    /// Fiberwise inverse of a square element.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape("inverse needs a square element".into()));
        }
        let fibers = collect_fibers(map_fibers(&self.fibers, ComplexMatrix::inverse))?;
        let lipschitz = if self.lipschitz == 0.0 {
            0.0
        } else {
            let smin = map_fibers(&self.fibers, |f| {
                herm_eig(&f.gram()).map(|e| e.min().max(0.0).sqrt()).unwrap_or(0.0)
            })
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            let lower = smin - self.lipschitz * self.algebra.slack_radius();
            if lower > 0.0 {
                self.lipschitz / (lower * lower)
            } else {
                f64::INFINITY
            }
        };
        Ok(Self::raw(self.algebra.clone(), self.rows, self.cols, fibers, lipschitz))
    }

    /// Block entry `(i, j)` as an element of `A`.
    pub fn entry(&self, i: usize, j: usize) -> Self {
        assert!(i < self.rows && j < self.cols);
        let fibers = self
            .fibers
            .iter()
            .zip(self.algebra.fiber_dims())
            .map(|(f, &k)| f.block(i * k, j * k, k, k))
            .collect();
        Self::raw(self.algebra.clone(), 1, 1, fibers, self.lipschitz)
    }

    /// Stacks column elements into a taller column.
    pub fn stack(parts: &[Self]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("cannot stack an empty list".into()))?;
        if parts.iter().any(|p| p.cols != 1 || !p.same_algebra(first)) {
            return Err(Error::SortMismatch(
                "stacked entries must be columns over the same algebra".into(),
            ));
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let fibers = (0..first.fibers.len())
            .map(|f| ComplexMatrix::vstack(&parts.iter().map(|p| p.fibers[f].clone()).collect::<Vec<_>>()))
            .collect();
        let lipschitz = parts.iter().map(|p| p.lipschitz.powi(2)).sum::<f64>().sqrt();
        Ok(Self::raw(first.algebra.clone(), rows, 1, fibers, lipschitz))
    }

    /// Largest observed slope `‖a(p) − a(q)‖ / |p − q|` along mesh edges.
    /// The tracked Lipschitz bound always dominates it.
    pub fn measured_slope(&self) -> f64 {
        let Some(mesh) = self.algebra.mesh() else {
            return 0.0;
        };
        mesh.edges()
            .iter()
            .map(|e| (&self.fibers[e.a] - &self.fibers[e.b]).op_norm() / e.length)
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of `a*a` over the fibers.
    pub fn min_gram_eigenvalue(&self) -> f64 {
        map_fibers(&self.fibers, |f| match f.cols() {
            1 => f.frobenius_norm().powi(2),
            _ => herm_eig(&f.gram()).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY),
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    /// Margin that `min_gram_eigenvalue` has to beat for a certified member.
    ///
    /// On fields, `σ_min(a(x)) ≥ σ_min(a(p)) − L·r` for the vertex `p`
    /// nearest to `x`, so samples must clear `(L·r)²`. Matrix fibers of size
    /// ≥ 2 also clear a floor proportional to the eigensolver's error.
    pub fn effective_margin(&self, margin: f64) -> f64 {
        let slack = self.lipschitz * self.algebra.slack_radius();
        let mut eff = margin.max(slack * slack);
        if self.cols * self.algebra.max_fiber_dim() >= 2 {
            let n = self.norm();
            eff = eff.max(16.0 * f64::EPSILON * (self.cols * self.algebra.max_fiber_dim()) as f64 * n * n);
        }
        eff
    }

    /// Coordinates for derivative-free search: real and imaginary parts of
    /// basis coefficients (represented algebras) or of fiber entries.
    pub fn to_coords(&self) -> Vec<f64> {
        match self.algebra.kind() {
            AlgebraKind::Represented { basis, d, .. } => {
                let mut out = Vec::new();
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let blk = self.fibers[0].block(i * d, j * d, *d, *d);
                        for b in basis {
                            let c = b.inner(&blk);
                            out.push(c.re);
                            out.push(c.im);
                        }
                    }
                }
                out
            }
            _ => self
                .fibers
                .iter()
                .flat_map(|f| f.data().iter().flat_map(|z| [z.re, z.im]))
                .collect(),
        }
    }

    /// Inverse of [`Tuple::to_coords`]; not available for sampled fields.
    pub fn from_coords(algebra: Arc<Algebra>, rows: usize, cols: usize, coords: &[f64]) -> Result<Self> {
        match algebra.kind() {
            AlgebraKind::SampledField { .. } => Err(Error::Contract(
                "coordinate search is not available for sampled fields".into(),
            )),
            AlgebraKind::Represented { basis, d, .. } => {
                let m = basis.len();
                if coords.len() != 2 * m * rows * cols {
                    return Err(Error::Shape("coordinate count mismatch".into()));
                }
                let mut f = ComplexMatrix::zeros(rows * d, cols * d);
                let mut it = coords.chunks(2);
                for i in 0..rows {
                    for j in 0..cols {
                        let mut blk = ComplexMatrix::zeros(*d, *d);
                        for b in basis {
                            let c = it.next().expect("length checked");
                            blk = &blk + &b.scale(Complex64::new(c[0], c[1]));
                        }
                        f.set_block(i * d, j * d, &blk);
                    }
                }
                Ok(Self::raw(algebra, rows, cols, vec![f], 0.0))
            }
            _ => {
                let total: usize = algebra.fiber_dims().iter().map(|k| 2 * rows * cols * k * k).sum();
                if coords.len() != total {
                    return Err(Error::Shape("coordinate count mismatch".into()));
                }
                let mut off = 0;
                let fibers = algebra
                    .fiber_dims()
                    .iter()
                    .map(|&k| {
                        let len = rows * cols * k * k;
                        let data = coords[off..off + 2 * len]
                            .chunks(2)
                            .map(|c| Complex64::new(c[0], c[1]))
                            .collect();
                        off += 2 * len;
                        ComplexMatrix::new(rows * k, cols * k, data)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::raw(algebra, rows, cols, fibers, 0.0))
            }
        }
    }
}

/// `‖a‖ = ‖Σ a_i* a_i‖^{1/2}`; for fields the maximum over vertices.
pub fn tuple_norm(a: &Tuple) -> f64 {
    a.norm()
}

/// Certifies membership of `a` in `Lg_n(A)`: `a*a` must have smallest
/// eigenvalue above `margin` (raised by [`Tuple::effective_margin`]) at
/// every fiber.
pub fn is_lg(a: &Tuple, margin: f64) -> LgCertificate {
    let margin = a.effective_margin(margin);
    let sigma_min = a.min_gram_eigenvalue();
    LgCertificate {
        member: sigma_min > margin,
        sigma_min,
        margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_tuple;
    use crate::rng;

    fn m(k: usize) -> Arc<Algebra> {
        Algebra::full_matrix(k).unwrap().into_arc()
    }

    #[test]
    fn scalar_tuple_norm() {
        let a = m(1);
        let t = Tuple::from_fibers(
            a.clone(),
            2,
            1,
            vec![ComplexMatrix::from_real_rows(&[&[1.0], &[0.0]])],
            0.0,
        )
        .unwrap();
        assert!((tuple_norm(&t) - 1.0).abs() < 1e-15);
        assert_eq!(tuple_norm(&Tuple::zeros(a, 3, 1)), 0.0);
    }

    #[test]
    fn norm_equals_stacked_singular_value() {
        let a = m(3);
        let mut r = rng::stream(11, 0);
        let t = random_tuple(&a, 2, &mut r, 1.0);
        let gram = t.fibers()[0].gram();
        let top = herm_eig(&gram).unwrap().max().sqrt();
        assert!((tuple_norm(&t) - top).abs() <= 1e-12 * top);
        let via_gram = t.gram().norm().sqrt();
        assert!((tuple_norm(&t) - via_gram).abs() <= 1e-12 * top);
    }

    #[test]
    fn unit_and_zero_membership() {
        let a = m(2);
        let one = Tuple::identity(a.clone(), 1).unwrap();
        let c = is_lg(&one, 1e-8);
        assert!(c.member);
        assert!((c.sigma_min - 1.0).abs() < 1e-14);
        assert!(!is_lg(&Tuple::zeros(a, 1, 1), 1e-8).member);
    }

    #[test]
    fn disk_coordinate_is_not_member() {
        let alg = Algebra::disk(16, 1).unwrap().into_arc();
        let z = Tuple::from_vertex_fn(alg, 1, 1.0, |p| {
            ComplexMatrix::scalar(Complex64::new(p[0], p[1]))
        })
        .unwrap();
        let c = is_lg(&z, 1e-8);
        assert!(!c.member);
        assert_eq!(c.sigma_min, 0.0);
        assert!(z.measured_slope() <= z.lipschitz() + 1e-12);
    }

    #[test]
    fn coords_roundtrip() {
        let a = Algebra::direct_sum(vec![1, 2]).unwrap().into_arc();
        let mut r = rng::stream(3, 0);
        let t = random_tuple(&a, 2, &mut r, 1.0);
        let back = Tuple::from_coords(a, 2, 1, &t.to_coords()).unwrap();
        assert_eq!(back, t);
    }
}
