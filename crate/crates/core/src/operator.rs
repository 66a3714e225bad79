//! Operator algebra and the Hilbert–Schmidt coherence-vector representation.
//!
//! A density matrix ρ of a `D`-level system is expanded in an orthonormal basis
//! of Hermitian operators `{σ_i}` (σ_0 = identity) under the scalar product
//! `⟨⟨A|B⟩⟩ = Tr(A†B)/D`, giving the coherence vector `r_i = ⟨⟨σ_i|ρ⟩⟩`.
//! Linear maps on operators become `D²×D²` supermatrices with components
//! `M_jk = ⟨⟨σ_j|L[σ_k]⟩⟩`.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative Hermiticity tolerance applied to generator inputs.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// `‖M − M†‖ / max(‖M‖, 1)` in the Frobenius norm.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    let scale = m.norm().max(1.0);
    (m - m.adjoint()).norm() / scale
}

pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

fn check_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidGenerator(format!("{what} has non-finite entries")))
    }
}

/// Hilbert–Schmidt scalar product `Tr(A†B)/D`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    let d = check_square(a)?;
    if b.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: b.nrows(),
        });
    }
    Ok(a.dotc(b) / d as f64)
}

/// Orthonormal Hermitian operator basis of a `D`-dimensional Hilbert space.
///
/// Layout: index 0 is the identity; indices `2i−1, 2i` (i = 1..D(D−1)/2) are the
/// symmetric and antisymmetric off-diagonal pair for the i-th upper-triangular
/// position `(l, m)`, enumerated row-major; the last `D−1` elements are the
/// diagonal traceless operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

pub type BasisHandle = Arc<OperatorBasis>;

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of elements, `D²`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let g = a.dotc(b) / self.dim as f64;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - re(target)).norm());
            }
        }
        worst
    }

    pub fn handle(self) -> BasisHandle {
        Arc::new(self)
    }
}

/// Builds the orthonormal operator basis for dimension `dim`.
pub fn build_basis(dim: usize) -> Result<OperatorBasis> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = dim as f64;
    let amp = (d / 2.0).sqrt();
    let mut elements = Vec::with_capacity(dim * dim);
    elements.push(ComplexMatrix::identity(dim, dim));

    for l in 0..dim {
        for m in (l + 1)..dim {
            let mut sym = ComplexMatrix::zeros(dim, dim);
            sym[(l, m)] = re(amp);
            sym[(m, l)] = re(amp);
            let mut anti = ComplexMatrix::zeros(dim, dim);
            anti[(l, m)] = C64::new(0.0, -amp);
            anti[(m, l)] = C64::new(0.0, amp);
            elements.push(sym);
            elements.push(anti);
        }
    }

    for diag in diagonal_elements(dim) {
        elements.push(ComplexMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            diag.into_iter().map(re),
        )));
    }
    Ok(OperatorBasis { dim, elements })
}

/// Traceless diagonal basis elements, Gram–Schmidt orthonormalized under `Tr(·)/D`.
///
/// Powers of two start from Walsh sign patterns (bit-reversed row order), which
/// reproduces `diag(1,1,−1,−1), diag(1,−1,1,−1), diag(1,−1,−1,1)` at `D = 4`;
/// other dimensions start from the staircase `(1,…,1,−k,0,…)`.
fn diagonal_elements(dim: usize) -> Vec<Vec<f64>> {
    let candidates: Vec<Vec<f64>> = if dim.is_power_of_two() {
        let bits = dim.trailing_zeros();
        (1..dim)
            .map(|k| {
                let row = k.reverse_bits() >> (usize::BITS - bits);
                (0..dim)
                    .map(|j| if (row & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect()
    } else {
        (1..dim)
            .map(|k| {
                (0..dim)
                    .map(|j| match j.cmp(&k) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -(k as f64),
                        std::cmp::Ordering::Greater => 0.0,
                    })
                    .collect()
            })
            .collect()
    };

    let d = dim as f64;
    let inner = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / d;
    let ones = vec![1.0; dim];
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for mut v in candidates {
        for prev in std::iter::once(&ones).chain(out.iter()) {
            let c = inner(prev, &v) / inner(prev, prev);
            v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
        }
        let n = inner(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        out.push(v);
    }
    out
}

/// Expansion coefficients `r_i = ⟨⟨σ_i|ρ⟩⟩` of an operator in a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVector {
    basis: BasisHandle,
    coeffs: DVector<C64>,
}

impl CoherenceVector {
    pub fn new(basis: BasisHandle, coeffs: DVector<C64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &BasisHandle {
        &self.basis
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<C64> {
        self.coeffs
    }

    /// `Tr ρ = D·r_0`.
    pub fn trace(&self) -> C64 {
        self.coeffs[0] * self.basis.dim() as f64
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

pub fn vectorize(rho: &ComplexMatrix, basis: &BasisHandle) -> Result<CoherenceVector> {
    let d = check_square(rho)?;
    if d != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: d,
        });
    }
    let coeffs = DVector::from_iterator(
        basis.len(),
        basis.elements().iter().map(|s| s.dotc(rho) / d as f64),
    );
    Ok(CoherenceVector {
        basis: basis.clone(),
        coeffs,
    })
}

pub fn devectorize(r: &CoherenceVector) -> ComplexMatrix {
    let d = r.basis.dim();
    r.basis
        .elements()
        .iter()
        .zip(r.coeffs.iter())
        .fold(ComplexMatrix::zeros(d, d), |acc, (s, c)| acc + s * *c)
}

/// A `D²×D²` supermatrix tied to an operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    basis: BasisHandle,
    matrix: DMatrix<C64>,
}

impl Superoperator {
    pub fn new(basis: BasisHandle, matrix: DMatrix<C64>) -> Result<Self> {
        let n = basis.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn zeros(basis: &BasisHandle) -> Self {
        let n = basis.len();
        Self {
            basis: basis.clone(),
            matrix: DMatrix::zeros(n, n),
        }
    }

    /// Supermatrix of an arbitrary linear map on `D×D` operators.
    pub fn from_map<F>(basis: &BasisHandle, map: F) -> Self
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let n = basis.len();
        let d = basis.dim() as f64;
        let mut matrix = DMatrix::zeros(n, n);
        for (k, sk) in basis.elements().iter().enumerate() {
            let image = map(sk);
            for (j, sj) in basis.elements().iter().enumerate() {
                matrix[(j, k)] = sj.dotc(&image) / d;
            }
        }
        Self {
            basis: basis.clone(),
            matrix,
        }
    }

    pub fn basis(&self) -> &BasisHandle {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, r: &CoherenceVector) -> Result<CoherenceVector> {
        if r.coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: r.coeffs.len(),
            });
        }
        Ok(CoherenceVector {
            basis: self.basis.clone(),
            coeffs: &self.matrix * &r.coeffs,
        })
    }

    /// Supermatrix commutator `[self, other]`.
    pub fn commutator(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            basis: self.basis.clone(),
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        }
    }

    pub fn scale(&self, c: f64) -> Superoperator {
        Superoperator {
            basis: self.basis.clone(),
            matrix: &self.matrix * re(c),
        }
    }

    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Max-abs entry of row 0; zero for trace-preserving generators.
    pub fn trace_row_residual(&self) -> f64 {
        self.matrix.row(0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part among the entries; zero for Hermiticity-preserving maps.
    pub fn max_imag(&self) -> f64 {
        self.matrix.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

impl Add for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            basis: self.basis.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            basis: self.basis.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Mul<f64> for &Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: f64) -> Superoperator {
        self.scale(rhs)
    }
}

fn check_basis_dim(m: &ComplexMatrix, basis: &OperatorBasis) -> Result<()> {
    let d = check_square(m)?;
    if d != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: d,
        });
    }
    Ok(())
}

/// Supermatrix of `−i[H, •]`.
pub fn unitary_superop(h: &ComplexMatrix, basis: &BasisHandle) -> Result<Superoperator> {
    check_basis_dim(h, basis)?;
    check_finite(h, "Hamiltonian")?;
    let res = hermiticity_residual(h);
    if res > HERMITICITY_TOL {
        return Err(Error::InvalidGenerator(format!(
            "Hamiltonian is not Hermitian (residual {res:.3e})"
        )));
    }
    let minus_i = C64::new(0.0, -1.0);
    Ok(Superoperator::from_map(basis, |x| commutator(h, x) * minus_i))
}

/// Supermatrix of `Σ_k γ_k (L_k • L_k† − ½{L_k†L_k, •})`.
pub fn dissipator_superop(
    ops: &[ComplexMatrix],
    rates: &[f64],
    basis: &BasisHandle,
) -> Result<Superoperator> {
    if ops.len() != rates.len() {
        return Err(Error::DimensionMismatch {
            expected: ops.len(),
            found: rates.len(),
        });
    }
    for (l, &g) in ops.iter().zip(rates) {
        check_basis_dim(l, basis)?;
        check_finite(l, "jump operator")?;
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::InvalidRate(g));
        }
    }
    let terms: Vec<(ComplexMatrix, ComplexMatrix, f64)> = ops
        .iter()
        .zip(rates)
        .filter(|(_, &g)| g > 0.0)
        .map(|(l, &g)| (l.clone(), l.adjoint() * l, g))
        .collect();
    Ok(Superoperator::from_map(basis, |x| {
        let d = x.nrows();
        terms
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, (l, ldl, g)| {
                acc + (l * x * l.adjoint() - anticommutator(ldl, x) * re(0.5)) * re(*g)
            })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let x = ComplexMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        let y = ComplexMatrix::from_row_slice(
            2,
            2,
            &[re(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), re(0.0)],
        );
        let z = ComplexMatrix::from_row_slice(2, 2, &[re(1.0), re(0.0), re(0.0), re(-1.0)]);
        (x, y, z)
    }

    #[test]
    fn basis_rejects_small_dimension() {
        assert_eq!(build_basis(1), Err(Error::InvalidDimension(1)));
        assert_eq!(build_basis(0), Err(Error::InvalidDimension(0)));
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let b = build_basis(2).unwrap();
        let (x, y, z) = pauli();
        assert_eq!(b.len(), 4);
        assert_abs_diff_eq!((b.element(1) - x).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((b.element(2) - y).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((b.element(3) - z).norm(), 0.0, epsilon = 1e-15);
        for s in b.elements() {
            assert_abs_diff_eq!((s * s).trace().re / 2.0, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn four_level_basis_matches_explicit_listing() {
        let b = build_basis(4).unwrap();
        let diag = |v: [f64; 4]| ComplexMatrix::from_diagonal(&DVector::from_iterator(4, v.map(re)));
        assert_abs_diff_eq!((b.element(13) - diag([1., 1., -1., -1.])).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((b.element(14) - diag([1., -1., 1., -1.])).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((b.element(15) - diag([1., -1., -1., 1.])).norm(), 0.0, epsilon = 1e-14);
        let s1 = b.element(1);
        let r2 = 2f64.sqrt();
        assert_abs_diff_eq!(s1[(0, 1)].re, r2, epsilon = 1e-15);
        assert_abs_diff_eq!(s1[(1, 0)].re, r2, epsilon = 1e-15);
        assert_abs_diff_eq!(s1.norm(), 2.0, epsilon = 1e-14);
        // pair index 6 is (l, m) = (3, 4) in 1-indexed notation
        assert_abs_diff_eq!(b.element(11)[(2, 3)].re, r2, epsilon = 1e-15);
    }

    #[test]
    fn basis_orthonormal_hermitian_traceless() {
        for d in 2..=7 {
            let b = build_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            assert!(b.orthonormality_error() < 1e-12, "D = {d}");
            for s in &b.elements()[1..] {
                assert!(hermiticity_residual(s) < 1e-15);
                assert!(s.trace().norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hs_inner_examples() {
        let (x, _, z) = pauli();
        assert_abs_diff_eq!(hs_inner(&x, &x).unwrap().re, 1.0);
        assert_abs_diff_eq!(hs_inner(&x, &z).unwrap().norm(), 0.0);
        let i4 = ComplexMatrix::identity(4, 4);
        assert_abs_diff_eq!(hs_inner(&i4, &i4).unwrap().re, 1.0);
        assert!(matches!(
            hs_inner(&x, &i4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vectorize_examples() {
        let b = build_basis(2).unwrap().handle();
        let mixed = ComplexMatrix::identity(2, 2) * re(0.5);
        let r = vectorize(&mixed, &b).unwrap();
        assert_abs_diff_eq!(r.coeffs()[0].re, 0.5);
        for k in 1..4 {
            assert_abs_diff_eq!(r.coeffs()[k].norm(), 0.0);
        }
        let mut up = ComplexMatrix::zeros(2, 2);
        up[(0, 0)] = re(1.0);
        let r = vectorize(&up, &b).unwrap();
        assert_abs_diff_eq!(r.coeffs()[0].re, 0.5);
        assert_abs_diff_eq!(r.coeffs()[3].re, 0.5);
        assert_abs_diff_eq!(r.coeffs()[1].norm() + r.coeffs()[2].norm(), 0.0);
        assert_abs_diff_eq!((devectorize(&r) - up).norm(), 0.0, epsilon = 1e-15);
        assert!(vectorize(&ComplexMatrix::identity(3, 3), &b).is_err());
    }

    #[test]
    fn unitary_superop_examples() {
        let b = build_basis(2).unwrap().handle();
        let zero = unitary_superop(&ComplexMatrix::zeros(2, 2), &b).unwrap();
        assert_abs_diff_eq!(zero.norm(), 0.0);

        let (x, y, z) = pauli();
        let m = unitary_superop(&(z.clone() * re(0.5)), &b).unwrap();
        // dr_x/dt = -r_y, dr_y/dt = r_x: rotation of the (x, y) components
        assert_abs_diff_eq!(m.matrix()[(1, 2)].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.matrix()[(2, 1)].re, 1.0, epsilon = 1e-15);
        assert!(m.max_imag() < 1e-15);
        assert!(m.trace_row_residual() < 1e-15);

        let nonherm = x.clone() + y * C64::new(0.0, 1.0);
        assert!(matches!(
            unitary_superop(&nonherm, &b),
            Err(Error::InvalidGenerator(_))
        ));
    }

    #[test]
    fn dissipator_examples() {
        let b = build_basis(2).unwrap().handle();
        let (_, _, z) = pauli();
        let m = dissipator_superop(&[z.clone()], &[1.0], &b).unwrap();
        // pure dephasing: coherences decay at rate 2, populations untouched
        assert_abs_diff_eq!(m.matrix()[(1, 1)].re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.matrix()[(2, 2)].re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.matrix()[(3, 3)].norm(), 0.0, epsilon = 1e-15);
        assert!(m.trace_row_residual() < 1e-15);

        let empty = dissipator_superop(&[], &[], &b).unwrap();
        assert_abs_diff_eq!(empty.norm(), 0.0);

        assert_eq!(
            dissipator_superop(&[z], &[-0.1], &b),
            Err(Error::InvalidRate(-0.1))
        );
    }
}
