//! Dense eigensolvers: Hermitian (for Hamiltonians and density matrices) and
//! general complex (for Lindbladian supermatrices).

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, C64};

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Right eigenpairs of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<C64>,
    /// Unit 2-norm eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
    /// Back-substitution hit a zero pivot with a nonzero right-hand side.
    pub defective: bool,
}

/// Complex Schur factorization followed by triangular back-substitution.
pub fn general_eigen(m: &ComplexMatrix) -> Result<EigenPairs> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidGenerator("non-finite supermatrix entries".into()));
    }
    // QR iterations can stall on highly symmetric inputs; a scalar shift leaves
    // the eigenvectors unchanged but breaks the symmetry of the iteration.
    let norm = m.norm().max(1.0);
    let shifts = [
        C64::new(0.0, 0.0),
        C64::new(0.1234 * norm, 0.0),
        C64::new(0.0, 0.3717 * norm),
        C64::new(-0.2718 * norm, 0.1414 * norm),
    ];
    let mut factored = None;
    for shift in shifts {
        let shifted = m + ComplexMatrix::identity(n, n) * shift;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 100 * n.max(10)) {
            factored = Some((schur, shift));
            break;
        }
    }
    let (schur, shift) = factored.ok_or_else(|| Error::NumericalFailure {
        context: "complex Schur decomposition".into(),
        residual: f64::NAN,
    })?;
    let (q, t) = schur.unpack();
    let scale = t.norm().max(1e-300);
    let pivot_tol = 1e-10 * scale;
    let mut defective = false;

    let mut x_all = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut num = C64::new(0.0, 0.0);
            for i in (j + 1)..=k {
                num -= t[(j, i)] * x[i];
            }
            let mut den = t[(j, j)] - lambda;
            if den.norm() < pivot_tol {
                // a degenerate cluster: pick the component inside the eigenspace
                if num.norm() < 1e-8 * scale {
                    x[j] = C64::new(0.0, 0.0);
                    continue;
                }
                defective = true;
                den = C64::new(pivot_tol, 0.0);
            }
            x[j] = num / den;
        }
        for (i, xi) in x.into_iter().enumerate() {
            x_all[(i, k)] = xi;
        }
    }

    let mut vectors = q * x_all;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        col /= C64::new(nrm, 0.0);
    }
    Ok(EigenPairs {
        values: t.diagonal().iter().map(|&z| z - shift).collect(),
        vectors,
        defective,
    })
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::re;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn general_eigen_residuals() {
        for seed in 0..8 {
            let m = random_matrix(16, seed);
            let e = general_eigen(&m).unwrap();
            assert!(!e.defective);
            for (k, l) in e.values.iter().enumerate() {
                let v = e.vectors.column(k);
                assert!((&m * v - v * *l).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn diagonal_and_degenerate() {
        let m = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            re(0.0),
            re(-1.0),
            re(-1.0),
            re(-3.0),
        ]));
        let e = general_eigen(&m).unwrap();
        assert!(!e.defective);
        assert!(condition_number(&e.vectors) < 1.0 + 1e-12);
    }

    #[test]
    fn jordan_block_is_defective() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[re(1.0), re(1.0), re(0.0), re(1.0)]);
        let e = general_eigen(&m).unwrap();
        assert!(e.defective || condition_number(&e.vectors) > 1e8);
    }

    #[test]
    fn hermitian_sorted() {
        let a = random_matrix(5, 42);
        let h = &a + a.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for (k, &l) in vals.iter().enumerate() {
            let v = vecs.column(k);
            assert!((&h * v - v * re(l)).norm() < 1e-12);
        }
    }
}
