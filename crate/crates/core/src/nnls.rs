//! Least squares with sign constraints on a subset of the unknowns.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff for rank decisions and pseudo-inverses.
pub const RANK_TOL: f64 = 1e-10;

fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (RANK_TOL * smax).max(f64::MIN_POSITIVE);
    svd.solve(b, eps).expect("U and V were computed")
}

pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&x| x > RANK_TOL * smax).count()
}

/// Lawson–Hanson active-set solution of `min ‖Ax − b‖², x ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let mut x = DVector::<f64>::zeros(n);
    if n == 0 {
        return Ok(x);
    }
    let tol = 1e3 * f64::EPSILON * a.norm() * b.norm().max(f64::MIN_POSITIVE) * (n as f64);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;

    let sub_solve = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let ap = DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
        let zp = pinv_solve(&ap, b);
        let mut z = DVector::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            z[j] = zp[k];
        }
        z
    };

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            if inner > 3 * n + 10 {
                return Err(Error::NumericalFailure {
                    context: "NNLS inner loop did not terminate".into(),
                    residual: (a * &x - b).norm(),
                });
            }
            let z = sub_solve(&passive);
            if (0..n).filter(|&k| passive[k]).all(|k| z[k] > 0.0) {
                x = z;
                break;
            }
            let alpha = (0..n)
                .filter(|&k| passive[k] && z[k] <= 0.0)
                .map(|k| x[k] / (x[k] - z[k]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= f64::EPSILON * x.amax() {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    // exact feasibility: the active set holds zeros, the passive set positives
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution {
    pub x: DVector<f64>,
    pub rank_deficient: bool,
}

/// Minimizes `‖Ax − b‖²` with `x_j ≥ 0` where `constrained[j]` and `x_j` free otherwise.
///
/// The free block is eliminated by projecting onto the orthogonal complement
/// of its column space; sign-constrained NNLS runs on the projected problem;
/// the free coefficients are the minimum-norm fit to what remains.
pub fn mixed_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, constrained: &[bool]) -> Result<MixedSolution> {
    let n = a.ncols();
    if constrained.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: constrained.len(),
        });
    }
    let free: Vec<usize> = (0..n).filter(|&j| !constrained[j]).collect();
    let cons: Vec<usize> = (0..n).filter(|&j| constrained[j]).collect();
    let pick = |idx: &[usize]| DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
    let af = pick(&free);
    let ac = pick(&cons);

    let (ac_proj, b_proj) = if free.is_empty() {
        (ac.clone(), b.clone())
    } else {
        let svd = af.clone().svd(true, false);
        let u = svd.u.expect("U was requested");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > RANK_TOL * smax)
            .collect();
        let q = DMatrix::from_fn(a.nrows(), keep.len(), |i, k| u[(i, keep[k])]);
        let proj = |m: &DMatrix<f64>| m - &q * (q.transpose() * m);
        let bp = b - &q * (q.transpose() * b);
        (proj(&ac), bp)
    };

    let xc = nnls(&ac_proj, &b_proj)?;
    let xf = pinv_solve(&af, &(b - &ac * &xc));

    let mut x = DVector::zeros(n);
    for (k, &j) in free.iter().enumerate() {
        x[j] = xf[k];
    }
    for (k, &j) in cons.iter().enumerate() {
        x[j] = xc[k];
    }
    Ok(MixedSolution {
        x,
        rank_deficient: numerical_rank(a) < n,
    })
}
