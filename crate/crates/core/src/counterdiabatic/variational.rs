use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::nnls::mixed_least_squares;
use crate::operator::{CoherenceVector, Superoperator};

/// Real least-squares problem `min ‖B x − y‖²` with stacked real and imaginary parts.
#[derive(Debug, Clone)]
pub struct LsqProblem {
    pub columns: DMatrix<f64>,
    pub target: DVector<f64>,
}

fn stack(m: &Superoperator) -> impl Iterator<Item = f64> + '_ {
    let re = m.matrix().iter().map(|z| z.re);
    let im = m.matrix().iter().map(|z| z.im);
    re.chain(im)
}

/// Columns `𝔹_i = [[𝔸_i, 𝕃_0], 𝕃_0]` and target `𝕐 = [𝕃_0', 𝕃_0]`.
pub fn assemble_lsq(l0: &Superoperator, dl: &Superoperator, terms: &[Superoperator]) -> Result<LsqProblem> {
    let n = l0.dim();
    for t in std::iter::once(dl).chain(terms) {
        if t.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.dim(),
            });
        }
    }
    let rows = 2 * n * n;
    let target = DVector::from_iterator(rows, stack(&dl.commutator(l0)));
    let mut columns = DMatrix::zeros(rows, terms.len());
    for (j, a) in terms.iter().enumerate() {
        let b = a.commutator(l0).commutator(l0);
        for (i, v) in stack(&b).enumerate() {
            columns[(i, j)] = v;
        }
    }
    Ok(LsqProblem { columns, target })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationalSolution {
    pub coefficients: Vec<f64>,
    /// `‖B x − y‖²` at the optimum.
    pub residual: f64,
    /// `‖y‖²`, the residual with every coefficient zero.
    pub residual_at_zero: f64,
    /// Constrained coefficients pinned at zero.
    pub active: Vec<bool>,
    pub rank_deficient: bool,
}

/// Nonnegativity on `constrained` coefficients, free elsewhere.
pub fn solve_variational(problem: &LsqProblem, constrained: &[bool]) -> Result<VariationalSolution> {
    if problem.columns.ncols() == 0 {
        return Err(Error::InvalidParameter("variational ansatz has no terms".into()));
    }
    let sol = mixed_least_squares(&problem.columns, &problem.target, constrained)?;
    let residual = (&problem.columns * &sol.x - &problem.target).norm_squared();
    let active = sol
        .x
        .iter()
        .zip(constrained)
        .map(|(&x, &c)| c && x == 0.0)
        .collect();
    Ok(VariationalSolution {
        coefficients: sol.x.iter().copied().collect(),
        residual,
        residual_at_zero: problem.target.norm_squared(),
        active,
        rank_deficient: sol.rank_deficient,
    })
}

/// `Σ_j α_j 𝔸_j`.
pub fn combine(terms: &[Superoperator], coefficients: &[f64]) -> Result<Superoperator> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidParameter("no terms to combine".into()))?;
    let mut acc = Superoperator::zeros(first.basis());
    for (t, &c) in terms.iter().zip(coefficients) {
        if c != 0.0 {
            acc = &acc + &t.scale(c);
        }
    }
    Ok(acc)
}

/// Detailed-balance check for a solved dissipative part: any generator obeying
/// KMS leaves the Gibbs state invariant, so `‖𝔻 r_β‖ / (‖𝔻‖ ‖r_β‖)` measures the violation.
pub fn kms_violation(dissipative: &Superoperator, gibbs: &CoherenceVector) -> Result<f64> {
    let norm = dissipative.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let image = dissipative.apply(gibbs)?;
    Ok(image.coeffs().norm() / (norm * gibbs.coeffs().norm()))
}
