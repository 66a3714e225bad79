//! Supplies `𝕃_0(s)` and `𝕃_0'(s)` to the CD engine and the integrator, either
//! rebuilt on demand or interpolated from a precomputed s-grid.

use nalgebra::DMatrix;

use crate::counterdiabatic::derivative::{lindbladian_derivative, DerivativeOptions};
use crate::error::{Error, Result};
use crate::models::AnnealingScenario;
use crate::operator::Superoperator;

pub const DEFAULT_GRID_POINTS: usize = 201;

/// Supermatrices of Hermiticity-preserving maps are real; larger imaginary parts are a bug.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    /// Rebuild at every requested `s`.
    Exact,
    /// Cubic Hermite interpolation between `points` uniform nodes.
    Grid { points: usize },
}

impl Evaluation {
    /// Exact for a qubit, gridded otherwise.
    pub fn default_for(dim: usize) -> Self {
        if dim <= 2 {
            Evaluation::Exact
        } else {
            Evaluation::Grid {
                points: DEFAULT_GRID_POINTS,
            }
        }
    }
}

pub fn real_part(m: &Superoperator) -> Result<DMatrix<f64>> {
    real_part_with(m, IMAG_TOL)
}

/// As [`real_part`] with a caller-chosen relative tolerance.
pub fn real_part_with(m: &Superoperator, tol: f64) -> Result<DMatrix<f64>> {
    let imag = m.max_imag();
    if imag > tol * m.norm().max(1.0) {
        return Err(Error::InvalidGenerator(format!(
            "supermatrix has imaginary entries up to {imag:.3e}"
        )));
    }
    Ok(m.matrix().map(|z| z.re))
}

pub fn uniform_grid(points: usize) -> Vec<f64> {
    let n = points.max(2) - 1;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

#[derive(Debug, Clone)]
struct Nodes {
    grid: Vec<f64>,
    l: Vec<Superoperator>,
    dl: Vec<Superoperator>,
    l_real: Vec<DMatrix<f64>>,
    dl_real: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct GeneratorSource {
    scenario: AnnealingScenario,
    derivative: DerivativeOptions,
    nodes: Option<Nodes>,
}

impl GeneratorSource {
    pub fn new(scenario: AnnealingScenario, evaluation: Evaluation, derivative: DerivativeOptions) -> Result<Self> {
        let nodes = match evaluation {
            Evaluation::Exact => None,
            Evaluation::Grid { points } => {
                if points < 2 {
                    return Err(Error::InvalidParameter("generator grid needs at least 2 points".into()));
                }
                let grid = uniform_grid(points);
                let mut l = Vec::with_capacity(points);
                let mut dl = Vec::with_capacity(points);
                for &s in &grid {
                    l.push(scenario.lindbladian(s)?);
                    dl.push(lindbladian_derivative(|x| scenario.lindbladian(x), s, derivative)?.value);
                }
                let l_real = l.iter().map(real_part).collect::<Result<_>>()?;
                let dl_real = dl.iter().map(real_part).collect::<Result<_>>()?;
                Some(Nodes {
                    grid,
                    l,
                    dl,
                    l_real,
                    dl_real,
                })
            }
        };
        Ok(Self {
            scenario,
            derivative,
            nodes,
        })
    }

    pub fn scenario(&self) -> &AnnealingScenario {
        &self.scenario
    }

    pub fn evaluation(&self) -> Evaluation {
        match &self.nodes {
            None => Evaluation::Exact,
            Some(n) => Evaluation::Grid { points: n.grid.len() },
        }
    }

    /// Grid nodes, when gridded.
    pub fn grid(&self) -> Option<&[f64]> {
        self.nodes.as_ref().map(|n| n.grid.as_slice())
    }

    /// `(𝕃_0, 𝕃_0')` at grid node `k`.
    pub fn node(&self, k: usize) -> Option<(f64, &Superoperator, &Superoperator)> {
        self.nodes.as_ref().map(|n| (n.grid[k], &n.l[k], &n.dl[k]))
    }

    /// The generator and its derivative used for CD construction at `s`.
    pub fn pair(&self, s: f64) -> Result<(Superoperator, Superoperator)> {
        let l = self.scenario.lindbladian(s)?;
        let dl = lindbladian_derivative(|x| self.scenario.lindbladian(x), s, self.derivative)?.value;
        Ok((l, dl))
    }

    /// Real supermatrix `𝕃_0(s)` as seen by the integrator.
    pub fn l0_real(&self, s: f64) -> Result<DMatrix<f64>> {
        match &self.nodes {
            None => real_part(&self.scenario.lindbladian(s)?),
            Some(n) => {
                let (k, t, h) = locate(&n.grid, s);
                let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
                let h10 = t * (1.0 - t) * (1.0 - t);
                let h01 = t * t * (3.0 - 2.0 * t);
                let h11 = t * t * (t - 1.0);
                Ok(&n.l_real[k] * h00
                    + &n.dl_real[k] * (h10 * h)
                    + &n.l_real[k + 1] * h01
                    + &n.dl_real[k + 1] * (h11 * h))
            }
        }
    }
}

/// Interval index, local coordinate in `[0, 1]` and width for a uniform grid.
pub(crate) fn locate(grid: &[f64], s: f64) -> (usize, f64, f64) {
    let n = grid.len() - 1;
    let s = s.clamp(grid[0], grid[n]);
    let h = (grid[n] - grid[0]) / n as f64;
    let k = (((s - grid[0]) / h).floor() as usize).min(n - 1);
    let t = ((s - grid[k]) / h).clamp(0.0, 1.0);
    (k, t, h)
}
