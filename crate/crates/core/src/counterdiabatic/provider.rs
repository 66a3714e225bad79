use nalgebra::DMatrix;

use crate::counterdiabatic::ansatz::{ansatz_supermatrix, AnsatzTerm};
use crate::counterdiabatic::exact::{exact_cd, residual_eq19};
use crate::counterdiabatic::variational::{assemble_lsq, combine, solve_variational};
use crate::error::Result;
use crate::generator::{locate, real_part_with, GeneratorSource};
use crate::operator::Superoperator;
use crate::spectral::decompose;

/// Relative imaginary residue tolerated in `𝔸` rebuilt from an eigenbasis, whose
/// roundoff scales with the eigenvector condition number.
const EXACT_IMAG_TOL: f64 = 1e-6;
const TERM_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum CdMode {
    None,
    Exact,
    Variational(Vec<AnsatzTerm>),
}

/// The CD generator at one schedule point, with solve diagnostics.
#[derive(Debug, Clone)]
pub struct CdPoint {
    pub s: f64,
    pub generator: Superoperator,
    /// Variational coefficients (empty otherwise).
    pub coefficients: Vec<f64>,
    /// `‖[𝕃' − [𝔸, 𝕃_0], 𝕃_0]‖²`.
    pub residual: f64,
    pub residual_at_zero: f64,
    pub skipped_pairs: usize,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone)]
pub struct CdProvider {
    mode: CdMode,
    supers: Vec<Superoperator>,
    constrained: Vec<bool>,
    cache: Option<Vec<CdPoint>>,
    cache_real: Vec<DMatrix<f64>>,
}

impl CdProvider {
    pub fn none() -> Self {
        Self {
            mode: CdMode::None,
            supers: Vec::new(),
            constrained: Vec::new(),
            cache: None,
            cache_real: Vec::new(),
        }
    }

    /// Precomputes every grid node when the source is gridded.
    pub fn new(mode: CdMode, source: &GeneratorSource) -> Result<Self> {
        let basis = source.scenario().basis();
        let (supers, constrained) = match &mode {
            CdMode::Variational(terms) => (
                terms.iter().map(|t| ansatz_supermatrix(t, basis)).collect::<Result<Vec<_>>>()?,
                terms.iter().map(|t| t.is_constrained()).collect(),
            ),
            _ => (Vec::new(), Vec::new()),
        };
        let mut p = Self {
            mode,
            supers,
            constrained,
            cache: None,
            cache_real: Vec::new(),
        };
        if p.mode != CdMode::None {
            if let Some(grid) = source.grid() {
                let mut points = Vec::with_capacity(grid.len());
                for k in 0..grid.len() {
                    let (s, l, dl) = source.node(k).expect("gridded source");
                    points.push(p.solve(s, l, dl)?);
                }
                p.cache_real = points.iter().map(|c| p.real(&c.generator)).collect::<Result<_>>()?;
                p.cache = Some(points);
            }
        }
        Ok(p)
    }

    pub fn mode(&self) -> &CdMode {
        &self.mode
    }

    pub fn is_none(&self) -> bool {
        self.mode == CdMode::None
    }

    /// Precomputed node solutions for gridded sources.
    pub fn cached_points(&self) -> Option<&[CdPoint]> {
        self.cache.as_deref()
    }

    fn real(&self, g: &Superoperator) -> Result<DMatrix<f64>> {
        let tol = if self.mode == CdMode::Exact { EXACT_IMAG_TOL } else { TERM_IMAG_TOL };
        real_part_with(g, tol)
    }

    fn solve(&self, s: f64, l0: &Superoperator, dl: &Superoperator) -> Result<CdPoint> {
        match &self.mode {
            CdMode::None => {
                let zero = Superoperator::zeros(l0.basis());
                let r = residual_eq19(&zero, l0, dl).powi(2);
                Ok(CdPoint {
                    s,
                    generator: zero,
                    coefficients: Vec::new(),
                    residual: r,
                    residual_at_zero: r,
                    skipped_pairs: 0,
                    rank_deficient: false,
                })
            }
            CdMode::Exact => {
                let spec = decompose(l0)?;
                let ex = exact_cd(&spec, dl)?;
                let zero = Superoperator::zeros(l0.basis());
                Ok(CdPoint {
                    s,
                    residual: residual_eq19(&ex.generator, l0, dl).powi(2),
                    residual_at_zero: residual_eq19(&zero, l0, dl).powi(2),
                    generator: ex.generator,
                    coefficients: Vec::new(),
                    skipped_pairs: ex.skipped_pairs,
                    rank_deficient: false,
                })
            }
            CdMode::Variational(_) => {
                let problem = assemble_lsq(l0, dl, &self.supers)?;
                let sol = solve_variational(&problem, &self.constrained)?;
                Ok(CdPoint {
                    s,
                    generator: combine(&self.supers, &sol.coefficients)?,
                    coefficients: sol.coefficients,
                    residual: sol.residual,
                    residual_at_zero: sol.residual_at_zero,
                    skipped_pairs: 0,
                    rank_deficient: sol.rank_deficient,
                })
            }
        }
    }

    /// Solves at `s` from freshly built generators, bypassing any cache.
    pub fn point(&self, source: &GeneratorSource, s: f64) -> Result<CdPoint> {
        let (l, dl) = source.pair(s)?;
        self.solve(s, &l, &dl)
    }

    /// `𝔸_s` for the integrator: `None` without CD, linear interpolation on the grid, or a fresh solve.
    pub fn a_real(&self, source: &GeneratorSource, s: f64) -> Result<Option<DMatrix<f64>>> {
        if self.is_none() {
            return Ok(None);
        }
        match (&self.cache, source.grid()) {
            (Some(_), Some(grid)) => {
                let (k, t, _) = locate(grid, s);
                Ok(Some(&self.cache_real[k] * (1.0 - t) + &self.cache_real[k + 1] * t))
            }
            _ => Ok(Some(self.real(&self.point(source, s)?.generator)?)),
        }
    }
}
