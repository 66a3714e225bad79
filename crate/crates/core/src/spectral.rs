//! Biorthonormal eigen-decomposition of Lindbladian supermatrices, eigenvalue
//! tracking along the schedule, and Jordan-block overlaps.
//!
//! In a one-dimensional Jordan form `𝕃 = Σ_α λ_α |D_α⟩⟩⟨⟨E_α|` with
//! `⟨⟨E_β|D_α⟩⟩ = δ_αβ`. Right vectors are the columns of `V`, left vectors the
//! rows of `V⁻¹`.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::eig::{condition_number, general_eigen};
use crate::error::{Error, Result};
use crate::operator::{re, BasisHandle, CoherenceVector, ComplexMatrix, Superoperator, C64};

pub const CONDITION_LIMIT: f64 = 1e8;
pub const RESIDUAL_LIMIT: f64 = 1e-8;
/// `|λ| / max(1, max|λ|)` below which an eigenvalue counts as zero.
pub const ZERO_TOL: f64 = 1e-9;
/// Relative distance below which two eigenvalues share a cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
pub const TRACK_WARN_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct JordanSpectrum {
    basis: BasisHandle,
    eigenvalues: Vec<C64>,
    right: ComplexMatrix,
    left: ComplexMatrix,
    one_d: bool,
    condition: f64,
    max_residual: f64,
}

impl JordanSpectrum {
    pub fn basis(&self) -> &BasisHandle {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Right vectors `|D_α⟩⟩` as columns.
    pub fn right(&self) -> &ComplexMatrix {
        &self.right
    }

    /// Left vectors `⟨⟨E_α|` as rows.
    pub fn left(&self) -> &ComplexMatrix {
        &self.left
    }

    /// Whether the one-dimensional Jordan form diagnostics passed.
    pub fn one_d(&self) -> bool {
        self.one_d
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    fn scale(&self) -> f64 {
        self.eigenvalues.iter().fold(1.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn zero_indices(&self) -> Vec<usize> {
        let tol = ZERO_TOL * self.scale();
        (0..self.len()).filter(|&k| self.eigenvalues[k].norm() < tol).collect()
    }

    /// `max |⟨⟨E_β|D_α⟩⟩ − δ_αβ|`.
    pub fn biorthonormality_error(&self) -> f64 {
        let g = &self.left * &self.right;
        let n = self.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let t = if i == j { re(1.0) } else { re(0.0) };
                worst = worst.max((g[(i, j)] - t).norm());
            }
        }
        worst
    }

    /// `‖V Λ V⁻¹ − 𝕃‖ / ‖𝕃‖`.
    pub fn reconstruction_error(&self, l: &Superoperator) -> f64 {
        let lam = ComplexMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        let rec = &self.right * lam * &self.left;
        (rec - l.matrix()).norm() / l.norm().max(1e-300)
    }

    /// Reorders eigenpairs so the new label `k` holds old label `perm[k]`.
    fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.len();
        Self {
            basis: self.basis.clone(),
            eigenvalues: perm.iter().map(|&k| self.eigenvalues[k]).collect(),
            right: DMatrix::from_fn(n, n, |i, j| self.right[(i, perm[j])]),
            left: DMatrix::from_fn(n, n, |i, j| self.left[(perm[i], j)]),
            one_d: self.one_d,
            condition: self.condition,
            max_residual: self.max_residual,
        }
    }
}

fn clusters_by<F: Fn(usize) -> f64>(idx: &[usize], key: F, tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &k in idx {
        match out.last_mut() {
            Some(c) if (key(k) - key(*c.last().unwrap())).abs() <= tol => c.push(k),
            _ => out.push(vec![k]),
        }
    }
    out
}

/// Ascending `|Im λ|`, then descending `Re λ`, then positive imaginary part first.
/// Relaxation modes precede oscillating ones, so the steady state leads.
fn canonical_order(values: &[C64]) -> Vec<usize> {
    let scale = values.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let tol = CLUSTER_TOL * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].im.abs().total_cmp(&values[b].im.abs()));
    let mut order = Vec::with_capacity(values.len());
    for mut c in clusters_by(&idx, |k| values[k].im.abs(), tol) {
        c.sort_by(|&a, &b| values[b].re.total_cmp(&values[a].re));
        for mut sub in clusters_by(&c, |k| values[k].re, tol) {
            sub.sort_by(|&a, &b| values[b].im.total_cmp(&values[a].im));
            order.extend(sub);
        }
    }
    order
}

pub fn decompose(l: &Superoperator) -> Result<JordanSpectrum> {
    let m = l.matrix();
    let eig = general_eigen(m)?;
    let n = m.nrows();
    let order = canonical_order(&eig.values);
    let eigenvalues: Vec<C64> = order.iter().map(|&k| eig.values[k]).collect();
    let mut right = DMatrix::from_fn(n, n, |i, j| eig.vectors[(i, order[j])]);

    let scale = eigenvalues.iter().fold(1.0_f64, |a, z| a.max(z.norm()));
    let zero: Vec<usize> = (0..n)
        .filter(|&k| eigenvalues[k].norm() < ZERO_TOL * scale)
        .collect();
    if let [k] = zero[..] {
        let d = l.basis().dim() as f64;
        let tr = right[(0, k)] * d;
        if tr.norm() > 1e-12 {
            let mut col = right.column_mut(k);
            col /= tr;
        }
    }

    let condition = condition_number(&right);
    let left = right.clone().try_inverse();
    let lnorm = l.norm().max(1.0);
    let max_residual = (0..n)
        .map(|k| {
            let v = right.column(k);
            (m * v - v * eigenvalues[k]).norm() / (lnorm * v.norm())
        })
        .fold(0.0, f64::max);
    let left = match left {
        Some(inv) => inv,
        None => {
            return Err(Error::NumericalFailure {
                context: "eigenvector matrix is singular (non-diagonalizable generator)".into(),
                residual: condition,
            })
        }
    };
    let one_d = !eig.defective && condition < CONDITION_LIMIT && max_residual < RESIDUAL_LIMIT;
    if !one_d {
        warn!("1D Jordan form diagnostic failed: cond = {condition:.3e}, residual = {max_residual:.3e}");
    }
    Ok(JordanSpectrum {
        basis: l.basis().clone(),
        eigenvalues,
        right,
        left,
        one_d,
        condition,
        max_residual,
    })
}

/// The zero-eigenvalue right vector normalized to unit trace.
pub fn find_iss(spec: &JordanSpectrum) -> Result<(usize, CoherenceVector)> {
    let zero = spec.zero_indices();
    match zero[..] {
        [] => {
            let smallest = spec.eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            Err(Error::NoSteadyState(smallest))
        }
        [k] => {
            let d = spec.basis.dim() as f64;
            let col = spec.right.column(k);
            let tr = col[0] * d;
            if tr.norm() < 1e-12 {
                return Err(Error::NoSteadyState(spec.eigenvalues[k].norm()));
            }
            let coeffs = col.into_owned() / tr;
            Ok((k, CoherenceVector::new(spec.basis.clone(), coeffs)?))
        }
        _ => Err(Error::AmbiguousSteadyState(zero.len())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackReport {
    /// New label `k` was `permutation[k]` in the untracked spectrum.
    pub permutation: Vec<usize>,
    /// Smallest matched overlap `|⟨⟨E_α^prev|D_α^next⟩⟩|`.
    pub min_overlap: f64,
    pub warning: bool,
}

/// Relabels `next` to follow `prev`, then fixes each right vector's phase so
/// its largest component is real positive.
pub fn track_spectrum(prev: &JordanSpectrum, next: &JordanSpectrum) -> Result<(JordanSpectrum, TrackReport)> {
    let n = prev.len();
    if next.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: next.len(),
        });
    }
    let overlap = &prev.left * &next.right;
    let mut assigned_prev = vec![false; n];
    let mut assigned_next = vec![false; n];
    let mut perm = vec![usize::MAX; n];
    let mut entries: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| (overlap[(a, b)].norm(), a, b))
        .collect();
    entries.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    for (_, a, b) in entries {
        if !assigned_prev[a] && !assigned_next[b] {
            assigned_prev[a] = true;
            assigned_next[b] = true;
            perm[a] = b;
        }
    }
    let mut out = next.permuted(&perm);

    // Inside degenerate clusters individual vectors are arbitrary; align the
    // subspace with the previous labels instead.
    let scale = out.scale();
    let mut seen = vec![false; n];
    for k in 0..n {
        if seen[k] {
            continue;
        }
        let cluster: Vec<usize> = (k..n)
            .filter(|&j| (out.eigenvalues[j] - out.eigenvalues[k]).norm() < CLUSTER_TOL * scale)
            .collect();
        cluster.iter().for_each(|&j| seen[j] = true);
        if cluster.len() < 2 {
            continue;
        }
        let c = cluster.len();
        let m = DMatrix::from_fn(c, c, |i, j| {
            (prev.left.row(cluster[i]) * out.right.column(cluster[j]))[(0, 0)]
        });
        let Some(minv) = m.clone().try_inverse() else {
            continue;
        };
        let dk = DMatrix::from_fn(n, c, |i, j| out.right[(i, cluster[j])]);
        let ek = DMatrix::from_fn(c, n, |i, j| out.left[(cluster[i], j)]);
        let new_d = dk * minv;
        let new_e = m * ek;
        for (jj, &j) in cluster.iter().enumerate() {
            let nrm = new_d.column(jj).norm();
            for i in 0..n {
                out.right[(i, j)] = new_d[(i, jj)] / nrm;
                out.left[(j, i)] = new_e[(jj, i)] * nrm;
            }
        }
    }

    let iss = match out.zero_indices()[..] {
        [k] => Some(k),
        _ => None,
    };
    for k in 0..n {
        if Some(k) == iss {
            continue;
        }
        let col = out.right.column(k);
        let big = col.iter().copied().fold(re(0.0), |m, z| if z.norm() > m.norm() { z } else { m });
        if big.norm() == 0.0 {
            continue;
        }
        let phase = big.conj() / big.norm();
        let mut col = out.right.column_mut(k);
        col *= phase;
        let mut row = out.left.row_mut(k);
        row *= phase.conj();
    }

    let tracked = &prev.left * &out.right;
    let min_overlap = (0..n).map(|k| tracked[(k, k)].norm()).fold(f64::INFINITY, f64::min);
    let warning = min_overlap < TRACK_WARN_OVERLAP;
    if warning {
        warn!("spectral tracking overlap dropped to {min_overlap:.3}");
    }
    Ok((
        out,
        TrackReport {
            permutation: perm,
            min_overlap,
            warning,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackWarning {
    pub s: f64,
    pub min_overlap: f64,
}

/// Tracked spectra over an s-grid.
#[derive(Debug, Clone)]
pub struct SpectrumTrack {
    pub grid: Vec<f64>,
    pub spectra: Vec<JordanSpectrum>,
    pub min_overlaps: Vec<f64>,
    pub warnings: Vec<TrackWarning>,
}

impl SpectrumTrack {
    pub fn build<F>(grid: &[f64], generator: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Superoperator>,
    {
        let mut spectra: Vec<JordanSpectrum> = Vec::with_capacity(grid.len());
        let mut min_overlaps = Vec::with_capacity(grid.len());
        let mut warnings = Vec::new();
        for &s in grid {
            let spec = decompose(&generator(s)?)?;
            let spec = match spectra.last() {
                None => {
                    min_overlaps.push(1.0);
                    spec
                }
                Some(prev) => {
                    let (t, rep) = track_spectrum(prev, &spec)?;
                    min_overlaps.push(rep.min_overlap);
                    if rep.warning {
                        warnings.push(TrackWarning {
                            s,
                            min_overlap: rep.min_overlap,
                        });
                    }
                    t
                }
            };
            spectra.push(spec);
        }
        Ok(Self {
            grid: grid.to_vec(),
            spectra,
            min_overlaps,
            warnings,
        })
    }
}

/// `|⟨⟨E_α|r⟩⟩|` for every label α.
pub fn jb_overlaps(spec: &JordanSpectrum, r: &CoherenceVector) -> Result<Vec<f64>> {
    if r.coeffs().len() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.len(),
            found: r.coeffs().len(),
        });
    }
    Ok((&spec.left * r.coeffs()).iter().map(|z| z.norm()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::hamiltonian::{pauli_x, pauli_z, QubitModel};
    use crate::models::{AnnealingScenario, BathSpec, Model};
    use crate::evolution::observables::thermal_state;
    use crate::operator::{build_basis, dissipator_superop, unitary_superop, vectorize, devectorize};
    use std::f64::consts::PI;

    fn qubit_open(eta: f64) -> AnnealingScenario {
        let bath = BathSpec::with_temperature(eta, 2.23, 8.0 * PI, true).unwrap();
        AnnealingScenario::with_default_coupling(Model::Qubit(QubitModel::new(1.0, 1.0).unwrap()), Some(bath))
            .unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-10
    }

    #[test]
    fn unitary_qubit_spectrum() {
        let basis = build_basis(2).unwrap().handle();
        let l = unitary_superop(&(pauli_z() * re(0.5)), &basis).unwrap();
        let spec = decompose(&l).unwrap();
        let ev = spec.eigenvalues();
        assert!(close(ev[0], re(0.0)) && close(ev[1], re(0.0)));
        assert!(close(ev[2], C64::new(0.0, 1.0)) && close(ev[3], C64::new(0.0, -1.0)));
        assert!(spec.one_d());

        let spec = decompose(&unitary_superop(&pauli_x(), &basis).unwrap()).unwrap();
        assert!(close(spec.eigenvalues()[2], C64::new(0.0, 2.0)));
        assert!(matches!(find_iss(&spec), Err(Error::AmbiguousSteadyState(2))));
    }

    #[test]
    fn diagonal_supermatrix() {
        let basis = build_basis(2).unwrap().handle();
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![re(0.0), re(-1.0), re(-2.0), re(-3.0)]));
        let spec = decompose(&Superoperator::new(basis, m).unwrap()).unwrap();
        for k in 0..4 {
            assert!(close(spec.eigenvalues()[k], re(-(k as f64))));
            assert!((spec.right()[(k, k)].norm() - 1.0).abs() < 1e-12 || k == 0);
        }
        assert!(spec.biorthonormality_error() < 1e-12);
    }

    #[test]
    fn ame_qubit_iss_is_thermal() {
        let sc = qubit_open(1e-4);
        for s in [0.0, 0.25, 0.5, 0.8] {
            let l = sc.lindbladian(s).unwrap();
            let spec = decompose(&l).unwrap();
            assert!(spec.one_d());
            assert!(spec.eigenvalues()[0].norm() < 1e-9);
            assert!(spec.biorthonormality_error() < 1e-10);
            assert!(spec.reconstruction_error(&l) < 1e-8);
            let (k, r) = find_iss(&spec).unwrap();
            assert_eq!(k, 0);
            let th = thermal_state(&sc.hamiltonian(s).unwrap(), 1.0 / 2.23).unwrap();
            assert!((devectorize(&r) - th).norm() < 1e-8, "s = {s}");
            let ov = jb_overlaps(&spec, &r).unwrap();
            assert!((ov[0] - 1.0).abs() < 1e-10);
            assert!(ov[1..].iter().all(|&x| x < 1e-10));
        }
        // at s = 1 the coupling commutes with H: populations never relax
        let spec = decompose(&sc.lindbladian(1.0).unwrap()).unwrap();
        assert!(matches!(find_iss(&spec), Err(Error::AmbiguousSteadyState(2))));
    }

    #[test]
    fn dephasing_and_damping_steady_states() {
        let basis = build_basis(2).unwrap().handle();
        let deph = dissipator_superop(&[pauli_z()], &[1.0], &basis).unwrap();
        assert!(matches!(find_iss(&decompose(&deph).unwrap()), Err(Error::AmbiguousSteadyState(2))));

        let mut lower = ComplexMatrix::zeros(2, 2);
        lower[(0, 1)] = re(1.0);
        let damp = dissipator_superop(&[lower], &[1.0], &basis).unwrap();
        let (_, r) = find_iss(&decompose(&damp).unwrap()).unwrap();
        let mut g = ComplexMatrix::zeros(2, 2);
        g[(0, 0)] = re(1.0);
        assert!((devectorize(&r) - g).norm() < 1e-12);
    }

    #[test]
    fn tracking_recovers_identity_and_swaps() {
        let sc = qubit_open(1e-4);
        let spec = decompose(&sc.lindbladian(0.5).unwrap()).unwrap();
        let (_, rep) = track_spectrum(&spec, &spec).unwrap();
        assert_eq!(rep.permutation, vec![0, 1, 2, 3]);

        let swapped = spec.permuted(&[0, 2, 1, 3]);
        let (t, rep) = track_spectrum(&spec, &swapped).unwrap();
        assert_eq!(rep.permutation, vec![0, 2, 1, 3]);
        for k in 0..4 {
            assert!(close(t.eigenvalues()[k], spec.eigenvalues()[k]));
        }
    }

    #[test]
    fn ame_qubit_track_is_smooth() {
        let sc = qubit_open(1e-4);
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let track = SpectrumTrack::build(&grid, |s| sc.lindbladian(s)).unwrap();
        assert!(track.warnings.is_empty());
        assert!(track.min_overlaps.iter().all(|&o| o > 0.9));
    }

    #[test]
    fn overlap_of_right_vector_is_indicator() {
        let spec = decompose(&qubit_open(1e-2).lindbladian(0.3).unwrap()).unwrap();
        for b in 0..4 {
            let r = CoherenceVector::new(spec.basis().clone(), spec.right().column(b).into_owned()).unwrap();
            let ov = jb_overlaps(&spec, &r).unwrap();
            for (a, x) in ov.iter().enumerate() {
                let t = if a == b { 1.0 } else { 0.0 };
                assert!((x - t).abs() < 1e-10);
            }
        }
        let basis = spec.basis().clone();
        let r = vectorize(&ComplexMatrix::identity(2, 2), &basis).unwrap();
        assert!(jb_overlaps(&spec, &r).is_ok());
    }
}
