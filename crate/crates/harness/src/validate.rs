//! The invariant and oracle suite behind `opencd validate`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use opencd_core::counterdiabatic::{
    ansatz_supermatrix, assemble_lsq, closed_system_gauge_qubit, exact_cd, kms_violation, lindbladian_derivative,
    named_terms, residual_eq19, solve_variational, CdMode, CdProvider, DerivativeOptions,
};
use opencd_core::evolution::{evolve, observables, spectrum_track, IntegratorConfig};
use opencd_core::generator::{Evaluation, GeneratorSource};
use opencd_core::models::{
    kelvin_to_angular_ghz, AnnealingScenario, BathSpec, Model, PSpinModel, QubitModel,
};
use opencd_core::nnls::nnls;
use opencd_core::operator::{
    build_basis, devectorize, dissipator_superop, unitary_superop, vectorize, ComplexMatrix, Superoperator, C64,
};
use opencd_core::spectral::{decompose, find_iss};
use opencd_core::evolution::thermal_state;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn below(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed: value < tolerance,
        value,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &str, err: impl std::fmt::Display) -> Check {
    Check {
        name: name.into(),
        passed: false,
        value: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {err}"),
    }
}

type Fallible = Result<Check, Box<dyn std::error::Error + Send + Sync>>;

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

fn random_general(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn qubit_scenario(eta: Option<f64>, lamb: bool) -> AnnealingScenario {
    let bath = eta.map(|e| BathSpec::with_temperature(e, 2.23, 8.0 * PI, lamb).expect("valid bath"));
    AnnealingScenario::with_default_coupling(Model::Qubit(QubitModel::new(1.0, 1.0).expect("valid")), bath)
        .expect("valid scenario")
}

pub fn pspin_scenario(eta: f64) -> AnnealingScenario {
    let bath = BathSpec::with_temperature(eta, 2.23, 8.0 * PI, true).expect("valid bath");
    AnnealingScenario::with_default_coupling(
        Model::PSpin(PSpinModel::new(3, 3, 1.0, 1.0).expect("valid")),
        Some(bath),
    )
    .expect("valid scenario")
}

fn pieces(sc: &AnnealingScenario, s: f64) -> opencd_core::Result<(Superoperator, Superoperator)> {
    let l0 = sc.lindbladian(s)?;
    let dl = lindbladian_derivative(|x| sc.lindbladian(x), s, DerivativeOptions::default())?.value;
    Ok((l0, dl))
}

const GENERIC_S: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn basis_orthonormality() -> Fallible {
    let mut worst = 0.0_f64;
    for d in 2..=6 {
        worst = worst.max(build_basis(d)?.orthonormality_error());
    }
    Ok(below("basis_orthonormality", worst, 1e-12, "D = 2..6"))
}

fn vectorization_round_trip(rng: &mut ChaCha8Rng) -> Fallible {
    let mut worst = 0.0_f64;
    for d in 2..=5 {
        let basis = build_basis(d)?.handle();
        for _ in 0..10 {
            let m = random_hermitian(rng, d);
            let r = vectorize(&m, &basis)?;
            worst = worst.max((devectorize(&r) - &m).norm()).max(r.max_imag());
        }
    }
    Ok(below("vectorization_round_trip", worst, 1e-12, "random Hermitian, D = 2..5"))
}

fn trace_preservation_rows(rng: &mut ChaCha8Rng) -> Fallible {
    let mut worst = 0.0_f64;
    for d in 2..=4 {
        let basis = build_basis(d)?.handle();
        for _ in 0..5 {
            let l = &unitary_superop(&random_hermitian(rng, d), &basis)?
                + &dissipator_superop(&[random_general(rng, d)], &[rng.gen_range(0.0..2.0)], &basis)?;
            worst = worst.max(l.trace_row_residual());
        }
    }
    for sc in [qubit_scenario(Some(1e-2), true), pspin_scenario(1e-2)] {
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            worst = worst.max(sc.lindbladian(s)?.trace_row_residual());
        }
    }
    Ok(below("trace_preservation_rows", worst, 1e-12, "random Lindbladians and AME generators"))
}

fn biorthonormality() -> Fallible {
    let mut worst = 0.0_f64;
    for sc in [qubit_scenario(Some(1e-4), true), pspin_scenario(1e-4), pspin_scenario(1e-2)] {
        for s in GENERIC_S {
            let spec = decompose(&sc.lindbladian(s)?)?;
            worst = worst.max(spec.biorthonormality_error()).max(spec.max_residual());
        }
    }
    Ok(below("biorthonormality", worst, 1e-8, "AME spectra at generic s"))
}

fn unitary_spectrum(rng: &mut ChaCha8Rng) -> Fallible {
    let mut worst = 0.0_f64;
    let mut zero_deficit = 0usize;
    for d in 2..=4 {
        let basis = build_basis(d)?.handle();
        for _ in 0..5 {
            let h = random_hermitian(rng, d);
            let eps = h.clone().symmetric_eigen().eigenvalues;
            let mut expected: Vec<C64> = (0..d)
                .flat_map(|n| (0..d).map(move |m| (n, m)))
                .map(|(n, m)| C64::new(0.0, -(eps[n] - eps[m])))
                .collect();
            let spec = decompose(&unitary_superop(&h, &basis)?)?;
            for lam in spec.eigenvalues() {
                let (k, dist) = expected
                    .iter()
                    .enumerate()
                    .map(|(k, e)| (k, (e - lam).norm()))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("nonempty");
                worst = worst.max(dist);
                expected.swap_remove(k);
            }
            let zeros = spec.eigenvalues().iter().filter(|z| z.norm() < 1e-10).count();
            zero_deficit += d.saturating_sub(zeros);
        }
    }
    let mut c = below("unitary_spectrum", worst, 1e-10, "eigenvalues −i(ε_n − ε_m), zero multiplicity ≥ D");
    if zero_deficit > 0 {
        c.passed = false;
        c.detail = format!("{zero_deficit} zero eigenvalues missing");
    }
    Ok(c)
}

fn closed_qubit_variational_oracle() -> Fallible {
    let model = QubitModel::new(1.0, 1.0)?;
    let sc = qubit_scenario(None, false);
    let terms = named_terms("sigma_y", &sc.model().spin_ops(), sc.basis())?;
    let sy = ansatz_supermatrix(&terms[0], sc.basis())?;
    let mut worst = 0.0_f64;
    for k in 0..=20 {
        let s = k as f64 / 20.0;
        let (l0, dl) = pieces(&sc, s)?;
        let sol = solve_variational(&assemble_lsq(&l0, &dl, std::slice::from_ref(&sy))?, &[false])?;
        let y = sol.coefficients[0];
        let g = closed_system_gauge_qubit(s, &model)?;
        worst = worst
            .max((y.abs() - g.abs() / 2.0).abs())
            .max(residual_eq19(&sy.scale(y), &l0, &dl));
    }
    Ok(below(
        "closed_qubit_variational_oracle",
        worst,
        1e-8,
        "|y| vs half the closed-form gauge coefficient, and the commutator residual, on 21 points",
    ))
}

fn zero_coupling_path() -> Fallible {
    let open = qubit_scenario(Some(0.0), true);
    let closed = qubit_scenario(None, false);
    let mut worst = 0.0_f64;
    for k in 0..=20 {
        let s = k as f64 / 20.0;
        let (l0, dl) = pieces(&open, s)?;
        worst = worst.max((&l0 - &closed.lindbladian(s)?).norm());
        if s > 0.0 && s < 1.0 {
            let a = exact_cd(&decompose(&l0)?, &dl)?;
            worst = worst.max(residual_eq19(&a.generator, &l0, &dl));
        }
    }
    Ok(below("zero_coupling_path", worst, 1e-8, "ηg² = 0 reduces to the unitary generator; exact CD residual"))
}

fn exact_cd_residual() -> Fallible {
    let mut worst = 0.0_f64;
    for sc in [qubit_scenario(Some(1e-4), true), pspin_scenario(1e-4), pspin_scenario(1e-2)] {
        for s in GENERIC_S {
            let (l0, dl) = pieces(&sc, s)?;
            let a = exact_cd(&decompose(&l0)?, &dl)?;
            let scale = dl.commutator(&l0).norm().max(1.0);
            worst = worst.max(residual_eq19(&a.generator, &l0, &dl) / scale);
        }
    }
    Ok(below("exact_cd_residual", worst, 1e-8, "relative commutator residual of the exact CD"))
}

fn exact_cd_sign_flip_detected() -> Fallible {
    let mut weakest = f64::INFINITY;
    for sc in [qubit_scenario(Some(1e-4), true), pspin_scenario(1e-2)] {
        for s in GENERIC_S {
            let (l0, dl) = pieces(&sc, s)?;
            let a = exact_cd(&decompose(&l0)?, &dl)?;
            // flipping the sign of every denominator negates the generator
            let flipped = a.generator.scale(-1.0);
            let scale = dl.commutator(&l0).norm().max(1e-300);
            weakest = weakest.min(residual_eq19(&flipped, &l0, &dl) / scale);
        }
    }
    Ok(Check {
        name: "exact_cd_sign_flip_detected".into(),
        passed: weakest > 1e-3,
        value: weakest,
        tolerance: 1e-3,
        detail: "mutated exact CD must fail the residual check (value is the smallest relative residual)".into(),
    })
}

fn kms_ratio(rng: &mut ChaCha8Rng) -> Fallible {
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let t = rng.gen_range(0.5..5.0);
        let omega = rng.gen_range(0.01..20.0);
        let b = BathSpec::with_temperature(1e-3, t, 8.0 * PI, false)?;
        let ratio = b.gamma(-omega) / b.gamma(omega);
        worst = worst.max((ratio / (-b.beta * omega).exp() - 1.0).abs());
    }
    let sc = pspin_scenario(1e-2);
    let beta = sc.bath().map(|b| b.beta).unwrap_or(1.0);
    for s in GENERIC_S {
        let h = sc.hamiltonian(s)?;
        let gibbs = vectorize(&thermal_state(&h, beta)?, sc.basis())?;
        let diss = &sc.lindbladian(s)? - &unitary_superop(&h, sc.basis())?;
        worst = worst.max(kms_violation(&diss, &gibbs)?);
    }
    Ok(below(
        "kms_ratio",
        worst,
        1e-10,
        "γ(−ω)/γ(ω) = e^{−βω}, and the AME dissipator fixes the Gibbs state",
    ))
}

fn nnls_nonnegativity(rng: &mut ChaCha8Rng) -> Fallible {
    let mut worst = 0.0_f64;
    let mut negative = 0usize;
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(3..12), rng.gen_range(1..8));
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let x = nnls(&a, &b)?;
        negative += x.iter().filter(|&&v| v < 0.0).count();
        let w = a.transpose() * (&b - &a * &x);
        for (xi, wi) in x.iter().zip(w.iter()) {
            worst = worst.max(wi.max(0.0));
            if *xi > 0.0 {
                worst = worst.max(wi.abs());
            }
        }
    }
    let mut c = below("nnls_nonnegativity", worst, 1e-9, "x ≥ 0 and KKT stationarity on random problems");
    if negative > 0 {
        c.passed = false;
        c.detail = format!("{negative} negative coefficients");
    }
    Ok(c)
}

fn pspin_structure() -> Fallible {
    let sc = pspin_scenario(1e-4);
    let beta = sc.bath().map(|b| b.beta).unwrap_or(1.0);
    let mut worst = 0.0_f64;
    let mut not_one_d = 0;
    for s in GENERIC_S {
        let spec = decompose(&sc.lindbladian(s)?)?;
        if !spec.one_d() || spec.len() != 16 {
            not_one_d += 1;
        }
        let (_, iss) = find_iss(&spec)?;
        let gibbs = thermal_state(&sc.hamiltonian(s)?, beta)?;
        worst = worst.max((devectorize(&iss) - gibbs).norm());
    }
    let mut c = below("pspin_structure", worst, 1e-6, "16 one-dimensional blocks; ISS equals the Gibbs state");
    if not_one_d > 0 {
        c.passed = false;
        c.detail = format!("{not_one_d} points without a one-dimensional Jordan form");
    }
    Ok(c)
}

fn trajectory_bounds() -> Fallible {
    let cfg = IntegratorConfig {
        samples: 51,
        ..IntegratorConfig::default()
    };
    let mut trace = 0.0_f64;
    let mut neg = 0.0_f64;
    let mut range = 0.0_f64;
    let full = |sc: &AnnealingScenario| -> opencd_core::Result<CdMode> {
        let ops = sc.model().spin_ops();
        let mut t = Vec::new();
        for n in ["Sy", "Sy3", "SxSySz_cyclic", "basis_dissipators"] {
            t.extend(named_terms(n, &ops, sc.basis())?);
        }
        Ok(CdMode::Variational(t))
    };
    let cases = [
        (qubit_scenario(Some(1e-4), true), 10.0, false),
        (pspin_scenario(1e-4), 1.0, false),
        (pspin_scenario(1e-2), 10.0, true),
    ];
    for (sc, tau, with_cd) in cases {
        let src = GeneratorSource::new(sc.clone(), Evaluation::default_for(sc.dim()), DerivativeOptions::default())?;
        let cd = if with_cd { CdProvider::new(full(&sc)?, &src)? } else { CdProvider::none() };
        let init = sc.initial_state(sc.default_initial_state())?;
        let traj = evolve(&src, &cd, tau, &init, &cfg)?;
        let track = spectrum_track(&sc, &traj.samples)?;
        for row in observables(&traj, &track)? {
            trace = trace.max(row.trace_error);
            neg = neg.max(-row.min_eig).max(0.0);
            for v in [row.p_minus, row.fidelity] {
                range = range.max(-v).max(v - 1.0);
            }
        }
    }
    let ok = trace < 10.0 * cfg.rel_tol && neg < 1e-6 && !(range > 1e-8);
    Ok(Check {
        name: "trajectory_bounds".into(),
        passed: ok,
        value: trace.max(neg),
        tolerance: 10.0 * cfg.rel_tol,
        detail: format!(
            "trace error {trace:.2e} (< 10·rel_tol), negativity {neg:.2e} (< 1e-6), range excess {range:.2e}; \
             includes the full ansatz at ηg² = 1e-2, τ = 10 ns"
        ),
    })
}

fn unit_convention() -> Fallible {
    let t = kelvin_to_angular_ghz(17e-3);
    Ok(below("unit_convention", (t / 2.23 - 1.0).abs(), 0.01, format!("k_B·17 mK/ħ = {t:.5} rad/ns")))
}

fn qubit_minimum_gap() -> Fallible {
    let m = QubitModel::new(1.0, 1.0)?;
    let (s, gap) = golden_min(|s| m.gap(s).unwrap_or(f64::INFINITY), 0.0, 1.0);
    let err = (gap - std::f64::consts::FRAC_1_SQRT_2).abs().max((s - 0.5).abs() * 1e-4);
    Ok(below("qubit_minimum_gap", err, 1e-10, format!("min gap {gap:.12} at s = {s:.8}")))
}

/// Golden-section minimum of a unimodal function on `[a, b]`.
pub fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while (b - a).abs() > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    let s = 0.5 * (a + b);
    (s, f(s))
}

/// Runs every check; `seed` drives the randomized samples.
pub fn run_all(seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let mut push = |name: &str, r: Fallible| checks.push(r.unwrap_or_else(|e| failed(name, e)));
    push("basis_orthonormality", basis_orthonormality());
    push("vectorization_round_trip", vectorization_round_trip(&mut rng));
    push("trace_preservation_rows", trace_preservation_rows(&mut rng));
    push("biorthonormality", biorthonormality());
    push("unitary_spectrum", unitary_spectrum(&mut rng));
    push("closed_qubit_variational_oracle", closed_qubit_variational_oracle());
    push("zero_coupling_path", zero_coupling_path());
    push("exact_cd_residual", exact_cd_residual());
    push("exact_cd_sign_flip_detected", exact_cd_sign_flip_detected());
    push("kms_ratio", kms_ratio(&mut rng));
    push("nnls_nonnegativity", nnls_nonnegativity(&mut rng));
    push("pspin_structure", pspin_structure());
    push("trajectory_bounds", trajectory_bounds());
    push("unit_convention", unit_convention());
    push("qubit_minimum_gap", qubit_minimum_gap());
    let passed = checks.iter().all(|c| c.passed);
    Report { seed, passed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_kink_minimum() {
        let (s, v) = golden_min(|x| (x - 0.3).abs() + 2.0, 0.0, 1.0);
        assert!((s - 0.3).abs() < 1e-9);
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn sign_flip_check_is_not_vacuous() {
        let c = exact_cd_sign_flip_detected().unwrap();
        assert!(c.passed, "{c:?}");
    }
}
