//! Ohmic bosonic bath: emission/absorption rates and the Lamb-shift function.

use std::f64::consts::PI;

use log::warn;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, QuadOptions};

/// Boltzmann constant, J/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// `k_B T / ħ` in rad/ns.
pub fn kelvin_to_angular_ghz(kelvin: f64) -> f64 {
    K_BOLTZMANN * kelvin / HBAR * 1e-9
}

/// Ohmic spectral density with exponential cutoff, in units with `ħ = k_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// Dimensionless coupling `ηg²`.
    pub eta_g2: f64,
    /// Inverse temperature, ns.
    pub beta: f64,
    /// Cutoff frequency, rad/ns.
    pub omega_c: f64,
    pub include_lamb_shift: bool,
}

impl BathSpec {
    pub fn new(eta_g2: f64, beta: f64, omega_c: f64, include_lamb_shift: bool) -> Result<Self> {
        if !(eta_g2 >= 0.0 && eta_g2.is_finite()) {
            return Err(Error::Domain {
                name: "eta_g2",
                value: eta_g2,
                domain: "[0, ∞)",
            });
        }
        for (name, v) in [("beta", beta), ("omega_c", omega_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, ∞)",
                });
            }
        }
        if eta_g2 > 0.1 {
            warn!("eta_g2 = {eta_g2} is outside the weak-coupling regime");
        }
        Ok(Self {
            eta_g2,
            beta,
            omega_c,
            include_lamb_shift,
        })
    }

    /// Bath at temperature `t` given in rad/ns (`k_B T/ħ`).
    pub fn with_temperature(eta_g2: f64, t: f64, omega_c: f64, include_lamb_shift: bool) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain {
                name: "temperature",
                value: t,
                domain: "(0, ∞)",
            });
        }
        Self::new(eta_g2, 1.0 / t, omega_c, include_lamb_shift)
    }

    /// `γ(ω) = 2πηg² ω e^{−|ω|/ω_c} / (1 − e^{−βω})`, with the limit `2πηg²/β` at ω = 0.
    pub fn gamma(&self, omega: f64) -> f64 {
        let x = self.beta * omega;
        // x / (1 − e^{−x}), stable through x = 0
        let bose = if x == 0.0 { 1.0 } else { x / -(-x).exp_m1() };
        2.0 * PI * self.eta_g2 * (-omega.abs() / self.omega_c).exp() * bose / self.beta
    }

    pub fn lamb_shift_zeta(&self, omega: f64) -> Result<f64> {
        self.lamb_shift_zeta_with(omega, PvOptions::default())
    }

    /// Principal value `ζ(ω) = P∫ γ(ω') / (ω − ω') dω'/2π`.
    ///
    /// The outer parts `(−Λ, ω−δ) ∪ (ω+δ, Λ)` are integrated directly; the
    /// excised window is folded onto `(0, δ)` as `∫ [γ(ω−u) − γ(ω+u)]/u du`,
    /// whose integrand is regular at `u = 0`, so no excision bias remains.
    pub fn lamb_shift_zeta_with(&self, omega: f64, opts: PvOptions) -> Result<f64> {
        if self.eta_g2 == 0.0 {
            return Ok(0.0);
        }
        if !omega.is_finite() {
            return Err(Error::Domain {
                name: "omega",
                value: omega,
                domain: "finite",
            });
        }
        let delta = opts.excision;
        let cutoff = opts.cutoff_factor * self.omega_c + omega.abs() + delta;

        let outer = |x: f64| self.gamma(x) / (omega - x);
        let mut left = vec![-cutoff];
        if omega - delta > 0.0 {
            left.push(0.0);
        }
        left.push(omega - delta);
        let mut right = vec![omega + delta];
        if omega + delta < 0.0 {
            right.push(0.0);
        }
        right.push(cutoff);

        let folded = |u: f64| (self.gamma(omega - u) - self.gamma(omega + u)) / u;
        let mut inner = vec![0.0];
        if omega.abs() > 0.0 && omega.abs() < delta {
            inner.push(omega.abs());
        }
        inner.push(delta);

        let l = integrate_pieces(outer, &left, opts.quad)?;
        let r = integrate_pieces(outer, &right, opts.quad)?;
        let w = integrate_pieces(folded, &inner, opts.quad)?;
        let total = l.value + r.value + w.value;
        let err = l.error + r.error + w.error;
        if !total.is_finite() {
            return Err(Error::NumericalFailure {
                context: format!("Lamb shift at ω = {omega}"),
                residual: err,
            });
        }
        Ok(total / (2.0 * PI))
    }
}

/// Quadrature settings for the Lamb-shift principal value.
#[derive(Debug, Clone, Copy)]
pub struct PvOptions {
    /// Half-width δ of the symmetric window around the pole, rad/ns.
    pub excision: f64,
    /// Far cutoff `Λ` in units of `ω_c`.
    pub cutoff_factor: f64,
    pub quad: QuadOptions,
}

impl Default for PvOptions {
    fn default() -> Self {
        Self {
            excision: 0.5,
            cutoff_factor: 40.0,
            quad: QuadOptions {
                abs_tol: 1e-14,
                rel_tol: 1e-10,
                max_intervals: 4000,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_bath(eta: f64) -> BathSpec {
        BathSpec::with_temperature(eta, 2.23, 8.0 * PI, true).unwrap()
    }

    #[test]
    fn unit_conversion() {
        let t = kelvin_to_angular_ghz(0.017);
        assert!((t - 2.23).abs() / 2.23 < 0.01, "{t}");
    }

    #[test]
    fn gamma_reference_value() {
        let b = paper_bath(1e-4);
        let expected = 2.0 * PI * 1e-4 * (-1.0 / (8.0 * PI)).exp() / (1.0 - (-1.0 / 2.23f64).exp());
        assert_relative_eq!(b.gamma(1.0), expected, max_relative = 1e-14);
        assert_relative_eq!(b.gamma(0.0), 2.0 * PI * 1e-4 * 2.23, max_relative = 1e-14);
        assert_relative_eq!(b.gamma(1e-12), b.gamma(0.0), max_relative = 1e-10);
    }

    #[test]
    fn kms_ratio() {
        let b = paper_bath(1e-3);
        for k in -30..=30 {
            let w = 10f64.powf(k as f64 / 10.0);
            let ratio = b.gamma(-w) / b.gamma(w);
            assert_relative_eq!(ratio, (-b.beta * w).exp(), max_relative = 1e-12);
            assert!(b.gamma(w) >= 0.0 && b.gamma(-w) >= 0.0);
        }
    }

    #[test]
    fn gamma_large_negative_frequency_underflows_cleanly() {
        let b = paper_bath(1e-4);
        let g = b.gamma(-5000.0);
        assert!(g >= 0.0 && g.is_finite());
    }

    #[test]
    fn zeta_zero_coupling() {
        let b = BathSpec::new(0.0, 1.0, 1.0, true).unwrap();
        assert_eq!(b.lamb_shift_zeta(0.7).unwrap(), 0.0);
    }

    #[test]
    fn zeta_self_convergence() {
        let b = paper_bath(1e-4);
        for w in [-2.0, -0.3, 0.0, 0.707, 1.0, 3.0] {
            let base = b.lamb_shift_zeta(w).unwrap();
            let mut fine = PvOptions::default();
            fine.quad.rel_tol = 1e-13;
            fine.quad.max_intervals = 20000;
            let refined = b.lamb_shift_zeta_with(w, fine).unwrap();
            assert_relative_eq!(base, refined, max_relative = 1e-6);

            let half = PvOptions {
                excision: 0.25,
                ..PvOptions::default()
            };
            let halved = b.lamb_shift_zeta_with(w, half).unwrap();
            assert_relative_eq!(base, halved, max_relative = 1e-6);
        }
    }

    #[test]
    fn zeta_scales_linearly_with_coupling() {
        let a = paper_bath(1e-4).lamb_shift_zeta(0.9).unwrap();
        let b = paper_bath(1e-2).lamb_shift_zeta(0.9).unwrap();
        assert_relative_eq!(b, 100.0 * a, max_relative = 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BathSpec::new(-1.0, 1.0, 1.0, true).is_err());
        assert!(BathSpec::new(1e-4, 0.0, 1.0, true).is_err());
        assert!(BathSpec::new(1e-4, 1.0, -1.0, true).is_err());
    }
}
