use log::warn;

use crate::error::{Error, Result};
use crate::operator::Superoperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    pub h: f64,
    /// Repeat with `h/2` and compare.
    pub richardson: bool,
    /// Relative discrepancy above which the derivative is flagged.
    pub richardson_tol: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self {
            h: 1e-5,
            richardson: false,
            richardson_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Derivative {
    pub value: Superoperator,
    /// `‖d_h − d_{h/2}‖ / max(‖d_h‖, 1e-3)` when checked.
    pub richardson_error: Option<f64>,
    pub unreliable: bool,
}

fn difference<F>(f: &F, s: f64, h: f64) -> Result<Superoperator>
where
    F: Fn(f64) -> Result<Superoperator>,
{
    if s - h >= 0.0 && s + h <= 1.0 {
        let d = &f(s + h)? - &f(s - h)?;
        Ok(d.scale(0.5 / h))
    } else if s + 2.0 * h <= 1.0 {
        // second-order one-sided differences at the schedule boundaries
        let (f0, f1, f2) = (f(s)?, f(s + h)?, f(s + 2.0 * h)?);
        let d = &(&f1.scale(4.0) - &f0.scale(3.0)) - &f2;
        Ok(d.scale(0.5 / h))
    } else {
        let (f0, f1, f2) = (f(s)?, f(s - h)?, f(s - 2.0 * h)?);
        let d = &(&f0.scale(3.0) - &f1.scale(4.0)) + &f2;
        Ok(d.scale(0.5 / h))
    }
}

/// `d𝕃_0/ds` by finite differences of a generator family on `s ∈ [0, 1]`.
pub fn lindbladian_derivative<F>(f: F, s: f64, opts: DerivativeOptions) -> Result<Derivative>
where
    F: Fn(f64) -> Result<Superoperator>,
{
    if !(opts.h > 0.0 && opts.h < 0.25) {
        return Err(Error::Domain {
            name: "h",
            value: opts.h,
            domain: "(0, 0.25)",
        });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain {
            name: "s",
            value: s,
            domain: "[0, 1]",
        });
    }
    let value = difference(&f, s, opts.h)?;
    let (richardson_error, unreliable) = if opts.richardson {
        let half = difference(&f, s, 0.5 * opts.h)?;
        let err = (&value - &half).norm() / value.norm().max(1e-3);
        if err > opts.richardson_tol {
            warn!("derivative unreliable at s = {s}: Richardson discrepancy {err:.3e}");
        }
        (Some(err), err > opts.richardson_tol)
    } else {
        (None, false)
    };
    Ok(Derivative {
        value,
        richardson_error,
        unreliable,
    })
}
