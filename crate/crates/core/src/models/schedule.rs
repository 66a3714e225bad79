//! Quintic annealing schedule `q(s) = 6s⁵ − 15s⁴ + 10s³`.

use crate::error::{Error, Result};

fn check_domain(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "s",
            value: s,
            domain: "[0, 1]",
        })
    }
}

pub fn schedule_q(s: f64) -> Result<f64> {
    check_domain(s)?;
    Ok(s * s * s * (10.0 + s * (-15.0 + 6.0 * s)))
}

/// `q'(s) = 30s⁴ − 60s³ + 30s² = 30 s² (1 − s)²`.
pub fn schedule_dq(s: f64) -> Result<f64> {
    check_domain(s)?;
    let t = s * (1.0 - s);
    Ok(30.0 * t * t)
}
