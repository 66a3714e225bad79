//! Dormand–Prince 5(4) with FSAL and 4th-order dense output.

use nalgebra::DVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in `s`.
    pub max_step: f64,
    /// Number of uniformly spaced dense-output samples on `[0, 1]`.
    pub samples: usize,
    /// Steps below this size count as a stiff failure.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 0.05,
            samples: 101,
            min_step: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, ∞)",
                })
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("max_step", self.max_step)?;
        positive("min_step", self.min_step)?;
        if self.samples < 2 {
            return Err(Error::InvalidParameter("at least 2 output samples required".into()));
        }
        Ok(())
    }

    pub fn sample_grid(&self) -> Vec<f64> {
        crate::generator::uniform_grid(self.samples)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub samples: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub stats: StepStats,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn error_norm(err: &DVector<f64>, y0: &DVector<f64>, y1: &DVector<f64>, cfg: &IntegratorConfig) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1.iter()))
        .map(|(e, (a, b))| {
            let sc = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrates `y' = f(s, y)` from `s = 0` to `s = 1`, returning `y` at `cfg.sample_grid()`.
pub fn integrate<F>(mut f: F, y0: DVector<f64>, cfg: &IntegratorConfig) -> Result<DenseSolution>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    cfg.validate()?;
    let samples = cfg.sample_grid();
    let mut states = Vec::with_capacity(samples.len());
    states.push(y0.clone());
    let mut next_sample = 1;

    let mut stats = StepStats::default();
    let mut s = 0.0_f64;
    let mut y = y0;
    let mut k1 = f(s, &y)?;
    stats.evaluations += 1;

    // starting step from the local scale of the solution and its slope
    let scale = |v: &DVector<f64>, w: &DVector<f64>| {
        let n = v.len().max(1) as f64;
        (v.iter()
            .zip(w.iter())
            .map(|(a, b)| (a / (cfg.abs_tol + cfg.rel_tol * b.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let d0 = scale(&y, &y);
    let d1 = scale(&k1, &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(cfg.max_step).max(cfg.min_step);

    let mut last_rejected = false;
    while s < 1.0 {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::StiffFailure { s, step: h });
        }
        if h < cfg.min_step {
            return Err(Error::StiffFailure { s, step: h });
        }
        let last = s + h >= 1.0 - 1e-14;
        if last {
            h = 1.0 - s;
        }

        let k2 = f(s + C2 * h, &(&y + &k1 * (h * A21)))?;
        let k3 = f(s + C3 * h, &(&y + (&k1 * A31 + &k2 * A32) * h))?;
        let k4 = f(s + C4 * h, &(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = f(s + C5 * h, &(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
        let k6 = f(
            s + h,
            &(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h),
        )?;
        let y1 = &y + (&k1 * A71 + &k3 * A73 + &k4 * A74 + &k5 * A75 + &k6 * A76) * h;
        let k7 = f(s + h, &y1)?;
        stats.evaluations += 6;

        let err = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        let en = error_norm(&err, &y, &y1, cfg);
        if !en.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }

        let mut fac = if en == 0.0 { 10.0 } else { 0.9 * en.powf(-0.2) };
        fac = fac.clamp(0.2, 10.0);
        if en <= 1.0 {
            let s1 = if last { 1.0 } else { s + h };
            if next_sample < samples.len() && samples[next_sample] <= s1 + 1e-14 {
                let c1 = &y1 - &y;
                let c2 = &k1 * h - &c1;
                let c3 = &c1 - &k7 * h - &c2;
                let c4 = (&k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h;
                while next_sample < samples.len() && samples[next_sample] <= s1 + 1e-14 {
                    let th = ((samples[next_sample] - s) / h).clamp(0.0, 1.0);
                    let th1 = 1.0 - th;
                    let v = &y + (&c1 + (&c2 + (&c3 + &c4 * th1) * th) * th1) * th;
                    states.push(v);
                    next_sample += 1;
                }
            }
            stats.accepted += 1;
            s = s1;
            y = y1;
            k1 = k7;
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h = (h * fac).min(cfg.max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h *= fac.min(1.0);
        }
    }
    // the final sample lands on s = 1 exactly
    while states.len() < samples.len() {
        states.push(y.clone());
    }
    if let Some(last) = states.last_mut() {
        *last = y;
    }
    Ok(DenseSolution {
        samples,
        states,
        stats,
    })
}
