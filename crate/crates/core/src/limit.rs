//! CIR-type limit processes `dX = (1/m)(μ + cX)dt + (1/m)√X dB`,
//! `c ∈ {−1, 0, +1}`, by Euler steps with full truncation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::coupling::CoupledSheet;
use crate::error::{ensure, Error, Result};
use crate::kernels::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Driver {
    CoupledSheet,
    IndependentBm,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitPath {
    pub regime: Regime,
    pub mu: f64,
    pub m: f64,
    pub grid: Vec<f64>,
    pub x_values: Vec<f64>,
    pub driving: Driver,
}

/// One step of length `h`; `noise` is `∫√X dB` over the step.
#[inline]
pub fn euler_step(x: f64, c: f64, mu: f64, m: f64, h: f64, noise: f64) -> f64 {
    (x + (mu + c * x) * h / m + noise / m).max(0.0)
}

fn check(mu: f64, m: f64) -> Result<()> {
    ensure(mu >= 0.0 && mu.is_finite(), || Error::InvalidParameter(format!("mu must be >= 0, got {mu}")))?;
    ensure(m > 0.0 && m.is_finite(), || Error::InvalidParameter(format!("m must be > 0, got {m}")))
}

/// Drive the step over `[i/k, (i+1)/k]` by `W(I_{i,k} × (0, X_{i/k}])`, so
/// that the noise has conditional variance `X h`.
pub fn simulate_limit_coupled(regime: Regime, mu: f64, m: f64, sheet: &mut CoupledSheet) -> Result<LimitPath> {
    check(mu, m)?;
    let k = sheet.k();
    let h = 1.0 / k as f64;
    let c = regime.drift_coefficient();
    let mut x = vec![0.0; k + 1];
    for i in 0..k {
        let xi = x[i];
        if xi >= sheet.theta_extent() {
            return Err(Error::CeilingExceeded { ceiling: sheet.theta_extent(), reached: xi });
        }
        let noise = sheet.column_strip(i, xi)?;
        x[i + 1] = euler_step(xi, c, mu, m, h, noise);
    }
    Ok(LimitPath {
        regime,
        mu,
        m,
        grid: (0..=k).map(|i| i as f64 * h).collect(),
        x_values: x,
        driving: Driver::CoupledSheet,
    })
}

/// Same scheme driven by fresh Gaussian increments on `n` steps.
pub fn simulate_cir_reference<R: Rng + ?Sized>(regime: Regime, mu: f64, m: f64, rng: &mut R, n: usize) -> Result<LimitPath> {
    check(mu, m)?;
    ensure(n >= 1, || Error::InvalidParameter("need at least one step".into()))?;
    let h = 1.0 / n as f64;
    let c = regime.drift_coefficient();
    let mut x = vec![0.0; n + 1];
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        x[i + 1] = euler_step(x[i], c, mu, m, h, (x[i] * h).sqrt() * z);
    }
    Ok(LimitPath {
        regime,
        mu,
        m,
        grid: (0..=n).map(|i| i as f64 * h).collect(),
        x_values: x,
        driving: Driver::IndependentBm,
    })
}

/// `E[X_t]` solving `m·dE/dt = μ + cE`.
pub fn limit_mean(regime: Regime, mu: f64, m: f64, t: f64) -> f64 {
    match regime {
        Regime::Sub => mu * (1.0 - (-t / m).exp()),
        Regime::Critical => mu * t / m,
        Regime::Super => mu * ((t / m).exp() - 1.0),
    }
}

impl LimitPath {
    /// Linear interpolation at unit time `t`.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.grid.len() - 1;
        let x = (t.clamp(0.0, 1.0) * n as f64).min(n as f64);
        let g = (x.floor() as usize).min(n.saturating_sub(1));
        let w = x - g as f64;
        if n == 0 {
            return self.x_values[0];
        }
        self.x_values[g] * (1.0 - w) + self.x_values[g + 1] * w
    }
}
