use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{ensure, Error, Result};
use crate::stats::{normal_quantile, normal_upper_quantile};

/// Comonotone map `h_k` from a Poisson(T²/k²) cell count to an
/// `N(0, 1/k²)` variable: `h_k(n, u) = F⁻¹(P(N < n) + u P(N = n))`.
///
/// Probabilities are tabulated once per `(T, k)` in log space over
/// `mean ± 12 sd`; counts outside the table use regularized incomplete
/// gamma functions. Whichever tail is smaller is used, so the result stays
/// accurate far out in both tails.
#[derive(Debug, Clone)]
pub struct Gaussianizer {
    pub horizon: f64,
    pub k: usize,
    mean: f64,
    lo: u64,
    pmf: Vec<f64>,
    below: Vec<f64>,
    above: Vec<f64>,
}

/// `ln Γ(n+1) − (n+½) ln n + n − ½ ln 2π` (Stirling series error).
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np − x`, accurate when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Poisson pmf by Loader's saddle-point expansion (no cancellation at
/// large means).
fn pmf(n: u64, mean: f64) -> f64 {
    if n == 0 {
        return (-mean).exp();
    }
    let x = n as f64;
    (-stirlerr(x) - bd0(x, mean)).exp() / (2.0 * std::f64::consts::PI * x).sqrt()
}

impl Gaussianizer {
    pub fn new(horizon: f64, k: usize) -> Result<Gaussianizer> {
        ensure(horizon > 0.0 && k >= 1, || Error::InvalidParameter(format!("need T > 0 and k >= 1, got T = {horizon}, k = {k}")))?;
        let mean = (horizon / k as f64).powi(2);
        let sd = mean.sqrt();
        let lo = (mean - 12.0 * sd - 30.0).floor().max(0.0) as u64;
        let hi = (mean + 12.0 * sd + 30.0).ceil() as u64;
        let pmf: Vec<f64> = (lo..=hi).map(|n| pmf(n, mean)).collect();
        let mut below = Vec::with_capacity(pmf.len());
        let mut acc = if lo > 0 { gamma_ur(lo as f64, mean) } else { 0.0 };
        for p in &pmf {
            below.push(acc);
            acc += p;
        }
        let mut above = vec![0.0; pmf.len()];
        let mut acc = gamma_lr(hi as f64 + 1.0, mean);
        for (idx, p) in pmf.iter().enumerate().rev() {
            above[idx] = acc;
            acc += p;
        }
        Ok(Gaussianizer { horizon, k, mean, lo, pmf, below, above })
    }

    /// Expected count per cell.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `(P(N < n), P(N = n), P(N > n))`.
    pub fn probabilities(&self, n: u64) -> (f64, f64, f64) {
        if n >= self.lo && ((n - self.lo) as usize) < self.pmf.len() {
            let idx = (n - self.lo) as usize;
            (self.below[idx], self.pmf[idx], self.above[idx])
        } else {
            let below = if n == 0 { 0.0 } else { gamma_ur(n as f64, self.mean) };
            (below, pmf(n, self.mean), gamma_lr(n as f64 + 1.0, self.mean))
        }
    }

    /// `ξ = h_k(n, u)`, nondecreasing in `n` and in `u`.
    pub fn xi_from_count(&self, n: u64, u: f64) -> f64 {
        let (below, eq, above) = self.probabilities(n);
        let sd = 1.0 / self.k as f64;
        if below + 0.5 * eq <= 0.5 {
            sd * normal_quantile((below + u * eq).max(f64::MIN_POSITIVE))
        } else {
            sd * normal_upper_quantile((above + (1.0 - u) * eq).max(f64::MIN_POSITIVE))
        }
    }

    /// Recover the raw count from a compensated increment on the lattice
    /// `{(n − T²/k²)/T}`.
    pub fn count_from_delta(&self, delta: f64) -> Result<u64> {
        let x = delta * self.horizon + self.mean;
        let n = x.round();
        ensure(n >= 0.0 && (delta - (n - self.mean) / self.horizon).abs() <= 1e-9, || {
            Error::InvalidInput(format!(
                "increment {delta} is not on the lattice of (T, k) = ({}, {})",
                self.horizon, self.k
            ))
        })?;
        Ok(n as u64)
    }

    pub fn gaussianize(&self, delta: f64, u: f64) -> Result<f64> {
        Ok(self.xi_from_count(self.count_from_delta(delta)?, u))
    }
}

/// One-off `h_k(delta, u)`; build a [`Gaussianizer`] for repeated use.
pub fn comonotone_gaussianize(delta: f64, u: f64, k: usize, horizon: f64) -> Result<f64> {
    ensure(u > 0.0 && u < 1.0, || Error::InvalidInput(format!("u must lie in (0,1), got {u}")))?;
    Gaussianizer::new(horizon, k)?.gaussianize(delta, u)
}
