use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_estimates, RateFit};
use super::{initial_theta, with_ceiling_retry};
use crate::coupling::{compensated_increment, CellGrid, CoupledSheet, Gaussianizer, PinnedSource, PoissonField};
use crate::error::{ensure, Error, Result};
use crate::hawkes::HawkesStepper;
use crate::kernels::{Model, ScaledKernel};
use crate::rng::StreamKey;
use crate::stats::{estimate, Estimate};

/// `(δ, ξ)` for `cells` cells of one field: compensated increments of Ñ^T
/// and their Gaussianized partners.
pub fn cell_coupling_samples(horizon: f64, k: usize, cells: usize, key: StreamKey) -> Result<Vec<(f64, f64)>> {
    ensure(cells >= 1, || Error::InvalidParameter("need at least one cell".into()))?;
    let rows = cells.div_ceil(k);
    let field = PoissonField::new(horizon, CellGrid::new(k, rows as f64 / k as f64)?, key)?;
    let gauss = Arc::new(Gaussianizer::new(horizon, k)?);
    let mut sheet = CoupledSheet::from_field(&field, gauss, PinnedSource::Zero)?;
    let mut out = Vec::with_capacity(cells);
    'cols: for i in 0..k {
        for j in 0..rows {
            if out.len() == cells {
                break 'cols;
            }
            let n = sheet.count(i, j)?;
            out.push((compensated_increment(n as u64, horizon, k), sheet.xi(i, j)?));
        }
    }
    Ok(out)
}

/// Mean of `|ξ − δ|²` over `cells` cells.
pub fn cell_coupling_estimate(horizon: f64, k: usize, cells: usize, key: StreamKey) -> Result<Estimate> {
    let s = cell_coupling_samples(horizon, k, cells, key)?;
    let sq: Vec<f64> = s.iter().map(|(d, x)| (x - d).powi(2)).collect();
    Ok(estimate(&sq))
}

fn scale_key(seed: u64, horizon: f64, k: usize) -> StreamKey {
    StreamKey::new(seed).child(horizon.to_bits()).child(k as u64)
}

/// Squared cell coupling error against T at fixed `k`.
pub fn estimate_cell_coupling(t_list: &[f64], k: usize, reps: usize, seed: u64) -> Result<RateFit> {
    ensure(reps >= 1000, || Error::InvalidParameter(format!("need reps >= 1000, got {reps}")))?;
    let ests = t_list
        .iter()
        .map(|&t| cell_coupling_estimate(t, k, reps, scale_key(seed, t, k)))
        .collect::<Result<Vec<_>>>()?;
    fit_estimates(t_list, &ests)
}

/// `sup_i |Σ_{i'<i} f(t_{i'}) (Ñ^T − W)(I_{i'} × (0, Λ̄_{i'}])|²` for one
/// Hawkes path on one field.
fn integral_attempt(
    sk: &ScaledKernel,
    mu: f64,
    k: usize,
    f: &dyn Fn(f64) -> f64,
    key: StreamKey,
    gauss: Arc<Gaussianizer>,
    theta: f64,
) -> Result<f64> {
    let t = sk.horizon;
    let field = PoissonField::new(t, CellGrid::new(k, theta)?, key)?;
    let mut sheet = CoupledSheet::from_field(&field, gauss, PinnedSource::Keyed(key))?;
    let mut stepper = HawkesStepper::new(sk, mu, &field)?;
    let mut u = mu / t;
    let (mut acc, mut sup) = (0.0f64, 0.0f64);
    for i in 0..k {
        let mut out = stepper.step(&[])?;
        sheet.set_column_counts(i, out.slab.counts());
        if u >= sheet.theta_extent() {
            return Err(Error::CeilingExceeded { ceiling: sheet.theta_extent(), reached: u });
        }
        let raw = u * t;
        if out.slab.filled_ceiling() < raw {
            out.slab.fill_rows((raw / out.slab.side).ceil() as usize + 1);
        }
        let below = out.slab.points().iter().filter(|p| p.1 <= raw).count();
        let ntilde = below as f64 / t - u * t / k as f64;
        let w = sheet.column_strip(i, u)?;
        acc += f(i as f64 / k as f64) * (ntilde - w);
        sup = sup.max(acc * acc);
        u = out.end.lambda / t;
    }
    Ok(sup)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralCouplingReport {
    pub horizon: f64,
    pub ks: Vec<usize>,
    pub estimates: Vec<Estimate>,
    pub incomplete: Vec<usize>,
    /// Absent when an estimate is zero (e.g. `f ≡ 0`).
    pub fit: Option<RateFit>,
}

/// Squared sup of the stochastic-integral difference `∬ f 1_{θ≤Λ̄}(Ñ^T − W)`
/// for each `k`, with the Hawkes intensity as integrand.
pub fn estimate_integral_coupling(
    model: &Model,
    horizon: f64,
    ks: &[usize],
    reps: usize,
    f: &(dyn Fn(f64) -> f64 + Sync),
    seed: u64,
) -> Result<IntegralCouplingReport> {
    ensure((0..=64).all(|i| f(i as f64 / 64.0).is_finite()), || {
        Error::InvalidParameter("weight f must be finite on [0, 1]".into())
    })?;
    let sk = model.scaled(horizon)?;
    let theta0 = initial_theta(&sk, model.mu)?;
    let mut estimates = Vec::new();
    let mut incomplete = Vec::new();
    for &k in ks {
        let gauss = Arc::new(Gaussianizer::new(horizon, k)?);
        let base = scale_key(seed, horizon, k);
        let outs = (0..reps)
            .into_par_iter()
            .map(|r| {
                let key = base.child(r as u64);
                with_ceiling_retry(theta0, |th| integral_attempt(&sk, model.mu, k, f, key, gauss.clone(), th))
            })
            .collect::<Result<Vec<_>>>()?;
        let done: Vec<f64> = outs.iter().flatten().copied().collect();
        incomplete.push(reps - done.len());
        estimates.push(estimate(&done));
    }
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let fit = fit_estimates(&xs, &estimates).ok();
    Ok(IntegralCouplingReport { horizon, ks: ks.to_vec(), estimates, incomplete, fit })
}
