use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{fit_estimates, RateFit};
use super::{initial_theta, with_ceiling_retry};
use crate::coupling::{default_k, CellGrid, CoupledSheet, Gaussianizer, PinnedSource, PoissonField};
use crate::error::{ensure, Error, Result};
use crate::hawkes::HawkesStepper;
use crate::kernels::{Model, ScaledKernel};
use crate::limit::euler_step;
use crate::rng::StreamKey;
use crate::stats::{estimate, Estimate};

/// Sup-squared distances of one coupled replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepOutcome {
    /// `sup_t |Λ_t − X_t|²`.
    pub sup_lambda: f64,
    /// `sup_t |∫₀^{tT} λ/T² − ∫₀^t X|²`.
    pub sup_integral: f64,
    /// `sup_t |H_{tT}/T² − ∫₀^t X|²`.
    pub sup_count: f64,
    /// `sup_t |(H_{tT} − ∫₀^{tT} λ)/T − ∬_{(0,t]} 1_{θ≤X} dW|²`.
    pub sup_martingale: f64,
    /// `sup_t |(H_{tT} − ∫₀^{tT} λ)/T²|²`.
    pub sup_small_martingale: f64,
    /// Largest `Λ` seen, for ceiling bookkeeping.
    pub max_lambda: f64,
}

impl RepOutcome {
    /// Pathwise triangle inequality `sup_count ≤ 2 sup_integral + 2 sup_small_martingale`.
    pub fn consistent(&self) -> bool {
        self.sup_count <= (2.0 * self.sup_integral + 2.0 * self.sup_small_martingale) * (1.0 + 1e-12) + 1e-300
    }
}

#[derive(Default)]
struct Sups {
    lambda: f64,
    integral: f64,
    count: f64,
    mart: f64,
    small: f64,
    max_lambda: f64,
}

impl Sups {
    #[allow(clippy::too_many_arguments)]
    fn observe(&mut self, t_raw: f64, lambda: f64, comp: f64, count: usize, x: f64, int_x: f64, w_int: f64) {
        let big = t_raw;
        let lam = lambda / big;
        let h = count as f64;
        self.lambda = self.lambda.max((lam - x).powi(2));
        self.integral = self.integral.max((comp / (big * big) - int_x).powi(2));
        self.count = self.count.max((h / (big * big) - int_x).powi(2));
        self.mart = self.mart.max(((h - comp) / big - w_int).powi(2));
        self.small = self.small.max(((h - comp) / (big * big)).powi(2));
        self.max_lambda = self.max_lambda.max(lam);
    }
}

fn coupled_attempt(sk: &ScaledKernel, mu: f64, k: usize, key: StreamKey, gauss: Arc<Gaussianizer>, theta: f64) -> Result<RepOutcome> {
    let t = sk.horizon;
    let (m, c, h) = (sk.base.m, sk.regime.drift_coefficient(), 1.0 / k as f64);
    let field = PoissonField::new(t, CellGrid::new(k, theta)?, key)?;
    let mut sheet = CoupledSheet::from_field(&field, gauss, PinnedSource::Keyed(key))?;
    let mut stepper = HawkesStepper::new(sk, mu, &field)?;
    let mut sups = Sups::default();
    // X at the left node, ∫X and ∬1_{θ≤X̄}dW up to it
    let (mut x, mut int_x, mut w_int) = (0.0f64, 0.0f64, 0.0f64);
    sups.observe(t, mu, 0.0, 0, 0.0, 0.0, 0.0);
    for i in 0..k {
        let out = stepper.step(&[])?;
        sheet.set_column_counts(i, out.slab.counts());
        if x >= sheet.theta_extent() {
            return Err(Error::CeilingExceeded { ceiling: sheet.theta_extent(), reached: x });
        }
        let noise = sheet.column_strip(i, x)?;
        let x1 = euler_step(x, c, mu, m, h, noise);
        let t0 = i as f64 * h;
        let at = |s: f64| {
            let d = s - t0;
            (x + (x1 - x) * d / h, int_x + x * d + (x1 - x) * d * d / (2.0 * h), w_int + noise * d / h)
        };
        for ev in &out.events {
            let (xs, ix, wi) = at(ev.t / t);
            sups.observe(t, ev.lambda_pre, ev.compensator, ev.count - 1, xs, ix, wi);
            sups.observe(t, ev.lambda_post, ev.compensator, ev.count, xs, ix, wi);
        }
        int_x += 0.5 * (x + x1) * h;
        w_int += noise;
        x = x1;
        sups.observe(t, out.end.lambda, out.end.compensator, out.end.count, x, int_x, w_int);
    }
    Ok(RepOutcome {
        sup_lambda: sups.lambda,
        sup_integral: sups.integral,
        sup_count: sups.count,
        sup_martingale: sups.mart,
        sup_small_martingale: sups.small,
        max_lambda: sups.max_lambda,
    })
}

/// One replication: field → Hawkes → Gaussianized sheet → coupled X, with
/// ceiling retries. `Ok(None)` when retries are exhausted.
pub fn coupled_replication(sk: &ScaledKernel, mu: f64, k: usize, key: StreamKey, theta0: f64) -> Result<Option<RepOutcome>> {
    let gauss = Arc::new(Gaussianizer::new(sk.horizon, k)?);
    with_ceiling_retry(theta0, |th| coupled_attempt(sk, mu, k, key, gauss.clone(), th))
}

/// Estimates at one scale `T`.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremPoint {
    pub horizon: f64,
    pub k: usize,
    pub reps: usize,
    pub completed: usize,
    pub incomplete: usize,
    pub sup_lambda: Estimate,
    /// The three corollary quantities, in order.
    pub corollary: [Estimate; 3],
    pub small_martingale: Estimate,
    pub consistency_violations: usize,
}

pub fn run_theorem_point(model: &Model, horizon: f64, k: Option<usize>, reps: usize, seed: u64) -> Result<TheoremPoint> {
    ensure(reps >= 1, || Error::InvalidParameter("need at least one replication".into()))?;
    let sk = model.scaled(horizon)?;
    let k = k.unwrap_or_else(|| default_k(horizon));
    ensure(k >= 1, || Error::InvalidParameter("k must be >= 1".into()))?;
    let theta0 = initial_theta(&sk, model.mu)?;
    let gauss = Arc::new(Gaussianizer::new(horizon, k)?);
    let base = StreamKey::new(seed).child(horizon.to_bits()).child(k as u64);
    let outs = (0..reps)
        .into_par_iter()
        .map(|r| {
            let key = base.child(r as u64);
            with_ceiling_retry(theta0, |th| coupled_attempt(&sk, model.mu, k, key, gauss.clone(), th))
        })
        .collect::<Result<Vec<_>>>()?;
    let done: Vec<RepOutcome> = outs.into_iter().flatten().collect();
    let col = |f: fn(&RepOutcome) -> f64| estimate(&done.iter().map(f).collect::<Vec<_>>());
    Ok(TheoremPoint {
        horizon,
        k,
        reps,
        completed: done.len(),
        incomplete: reps - done.len(),
        sup_lambda: col(|o| o.sup_lambda),
        corollary: [col(|o| o.sup_integral), col(|o| o.sup_count), col(|o| o.sup_martingale)],
        small_martingale: col(|o| o.sup_small_martingale),
        consistency_violations: done.iter().filter(|o| !o.consistent()).count(),
    })
}

/// `E[sup_t |Λ^T_t − X_t|²]` for each `T`, with a log-log fit against `ln T`
/// (slope −1 for a `C/ln T` decay).
pub fn estimate_theorem41(model: &Model, t_list: &[f64], reps: usize, seed: u64) -> Result<(Vec<TheoremPoint>, Option<RateFit>)> {
    ensure(t_list.windows(2).all(|w| w[0] < w[1]), || Error::InvalidInput("T list must be increasing".into()))?;
    let points = t_list.iter().map(|&t| run_theorem_point(model, t, None, reps, seed)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = t_list.iter().map(|t| t.ln()).collect();
    let ests: Vec<Estimate> = points.iter().map(|p| p.sup_lambda).collect();
    let fit = if xs.len() >= 3 { fit_estimates(&xs, &ests).ok() } else { None };
    Ok((points, fit))
}

pub fn estimate_corollary44(model: &Model, horizon: f64, reps: usize, seed: u64) -> Result<[Estimate; 3]> {
    Ok(run_theorem_point(model, horizon, None, reps, seed)?.corollary)
}
