use rayon::prelude::*;
use serde::Serialize;

use super::{initial_theta, with_ceiling_retry};
use crate::coupling::{default_k, CellGrid, PoissonField};
use crate::error::{ensure, Error, Result};
use crate::hawkes::{discretize_path, expected_intensity, simulate_on_field, RescaledPaths};
use crate::kernels::Model;
use crate::resolvent::solve_resolvent;
use crate::rng::StreamKey;
use crate::stats::{estimate, Estimate, SampleStats};

/// Independent rescaled Hawkes paths on a uniform unit grid.
#[derive(Debug, Clone, Serialize)]
pub struct PathBatch {
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub paths: Vec<RescaledPaths>,
    pub incomplete: usize,
}

pub fn sample_paths(model: &Model, horizon: f64, n: usize, reps: usize, seed: u64) -> Result<PathBatch> {
    ensure(n >= 1, || Error::InvalidParameter("grid needs at least one step".into()))?;
    let sk = model.scaled(horizon)?;
    let theta0 = initial_theta(&sk, model.mu)?;
    let grid: Vec<f64> = (0..=n).map(|g| g as f64 / n as f64).collect();
    let k = default_k(horizon);
    let base = StreamKey::new(seed).child(horizon.to_bits());
    let outs = (0..reps)
        .into_par_iter()
        .map(|r| {
            let key = base.child(r as u64);
            with_ceiling_retry(theta0, |th| {
                let field = PoissonField::new(horizon, CellGrid::new(k, th)?, key)?;
                Ok(simulate_on_field(&sk, model.mu, &field, &grid)?.rescaled())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let paths: Vec<RescaledPaths> = outs.into_iter().flatten().collect();
    Ok(PathBatch { horizon, incomplete: reps - paths.len(), grid, paths })
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanPoint {
    pub t: f64,
    pub expected: f64,
    pub estimate: Estimate,
}

/// MC mean of `Λ_t` against `μ/T + μ∫₀^t Ψ^(T)` at the batch grid points
/// nearest to `times`.
pub fn mean_identity(model: &Model, batch: &PathBatch, times: &[f64]) -> Result<Vec<MeanPoint>> {
    let sk = model.scaled(batch.horizon)?;
    let rt = solve_resolvent(&sk, 4096)?;
    let expect = expected_intensity(&rt, model.mu);
    let n = batch.grid.len() - 1;
    Ok(times
        .iter()
        .map(|&t| {
            let g = (t * n as f64).round() as usize;
            let t = batch.grid[g];
            let x = t * rt.n as f64;
            let i = (x.floor() as usize).min(rt.n - 1);
            let w = x - i as f64;
            let expected = expect[i] * (1.0 - w) + expect[i + 1] * w;
            let vals: Vec<f64> = batch.paths.iter().map(|p| p.lambda[g]).collect();
            MeanPoint { t, expected, estimate: estimate(&vals) }
        })
        .collect())
}

/// `(Var[M_1], E[H_T/T²])` where `M_1 = (H_T − ∫₀^T λ)/T`; equal in
/// expectation by the bracket identity.
pub fn bracket_terms(batch: &PathBatch) -> (Estimate, Estimate) {
    let m: Vec<f64> = batch.paths.iter().map(|p| *p.martingale.last().unwrap()).collect();
    let h: Vec<f64> = batch.paths.iter().map(|p| *p.h_scaled.last().unwrap()).collect();
    let s = SampleStats::of(&m);
    (Estimate { mean: s.var, stderr: s.var_stderr(), n: s.n }, estimate(&h))
}

/// `E|Λ_{t+g} − Λ_t|²` for each gap `g` (in grid steps), averaged over
/// start points within each path.
pub fn holder_increments(batch: &PathBatch, gaps: &[usize]) -> Vec<(f64, Estimate)> {
    let n = batch.grid.len() - 1;
    gaps.iter()
        .map(|&g| {
            let per: Vec<f64> = batch
                .paths
                .iter()
                .map(|p| {
                    let d: Vec<f64> = (0..=n - g).map(|s| (p.lambda[s + g] - p.lambda[s]).powi(2)).collect();
                    d.iter().sum::<f64>() / d.len() as f64
                })
                .collect();
            (g as f64 / n as f64, estimate(&per))
        })
        .collect()
}

/// `sup_t E|Λ_t − Λ̄_t|²` over the grid for each `k`: the estimate at the
/// grid time with the largest mean.
pub fn discretization_errors(batch: &PathBatch, ks: &[usize]) -> Vec<Estimate> {
    let n = batch.grid.len() - 1;
    ks.iter()
        .map(|&k| {
            let diffs: Vec<Vec<f64>> = batch
                .paths
                .iter()
                .map(|p| {
                    let bar = discretize_path(&p.lambda, k);
                    p.lambda.iter().zip(&bar).map(|(a, b)| (a - b).powi(2)).collect()
                })
                .collect();
            (0..=n)
                .map(|g| estimate(&diffs.iter().map(|d| d[g]).collect::<Vec<_>>()))
                .fold(Estimate { mean: f64::NEG_INFINITY, stderr: 0.0, n: 0 }, |a, b| if b.mean > a.mean { b } else { a })
        })
        .collect()
}
