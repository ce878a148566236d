//! Monte Carlo estimators for the coupling and convergence bounds, with
//! rate and envelope fitting.

mod coupling;
mod fit;
mod limit;
mod paths;
mod pipeline;
mod report;

pub use coupling::{
    cell_coupling_estimate, cell_coupling_samples, estimate_cell_coupling, estimate_integral_coupling,
    IntegralCouplingReport,
};
pub use fit::{fit_estimates, fit_rate, split_envelope, strictly_decreasing, EnvelopeCheck, EnvelopePoint, RateFit};
pub use limit::limit_batch;
pub use report::{ExperimentReport, Rule};
pub use paths::{
    bracket_terms, discretization_errors, holder_increments, mean_identity, sample_paths, MeanPoint, PathBatch,
};
pub use pipeline::{
    coupled_replication, estimate_corollary44, estimate_theorem41, run_theorem_point, RepOutcome, TheoremPoint,
};

use crate::error::{Error, Result};
use crate::hawkes::expected_intensity;
use crate::kernels::ScaledKernel;
use crate::resolvent::solve_resolvent;

/// Ceiling enlargements tried before a replication counts as incomplete.
pub const MAX_RETRIES: usize = 6;

/// Starting θ-ceiling `4(μ + sup E[Λ])`.
pub fn initial_theta(sk: &ScaledKernel, mu: f64) -> Result<f64> {
    let rt = solve_resolvent(sk, 1024)?;
    let sup = expected_intensity(&rt, mu).into_iter().fold(0.0, f64::max);
    Ok((4.0 * (mu + sup)).max(1.0))
}

/// Run `attempt(θ)` enlarging θ on ceiling exceedance. `Ok(None)` when the
/// retries are exhausted.
pub fn with_ceiling_retry<R>(theta0: f64, mut attempt: impl FnMut(f64) -> Result<R>) -> Result<Option<R>> {
    let mut theta = theta0;
    for _ in 0..=MAX_RETRIES {
        match attempt(theta) {
            Err(Error::CeilingExceeded { reached, .. }) => theta = (2.0 * theta).max(1.5 * reached),
            other => return other.map(Some),
        }
    }
    Ok(None)
}
