use std::sync::Arc;

use rayon::prelude::*;

use super::{with_ceiling_retry, MAX_RETRIES};
use crate::coupling::{CellGrid, CoupledSheet, Gaussianizer, PinnedSource, PoissonField};
use crate::error::{Error, Result};
use crate::kernels::Regime;
use crate::limit::{limit_mean, simulate_cir_reference, simulate_limit_coupled, Driver, LimitPath};
use crate::rng::{StreamKey, Tag};

/// `reps` independent limit paths on the `1/k` grid. Coupled paths read
/// their noise from a sheet Gaussianized from a Poisson field of scale `T`.
#[allow(clippy::too_many_arguments)]
pub fn limit_batch(
    regime: Regime,
    mu: f64,
    m: f64,
    driver: Driver,
    horizon: f64,
    k: usize,
    reps: usize,
    seed: u64,
) -> Result<Vec<LimitPath>> {
    let base = StreamKey::new(seed).child(horizon.to_bits()).child(k as u64);
    match driver {
        Driver::IndependentBm => (0..reps)
            .into_par_iter()
            .map(|r| simulate_cir_reference(regime, mu, m, &mut base.child(r as u64).rng(Tag::Reference, 0), k))
            .collect(),
        Driver::CoupledSheet => {
            let gauss = Arc::new(Gaussianizer::new(horizon, k)?);
            let theta0 = (4.0 * (mu + limit_mean(regime, mu, m, 1.0))).max(1.0);
            (0..reps)
                .into_par_iter()
                .map(|r| {
                    let key = base.child(r as u64);
                    with_ceiling_retry(theta0, |th| {
                        let field = PoissonField::new(horizon, CellGrid::new(k, th)?, key)?;
                        let mut sheet = CoupledSheet::from_field(&field, gauss.clone(), PinnedSource::Keyed(key))?;
                        simulate_limit_coupled(regime, mu, m, &mut sheet)
                    })?
                    .ok_or_else(|| Error::Capacity(format!("theta ceiling still exceeded after {MAX_RETRIES} enlargements")))
                })
                .collect()
        }
    }
}
