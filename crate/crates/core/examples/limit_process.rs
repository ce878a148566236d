//! Limit paths driven by a coupled sheet and by an independent Brownian motion.
use nearcrit::estimators::limit_batch;
use nearcrit::kernels::Regime;
use nearcrit::limit::{limit_mean, Driver};
use nearcrit::stats::SampleStats;

fn main() -> nearcrit::Result<()> {
    let (t, k, reps) = (200.0, 64, 500);
    for regime in Regime::ALL {
        for driver in [Driver::CoupledSheet, Driver::IndependentBm] {
            let paths = limit_batch(regime, 1.0, 1.0, driver, t, k, reps, 5)?;
            let end = SampleStats::of(&paths.iter().map(|p| p.x_values[k]).collect::<Vec<_>>());
            println!(
                "{regime:<9} {driver:<15?} E X_1 = {:.4} ± {:.4} (exact {:.4}), Var X_1 = {:.4}",
                end.mean,
                end.stderr(),
                limit_mean(regime, 1.0, 1.0, 1.0),
                end.var
            );
        }
    }
    Ok(())
}
