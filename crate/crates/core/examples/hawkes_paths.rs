//! Hawkes paths by thinning a Poisson field, rescaled to the unit interval.
use nearcrit::coupling::{default_k, sample_poisson_field, DEFAULT_POINT_CAP};
use nearcrit::hawkes::{discretize_path, rescaled_paths, simulate_hawkes};
use nearcrit::kernels::{KernelFamily, Model, Regime};
use nearcrit::rng::StreamKey;

fn main() -> nearcrit::Result<()> {
    let t = 200.0;
    for regime in Regime::ALL {
        let model = Model { kernel: KernelFamily::Exponential, beta: 1.0, regime, mu: 1.0 };
        let sk = model.scaled(t)?;
        let field = sample_poisson_field(t, 12.0, default_k(t), StreamKey::new(11), DEFAULT_POINT_CAP)?;
        let path = simulate_hawkes(&sk, model.mu, &field, 1000)?;
        let grid: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let rp = rescaled_paths(&path, &grid)?;
        let coarse = discretize_path(&path.lambda_unit(), 16);
        println!("{regime}: {} events", path.events.len());
        for (i, &g) in grid.iter().enumerate() {
            println!("  t={g:.2} Λ={:.4} H/T²={:.4} M={:+.4}", rp.lambda[i], rp.h_scaled[i], rp.martingale[i]);
        }
        println!("  Λ̄ at t=1 on the 16-grid: {:.4}", coarse.last().unwrap());
    }
    Ok(())
}
