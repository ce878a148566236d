//! Ψ^(T) against its limit density for both kernels and all regimes.
use nearcrit::kernels::{make_exponential_kernel, make_gamma2_kernel, scale_kernel, Regime};
use nearcrit::resolvent::{l2_distance_on_unit, limit_density, solve_resolvent};

fn main() -> nearcrit::Result<()> {
    for base in [make_exponential_kernel(1.0)?, make_gamma2_kernel(1.0)?] {
        for regime in Regime::ALL {
            let rho = limit_density(regime, base.m)?;
            print!("{:<12} {:<9}", base.name(), regime.to_string());
            for t in [64.0, 256.0, 1024.0] {
                let rt = solve_resolvent(&scale_kernel(base.clone(), regime, t)?, 4096)?;
                print!("  T={t:<5} L2={:.3e} Ψ(1)={:.4} ρ(1)={:.4}", l2_distance_on_unit(&rt), rt.psi_at(1.0), rho.evaluate(1.0));
            }
            println!();
        }
    }
    Ok(())
}
