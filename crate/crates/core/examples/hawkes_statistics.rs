//! Mean identity, quadratic variation, Hölder increments and discretization
//! error from a batch of Hawkes paths.
use nearcrit::estimators::{bracket_terms, discretization_errors, holder_increments, mean_identity, sample_paths};
use nearcrit::kernels::{KernelFamily, Model, Regime};

fn main() -> nearcrit::Result<()> {
    let model = Model { kernel: KernelFamily::Gamma2, beta: 1.0, regime: Regime::Critical, mu: 1.0 };
    let batch = sample_paths(&model, 100.0, 256, 300, 4)?;
    for p in mean_identity(&model, &batch, &[0.25, 0.5, 1.0])? {
        println!("t={:.2} E Λ = {:.4} ± {:.4}, expected {:.4}", p.t, p.estimate.mean, p.estimate.stderr, p.expected);
    }
    let (var, h) = bracket_terms(&batch);
    println!("Var M_1 = {:.4} ± {:.4} vs E H_1/T² = {:.4} ± {:.4}", var.mean, var.stderr, h.mean, h.stderr);
    for (gap, e) in holder_increments(&batch, &[4, 16, 64]) {
        println!("E(Λ_{{t+h}} − Λ_t)² / h at h={gap:.4}: {:.4}", e.mean / gap);
    }
    for (k, e) in [8usize, 32, 128].iter().zip(discretization_errors(&batch, &[8, 32, 128])) {
        println!("k={k:<4} sup_t E(Λ − Λ̄)² = {:.4e}", e.mean);
    }
    println!("incomplete replications: {}", batch.incomplete);
    Ok(())
}
