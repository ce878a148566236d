#![allow(dead_code)]

use nearcrit::kernels::ScaledKernel;

/// Ψ^(T)(t) in closed form for the exponential and gamma2 kernels.
pub fn closed_form_resolvent(sk: &ScaledKernel, t: f64) -> f64 {
    let a = sk.a_t;
    let beta = sk.base.beta().unwrap();
    let s = sk.horizon * t;
    match sk.base.name() {
        "exponential" => a * beta * (-beta * (1.0 - a) * s).exp(),
        // √a β e^{-βs} sinh(√a β s), written without overflow
        _ => {
            let r = a.sqrt();
            0.5 * r * beta * ((-beta * (1.0 - r) * s).exp() - (-beta * (1.0 + r) * s).exp())
        }
    }
}

pub fn within(est: f64, se: f64, target: f64, z: f64) -> bool {
    (est - target).abs() <= z * se
}
