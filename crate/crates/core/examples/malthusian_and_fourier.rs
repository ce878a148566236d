//! Supercritical tilt rate and frequency-domain residuals.
use nearcrit::kernels::{make_gamma2_kernel, scale_kernel, Regime};
use nearcrit::resolvent::{fourier_residual, malthusian_parameter};

fn main() -> nearcrit::Result<()> {
    let base = make_gamma2_kernel(1.0)?;
    for t in [50.0, 200.0, 800.0, 3200.0] {
        let sk = scale_kernel(base.clone(), Regime::Super, t)?;
        let mp = malthusian_parameter(&sk)?;
        let alpha = 0.1 * base.m / base.m2;
        let z: Vec<f64> = (0..=20).map(|i| i as f64 * alpha * t / 20.0).collect();
        let fd = fourier_residual(&sk, &z, None, None)?;
        println!(
            "T={t:<6} b_T={:.6e} T·b_T={:.5} (→ 2/m = {:.5})  m̃={:.5}  T|ε̃| ≤ {:.4}",
            mp.b_t,
            t * mp.b_t,
            2.0 / base.m,
            mp.m_tilde,
            fd.envelope_constant.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
