//! Resolvent Ψ^T of the scaled kernel, its time-rescaled version
//! Ψ^(T) = Ψ^T(T·), limit densities, Malthusian parameters and Fourier
//! residual diagnostics.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::kernels::{Regime, ScaledKernel};
use crate::quad;

#[derive(Debug, Clone, Serialize)]
pub struct ResolventTable {
    pub horizon: f64,
    pub regime: Regime,
    pub m: f64,
    /// Number of grid intervals on [0, 1].
    pub n: usize,
    pub psi_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub d_values: Vec<f64>,
}

impl ResolventTable {
    pub fn grid_point(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.grid_point(i)).collect()
    }

    /// `∫₀^{t_i} Ψ^(T)` at every grid point (trapezoid).
    pub fn cumulative_psi(&self) -> Vec<f64> {
        let h = 1.0 / self.n as f64;
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(0.0);
        for w in self.psi_values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Linear interpolation of Ψ^(T) at `t ∈ [0, 1]`.
    pub fn psi_at(&self, t: f64) -> f64 {
        let x = (t.clamp(0.0, 1.0)) * self.n as f64;
        let i = (x.floor() as usize).min(self.n - 1);
        let w = x - i as f64;
        self.psi_values[i] * (1.0 - w) + self.psi_values[i + 1] * w
    }

    pub fn sup_psi(&self) -> f64 {
        self.psi_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Forward substitution of the product-trapezoidal scheme with step `h`
/// on `n_steps` intervals: Ψ is interpolated linearly and the kernel is
/// integrated exactly against each hat function, so the discrete kernel
/// mass equals `a_T` and no spurious drift of the criticality builds up.
fn volterra_product_trapezoid(sk: &ScaledKernel, h: f64, n_steps: usize) -> Result<Vec<f64>> {
    let lag = ((sk.base.support() / h).ceil() as usize + 1).min(n_steps);
    let f = |u: f64| sk.evaluate(u);
    // left[d] = ∫_{(d-1)h}^{dh} f(u) (u-(d-1)h)/h du, right[d] = ∫_{dh}^{(d+1)h} f(u) ((d+1)h-u)/h du
    let mut left = vec![0.0; lag + 1];
    let mut right = vec![0.0; lag + 1];
    for d in 0..=lag {
        let x = d as f64 * h;
        if d > 0 {
            left[d] = quad::gk15(&|u: f64| f(u) * (u - (x - h)) / h, x - h, x).0;
        }
        right[d] = quad::gk15(&|u: f64| f(u) * (x + h - u) / h, x, x + h).0;
    }
    let w0 = right[0];
    let denom = 1.0 - w0;
    ensure(denom > 0.0, || {
        Error::NumericFailure(format!("step {h} too coarse for the kernel; increase n"))
    })?;
    // reversed hat weights so that the history sum is a contiguous dot product
    let wrev: Vec<f64> = (0..=lag).rev().map(|d| left[d] + right[d]).collect();
    let mut psi = vec![0.0; n_steps + 1];
    psi[0] = f(0.0);
    for i in 1..=n_steps {
        let lo = if i > lag { i - lag } else { 1 };
        let hist = dot(&wrev[lag + lo - i..lag], &psi[lo..i]);
        let (fi, edge) = if i <= lag { (f(i as f64 * h), left[i] * psi[0]) } else { (0.0, 0.0) };
        psi[i] = (fi + edge + hist) / denom;
    }
    ensure(psi.iter().all(|v| v.is_finite()), || {
        Error::NumericFailure("resolvent iteration diverged; increase n".into())
    })?;
    Ok(psi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// Solve `Ψ^T = φ^T + φ^T ∗ Ψ^T` on `[0, T]` and return `Ψ^(T)` on `n + 1`
/// points of `[0, 1]`.
///
/// The product-trapezoidal scheme is run at three step sizes `h, h/2, h/4` with
/// `h ≤ min(T/n, scale/8)` and combined by Richardson extrapolation, which
/// removes the leading error terms of the second-order scheme.
pub fn solve_resolvent(sk: &ScaledKernel, n: usize) -> Result<ResolventTable> {
    ensure(n >= 256, || Error::InvalidParameter(format!("grid resolution n must be >= 256, got {n}")))?;
    let big_t = sk.horizon;
    let coarse = big_t / n as f64;
    let r = ((coarse / (sk.base.time_scale() / 8.0)).ceil() as usize).max(1);
    let h = coarse / r as f64;
    let mut levels = Vec::with_capacity(3);
    for l in 0..3 {
        let sub = 1usize << l;
        levels.push(volterra_product_trapezoid(sk, h / sub as f64, n * r * sub)?);
    }
    let rho = limit_density(sk.regime, sk.base.m)?;
    let mut psi_values = Vec::with_capacity(n + 1);
    for g in 0..=n {
        let p1 = levels[0][g * r];
        let p2 = levels[1][2 * g * r];
        let p4 = levels[2][4 * g * r];
        let r1 = (4.0 * p2 - p1) / 3.0;
        let r2 = (4.0 * p4 - p2) / 3.0;
        psi_values.push((16.0 * r2 - r1) / 15.0);
    }
    let rho_values: Vec<f64> = (0..=n).map(|g| rho.evaluate(g as f64 / n as f64)).collect();
    let d_values = psi_values.iter().zip(&rho_values).map(|(p, r)| p - r).collect();
    Ok(ResolventTable { horizon: big_t, regime: sk.regime, m: sk.base.m, n, psi_values, rho_values, d_values })
}

/// The limit density ρ^♮ on [0, 1].
#[derive(Debug, Clone, Copy)]
pub struct LimitDensity {
    pub regime: Regime,
    pub m: f64,
}

impl LimitDensity {
    pub fn evaluate(&self, x: f64) -> f64 {
        match self.regime {
            Regime::Sub => (-x / self.m).exp() / self.m,
            Regime::Critical => 1.0 / self.m,
            Regime::Super => (x / self.m).exp() / self.m,
        }
    }
}

pub fn limit_density(regime: Regime, m: f64) -> Result<LimitDensity> {
    ensure(m > 0.0 && m.is_finite(), || Error::InvalidParameter(format!("m must be positive, got {m}")))?;
    Ok(LimitDensity { regime, m })
}

/// Trapezoidal `L²(0,1)` norm of `d = Ψ^(T) − ρ`.
pub fn l2_distance_on_unit(rt: &ResolventTable) -> f64 {
    let h = 1.0 / rt.n as f64;
    let sq: f64 = rt.d_values.windows(2).map(|w| 0.5 * h * (w[0] * w[0] + w[1] * w[1])).sum();
    sq.sqrt()
}

/// Discrete `∫₀^s |Ψ(t−u) − Ψ(s−u)|² du` between grid indices `s < t`.
pub fn increment_energy(rt: &ResolventTable, s: usize, t: usize) -> f64 {
    let h = 1.0 / rt.n as f64;
    let p = &rt.psi_values;
    let vals: Vec<f64> = (0..=s).map(|u| (p[t - u] - p[s - u]).powi(2)).collect();
    vals.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MalthusianResult {
    pub b_t: f64,
    pub tilted_l1: f64,
    pub m_tilde: f64,
}

/// Tilt rate `b_T` with `∫ e^{-b_T s} φ^{T,+}(s) ds = 1/a_T`.
pub fn malthusian_parameter(sk: &ScaledKernel) -> Result<MalthusianResult> {
    if sk.regime != Regime::Super {
        return Err(Error::InvalidRegime(format!(
            "Malthusian parameter needs the supercritical regime, got {}",
            sk.regime
        )));
    }
    let a = sk.a_t;
    let g = |b: f64| a * sk.base.tilted_moment(b, 0).unwrap_or(f64::NAN) - 1.0 / a;
    let mut hi = 1.0 / sk.base.time_scale();
    while g(hi) > 0.0 {
        hi *= 2.0;
        ensure(hi < 1e12, || Error::NumericFailure("no bracket for Malthusian parameter".into()))?;
    }
    let b_t = quad::brent(g, 0.0, hi, 1e-16)?;
    let tilted_l1 = a * sk.base.tilted_moment(b_t, 0)?;
    let m_tilde = a * sk.base.tilted_moment(b_t, 1)?;
    Ok(MalthusianResult { b_t, tilted_l1, m_tilde })
}

#[derive(Debug, Clone, Serialize)]
pub struct FourierDiagnostics {
    pub z_grid: Vec<f64>,
    pub residual: Vec<f64>,
    pub bound: Vec<f64>,
    /// Points with `|z| > α T`, where the bound is not claimed.
    pub flagged: Vec<bool>,
    /// The `C` of the `C/T` envelope (supercritical only).
    pub envelope_constant: Option<f64>,
}

/// `∫₀^∞ e^{-s x} φ(x) dx` for complex `s` by quadrature.
fn transform(sk: &ScaledKernel, s: Complex64) -> Result<Complex64> {
    let cut = sk.base.moment_cut();
    let re = quad::integrate(|x| (-s * x).exp().re * sk.base.evaluate(x), 0.0, cut, 1e-15, 1e-14)?;
    let im = quad::integrate(|x| (-s * x).exp().im * sk.base.evaluate(x), 0.0, cut, 1e-15, 1e-14)?;
    Ok(Complex64::new(re, im))
}

/// Residual `ε^T(z)` (subcritical) or its tilted version (supercritical)
/// on a frequency grid, with the matching envelope.
///
/// `alpha` defaults to `0.1 m / m₂`. In the supercritical regime the
/// envelope is `C/T`; `c_tilde` supplies `C`, otherwise it is the maximum of
/// `T |ε̃|` over the unflagged points.
pub fn fourier_residual(
    sk: &ScaledKernel,
    z_grid: &[f64],
    alpha: Option<f64>,
    c_tilde: Option<f64>,
) -> Result<FourierDiagnostics> {
    let m = sk.base.m;
    let m2 = sk.base.m2;
    let big_t = sk.horizon;
    let a = sk.a_t;
    let alpha = alpha.unwrap_or(0.1 * m / m2);
    let flagged: Vec<bool> = z_grid.iter().map(|z| z.abs() > alpha * big_t).collect();
    let i = Complex64::i();
    match sk.regime {
        Regime::Critical => Err(Error::InvalidRegime(
            "Fourier residual is defined for the sub- and supercritical regimes".into(),
        )),
        Regime::Sub => {
            let mut residual = Vec::with_capacity(z_grid.len());
            let mut bound = Vec::with_capacity(z_grid.len());
            for &z in z_grid {
                let g = transform(sk, Complex64::new(0.0, -z / big_t))?;
                let den_a = 1.0 - a * g;
                let izm = i * z * m - 1.0;
                let eps = (izm + big_t * den_a) / (big_t * den_a * izm);
                residual.push(eps.norm());
                let root = (z * z * m * m + 1.0).sqrt();
                bound.push(4.0 / (big_t * root) + 4.0 * z.abs() * m2 / (big_t * m * root));
            }
            Ok(FourierDiagnostics { z_grid: z_grid.to_vec(), residual, bound, flagged, envelope_constant: None })
        }
        Regime::Super => {
            let b = malthusian_parameter(sk)?.b_t;
            let mut residual = Vec::with_capacity(z_grid.len());
            for &z in z_grid {
                let g = transform(sk, Complex64::new(b, -z / big_t))?;
                let den_a = 1.0 - a * g;
                let d = i * z * m + 1.0 - b * big_t * m;
                let eps = (d + big_t * den_a) / (big_t * den_a * d);
                residual.push(eps.norm());
            }
            let c = c_tilde.unwrap_or_else(|| {
                residual
                    .iter()
                    .zip(&flagged)
                    .filter(|(_, f)| !**f)
                    .map(|(r, _)| r * big_t)
                    .fold(0.0, f64::max)
            });
            let bound = vec![c / big_t; z_grid.len()];
            Ok(FourierDiagnostics { z_grid: z_grid.to_vec(), residual, bound, flagged, envelope_constant: Some(c) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_exponential_kernel, make_gamma2_kernel, scale_kernel};

    fn exp_sk(r: Regime, t: f64) -> ScaledKernel {
        scale_kernel(make_exponential_kernel(1.0).unwrap(), r, t).unwrap()
    }

    #[test]
    fn exponential_closed_form_small_grid() {
        for r in Regime::ALL {
            let sk = exp_sk(r, 100.0);
            let rt = solve_resolvent(&sk, 256).unwrap();
            let a = sk.a_t;
            for (g, p) in rt.psi_values.iter().enumerate() {
                let t = rt.grid_point(g);
                let exact = a * (-(1.0 - a) * 100.0 * t).exp();
                assert!((p - exact).abs() < 1e-6, "{r} {t} {p} {exact}");
            }
        }
        let rt = solve_resolvent(&exp_sk(Regime::Sub, 100.0), 256).unwrap();
        assert!((rt.psi_values[0] - 0.99).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_n() {
        assert!(solve_resolvent(&exp_sk(Regime::Sub, 10.0), 100).is_err());
    }

    #[test]
    fn densities() {
        let r = limit_density(Regime::Sub, 1.0).unwrap();
        assert!((r.evaluate(1.0) - 0.367879441171).abs() < 1e-12);
        assert_eq!(limit_density(Regime::Critical, 2.0).unwrap().evaluate(0.7), 0.5);
        assert!((limit_density(Regime::Super, 1.0).unwrap().evaluate(1.0) - std::f64::consts::E).abs() < 1e-12);
        for reg in Regime::ALL {
            assert_eq!(limit_density(reg, 3.0).unwrap().evaluate(0.0), 1.0 / 3.0);
        }
        assert!(limit_density(Regime::Sub, 0.0).is_err());
    }

    #[test]
    fn l2_of_subcritical_exponential() {
        let rt = solve_resolvent(&exp_sk(Regime::Sub, 50.0), 2048).unwrap();
        let want = ((1.0 - (-2.0f64).exp()) / 2.0).sqrt() / 50.0;
        assert!((l2_distance_on_unit(&rt) - want).abs() < 1e-6 * want + 1e-9);
        let mut same = rt.clone();
        same.d_values.iter_mut().for_each(|d| *d = 0.0);
        assert_eq!(l2_distance_on_unit(&same), 0.0);
    }

    #[test]
    fn malthusian_exponential_and_regime_check() {
        let res = malthusian_parameter(&exp_sk(Regime::Super, 100.0)).unwrap();
        assert!((res.b_t - 0.0201).abs() < 1e-10, "{}", res.b_t);
        assert!((res.tilted_l1 - 1.0 / 1.01).abs() < 1e-12);
        assert!(matches!(malthusian_parameter(&exp_sk(Regime::Sub, 100.0)), Err(Error::InvalidRegime(_))));
        let g = scale_kernel(make_gamma2_kernel(1.0).unwrap(), Regime::Super, 1e4).unwrap();
        let res = malthusian_parameter(&g).unwrap();
        assert!((1e4 * res.b_t - 1.0).abs() < 1e-6);
        assert!((res.m_tilde - 2.0).abs() < 0.02);
    }

    #[test]
    fn fourier_subcritical_zero_frequency() {
        let sk = exp_sk(Regime::Sub, 200.0);
        let d = fourier_residual(&sk, &[0.0, 1.0, 5.0], None, None).unwrap();
        assert!(d.residual[0].abs() < 1e-10);
        assert!((d.bound[0] - 4.0 / 200.0).abs() < 1e-15);
        assert!(matches!(fourier_residual(&exp_sk(Regime::Critical, 200.0), &[0.0], None, None), Err(Error::InvalidRegime(_))));
    }
}
