//! Base kernels φ with unit mass, regimes and the near-critical scaling
//! `φ^T = a_T φ`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quad;

/// A user-supplied base kernel.
pub trait BaseKernel: Send + Sync {
    fn evaluate(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

#[derive(Clone)]
pub enum Family {
    Exponential { beta: f64 },
    Gamma2 { beta: f64 },
    Custom(Arc<dyn BaseKernel>),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Exponential { beta } => write!(f, "Exponential {{ beta: {beta} }}"),
            Family::Gamma2 { beta } => write!(f, "Gamma2 {{ beta: {beta} }}"),
            Family::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelSpec {
    family: Family,
    pub l1_norm: f64,
    pub m: f64,
    pub m2: f64,
    pub analytic_moments_available: bool,
    /// Beyond this point the kernel mass is below 1e-12.
    support: f64,
    /// Beyond this point the second-moment tail is below 1e-12.
    moment_cut: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub l1: f64,
    pub m: f64,
    pub m2: f64,
}

pub fn make_exponential_kernel(beta: f64) -> Result<KernelSpec> {
    ensure(beta > 0.0 && beta.is_finite(), || {
        Error::InvalidParameter(format!("exponential kernel needs beta > 0, got {beta}"))
    })?;
    Ok(KernelSpec {
        family: Family::Exponential { beta },
        l1_norm: 1.0,
        m: 1.0 / beta,
        m2: 2.0 / (beta * beta),
        analytic_moments_available: true,
        support: 12.0 * std::f64::consts::LN_10 / beta,
        moment_cut: 40.0 / beta,
    })
}

pub fn make_gamma2_kernel(beta: f64) -> Result<KernelSpec> {
    ensure(beta > 0.0 && beta.is_finite(), || {
        Error::InvalidParameter(format!("gamma2 kernel needs beta > 0, got {beta}"))
    })?;
    // tail mass (1 + βc) e^{-βc} = 1e-12 at βc ≈ 31.67
    let bc = quad::brent(|x| (1.0 + x).ln() - x + 12.0 * std::f64::consts::LN_10, 1.0, 100.0, 1e-12)?;
    Ok(KernelSpec {
        family: Family::Gamma2 { beta },
        l1_norm: 1.0,
        m: 2.0 / beta,
        m2: 6.0 / (beta * beta),
        analytic_moments_available: true,
        support: bc / beta,
        moment_cut: 45.0 / beta,
    })
}

impl KernelSpec {
    /// Wrap a user kernel; moments come from quadrature on `[0, support]`
    /// and the mass must be 1 within 1e-8.
    pub fn custom(kernel: Arc<dyn BaseKernel>, support: f64) -> Result<KernelSpec> {
        ensure(support > 0.0 && support.is_finite(), || {
            Error::InvalidParameter(format!("support must be positive, got {support}"))
        })?;
        let mo = moments_of(|t| kernel.evaluate(t), support)?;
        ensure((mo.l1 - 1.0).abs() < 1e-8, || {
            Error::InvalidParameter(format!("kernel mass must be 1, got {}", mo.l1))
        })?;
        Ok(KernelSpec {
            family: Family::Custom(kernel),
            l1_norm: mo.l1,
            m: mo.m,
            m2: mo.m2,
            analytic_moments_available: false,
            support,
            moment_cut: support,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Exponential { .. } => "exponential",
            Family::Gamma2 { .. } => "gamma2",
            Family::Custom(_) => "custom",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.family {
            Family::Exponential { beta } | Family::Gamma2 { beta } => Some(beta),
            Family::Custom(_) => None,
        }
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn moment_cut(&self) -> f64 {
        self.moment_cut
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { beta } => beta * (-beta * t).exp(),
            Family::Gamma2 { beta } => beta * beta * t * (-beta * t).exp(),
            Family::Custom(k) => k.evaluate(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.family {
            Family::Exponential { beta } => -beta * beta * (-beta * t).exp(),
            Family::Gamma2 { beta } => beta * beta * (1.0 - beta * t) * (-beta * t).exp(),
            Family::Custom(k) => k.derivative(t),
        }
    }

    /// Natural time scale, used to size numerical grids.
    pub fn time_scale(&self) -> f64 {
        match self.family {
            Family::Exponential { beta } | Family::Gamma2 { beta } => 1.0 / beta,
            Family::Custom(_) => self.m,
        }
    }

    /// `∫₀^∞ e^{-b s} s^p φ(s) ds` by quadrature, `p ∈ {0, 1}`.
    pub fn tilted_moment(&self, b: f64, p: i32) -> Result<f64> {
        quad::integrate(
            |s| (-b * s).exp() * s.powi(p) * self.evaluate(s),
            0.0,
            self.moment_cut,
            1e-15,
            1e-15,
        )
    }
}

/// Moments of an arbitrary nonnegative function on `[0, cut]`.
pub fn moments_of(f: impl Fn(f64) -> f64, cut: f64) -> Result<Moments> {
    let l1 = quad::integrate(&f, 0.0, cut, 1e-14, 1e-14)?;
    let m = quad::integrate(|t| t * f(t), 0.0, cut, 1e-14, 1e-14)?;
    let m2 = quad::integrate(|t| t * t * f(t), 0.0, cut, 1e-14, 1e-14)?;
    Ok(Moments { l1, m, m2 })
}

/// Quadrature moments of a kernel, independent of the analytic values.
pub fn kernel_moments(base: &KernelSpec) -> Result<Moments> {
    moments_of(|t| base.evaluate(t), base.moment_cut)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Sub,
    Critical,
    Super,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Sub, Regime::Critical, Regime::Super];

    pub fn a_t(self, horizon: f64) -> f64 {
        match self {
            Regime::Sub => 1.0 - 1.0 / horizon,
            Regime::Critical => 1.0,
            Regime::Super => 1.0 + 1.0 / horizon,
        }
    }

    /// Coefficient `c` in the limit drift `(μ + c X)/m`.
    pub fn drift_coefficient(self) -> f64 {
        match self {
            Regime::Sub => -1.0,
            Regime::Critical => 0.0,
            Regime::Super => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Regime::Sub => "-",
            Regime::Critical => "0",
            Regime::Super => "+",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Sub => "sub",
            Regime::Critical => "critical",
            Regime::Super => "super",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Regime> {
        match s.to_ascii_lowercase().as_str() {
            "sub" | "subcritical" | "-" | "minus" => Ok(Regime::Sub),
            "critical" | "crit" | "0" | "zero" => Ok(Regime::Critical),
            "super" | "supercritical" | "+" | "plus" => Ok(Regime::Super),
            other => Err(Error::InvalidParameter(format!("unknown regime {other:?}"))),
        }
    }
}

/// Shipped kernel families, as named in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Exponential,
    Gamma2,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::Exponential => "exponential",
            KernelFamily::Gamma2 => "gamma2",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<KernelFamily> {
        match s.to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(KernelFamily::Exponential),
            "gamma2" | "gamma" => Ok(KernelFamily::Gamma2),
            other => Err(Error::InvalidParameter(format!("unknown kernel {other:?}"))),
        }
    }
}

impl KernelFamily {
    pub fn build(self, beta: f64) -> Result<KernelSpec> {
        match self {
            KernelFamily::Exponential => make_exponential_kernel(beta),
            KernelFamily::Gamma2 => make_gamma2_kernel(beta),
        }
    }
}

/// Kernel, regime and baseline: everything but the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kernel: KernelFamily,
    pub beta: f64,
    pub regime: Regime,
    pub mu: f64,
}

impl Model {
    pub fn scaled(&self, horizon: f64) -> Result<ScaledKernel> {
        scale_kernel(self.kernel.build(self.beta)?, self.regime, horizon)
    }
}

#[derive(Clone, Debug)]
pub struct ScaledKernel {
    pub base: KernelSpec,
    pub regime: Regime,
    pub horizon: f64,
    pub a_t: f64,
}

pub fn scale_kernel(base: KernelSpec, regime: Regime, horizon: f64) -> Result<ScaledKernel> {
    ensure(horizon >= 2.0 && horizon.is_finite(), || {
        Error::OutOfRange(format!("scale T must be >= 2, got {horizon}"))
    })?;
    Ok(ScaledKernel { a_t: regime.a_t(horizon), base, regime, horizon })
}

impl ScaledKernel {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.a_t * self.base.evaluate(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn analytic_moments() {
        let k = make_exponential_kernel(2.0).unwrap();
        assert_eq!((k.m, k.m2), (0.5, 0.5));
        let g = make_gamma2_kernel(1.0).unwrap();
        assert_eq!((g.m, g.m2), (2.0, 6.0));
        assert_eq!(g.evaluate(0.0), 0.0);
        assert_eq!(g.derivative(0.0), 1.0);
        assert!(make_exponential_kernel(0.0).is_err());
        assert!(make_gamma2_kernel(-1.0).is_err());
    }

    #[test]
    fn quadrature_matches_analytic() {
        for beta in [0.5, 1.0, 2.0, 7.0] {
            for k in [make_exponential_kernel(beta).unwrap(), make_gamma2_kernel(beta).unwrap()] {
                let q = kernel_moments(&k).unwrap();
                assert!((q.l1 - 1.0).abs() < 1e-8);
                assert!((q.m - k.m).abs() < 1e-8, "{} {beta}", k.name());
                assert!((q.m2 - k.m2).abs() < 1e-8);
                let tail = 1.0 - quad::integrate(|t| k.evaluate(t), 0.0, k.support(), 1e-15, 1e-15).unwrap();
                assert!(tail < 1.1e-12 && tail > -1e-14, "{tail}");
            }
        }
    }

    #[test]
    fn zero_kernel_is_rejected() {
        struct Zero;
        impl BaseKernel for Zero {
            fn evaluate(&self, _: f64) -> f64 {
                0.0
            }
            fn derivative(&self, _: f64) -> f64 {
                0.0
            }
        }
        let mo = moments_of(|_| 0.0, 10.0).unwrap();
        assert_eq!((mo.l1, mo.m, mo.m2), (0.0, 0.0, 0.0));
        assert!(KernelSpec::custom(Arc::new(Zero), 10.0).is_err());
    }

    #[test]
    fn regime_factors() {
        let k = make_exponential_kernel(1.0).unwrap();
        assert_eq!(scale_kernel(k.clone(), Regime::Sub, 100.0).unwrap().a_t, 0.99);
        assert_eq!(scale_kernel(k.clone(), Regime::Critical, 100.0).unwrap().a_t, 1.0);
        assert_eq!(scale_kernel(k.clone(), Regime::Super, 100.0).unwrap().a_t, 1.01);
        assert!(scale_kernel(k, Regime::Sub, 1.5).is_err());
        assert_eq!("supercritical".parse::<Regime>().unwrap(), Regime::Super);
    }

    #[test]
    fn a_t_monotone_in_t() {
        for r in Regime::ALL {
            let gaps: Vec<f64> = (1..=16).map(|p| (r.a_t(2f64.powi(p)) - 1.0).abs()).collect();
            assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    proptest! {
        #[test]
        fn scaling_preserves_shape(beta in 0.1f64..10.0, t in 0.0f64..20.0, big_t in 2.0f64..1e5) {
            for base in [make_exponential_kernel(beta).unwrap(), make_gamma2_kernel(beta).unwrap()] {
                for r in Regime::ALL {
                    let sk = scale_kernel(base.clone(), r, big_t).unwrap();
                    let v = base.evaluate(t);
                    prop_assert!(v >= 0.0);
                    if v > 1e-300 {
                        prop_assert!((sk.evaluate(t) / v - sk.a_t).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
