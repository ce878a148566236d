use crate::error::{ensure, Error, Result};

/// Yamada function `Υ_{ε,η}`: a `|x|` surrogate whose second derivative is
/// `(2m²/η)/|x|` on `a ≤ |x| ≤ ε`, `a = ε e^{−η/(2m²)}`, and zero elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct YamadaFunction {
    pub eps: f64,
    pub eta: f64,
    pub m: f64,
    /// Inner end of the support of `Υ''`.
    pub a: f64,
    c: f64,
}

pub fn build_yamada(eps: f64, eta: f64, m: f64) -> Result<YamadaFunction> {
    ensure(eps > 0.0 && eta > 0.0 && m > 0.0, || {
        Error::InvalidParameter(format!("need eps, eta, m > 0, got ({eps}, {eta}, {m})"))
    })?;
    let c = 2.0 * m * m / eta;
    let a = eps * (-1.0 / c).exp();
    ensure(a > 0.0 && a < eps, || {
        Error::InvalidParameter(format!("support [{a}, {eps}] of the second derivative is empty"))
    })?;
    Ok(YamadaFunction { eps, eta, m, a, c })
}

impl YamadaFunction {
    pub fn evaluate(&self, x: f64) -> f64 {
        let u = x.abs();
        if u <= self.a {
            0.0
        } else if u <= self.eps {
            self.c * (u * (u / self.a).ln() - (u - self.a))
        } else {
            self.evaluate(self.eps) + (u - self.eps)
        }
    }

    pub fn first(&self, x: f64) -> f64 {
        let u = x.abs();
        let v = if u <= self.a {
            0.0
        } else if u <= self.eps {
            self.c * (u / self.a).ln()
        } else {
            1.0
        };
        v.copysign(x)
    }

    pub fn second(&self, x: f64) -> f64 {
        let u = x.abs();
        if u >= self.a && u <= self.eps {
            self.c / u
        } else {
            0.0
        }
    }
}
