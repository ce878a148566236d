use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::stats::Estimate;

/// Log-log least-squares fit `ln y = intercept + slope·ln x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Weighted by the delta-method variance of `ln y` when every standard
/// error is positive, unweighted otherwise.
pub fn fit_rate(xs: &[f64], ys: &[f64], stderrs: &[f64]) -> Result<RateFit> {
    ensure(xs.len() == ys.len() && ys.len() == stderrs.len(), || {
        Error::InvalidInput("xs, ys and stderrs must have equal length".into())
    })?;
    ensure(xs.len() >= 3, || Error::InvalidInput(format!("need at least 3 points, got {}", xs.len())))?;
    ensure(ys.iter().all(|&y| y > 0.0 && y.is_finite()), || Error::InvalidInput("all ys must be positive".into()))?;
    ensure(xs.iter().all(|&x| x > 0.0 && x.is_finite()), || Error::InvalidInput("all xs must be positive".into()))?;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let weighted = stderrs.iter().all(|&s| s > 0.0 && s.is_finite());
    let w: Vec<f64> = if weighted {
        ys.iter().zip(stderrs).map(|(y, s)| (y / s).powi(2)).collect()
    } else {
        vec![1.0; xs.len()]
    };
    let sw: f64 = w.iter().sum();
    let mx = lx.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ly.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..lx.len() {
        let (dx, dy) = (lx[i] - mx, ly[i] - my);
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    ensure(sxx > 0.0, || Error::InvalidInput("xs must not all be equal".into()))?;
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(RateFit { xs: xs.to_vec(), ys: ys.to_vec(), stderrs: stderrs.to_vec(), slope, intercept, r2 })
}

pub fn fit_estimates(xs: &[f64], ests: &[Estimate]) -> Result<RateFit> {
    let ys: Vec<f64> = ests.iter().map(|e| e.mean).collect();
    let se: Vec<f64> = ests.iter().map(|e| e.stderr).collect();
    fit_rate(xs, &ys, &se)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopePoint {
    pub x: f64,
    pub y: f64,
    pub stderr: f64,
    pub envelope: f64,
    pub fitted: bool,
    pub ok: bool,
}

/// `y ≤ C·shape(x)` with `C` fitted on a subset and checked everywhere
/// (within `z` standard errors).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub constant: f64,
    pub points: Vec<EnvelopePoint>,
    pub pass: bool,
}

/// `C` is the largest ratio `y/shape(x)` over the fit indices, the smallest
/// constant for which the fitted points lie under the envelope.
pub fn split_envelope(xs: &[f64], ests: &[Estimate], shape: impl Fn(f64) -> f64, fit: &[usize], z: f64) -> EnvelopeCheck {
    let constant = fit.iter().map(|&i| ests[i].mean / shape(xs[i])).fold(0.0, f64::max);
    let points: Vec<EnvelopePoint> = xs
        .iter()
        .zip(ests)
        .enumerate()
        .map(|(i, (&x, e))| {
            let envelope = constant * shape(x);
            EnvelopePoint {
                x,
                y: e.mean,
                stderr: e.stderr,
                envelope,
                fitted: fit.contains(&i),
                ok: e.mean.is_finite() && e.mean <= envelope + z * e.stderr,
            }
        })
        .collect();
    let pass = constant.is_finite() && points.iter().all(|p| p.ok);
    EnvelopeCheck { constant, points, pass }
}

/// Strictly decreasing means.
pub fn strictly_decreasing(ests: &[Estimate]) -> bool {
    ests.windows(2).all(|w| w[1].mean < w[0].mean)
}
