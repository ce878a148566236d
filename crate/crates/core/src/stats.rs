//! Small statistics toolkit: pairwise sums, sample moments, normal and
//! Kolmogorov–Smirnov helpers.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

/// Pairwise (cascade) summation; order-stable and accurate.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Unbiased variance.
    pub var: f64,
    /// Fourth central moment (biased).
    pub m4: f64,
}

impl SampleStats {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return SampleStats { n, mean: f64::NAN, var: f64::NAN, m4: f64::NAN };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev2: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let ss = pairwise_sum(&dev2);
        let dev4: Vec<f64> = dev2.iter().map(|d| d * d).collect();
        let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
        SampleStats { n, mean, var, m4: pairwise_sum(&dev4) / n as f64 }
    }

    pub fn stderr(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance.
    pub fn var_stderr(&self) -> f64 {
        let n = self.n as f64;
        let s2 = self.var * (n - 1.0) / n;
        ((self.m4 - s2 * s2).max(0.0) / n).sqrt()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate { mean: self.mean, stderr: self.stderr(), n: self.n }
    }
}

pub fn estimate(xs: &[f64]) -> Estimate {
    SampleStats::of(xs).estimate()
}

/// Sample covariance with the standard error of the mean of the products
/// `(x - x̄)(y - ȳ)`; used for "within 3σ" covariance checks.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Estimate {
    let mx = pairwise_sum(xs) / xs.len() as f64;
    let my = pairwise_sum(ys) / ys.len() as f64;
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let s = SampleStats::of(&prods);
    let n = xs.len() as f64;
    Estimate { mean: s.mean * n / (n - 1.0), stderr: s.stderr(), n: xs.len() }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Upper-tail quantile: the `x` with `P(Z > x) = q`; accurate for tiny `q`.
pub fn normal_upper_quantile(q: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * q)
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Two-sample KS statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let t = (-2.0 * jf * jf * lambda * lambda).exp();
        s += if j % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// p-value of a KS statistic `d` with effective sample size `n`
/// (Stephens' small-sample correction).
pub fn ks_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)
}

/// Effective size for a two-sample test.
pub fn ks_two_sample_n(na: usize, nb: usize) -> f64 {
    (na * nb) as f64 / (na + nb) as f64
}
