use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Error, Result};
use crate::rng::{StreamKey, Tag};

fn snap(v: f64, edge: f64) -> f64 {
    if (v - edge).abs() <= 1e-12 * edge.max(1.0) {
        edge
    } else if v.abs() <= 1e-15 {
        0.0
    } else {
        v
    }
}

fn lattice(vals: impl Iterator<Item = f64>, edge: f64) -> Vec<f64> {
    let mut v: Vec<f64> = vals.filter(|&x| x > 0.0).chain(std::iter::once(edge)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Pinned Brownian sheet on `[0,1/k]²` at the query points, realized as
/// `B(x,y) − k² x y B(1/k,1/k)` from an auxiliary Brownian sheet `B`
/// sampled on the lattice spanned by the query coordinates.
///
/// All points of one cell must be passed in a single call: each call is an
/// independent realization.
pub fn sample_pinned_sheet<R: Rng + ?Sized>(k: usize, queries: &[(f64, f64)], rng: &mut R) -> Result<Vec<f64>> {
    ensure(k >= 1, || Error::InvalidParameter("k must be >= 1".into()))?;
    let edge = 1.0 / k as f64;
    let pts: Vec<(f64, f64)> = queries.iter().map(|&(x, y)| (snap(x, edge), snap(y, edge))).collect();
    for &(x, y) in &pts {
        ensure((0.0..=edge).contains(&x) && (0.0..=edge).contains(&y), || {
            Error::OutOfRange(format!("pinned-sheet query ({x}, {y}) outside [0, 1/{k}]²"))
        })?;
    }
    let xs = lattice(pts.iter().map(|p| p.0), edge);
    let ys = lattice(pts.iter().map(|p| p.1), edge);
    let (nx, ny) = (xs.len(), ys.len());
    // b[a*ny + c] = B(xs[a], ys[c]) by cumulative sums of independent cells
    let mut b = vec![0.0; nx * ny];
    for a in 0..nx {
        let dx = xs[a] - if a > 0 { xs[a - 1] } else { 0.0 };
        for c in 0..ny {
            let dy = ys[c] - if c > 0 { ys[c - 1] } else { 0.0 };
            let z: f64 = rng.sample(StandardNormal);
            let mut v = (dx * dy).sqrt() * z;
            if a > 0 {
                v += b[(a - 1) * ny + c];
            }
            if c > 0 {
                v += b[a * ny + c - 1];
            }
            if a > 0 && c > 0 {
                v -= b[(a - 1) * ny + c - 1];
            }
            b[a * ny + c] = v;
        }
    }
    let corner = b[nx * ny - 1];
    let kk = (k * k) as f64;
    Ok(pts
        .iter()
        .map(|&(x, y)| {
            if x == 0.0 || y == 0.0 {
                return 0.0;
            }
            let a = xs.binary_search_by(|v| v.total_cmp(&x)).unwrap();
            let c = ys.binary_search_by(|v| v.total_cmp(&y)).unwrap();
            if x == edge && y == edge {
                0.0
            } else {
                b[a * ny + c] - kk * x * y * corner
            }
        })
        .collect())
}

/// Where the pinned sheets of a coupled sheet come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PinnedSource {
    /// `β ≡ 0` (degenerate sheets in tests).
    Zero,
    /// Cell `(i, j)` uses the keyed stream `(Pinned, i, j)`.
    Keyed(StreamKey),
}

impl PinnedSource {
    pub fn sample(&self, k: usize, i: usize, j: usize, queries: &[(f64, f64)]) -> Result<Vec<f64>> {
        match self {
            PinnedSource::Zero => Ok(vec![0.0; queries.len()]),
            PinnedSource::Keyed(key) => sample_pinned_sheet(k, queries, &mut key.cell_rng(Tag::Pinned, i, j)),
        }
    }
}
