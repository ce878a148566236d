use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{ensure, Error, Result};
use crate::rng::{StreamKey, Tag};

/// Refuse to materialize fields with more expected points than this.
pub const DEFAULT_POINT_CAP: f64 = 5e7;

/// Square cells of side `1/k` (rescaled units) covering `(0,1] × (0, rows/k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellGrid {
    pub k: usize,
    pub rows: usize,
}

impl CellGrid {
    /// Grid whose θ-extent is `theta_max` rounded up to whole cells.
    pub fn new(k: usize, theta_max: f64) -> Result<CellGrid> {
        ensure(k >= 1, || Error::InvalidParameter("k must be >= 1".into()))?;
        ensure(theta_max >= 0.0 && theta_max.is_finite(), || {
            Error::InvalidParameter(format!("theta_max must be >= 0, got {theta_max}"))
        })?;
        let rows = (theta_max * k as f64 - 1e-9).ceil().max(0.0) as usize;
        Ok(CellGrid { k, rows })
    }

    pub fn theta_extent(&self) -> f64 {
        self.rows as f64 / self.k as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.k as f64
    }
}

/// `(count/T) − T/k²`: the rescaled compensated increment of one cell.
pub fn compensated_increment(count: u64, horizon: f64, k: usize) -> f64 {
    count as f64 / horizon - horizon / (k * k) as f64
}

/// Lazily generated unit-rate Poisson field on `[0,T] × [0, rows·T/k]`.
///
/// Slab `i` covers raw times `(iT/k, (i+1)T/k]`. Its cell counts come from
/// one stream in row order and its point positions from another stream,
/// also in row order. Generating more rows (a larger ceiling) therefore
/// reproduces the existing rows exactly.
#[derive(Debug, Clone)]
pub struct PoissonField {
    pub horizon: f64,
    pub grid: CellGrid,
    key: StreamKey,
    cell_mean: f64,
}

impl PoissonField {
    pub fn new(horizon: f64, grid: CellGrid, key: StreamKey) -> Result<PoissonField> {
        ensure(horizon >= 2.0, || Error::OutOfRange(format!("T must be >= 2, got {horizon}")))?;
        let cell_mean = (horizon / grid.k as f64).powi(2);
        Ok(PoissonField { horizon, grid, key, cell_mean })
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// Expected count per cell, `T²/k²`.
    pub fn cell_mean(&self) -> f64 {
        self.cell_mean
    }

    /// Raw side length of a cell, `T/k`.
    pub fn cell_side(&self) -> f64 {
        self.horizon / self.grid.k as f64
    }

    /// Cell counts of slab `i` for rows `0..rows`.
    pub fn slab_counts(&self, i: usize, rows: usize) -> Vec<u32> {
        let mut rng = self.key.rng(Tag::FieldCount, i as u64);
        draw_counts(&mut rng, self.cell_mean, rows)
    }

    pub fn slab(&self, i: usize) -> Slab {
        let side = self.cell_side();
        Slab {
            i,
            t0: i as f64 * side,
            side,
            counts: self.slab_counts(i, self.grid.rows),
            points: Vec::new(),
            filled: 0,
            pos_rng: self.key.rng(Tag::FieldPosition, i as u64),
        }
    }
}

fn draw_counts(rng: &mut ChaCha8Rng, mean: f64, rows: usize) -> Vec<u32> {
    if mean <= 0.0 {
        return vec![0; rows];
    }
    let dist = Poisson::new(mean).expect("positive mean");
    (0..rows).map(|_| dist.sample(rng) as u32).collect()
}

/// One time slab of the field, with positions generated up to `filled` rows.
#[derive(Debug, Clone)]
pub struct Slab {
    pub i: usize,
    /// Raw start time.
    pub t0: f64,
    /// Raw cell side `T/k`.
    pub side: f64,
    counts: Vec<u32>,
    points: Vec<(f64, f64)>,
    filled: usize,
    pos_rng: ChaCha8Rng,
}

impl Slab {
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn filled_rows(&self) -> usize {
        self.filled
    }

    /// Raw θ below which every point has been generated.
    pub fn filled_ceiling(&self) -> f64 {
        self.filled as f64 * self.side
    }

    /// Generate positions for all rows below `rows` (clamped to the grid).
    pub fn fill_rows(&mut self, rows: usize) {
        let rows = rows.min(self.counts.len());
        for j in self.filled..rows {
            let base = j as f64 * self.side;
            for _ in 0..self.counts[j] {
                let t = self.t0 + self.side * self.pos_rng.random::<f64>();
                let th = base + self.side * self.pos_rng.random::<f64>();
                self.points.push((t, th));
            }
        }
        self.filled = self.filled.max(rows);
    }

    /// Generated points `(t, θ)` in raw coordinates, grouped by row.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// A fully materialized field sample.
#[derive(Debug, Clone)]
pub struct PoissonFieldSample {
    pub horizon: f64,
    /// Effective θ-extent (rescaled units), a whole number of cells.
    pub theta_max: f64,
    pub grid: CellGrid,
    /// Raw points `(t, θ)` in `[0,T] × [0, theta_max·T]`.
    pub points: Vec<(f64, f64)>,
    /// `cell_counts[i][j]`: raw count in time slab `i`, row `j`.
    pub cell_counts: Vec<Vec<u32>>,
    pub field: PoissonField,
}

/// Sample the whole field on `[0,T] × [0, theta_max·T]` with `k` cells per
/// unit. `theta_max` is rounded up to a multiple of `1/k`.
pub fn sample_poisson_field(
    horizon: f64,
    theta_max: f64,
    k: usize,
    key: StreamKey,
    point_cap: f64,
) -> Result<PoissonFieldSample> {
    ensure(theta_max > 0.0, || Error::InvalidParameter(format!("theta_max must be > 0, got {theta_max}")))?;
    let grid = CellGrid::new(k, theta_max)?;
    let field = PoissonField::new(horizon, grid, key)?;
    let expected = horizon * horizon * grid.theta_extent();
    ensure(expected <= point_cap, || {
        Error::Capacity(format!(
            "expected {expected:.3e} points exceeds the cap {point_cap:.3e}; use slab streaming (PoissonField::slab)"
        ))
    })?;
    let mut points = Vec::new();
    let mut cell_counts = Vec::with_capacity(k);
    for i in 0..k {
        let mut slab = field.slab(i);
        slab.fill_rows(grid.rows);
        points.extend_from_slice(slab.points());
        cell_counts.push(slab.counts().to_vec());
    }
    Ok(PoissonFieldSample { horizon, theta_max: grid.theta_extent(), grid, points, cell_counts, field })
}

impl PoissonFieldSample {
    pub fn compensated_cell_increment(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        ensure(k == self.grid.k, || {
            Error::InvalidInput(format!("sample has k = {}, asked for k = {k}", self.grid.k))
        })?;
        let count = self
            .cell_counts
            .get(i)
            .and_then(|c| c.get(j))
            .ok_or_else(|| Error::OutOfRange(format!("cell ({i}, {j}) outside the sampled field")))?;
        Ok(compensated_increment(*count as u64, self.horizon, k))
    }
}
