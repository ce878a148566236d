use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::field::PoissonField;
use super::gaussian::Gaussianizer;
use super::pinned::PinnedSource;
use crate::error::{ensure, Error, Result};
use crate::rng::{open01, Tag};

#[derive(Debug, Clone)]
enum XiSource {
    Explicit,
    Field { field: PoissonField, gauss: Arc<Gaussianizer> },
}

#[derive(Debug, Clone)]
struct Column {
    counts: Vec<u32>,
    xi: Vec<f64>,
    uniforms: Vec<f64>,
    u_rng: Option<ChaCha8Rng>,
}

/// Brownian sheet W on `[0,1] × [0, rows/k]` assembled cell by cell from
/// Gaussianized Poisson increments `ξ_{i,j}` and pinned sheets `β_{i,j}`:
///
/// `W(s,t) = W(s,t_j) + W(t_i,t) − W(t_i,t_j) + β_{i,j}(s−t_i, t−t_j) + k²(s−t_i)(t−t_j) ξ_{i,j}`.
///
/// When built on a Poisson field, ξ is produced lazily, column by column,
/// using the per-column uniform stream in row order.
#[derive(Debug, Clone)]
pub struct CoupledSheet {
    k: usize,
    rows: usize,
    source: XiSource,
    pinned: PinnedSource,
    columns: Vec<Option<Column>>,
}

enum Loc {
    Node(usize),
    Inside(usize, f64),
}

fn locate(v: f64, k: usize) -> Loc {
    let x = v * k as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        Loc::Node(r as usize)
    } else {
        let i = x.floor() as usize;
        Loc::Inside(i, v - i as f64 / k as f64)
    }
}

impl CoupledSheet {
    /// Sheet coupled to `field` through `h_k`.
    pub fn from_field(field: &PoissonField, gauss: Arc<Gaussianizer>, pinned: PinnedSource) -> Result<CoupledSheet> {
        ensure(gauss.k == field.grid.k && gauss.horizon == field.horizon, || {
            Error::InvalidInput(format!(
                "Gaussianizer built for (T, k) = ({}, {}) but field has ({}, {})",
                gauss.horizon, gauss.k, field.horizon, field.grid.k
            ))
        })?;
        Ok(CoupledSheet {
            k: field.grid.k,
            rows: field.grid.rows,
            source: XiSource::Field { field: field.clone(), gauss },
            pinned,
            columns: vec![None; field.grid.k],
        })
    }

    /// Sheet from explicit increments `xi[i][j]`.
    pub fn from_xi(k: usize, xi: Vec<Vec<f64>>, pinned: PinnedSource) -> Result<CoupledSheet> {
        ensure(k >= 1, || Error::InvalidParameter("k must be >= 1".into()))?;
        let rows = xi.iter().map(|c| c.len()).min().unwrap_or(0);
        let mut columns: Vec<Option<Column>> = xi
            .into_iter()
            .map(|c| Some(Column { counts: Vec::new(), xi: c, uniforms: Vec::new(), u_rng: None }))
            .collect();
        columns.resize(k, None);
        Ok(CoupledSheet { k, rows, source: XiSource::Explicit, pinned, columns })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn theta_extent(&self) -> f64 {
        self.rows as f64 / self.k as f64
    }

    pub fn pinned(&self) -> PinnedSource {
        self.pinned
    }

    /// Provide the cell counts of column `i` (they must be the field's own
    /// counts); avoids regenerating them when the caller already has them.
    pub fn set_column_counts(&mut self, i: usize, counts: &[u32]) {
        if let XiSource::Field { field, .. } = &self.source {
            if i < self.k && self.columns[i].is_none() {
                let u_rng = field.key().rng(Tag::Uniform, i as u64);
                self.columns[i] = Some(Column { counts: counts.to_vec(), xi: Vec::new(), uniforms: Vec::new(), u_rng: Some(u_rng) });
            }
        }
    }

    fn column(&mut self, i: usize, upto: usize) -> Result<&Column> {
        ensure(i < self.k, || Error::MissingCell { i, j: upto.saturating_sub(1) })?;
        if self.columns[i].is_none() {
            match &self.source {
                XiSource::Explicit => return Err(Error::MissingCell { i, j: 0 }),
                XiSource::Field { field, .. } => {
                    let counts = field.slab_counts(i, self.rows);
                    let u_rng = field.key().rng(Tag::Uniform, i as u64);
                    self.columns[i] = Some(Column { counts, xi: Vec::new(), uniforms: Vec::new(), u_rng: Some(u_rng) });
                }
            }
        }
        let col = self.columns[i].as_mut().unwrap();
        if col.xi.len() < upto {
            match &self.source {
                XiSource::Explicit => return Err(Error::MissingCell { i, j: col.xi.len() }),
                XiSource::Field { gauss, .. } => {
                    ensure(upto <= col.counts.len(), || Error::MissingCell { i, j: col.counts.len() })?;
                    let rng = col.u_rng.as_mut().unwrap();
                    for j in col.xi.len()..upto {
                        let u = open01(rng);
                        col.uniforms.push(u);
                        col.xi.push(gauss.xi_from_count(col.counts[j] as u64, u));
                    }
                }
            }
        }
        Ok(self.columns[i].as_ref().unwrap())
    }

    pub fn xi(&mut self, i: usize, j: usize) -> Result<f64> {
        Ok(self.column(i, j + 1)?.xi[j])
    }

    /// Uniform `U_{i,j}` consumed by `h_k` (field-driven sheets only).
    pub fn uniform(&mut self, i: usize, j: usize) -> Result<f64> {
        let col = self.column(i, j + 1)?;
        col.uniforms.get(j).copied().ok_or(Error::MissingCell { i, j })
    }

    /// Raw field count of cell `(i, j)` (field-driven sheets only).
    pub fn count(&mut self, i: usize, j: usize) -> Result<u32> {
        let col = self.column(i, 0)?;
        col.counts.get(j).copied().ok_or(Error::MissingCell { i, j })
    }

    /// `W(I_{i,k} × (0, θ])`: whole cells below `θ` plus the partial strip
    /// of the boundary cell through its pinned sheet.
    pub fn column_strip(&mut self, i: usize, theta: f64) -> Result<f64> {
        if theta <= 0.0 {
            return Ok(0.0);
        }
        let k = self.k;
        let (jstar, y) = match locate(theta, k) {
            Loc::Node(j) => (j, 0.0),
            Loc::Inside(j, y) => (j, y),
        };
        let need = if y > 0.0 { jstar + 1 } else { jstar };
        let col = self.column(i, need)?;
        let mut w: f64 = col.xi[..jstar].iter().sum();
        if y > 0.0 {
            let xi = col.xi[jstar];
            let beta = self.pinned.sample(k, i, jstar, &[(1.0 / k as f64, y)])?[0];
            w += beta + k as f64 * y * xi;
        }
        Ok(w)
    }

    /// Node values `W(i/k, j/k)` for `i ≤ imax`, `j ≤ jmax`, by the cell
    /// recursion in lexicographic order.
    pub fn node_values(&mut self, imax: usize, jmax: usize) -> Result<Vec<Vec<f64>>> {
        let mut nodes = vec![vec![0.0; jmax + 1]; imax + 1];
        for i in 0..imax {
            let col = self.column(i, jmax)?;
            for j in 0..jmax {
                nodes[i + 1][j + 1] = nodes[i + 1][j] + nodes[i][j + 1] - nodes[i][j] + col.xi[j];
            }
        }
        Ok(nodes)
    }

    /// `W` at arbitrary points `(s, t)`; all pinned-sheet values a call needs
    /// are realized together, one draw per cell.
    pub fn values_at(&mut self, queries: &[(f64, f64)]) -> Result<Vec<f64>> {
        let k = self.k;
        let e = 1.0 / k as f64;
        let kf = k as f64;
        let locs: Vec<Option<(Loc, Loc)>> = queries
            .iter()
            .map(|&(s, t)| if s <= 0.0 || t <= 0.0 { None } else { Some((locate(s, k), locate(t, k))) })
            .collect();
        // pass 1: pinned-sheet requests per cell and the node extent
        let mut requests: BTreeMap<(usize, usize), Vec<(f64, f64)>> = BTreeMap::new();
        let (mut imax, mut jmax) = (0, 0);
        for loc in locs.iter().flatten() {
            match loc {
                (Loc::Node(a), Loc::Node(b)) => {
                    imax = imax.max(*a);
                    jmax = jmax.max(*b);
                }
                (Loc::Node(a), Loc::Inside(j, y)) => {
                    imax = imax.max(*a);
                    jmax = jmax.max(*j + 1);
                    for ip in 0..*a {
                        requests.entry((ip, *j)).or_default().push((e, *y));
                    }
                }
                (Loc::Inside(i, x), Loc::Node(b)) => {
                    imax = imax.max(*i + 1);
                    jmax = jmax.max(*b);
                    for jp in 0..*b {
                        requests.entry((*i, jp)).or_default().push((*x, e));
                    }
                }
                (Loc::Inside(i, x), Loc::Inside(j, y)) => {
                    imax = imax.max(*i + 1);
                    jmax = jmax.max(*j + 1);
                    for ip in 0..*i {
                        requests.entry((ip, *j)).or_default().push((e, *y));
                    }
                    for jp in 0..*j {
                        requests.entry((*i, jp)).or_default().push((*x, e));
                    }
                    requests.entry((*i, *j)).or_default().push((*x, *y));
                }
            }
        }
        ensure(imax <= k, || Error::MissingCell { i: imax - 1, j: 0 })?;
        let nodes = self.node_values(imax, jmax)?;
        let mut beta: HashMap<(usize, usize, u64, u64), f64> = HashMap::new();
        for ((i, j), pts) in &requests {
            let vals = self.pinned.sample(k, *i, *j, pts)?;
            for (p, v) in pts.iter().zip(vals) {
                beta.insert((*i, *j, p.0.to_bits(), p.1.to_bits()), v);
            }
        }
        let b = |i: usize, j: usize, x: f64, y: f64| beta[&(i, j, x.to_bits(), y.to_bits())];
        // pass 2: evaluate
        let mut out = Vec::with_capacity(queries.len());
        for loc in &locs {
            let v = match loc {
                None => 0.0,
                Some((Loc::Node(a), Loc::Node(bn))) => nodes[*a][*bn],
                Some((Loc::Node(a), Loc::Inside(j, y))) => {
                    let mut w = nodes[*a][*j];
                    for ip in 0..*a {
                        w += b(ip, *j, e, *y) + kf * y * self.xi(ip, *j)?;
                    }
                    w
                }
                Some((Loc::Inside(i, x), Loc::Node(bn))) => {
                    let mut w = nodes[*i][*bn];
                    for jp in 0..*bn {
                        w += b(*i, jp, *x, e) + kf * x * self.xi(*i, jp)?;
                    }
                    w
                }
                Some((Loc::Inside(i, x), Loc::Inside(j, y))) => {
                    let mut left = nodes[*i][*j];
                    for ip in 0..*i {
                        left += b(ip, *j, e, *y) + kf * y * self.xi(ip, *j)?;
                    }
                    let mut below = nodes[*i][*j];
                    for jp in 0..*j {
                        below += b(*i, jp, *x, e) + kf * x * self.xi(*i, jp)?;
                    }
                    left + below - nodes[*i][*j] + b(*i, *j, *x, *y) + kf * kf * x * y * self.xi(*i, *j)?
                }
            };
            out.push(v);
        }
        Ok(out)
    }
}

/// Assemble W at `queries` from explicit increments and pinned sheets.
pub fn assemble_sheet(xi: &[Vec<f64>], pinned: PinnedSource, k: usize, queries: &[(f64, f64)]) -> Result<Vec<f64>> {
    CoupledSheet::from_xi(k, xi.to_vec(), pinned)?.values_at(queries)
}
