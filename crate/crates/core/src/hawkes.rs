//! Hawkes process by Poisson imbedding: a field point `(t, θ)` is an event
//! iff `θ ≤ λ_{t−}`.

use serde::Serialize;

use crate::coupling::{PoissonField, PoissonFieldSample, Slab};
use crate::error::{ensure, Error, Result};
use crate::kernels::{Family, ScaledKernel};
use crate::quad;

/// Markov (or generic) representation of `λ − μ`.
#[derive(Debug, Clone)]
enum Excitation {
    /// `λ − μ = s`, `s' = −βs`, jumps by `aβ`.
    Exp { beta: f64, s: f64, jump: f64 },
    /// `λ − μ = b` with `a' = −βa`, `b' = a − βb`; `a` jumps by `aβ²`.
    Gamma2 { beta: f64, a: f64, b: f64, jump: f64 },
    /// Direct summation over past events.
    Generic { events: Vec<f64> },
}

/// Intensity state driven forward in time.
#[derive(Debug, Clone)]
pub(crate) struct Intensity<'a> {
    sk: &'a ScaledKernel,
    mu: f64,
    t: f64,
    exc: Excitation,
    compensator: f64,
    count: usize,
}

impl<'a> Intensity<'a> {
    pub(crate) fn new(sk: &'a ScaledKernel, mu: f64) -> Self {
        let a = sk.a_t;
        let exc = match sk.base.family() {
            Family::Exponential { beta } => Excitation::Exp { beta: *beta, s: 0.0, jump: a * beta },
            Family::Gamma2 { beta } => Excitation::Gamma2 { beta: *beta, a: 0.0, b: 0.0, jump: a * beta * beta },
            Family::Custom(_) => Excitation::Generic { events: Vec::new() },
        };
        Intensity { sk, mu, t: 0.0, exc, compensator: 0.0, count: 0 }
    }

    /// λ at the current time (right limit).
    pub(crate) fn value(&self) -> f64 {
        self.mu
            + match &self.exc {
                Excitation::Exp { s, .. } => *s,
                Excitation::Gamma2 { b, .. } => *b,
                Excitation::Generic { events } => self.generic_at(events, self.t),
            }
    }

    fn generic_at(&self, events: &[f64], t: f64) -> f64 {
        let cut = self.sk.base.support();
        events.iter().rev().take_while(|&&e| t - e <= cut).map(|&e| self.sk.evaluate(t - e)).sum()
    }

    pub(crate) fn compensator(&self) -> f64 {
        self.compensator
    }

    pub(crate) fn count(&self) -> usize {
        self.count
    }

    /// Move to `to ≥ t`; returns the supremum of λ over `(t, to]`.
    pub(crate) fn advance(&mut self, to: f64) -> f64 {
        let dt = to - self.t;
        if dt <= 0.0 {
            return self.value();
        }
        let mu = self.mu;
        let sup = match &mut self.exc {
            Excitation::Exp { beta, s, .. } => {
                let e = (-*beta * dt).exp();
                self.compensator += mu * dt + *s * (1.0 - e) / *beta;
                let sup = *s;
                *s *= e;
                mu + sup
            }
            Excitation::Gamma2 { beta, a, b, .. } => {
                let bt = *beta;
                let e = (-bt * dt).exp();
                self.compensator += mu * dt + *b * (1.0 - e) / bt + *a * ((1.0 - e) / (bt * bt) - dt * e / bt);
                let b_end = (*b + *a * dt) * e;
                let mut sup = b.max(b_end);
                if *a > 0.0 {
                    let s_star = 1.0 / bt - *b / *a;
                    if s_star > 0.0 && s_star < dt {
                        sup = sup.max((*b + *a * s_star) * (-bt * s_star).exp());
                    }
                }
                *a *= e;
                *b = b_end;
                mu + sup
            }
            Excitation::Generic { events } => {
                let (t0, cut, sk) = (self.t, self.sk.base.support(), self.sk);
                let mut integral = mu * dt;
                for &e in events.iter().rev().take_while(|&&e| t0 - e <= cut) {
                    integral += quad::integrate(|u| sk.evaluate(u), t0 - e, to - e, 1e-13, 1e-12).unwrap_or(f64::NAN);
                }
                self.compensator += integral;
                // approximate: endpoints only
                let ev = std::mem::take(events);
                let sup = mu + self.generic_at(&ev, t0).max(self.generic_at(&ev, to));
                if let Excitation::Generic { events } = &mut self.exc {
                    *events = ev;
                }
                sup
            }
        };
        self.t = to;
        sup
    }

    /// Register an event at the current time.
    pub(crate) fn jump(&mut self) {
        self.count += 1;
        match &mut self.exc {
            Excitation::Exp { s, jump, .. } => *s += *jump,
            Excitation::Gamma2 { a, jump, .. } => *a += *jump,
            Excitation::Generic { events } => events.push(self.t),
        }
    }
}

/// An accepted event and the intensity around it (raw units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub t: f64,
    pub lambda_pre: f64,
    pub lambda_post: f64,
    /// `∫₀^t λ`.
    pub compensator: f64,
    /// `H_t` including this event.
    pub count: usize,
}

/// Intensity, compensator and count at a requested time (raw units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalRecord {
    pub t: f64,
    pub lambda: f64,
    pub compensator: f64,
    pub count: usize,
}

impl EvalRecord {
    fn of(int: &Intensity) -> EvalRecord {
        EvalRecord { t: int.t, lambda: int.value(), compensator: int.compensator(), count: int.count() }
    }
}

/// Chronological sweep over sorted points and evaluation times up to
/// `t_end`. Fails with the intensity reached if λ rises above `ceiling`.
fn sweep(
    int: &mut Intensity,
    pts: &[(f64, f64)],
    evals: &[f64],
    t_end: f64,
    ceiling: f64,
    events: &mut Vec<EventRecord>,
    values: &mut Vec<EvalRecord>,
) -> std::result::Result<(), f64> {
    let mut sup = int.value();
    if sup > ceiling {
        return Err(sup);
    }
    let mut e = 0;
    for &(t, th) in pts {
        while e < evals.len() && evals[e] <= t {
            sup = sup.max(int.advance(evals[e]));
            values.push(EvalRecord::of(int));
            e += 1;
        }
        sup = sup.max(int.advance(t));
        if sup > ceiling {
            return Err(sup);
        }
        let pre = int.value();
        if th <= pre {
            int.jump();
            let post = int.value();
            sup = sup.max(post);
            if sup > ceiling {
                return Err(sup);
            }
            events.push(EventRecord { t, lambda_pre: pre, lambda_post: post, compensator: int.compensator(), count: int.count() });
        }
    }
    while e < evals.len() && evals[e] <= t_end {
        sup = sup.max(int.advance(evals[e]));
        values.push(EvalRecord::of(int));
        e += 1;
    }
    sup = sup.max(int.advance(t_end));
    if sup > ceiling {
        return Err(sup);
    }
    Ok(())
}

fn sort_by_time(pts: &mut [(f64, f64)]) {
    pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
}

/// What one slab of a streamed simulation produced.
#[derive(Debug, Clone)]
pub struct SlabOutcome {
    pub slab: Slab,
    pub events: Vec<EventRecord>,
    pub values: Vec<EvalRecord>,
    /// State at the end of the slab.
    pub end: EvalRecord,
}

/// Slab-by-slab simulation on a lazily generated field. Only the rows a
/// slab actually needs get point positions; rows are added (reproducibly)
/// whenever the intensity climbs above the generated part.
pub struct HawkesStepper<'a> {
    field: &'a PoissonField,
    int: Intensity<'a>,
    next: usize,
}

impl<'a> HawkesStepper<'a> {
    pub fn new(sk: &'a ScaledKernel, mu: f64, field: &'a PoissonField) -> Result<Self> {
        ensure(mu >= 0.0 && mu.is_finite(), || Error::InvalidParameter(format!("mu must be >= 0, got {mu}")))?;
        ensure((field.horizon - sk.horizon).abs() < 1e-12 * sk.horizon, || {
            Error::InvalidInput(format!("field horizon {} differs from kernel scale {}", field.horizon, sk.horizon))
        })?;
        Ok(HawkesStepper { field, int: Intensity::new(sk, mu), next: 0 })
    }

    pub fn slabs_done(&self) -> usize {
        self.next
    }

    /// Simulate the next slab, recording the state at the given raw times
    /// (which must fall inside the slab).
    pub fn step(&mut self, eval_raw: &[f64]) -> Result<SlabOutcome> {
        let i = self.next;
        ensure(i < self.field.grid.k, || Error::OutOfRange("all slabs already simulated".into()))?;
        let mut slab = self.field.slab(i);
        let side = slab.side;
        let t_end = (i + 1) as f64 * side;
        let start = self.int.clone();
        let mut want = ((1.5 * start.value() / side).ceil() as usize + 2).min(slab.rows());
        loop {
            slab.fill_rows(want);
            let mut pts = slab.points().to_vec();
            sort_by_time(&mut pts);
            let mut events = Vec::new();
            let mut values = Vec::new();
            let mut int = start.clone();
            match sweep(&mut int, &pts, eval_raw, t_end, slab.filled_ceiling(), &mut events, &mut values) {
                Ok(()) => {
                    let end = EvalRecord::of(&int);
                    self.int = int;
                    self.next += 1;
                    return Ok(SlabOutcome { slab, events, values, end });
                }
                Err(reached) => {
                    if slab.filled_rows() >= slab.rows() {
                        return Err(Error::CeilingExceeded {
                            ceiling: self.field.grid.theta_extent(),
                            reached: reached / self.field.horizon,
                        });
                    }
                    want = ((1.5 * reached / side).ceil() as usize + 2).max(2 * slab.filled_rows()).min(slab.rows());
                }
            }
        }
    }
}

/// A simulated path on `[0, T]` (raw units).
#[derive(Debug, Clone)]
pub struct HawkesPath {
    pub horizon: f64,
    pub mu: f64,
    pub events: Vec<f64>,
    /// Unit-interval times at which `lambda_grid` was recorded.
    pub grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    pub compensator_grid: Vec<f64>,
    kernel: ScaledKernel,
}

fn uniform_grid(n: usize) -> Vec<f64> {
    (0..=n).map(|g| g as f64 / n as f64).collect()
}

/// Simulate on a materialized field sample, recording λ on `n + 1` points.
pub fn simulate_hawkes(sk: &ScaledKernel, mu: f64, field: &PoissonFieldSample, n: usize) -> Result<HawkesPath> {
    ensure(mu >= 0.0 && mu.is_finite(), || Error::InvalidParameter(format!("mu must be >= 0, got {mu}")))?;
    ensure((field.horizon - sk.horizon).abs() < 1e-12 * sk.horizon, || {
        Error::InvalidInput(format!("field horizon {} differs from kernel scale {}", field.horizon, sk.horizon))
    })?;
    let t = sk.horizon;
    let grid = uniform_grid(n.max(1));
    let raw: Vec<f64> = grid.iter().map(|g| g * t).collect();
    let mut pts = field.points.clone();
    sort_by_time(&mut pts);
    let mut int = Intensity::new(sk, mu);
    let mut events = Vec::new();
    let mut values = Vec::new();
    // time 0 is recorded before any point can occur
    values.push(EvalRecord::of(&int));
    sweep(&mut int, &pts, &raw[1..], t, field.theta_max * t, &mut events, &mut values).map_err(|reached| {
        Error::CeilingExceeded { ceiling: field.theta_max, reached: reached / t }
    })?;
    Ok(HawkesPath {
        horizon: t,
        mu,
        events: events.iter().map(|e| e.t).collect(),
        grid,
        lambda_grid: values.iter().map(|v| v.lambda).collect(),
        compensator_grid: values.iter().map(|v| v.compensator).collect(),
        kernel: sk.clone(),
    })
}

/// Simulate on a lazily generated field, recording λ at the unit times
/// `grid` (sorted, within [0, 1]).
pub fn simulate_on_field(sk: &ScaledKernel, mu: f64, field: &PoissonField, grid: &[f64]) -> Result<HawkesPath> {
    let t = sk.horizon;
    let mut stepper = HawkesStepper::new(sk, mu, field)?;
    let raw: Vec<f64> = grid.iter().map(|g| g * t).collect();
    let int0 = Intensity::new(sk, mu);
    let mut values: Vec<EvalRecord> = raw.iter().take_while(|&&r| r <= 0.0).map(|_| EvalRecord::of(&int0)).collect();
    let mut events = Vec::new();
    let mut pos = values.len();
    let side = field.cell_side();
    for i in 0..field.grid.k {
        let end = (i + 1) as f64 * side;
        let stop = if i + 1 == field.grid.k { raw.len() } else { pos + raw[pos..].iter().take_while(|&&r| r <= end).count() };
        let out = stepper.step(&raw[pos..stop])?;
        pos = stop;
        values.extend(out.values);
        events.extend(out.events.iter().map(|e| e.t));
    }
    Ok(HawkesPath {
        horizon: t,
        mu,
        events,
        grid: grid.to_vec(),
        lambda_grid: values.iter().map(|v| v.lambda).collect(),
        compensator_grid: values.iter().map(|v| v.compensator).collect(),
        kernel: sk.clone(),
    })
}

/// Rescaled companions of a path on a unit grid.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledPaths {
    pub t: Vec<f64>,
    /// `Λ_t = λ_{tT}/T`.
    pub lambda: Vec<f64>,
    /// `H_{tT}/T²`.
    pub h_scaled: Vec<f64>,
    /// `(H_{tT} − ∫₀^{tT} λ)/T`.
    pub martingale: Vec<f64>,
}

impl HawkesPath {
    pub fn kernel(&self) -> &ScaledKernel {
        &self.kernel
    }

    /// `Λ^T` at the recording grid.
    pub fn lambda_unit(&self) -> Vec<f64> {
        self.lambda_grid.iter().map(|l| l / self.horizon).collect()
    }

    /// `H_{tT}` at the recording grid.
    pub fn h_unit(&self) -> Vec<usize> {
        self.grid.iter().map(|g| self.events.partition_point(|&e| e <= g * self.horizon)).collect()
    }

    /// Exact replay of λ, compensator and count at raw times (sorted).
    pub fn replay(&self, raw_times: &[f64]) -> Vec<EvalRecord> {
        let mut int = Intensity::new(&self.kernel, self.mu);
        let mut out = Vec::with_capacity(raw_times.len());
        let mut e = 0;
        for &t in raw_times {
            while e < self.events.len() && self.events[e] < t {
                int.advance(self.events[e]);
                int.jump();
                e += 1;
            }
            int.advance(t);
            // an event exactly at t is not yet counted in λ_t (left limit)
            let mut rec = EvalRecord::of(&int);
            rec.count += self.events[e..].iter().take_while(|&&x| x == t).count();
            out.push(rec);
        }
        out
    }
}

impl HawkesPath {
    /// Rescaled companions at the recording grid (no replay needed).
    pub fn rescaled(&self) -> RescaledPaths {
        let t = self.horizon;
        let h = self.h_unit();
        RescaledPaths {
            t: self.grid.clone(),
            lambda: self.lambda_unit(),
            h_scaled: h.iter().map(|&n| n as f64 / (t * t)).collect(),
            martingale: h.iter().zip(&self.compensator_grid).map(|(&n, c)| (n as f64 - c) / t).collect(),
        }
    }
}

/// `E[Λ_t] = μ/T + μ∫₀^t Ψ^(T)` on the resolvent grid.
pub fn expected_intensity(rt: &crate::resolvent::ResolventTable, mu: f64) -> Vec<f64> {
    rt.cumulative_psi().iter().map(|c| mu / rt.horizon + mu * c).collect()
}

pub fn rescaled_paths(hp: &HawkesPath, unit_grid: &[f64]) -> Result<RescaledPaths> {
    ensure(unit_grid.windows(2).all(|w| w[0] <= w[1]), || Error::InvalidInput("unit grid must be sorted".into()))?;
    ensure(unit_grid.iter().all(|&g| (0.0..=1.0).contains(&g)), || Error::OutOfRange("unit grid outside [0, 1]".into()))?;
    let t = hp.horizon;
    let raw: Vec<f64> = unit_grid.iter().map(|g| g * t).collect();
    let rec = hp.replay(&raw);
    Ok(RescaledPaths {
        t: unit_grid.to_vec(),
        lambda: rec.iter().map(|r| r.lambda / t).collect(),
        h_scaled: rec.iter().map(|r| r.count as f64 / (t * t)).collect(),
        martingale: rec.iter().map(|r| (r.count as f64 - r.compensator) / t).collect(),
    })
}

/// Left-point step version on the `k`-grid: `Λ̄_t = Λ_{i/k}` for
/// `t ∈ (i/k, (i+1)/k]`, from values on a uniform grid of `values.len()`
/// points. Nodes off the grid are linearly interpolated.
pub fn discretize_path(values: &[f64], k: usize) -> Vec<f64> {
    let n = values.len() - 1;
    if n == 0 || k == 0 {
        return values.to_vec();
    }
    let at = |t: f64| {
        let x = t * n as f64;
        let g = (x.floor() as usize).min(n);
        let w = x - g as f64;
        if w < 1e-12 || g == n {
            values[g]
        } else {
            values[g] * (1.0 - w) + values[g + 1] * w
        }
    };
    (0..=n)
        .map(|g| {
            if g == 0 {
                return values[0];
            }
            let t = g as f64 / n as f64;
            let i = ((t * k as f64 - 1e-9).ceil() as usize).saturating_sub(1);
            at(i as f64 / k as f64)
        })
        .collect()
}
