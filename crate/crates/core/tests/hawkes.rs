use nearcrit::coupling::{sample_poisson_field, CellGrid, PoissonField, DEFAULT_POINT_CAP};
use nearcrit::hawkes::{simulate_hawkes, simulate_on_field};
use nearcrit::kernels::{make_exponential_kernel, make_gamma2_kernel, scale_kernel, Regime};
use nearcrit::rng::{StreamKey, Tag};
use nearcrit::stats::{ks_pvalue, ks_two_sample, ks_two_sample_n, SampleStats};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn zero_kernel_is_poisson() {
    let (t, mu) = (50.0, 2.0);
    let mut sk = scale_kernel(make_exponential_kernel(1.0).unwrap(), Regime::Sub, t).unwrap();
    sk.a_t = 0.0;
    let counts: Vec<f64> = (0..2000)
        .map(|r| {
            let field = PoissonField::new(t, CellGrid::new(5, 0.1).unwrap(), StreamKey::new(3).child(r)).unwrap();
            simulate_on_field(&sk, mu, &field, &[0.0, 1.0]).unwrap().events.len() as f64
        })
        .collect();
    let s = SampleStats::of(&counts);
    let want = mu * t;
    assert!((s.mean - want).abs() <= 3.0 * s.stderr(), "{} vs {want}", s.mean);
    assert!((s.var - want).abs() <= 3.0 * s.var_stderr(), "{} vs {want}", s.var);
}

/// Ogata thinning for an exponential kernel `a β e^{−β s}` with unit rate μ.
fn ogata_count<R: Rng>(a: f64, beta: f64, mu: f64, t_end: f64, rng: &mut R) -> f64 {
    let (mut t, mut s, mut n) = (0.0, 0.0, 0usize);
    loop {
        let bound = mu + s;
        let w = -(1.0 - rng.random::<f64>()).ln() / bound;
        s *= (-beta * w).exp();
        t += w;
        if t > t_end {
            return n as f64;
        }
        if rng.random::<f64>() * bound <= mu + s {
            s += a * beta;
            n += 1;
        }
    }
}

#[test]
fn matches_independent_thinning() {
    let t = 40.0;
    for regime in Regime::ALL {
        let sk = scale_kernel(make_exponential_kernel(1.0).unwrap(), regime, t).unwrap();
        let ours: Vec<f64> = (0..1500)
            .map(|r| {
                let key = StreamKey::new(17).child(r);
                let mut theta = 4.0;
                loop {
                    let field = PoissonField::new(t, CellGrid::new(8, theta).unwrap(), key).unwrap();
                    match simulate_on_field(&sk, 1.0, &field, &[0.0, 1.0]) {
                        Ok(p) => break p.events.len() as f64,
                        Err(_) => theta *= 2.0,
                    }
                }
            })
            .collect();
        let mut rng = StreamKey::new(18).rng(Tag::Auxiliary, 0);
        let theirs: Vec<f64> = (0..1500).map(|_| ogata_count(sk.a_t, 1.0, 1.0, t, &mut rng)).collect();
        let (a, b) = (SampleStats::of(&ours), SampleStats::of(&theirs));
        let z = (a.mean - b.mean).abs() / (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
        assert!(z < 3.5, "{regime}: {} vs {}", a.mean, b.mean);
        // counts are discrete; the continuous p-value is conservative
        let p = ks_pvalue(ks_two_sample(&ours, &theirs), ks_two_sample_n(1500, 1500));
        assert!(p > 0.001, "{regime}: KS p = {p}");
    }
}

#[test]
fn gamma_kernel_paths_are_consistent() {
    let sk = scale_kernel(make_gamma2_kernel(1.0).unwrap(), Regime::Critical, 30.0).unwrap();
    let field = sample_poisson_field(30.0, 6.0, 6, StreamKey::new(2), DEFAULT_POINT_CAP).unwrap();
    let p = simulate_hawkes(&sk, 1.0, &field, 300).unwrap();
    assert!(p.events.windows(2).all(|w| w[0] < w[1]));
    assert!(p.compensator_grid.windows(2).all(|w| w[0] <= w[1]));
    assert!(p.lambda_grid.iter().all(|&l| l >= 1.0 - 1e-12));
    assert_eq!(*p.h_unit().last().unwrap(), p.events.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn thinning_rule_and_monotonicity(seed in 0u64..10_000, r in 0usize..3, mu in 0.2f64..2.0, pick in 0.0f64..1.0, u in 0.0f64..1.0) {
        let t = 20.0;
        let sk = scale_kernel(make_exponential_kernel(1.0).unwrap(), Regime::ALL[r], t).unwrap();
        let mut field = sample_poisson_field(t, 8.0, 4, StreamKey::new(seed), DEFAULT_POINT_CAP).unwrap();
        let path = match simulate_hawkes(&sk, mu, &field, 16) {
            Ok(p) => p,
            Err(_) => return Ok(()),
        };
        // a point is accepted iff θ ≤ λ_{t−}
        let times: Vec<f64> = field.points.iter().map(|p| p.0).collect();
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| times[i]).collect();
        let rec = path.replay(&sorted);
        let mut accepted = Vec::new();
        for (n, &i) in order.iter().enumerate() {
            let hit = field.points[i].1 <= rec[n].lambda;
            prop_assert_eq!(hit, path.events.binary_search_by(|e| e.total_cmp(&times[i])).is_ok());
            if hit {
                accepted.push(i);
            }
        }
        // lowering an accepted point's mark leaves the path unchanged
        if !accepted.is_empty() {
            let i = accepted[((pick * accepted.len() as f64) as usize).min(accepted.len() - 1)];
            field.points[i].1 *= u;
            let again = simulate_hawkes(&sk, mu, &field, 16).unwrap();
            prop_assert_eq!(&again.events, &path.events);
        }
    }
}
