use nearcrit::estimators::{
    coupled_replication, estimate_integral_coupling, fit_rate, initial_theta, run_theorem_point, with_ceiling_retry,
    MAX_RETRIES,
};
use nearcrit::kernels::{KernelFamily, Model, Regime};
use nearcrit::rng::StreamKey;
use nearcrit::Error;

fn model(regime: Regime, mu: f64) -> Model {
    Model { kernel: KernelFamily::Exponential, beta: 1.0, regime, mu }
}

#[test]
fn zero_weight_has_zero_integral_error() {
    let r = estimate_integral_coupling(&model(Regime::Sub, 1.0), 60.0, &[3, 8, 20], 20, &|_| 0.0, 5).unwrap();
    assert!(r.estimates.iter().all(|e| e.mean == 0.0), "{:?}", r.estimates);
}

#[test]
fn no_immigration_means_no_error() {
    for regime in Regime::ALL {
        let p = run_theorem_point(&model(regime, 0.0), 100.0, None, 10, 3).unwrap();
        assert!(p.sup_lambda.mean < 1e-3, "{regime}: {:?}", p.sup_lambda);
        assert_eq!(p.completed, 10);
    }
}

#[test]
fn replications_are_pathwise_consistent() {
    let m = model(Regime::Critical, 1.0);
    let sk = m.scaled(80.0).unwrap();
    let th = initial_theta(&sk, 1.0).unwrap();
    for r in 0..10 {
        let out = coupled_replication(&sk, 1.0, 16, StreamKey::new(2).child(r), th).unwrap().unwrap();
        assert!(out.consistent());
    }
}

#[test]
fn retry_grows_the_ceiling_then_gives_up() {
    let mut seen = Vec::new();
    let r = with_ceiling_retry(1.0, |th| {
        seen.push(th);
        if th < 10.0 {
            Err(Error::CeilingExceeded { ceiling: th, reached: 5.0 })
        } else {
            Ok(th)
        }
    })
    .unwrap();
    assert_eq!(seen, vec![1.0, 7.5, 15.0]);
    assert_eq!(r, Some(15.0));
    let mut calls = 0;
    let none: Option<()> = with_ceiling_retry(1.0, |th| {
        calls += 1;
        Err(Error::CeilingExceeded { ceiling: th, reached: th })
    })
    .unwrap();
    assert!(none.is_none());
    assert_eq!(calls, MAX_RETRIES + 1);
}

#[test]
fn fit_recovers_power_laws() {
    let xs = [10.0, 20.0, 40.0, 80.0];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
    let f = fit_rate(&xs, &ys, &[0.0; 4]).unwrap();
    assert!((f.slope + 0.7).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(fit_rate(&xs[..2], &ys[..2], &[0.0; 2]).is_err());
}
