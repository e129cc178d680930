use super::*;
use crate::forward::tests::t1;
use crate::forward::{assemble, solve_forward};

fn cfg(engine: Engine) -> RecoveryConfig {
    RecoveryConfig { epsilon_bar: 2.0, engine, ..Default::default() }
}

fn observe(model: &CcLinearProgram, samples: &SampleSet, eps: f64) -> Observation {
    Observation::new(solve_forward(&assemble(model, samples, eps).unwrap()).unwrap().x)
}

#[test]
fn t1_roundtrip_both_engines() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.05);
    for engine in [Engine::Bisection, Engine::KktMilp] {
        let r = recover(&m, &s, &x0, &cfg(engine)).unwrap();
        assert!((r.epsilon_star - 0.05).abs() <= 1e-6, "{engine}: {}", r.epsilon_star);
        assert!(!r.failed);
        assert!(r.binding_at_star);
        assert!(r.trace_is_monotone());
    }
}

#[test]
fn plain_and_accelerated_brackets_agree() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.03);
    let fast = recover_bisection(&m, &s, &x0, &cfg(Engine::Bisection)).unwrap();
    let plain =
        recover_bisection(&m, &s, &x0, &RecoveryConfig { accelerate: false, ..cfg(Engine::Bisection) }).unwrap();
    assert!((fast.epsilon_star - plain.epsilon_star).abs() <= 1e-6);
    assert!(fast.iterations < plain.iterations);
    assert!(plain.trace_is_monotone());
}

#[test]
fn zero_radius_is_recovered_as_zero() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.0);
    for engine in [Engine::Bisection, Engine::KktMilp] {
        let r = recover(&m, &s, &x0, &cfg(engine)).unwrap();
        assert!(r.epsilon_star.abs() <= 1e-6, "{engine}: {}", r.epsilon_star);
    }
}

#[test]
fn saturated_radius_fails_with_findings() {
    let (m, s) = t1();
    // every radius from γ on yields x = 0
    let x0 = observe(&m, &s, 1.5);
    for engine in [Engine::Bisection, Engine::KktMilp] {
        let r = recover(&m, &s, &x0, &cfg(engine)).unwrap();
        assert!(r.failed, "{engine}");
        assert_eq!(r.epsilon_star, 2.0);
        let f = diagnose(&r, &s, &m, &Tolerances::default()).unwrap();
        assert!(f.iter().any(|f| matches!(f, Finding::UnsuitableRadius { .. })));
    }
}

#[test]
fn epsilon_bar_below_epsilon_max_is_a_config_error() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.05);
    let bad = RecoveryConfig { epsilon_bar: 0.5, ..Default::default() };
    match recover(&m, &s, &x0, &bad) {
        Err(Error::Config(msg)) => assert!(msg.contains("epsilon_max")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn suboptimal_observation_is_not_rationalizable() {
    let (m, s) = t1();
    // feasible for every radius below 0.1 but never optimal
    let x0 = Observation::new(vec![-3.0]);
    for engine in [Engine::Bisection, Engine::KktMilp] {
        match recover(&m, &s, &x0, &cfg(engine)) {
            Err(Error::NotRationalizable { epsilon_bar }) => assert_eq!(epsilon_bar, 2.0),
            other => panic!("{engine}: {other:?}"),
        }
    }
}

#[test]
fn relaxed_matches_exact_on_clean_data_and_tolerates_noise() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.05);
    let c = cfg(Engine::KktMilp);
    let exact = recover_kkt_milp(&m, &s, &x0, &c).unwrap();
    let relaxed = recover_relaxed(&m, &s, &x0, &c, 1e3).unwrap();
    assert!((exact.epsilon_star - relaxed.epsilon_star).abs() <= 1e-5);
    let noisy = Observation::new(vec![x0.x0[0] + 1e-3]);
    let r = recover_relaxed(&m, &s, &noisy, &c, 1e3).unwrap();
    assert!((r.epsilon_star - 0.05).abs() <= 0.005, "{}", r.epsilon_star);
}

#[test]
fn milp_refuses_oversized_instances() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.05);
    let c = RecoveryConfig { max_milp_pairs: 3, ..cfg(Engine::KktMilp) };
    assert!(matches!(recover(&m, &s, &x0, &c), Err(Error::Config(_))));
}

#[test]
fn data_driven_takes_the_smallest_estimate() {
    let (m, s) = t1();
    let obs = vec![observe(&m, &s, 0.02), observe(&m, &s, 0.06)];
    let r = recover_data_driven(&m, &[s.clone(), s.clone()], &obs, &cfg(Engine::Bisection)).unwrap();
    assert!((r.summary.epsilon_star - 0.02).abs() <= 1e-6);
    assert!(r.varies);
    assert!(r.note.is_some());
    let err = recover_data_driven(&m, &[s], &obs, &cfg(Engine::Bisection));
    assert!(matches!(err, Err(Error::Dimension(_))));
}

#[test]
fn slack_period_overestimates_and_is_flagged() {
    let (m, s) = t1();
    // worst-case CVaR is x - d + ε/γ, so d = 10.9 leaves x at its bound 10
    // for every ε up to 0.09
    let loose = CcLinearProgram { d: vec![10.9], ..m.clone() };
    let x_tight = observe(&m, &s, 0.05);
    let x_loose = observe(&loose, &s, 0.05);
    assert_eq!(x_loose.x0, vec![10.0]);
    let periods = [
        Period { model: &m, samples: &s, observation: &x_tight },
        Period { model: &loose, samples: &s, observation: &x_loose },
        Period { model: &m, samples: &s, observation: &x_tight },
    ];
    let r = recover_data_driven_periods(&periods, &cfg(Engine::Bisection)).unwrap();
    assert!((r.per_period[1].epsilon_star - 0.09).abs() <= 1e-6, "{}", r.per_period[1].epsilon_star);
    assert!((r.summary.epsilon_star - 0.05).abs() <= 1e-6);
    assert!(!r.summary.failed);
    assert!(r.varies);

    let constant = recover_data_driven_periods(&[periods[0], periods[2]], &cfg(Engine::Bisection)).unwrap();
    assert!(!constant.varies);
    assert!(constant.note.is_none());
}

#[test]
fn all_failed_periods_fail_at_epsilon_bar() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 1.5);
    let r = recover_data_driven(&m, &[s.clone(), s.clone()], &[x0.clone(), x0], &cfg(Engine::Bisection)).unwrap();
    assert!(r.summary.failed);
    assert_eq!(r.summary.epsilon_star, 2.0);
    assert!(!r.varies);
}

#[test]
fn default_epsilon_bar_saturates_above_gamma() {
    let (m, s) = t1();
    let x0 = observe(&m, &s, 1.1);
    let r = recover(&m, &s, &x0, &RecoveryConfig::default()).unwrap();
    assert!(r.failed);
    assert_eq!(r.epsilon_star, 100.0);
}

#[test]
fn monotone_trace_check_catches_interleaving() {
    let mut r = RecoveryReport {
        epsilon_star: 0.0,
        epsilon_bar: 1.0,
        failed: false,
        engine: "bisection".into(),
        iterations: 0,
        per_engine: None,
        binding_at_star: true,
        epsilon_max: 1.0,
        total_slack: None,
        trace: vec![
            TraceEntry { epsilon: 0.1, verdict: "feasible".into() },
            TraceEntry { epsilon: 0.5, verdict: "infeasible".into() },
        ],
    };
    assert!(r.trace_is_monotone());
    r.trace.push(TraceEntry { epsilon: 0.7, verdict: "feasible".into() });
    assert!(!r.trace_is_monotone());
}
