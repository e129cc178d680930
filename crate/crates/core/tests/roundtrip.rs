//! Forward optimum in, radius out: both engines on random instances.

use dro_core::ambiguity::epsilon_max;
use dro_core::fixtures::{random_instance, t1};
use dro_core::forward::{assemble, solve_forward};
use dro_core::inverse::{recover, Engine, RecoveryConfig};
use dro_core::Observation;
use proptest::prelude::*;

fn both() -> RecoveryConfig {
    RecoveryConfig { engine: Engine::Both, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn forward_optima_are_rationalized_once(seed in 0u64..10_000, frac in prop::sample::select(vec![0.0, 0.05, 0.2, 0.5])) {
        let (m, s) = random_instance(seed);
        let eps = frac * epsilon_max(&s);
        let f = solve_forward(&assemble(&m, &s, eps).unwrap());
        prop_assume!(f.is_ok());
        let f = f.unwrap();
        let cfg = both();
        let r = recover(&m, &s, &Observation::new(f.x.clone()), &cfg).unwrap();
        let (bis, milp) = r.per_engine.unwrap();
        prop_assert!((bis - milp).abs() <= 10.0 * cfg.bisection_tol, "{bis} vs {milp}");
        prop_assert!(r.trace_is_monotone());
        prop_assert!(r.epsilon_star >= 0.0 && r.epsilon_star <= cfg.epsilon_bar);
        prop_assert!(!r.failed || r.epsilon_star == cfg.epsilon_bar);
        if !f.cvar_binding {
            prop_assert!(r.epsilon_star > eps);
        } else if !r.failed {
            prop_assert!((r.epsilon_star - eps).abs() <= 1e-5, "{} vs {eps}", r.epsilon_star);
        }
    }
}

/// Exact below the saturation radius γ, failure from it on, although
/// ε^max = 1 for this sample set.
#[test]
fn t1_radius_grid() {
    let (m, s) = t1();
    for (eps, exact) in [(0.0, true), (0.01, true), (0.05, true), (0.1, false), (0.2, false), (1.1, false)] {
        let x = solve_forward(&assemble(&m, &s, eps).unwrap()).unwrap().x;
        let r = recover(&m, &s, &Observation::new(x), &both()).unwrap();
        if exact {
            assert!((r.epsilon_star - eps).abs() <= 1e-5, "{eps}: {}", r.epsilon_star);
        } else {
            assert!(r.failed && r.epsilon_star == 100.0, "{eps}: {}", r.epsilon_star);
        }
    }
}
