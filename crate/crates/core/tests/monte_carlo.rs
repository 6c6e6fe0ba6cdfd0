use pdft::dynamics::DynamicSpec;
use pdft::model::{AlertLevel, CompareOp, Component, Dynamic, Model, Predicate, State, Transition, INITIAL_STATE};
use pdft::sim::{run_monte_carlo, SimulationConfig};

/// C fails as soon as a Poisson counter of rate `r` reaches 1.
fn poisson_failure(rate: f64) -> Model {
    let mut m = Model::new("mttf");
    m.dynamics.push(Dynamic {
        name: "g".into(),
        spec: DynamicSpec::PoissonCounter { rate },
        consumable: false,
    });
    let mut c = Component::new("C1");
    c.states = vec![State { name: "ok".into(), priority: 9 }, State { name: "ko".into(), priority: 1 }];
    c.transitions.push(Transition::new("init", INITIAL_STATE, "ok"));
    let mut fail = Transition::new("fail", "ok", "ko");
    fail.trigger = Predicate::compare("g", CompareOp::Ge, 1.0);
    c.transitions.push(fail);
    m.components.push(c);
    m
}

#[test]
fn mean_time_to_failure_matches_exponential() {
    let r = 0.1;
    let cfg = SimulationConfig {
        delta_t: 0.25,
        horizon: 250.0,
        seed: 2024,
        replications: 5000,
        alarm_threshold: Some(AlertLevel(1)),
    };
    let report = run_monte_carlo(&poisson_failure(r), &cfg).unwrap();
    assert_eq!(report.alarm_replications, 5000);
    let e = report.time_to_first_alarm.unwrap();
    assert!((e.mean - 1.0 / r).abs() < 3.0 * e.std_error, "mean {} se {}", e.mean, e.std_error);
    assert_eq!(report.failure_count["C1"].mean, 1.0);
}

#[test]
fn aggregates_are_reproducible() {
    let cfg = SimulationConfig {
        delta_t: 0.5,
        horizon: 50.0,
        seed: 11,
        replications: 100,
        alarm_threshold: Some(AlertLevel(1)),
    };
    let m = poisson_failure(0.05);
    let a = serde_json::to_vec(&run_monte_carlo(&m, &cfg).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_monte_carlo(&m, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = run_monte_carlo(&m, &SimulationConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a, serde_json::to_vec(&other).unwrap());
}
