//! Availability-style estimates over many seeded replications.

use pdft::dsl::parse_model;
use pdft::dynamics::DynamicSpec;
use pdft::fixtures::FIG1;
use pdft::model::AlertLevel;
use pdft::sim::{run_monte_carlo, SimulationConfig};

fn main() {
    let mut model = parse_model(FIG1).unwrap();
    // C2 now fails at a random time, and the AND gate output reaches TOP
    // only nine times out of ten
    model.set_dynamic("h", DynamicSpec::PoissonCounter { rate: 0.02 });
    model.events.iter_mut().find(|e| e.name == "e5").unwrap().weight = 0.9;
    let config = SimulationConfig {
        delta_t: 0.5,
        horizon: 200.0,
        seed: 42,
        replications: 500,
        alarm_threshold: Some(AlertLevel(2)),
    };
    let report = run_monte_carlo(&model, &config).unwrap();

    println!("{} replications from seed {}", report.replications, report.seed);
    for (level, e) in &report.residence_fraction {
        println!("  alert {level}: {:.4} +/- {:.4}", e.mean, e.std_error);
    }
    match report.time_to_first_alarm {
        Some(e) => println!(
            "first TOP failure at t = {:.2} +/- {:.2} ({} of {} runs)",
            e.mean, e.std_error, report.alarm_replications, report.replications
        ),
        None => println!("no run reached the alarm level"),
    }
    for (c, e) in &report.failure_count {
        println!("  {c}: {:.2} failures per run", e.mean);
    }
}
