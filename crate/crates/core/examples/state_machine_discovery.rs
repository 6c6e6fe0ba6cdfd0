//! Closed loop: simulate the model, log completed transitions, and
//! rediscover a component's state machine from the log.

use pdft::dsl::parse_model;
use pdft::fixtures::FIG1;
use pdft::refine::{mine_state_machine, trace_to_event_log, SojournStatistic};
use pdft::sim::{run, SimulationConfig};

fn main() {
    let model = parse_model(FIG1).unwrap();
    let config = SimulationConfig {
        delta_t: 1.0,
        horizon: 10_000.0,
        seed: 2024,
        ..Default::default()
    };
    let (trace, _) = run(&model, &config).unwrap();
    let log = trace_to_event_log(&model, &trace, "run0");
    println!("{} log records", log.records().len());

    for component in ["C1", "TOP"] {
        let sk = mine_state_machine(&log, component, SojournStatistic::Mean).unwrap();
        println!("\n{component}: states {:?}", sk.states);
        for t in &sk.transitions {
            println!(
                "  {:>7} -> {:<7} x{:<5} sojourn {:>8.2}  p {:.3}",
                t.source, t.target, t.count, t.sojourn, t.probability
            );
        }
    }
}
