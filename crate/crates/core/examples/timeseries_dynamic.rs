//! Drive a trigger from sampled data instead of a formula.

use pdft::dsl::parse_model;
use pdft::dynamics::{load_timeseries, DynamicSpec, Interpolation};
use pdft::fixtures::FIG1;
use pdft::sim::{run, SimulationConfig};

// temperature log: warms up, spikes past 37 around t = 12, cools down
const SENSOR: &str = "time,value\n0,21\n5,28\n10,35\n12,38.5\n15,36\n20,30\n";

fn main() {
    let series = load_timeseries(SENSOR.as_bytes(), Interpolation::Linear).unwrap();
    for t in [0.0, 7.5, 11.0, 12.0, 30.0] {
        println!("f({t}) = {}", series.value_at(t));
    }

    let mut model = parse_model(FIG1).unwrap();
    model.set_dynamic("f", DynamicSpec::TimeSeries(series));
    let config = SimulationConfig {
        horizon: 30.0,
        seed: 1,
        ..Default::default()
    };
    let (trace, _) = run(&model, &config).unwrap();
    let failed = trace.iter().find(|r| r.states["C1"] == "ko").map(|r| r.clock);
    println!("C1 fails at {failed:?}");
}
