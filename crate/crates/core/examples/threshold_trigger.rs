//! Recover a failure condition `f > c` from labelled observations.

use pdft::refine::infer_threshold_trigger;

fn main() {
    // temperatures on a 0.25 grid; the component failed whenever f > 37
    let samples: Vec<(f64, bool)> = (0..120).map(|i| 20.0 + 0.25 * f64::from(i)).map(|f| (f, f > 37.0)).collect();
    let t = infer_threshold_trigger(&samples, "f").unwrap();
    println!("inferred trigger: {}  (accuracy {})", t.predicate, t.accuracy);

    // a noisy variant: a few mislabelled points
    let noisy: Vec<(f64, bool)> = samples
        .iter()
        .enumerate()
        .map(|(i, &(f, y))| (f, if i % 17 == 0 { !y } else { y }))
        .collect();
    let t = infer_threshold_trigger(&noisy, "f").unwrap();
    println!("with label noise:  {}  (accuracy {:.3})", t.predicate, t.accuracy);
}
