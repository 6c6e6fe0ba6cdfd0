//! Parse a model document and report diagnostics with source positions.

use pdft::dsl::{parse_document, parse_model, serialize_model};
use pdft::fixtures::FIG1;

const BROKEN: &str = "\
component C1
  out p8
  state ok priority 9
  transition t4 from ok to ko when f > 37 do {p8}
event e1 from C1.p8 to C2.p6
";

fn main() {
    let model = parse_model(FIG1).expect("bundled fixture is valid");
    println!(
        "{}: {} components, {} events, {} dynamics",
        model.name,
        model.components.len(),
        model.events.len(),
        model.dynamics.len()
    );

    println!("\ndiagnostics for a broken document:");
    for d in parse_document(BROKEN).diagnostics {
        println!("  {d}");
    }

    println!("\ncanonical form:\n{}", serialize_model(&model).unwrap());
}
