//! Mine co-occurrence rules from a fault log and turn the strongest one into
//! model edits: a new input port, a weighted event and a new transition.

use pdft::dsl::{parse_model, serialize_model};
use pdft::fixtures::{ARL_LOG, FIG1};
use pdft::refine::{apply_edits, load_event_log, mine_association_rules, rule_to_edits, MiningConfig};

fn main() {
    let log = load_event_log(ARL_LOG.as_bytes()).unwrap();
    let config = MiningConfig {
        min_support: 0.2,
        min_confidence: 0.4,
        ..Default::default()
    };
    let rules = mine_association_rules(&log, &config).unwrap();
    println!("{} rules", rules.len());
    for r in rules.iter().filter(|r| r.consequent.to_string() == "TOP==ko") {
        println!("  {r}");
    }

    let model = parse_model(FIG1).unwrap();
    let (rule, edits) = rules
        .iter()
        .filter(|r| r.consequent.to_string() == "TOP==ko")
        .find_map(|r| rule_to_edits(&model, r).ok().map(|e| (r, e)))
        .expect("an applicable rule");
    println!("\napplying {rule}");
    for e in &edits {
        println!("  {}", serde_json::to_string(e).unwrap());
    }
    let refined = apply_edits(&model, &edits).unwrap();
    let text = serialize_model(&refined).unwrap();
    for line in text.lines().filter(|l| l.contains("p_x")) {
        println!("  | {line}");
    }
}
