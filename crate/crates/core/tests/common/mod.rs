//! Generators and reference implementations shared by integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use pdft::dynamics::{DynamicSpec, Interpolation, TimeSeries};
use pdft::model::{
    AlertAggregator, CompareOp, Component, Dynamic, Event, Model, Predicate, State, Transition, INITIAL_STATE,
};
use pdft::refine::Literal;
use rand::seq::IndexedRandom;
use rand::Rng;

const EXPRESSIONS: &[&str] = &[
    "20 + 0.5 * t",
    "sin(t) * 3",
    "max(t, 10) - min(2, t / 4)",
    "exp(-(t / 50))",
    "-(1.5) + cos(pi * t)",
    "(t - 3) * (t + 2) / 7",
];

fn random_predicate<R: Rng>(rng: &mut R, ports: &[String], dynamics: &[String], depth: u32) -> Predicate {
    let leaf = depth == 0 || rng.random_bool(0.4);
    if leaf {
        let pick = rng.random_range(0..10);
        return match pick {
            0 => Predicate::True,
            1 => Predicate::False,
            2..=5 if !ports.is_empty() => Predicate::PortRef(ports.choose(rng).unwrap().clone()),
            _ if !dynamics.is_empty() => {
                let op = *[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge, CompareOp::Eq, CompareOp::Ne]
                    .choose(rng)
                    .unwrap();
                let value = f64::from(rng.random_range(-40..80)) * 0.5;
                Predicate::compare(dynamics.choose(rng).unwrap().clone(), op, value)
            }
            _ => Predicate::True,
        };
    }
    match rng.random_range(0..3) {
        0 => Predicate::negate(random_predicate(rng, ports, dynamics, depth - 1)),
        1 => Predicate::And((0..rng.random_range(2..4)).map(|_| random_predicate(rng, ports, dynamics, depth - 1)).collect()),
        _ => Predicate::Or((0..rng.random_range(2..4)).map(|_| random_predicate(rng, ports, dynamics, depth - 1)).collect()),
    }
}

/// A valid model with 1..=max_components components and 1..=max_states
/// declared states each.
pub fn random_model<R: Rng>(rng: &mut R, max_components: usize, max_states: usize) -> Model {
    let mut m = Model::new(format!("m{}", rng.random_range(0..1000)));
    m.alert = if rng.random_bool(0.5) { AlertAggregator::Min } else { AlertAggregator::Max };

    for k in 0..rng.random_range(0..4) {
        let name = format!("d{k}");
        let (spec, consumable) = match rng.random_range(0..3) {
            0 => (DynamicSpec::expression(EXPRESSIONS.choose(rng).unwrap()).unwrap(), false),
            1 => (
                DynamicSpec::PoissonCounter {
                    rate: f64::from(rng.random_range(1..200)) / 100.0,
                },
                rng.random_bool(0.5),
            ),
            _ => {
                let mut t = 0.0;
                let samples = (0..rng.random_range(1..5))
                    .map(|_| {
                        t += f64::from(rng.random_range(1..20)) * 0.5;
                        (t, f64::from(rng.random_range(-10..10)) * 0.25)
                    })
                    .collect();
                let interpolation = if rng.random_bool(0.5) { Interpolation::Hold } else { Interpolation::Linear };
                (DynamicSpec::TimeSeries(TimeSeries { samples, interpolation }), false)
            }
        };
        m.dynamics.push(Dynamic { name, spec, consumable });
    }
    let dyn_names: Vec<String> = m.dynamics.iter().map(|d| d.name.clone()).collect();

    let n = rng.random_range(1..=max_components);
    for i in 0..n {
        let mut c = Component::new(format!("c{i}"));
        c.inputs = (0..rng.random_range(0..3)).map(|k| format!("i{i}_{k}")).collect();
        c.outputs = (0..rng.random_range(0..3)).map(|k| format!("o{i}_{k}")).collect();
        c.states = (0..rng.random_range(1..=max_states))
            .map(|k| State {
                name: format!("s{k}"),
                priority: rng.random_range(0..10),
            })
            .collect();
        if rng.random_bool(0.2) {
            c.initial_priority = Some(rng.random_range(0..10));
        }
        let mut sources: Vec<String> = vec![INITIAL_STATE.to_string()];
        sources.extend(c.states.iter().map(|s| s.name.clone()));
        c.transitions.push(Transition::new("init", INITIAL_STATE, c.states[0].name.clone()));
        for k in 0..rng.random_range(0..5) {
            let mut t = Transition::new(
                format!("t{k}"),
                sources.choose(rng).unwrap().clone(),
                c.states.choose(rng).unwrap().name.clone(),
            );
            t.trigger = random_predicate(rng, &c.inputs, &dyn_names, 2);
            t.action = c.outputs.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
            t.time = f64::from(rng.random_range(0..3)) * 0.75;
            t.priority = rng.random_range(0..3);
            t.probability = *[1.0, 0.5, 0.25, 0.2, 0.875].choose(rng).unwrap();
            c.transitions.push(t);
        }
        m.components.push(c);
    }

    let outputs: Vec<String> = m.components.iter().flat_map(|c| c.outputs.clone()).collect();
    let inputs: Vec<String> = m.components.iter().flat_map(|c| c.inputs.clone()).collect();
    if !outputs.is_empty() && !inputs.is_empty() {
        for k in 0..rng.random_range(0..5) {
            m.events.push(Event {
                name: format!("e{k}"),
                source: outputs.choose(rng).unwrap().clone(),
                target: inputs.choose(rng).unwrap().clone(),
                weight: *[1.0, 0.4, 0.75, 0.0625].choose(rng).unwrap(),
            });
        }
    }
    m
}

/// Transactions over a fixed alphabet of `components * states` literals.
pub fn random_transactions<R: Rng>(rng: &mut R, components: usize, states: usize, max_len: usize) -> Vec<BTreeSet<Literal>> {
    let alphabet: Vec<Literal> = (0..components)
        .flat_map(|c| (0..states).map(move |s| Literal::new(format!("C{c}"), format!("s{s}"))))
        .collect();
    let density = rng.random_range(0.15..0.6);
    (0..rng.random_range(1..=max_len))
        .map(|_| alphabet.iter().filter(|_| rng.random_bool(density)).cloned().collect())
        .collect()
}

/// (antecedent, consequent, count, antecedent count) of every rule, found by
/// enumerating all itemsets of the alphabet up to `max_antecedent + 1`
/// literals and counting them directly.
pub fn brute_force_rules(
    transactions: &[BTreeSet<Literal>],
    min_support: f64,
    min_confidence: f64,
    max_antecedent: usize,
) -> BTreeSet<(Vec<Literal>, Literal, usize, usize)> {
    let alphabet: Vec<Literal> = transactions.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let n = transactions.len();
    let count = |items: &[Literal]| transactions.iter().filter(|t| items.iter().all(|l| t.contains(l))).count();
    let mut out = BTreeSet::new();
    let m = alphabet.len();
    assert!(m <= 20, "alphabet too large for enumeration");
    for mask in 1u32..(1 << m) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > max_antecedent + 1 {
            continue;
        }
        let items: Vec<Literal> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| alphabet[i].clone()).collect();
        let c = count(&items);
        if (c as f64 / n as f64) < min_support {
            continue;
        }
        for (j, consequent) in items.iter().enumerate() {
            let antecedent: Vec<Literal> = items.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, l)| l.clone()).collect();
            let a = count(&antecedent);
            if c as f64 / a as f64 >= min_confidence {
                out.insert((antecedent, consequent.clone(), c, a));
            }
        }
    }
    out
}
