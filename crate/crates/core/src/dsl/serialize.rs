use std::fmt::Write;

use thiserror::Error;

use super::is_valid_name;
use crate::dynamics::DynamicSpec;
use crate::model::{validate_model, Model, Predicate, Violation, INITIAL_STATE};

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("model is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("`{0}` cannot be written as a name")]
    Name(String),
    #[error("`{0}` is not a finite number")]
    NonFinite(f64),
}

/// Writes the canonical document for a valid model: components in
/// declaration order, one construct per line, default clauses omitted.
pub fn serialize_model(model: &Model) -> Result<String, SerializeError> {
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(SerializeError::Invalid(violations));
    }
    check_names(model)?;
    check_numbers(model)?;

    let owners = model.port_owners();
    let mut out = String::new();
    // writing to a String cannot fail
    let w = &mut out;
    let _ = writeln!(w, "model {} alert {}", model.name, model.alert.keyword());
    for d in &model.dynamics {
        let _ = write!(w, "dynamic {} = ", d.name);
        let _ = match &d.spec {
            DynamicSpec::Expression(e) => write!(w, "expr \"{e}\""),
            DynamicSpec::PoissonCounter { rate } => write!(w, "poisson(rate={rate})"),
            DynamicSpec::TimeSeries(s) => {
                let samples: Vec<String> = s.samples.iter().map(|(t, v)| format!("{t}:{v}")).collect();
                write!(w, "series({}) [{}]", s.interpolation.keyword(), samples.join(", "))
            }
        };
        if d.consumable {
            w.push_str(" consumable");
        }
        w.push('\n');
    }
    for c in &model.components {
        let _ = writeln!(w, "\ncomponent {}", c.name);
        if !c.inputs.is_empty() {
            let _ = writeln!(w, "  in {}", c.inputs.join(", "));
        }
        if !c.outputs.is_empty() {
            let _ = writeln!(w, "  out {}", c.outputs.join(", "));
        }
        if let Some(p) = c.initial_priority {
            let _ = writeln!(w, "  state {INITIAL_STATE} priority {p}");
        }
        for s in &c.states {
            let _ = writeln!(w, "  state {} priority {}", s.name, s.priority);
        }
        for t in &c.transitions {
            let _ = write!(w, "  transition {} from {} to {}", t.name, t.source, t.target);
            if t.trigger != Predicate::True {
                let _ = write!(w, " when {}", t.trigger);
            }
            if !t.action.is_empty() {
                let _ = write!(w, " do {{{}}}", t.action.join(", "));
            }
            if t.time != 0.0 {
                let _ = write!(w, " time {}", t.time);
            }
            if t.priority != 0 {
                let _ = write!(w, " prio {}", t.priority);
            }
            if t.probability != 1.0 {
                let _ = write!(w, " prob {}", t.probability);
            }
            w.push('\n');
        }
    }
    if !model.events.is_empty() {
        w.push('\n');
    }
    for e in &model.events {
        let _ = write!(
            w,
            "event {} from {}.{} to {}.{}",
            e.name, owners[e.source.as_str()], e.source, owners[e.target.as_str()], e.target
        );
        if e.weight != 1.0 {
            let _ = write!(w, " weight {}", e.weight);
        }
        w.push('\n');
    }
    Ok(out)
}

fn check_names(model: &Model) -> Result<(), SerializeError> {
    let mut names: Vec<&str> = vec![&model.name];
    names.extend(model.dynamics.iter().map(|d| d.name.as_str()));
    names.extend(model.events.iter().map(|e| e.name.as_str()));
    names.extend(model.ports());
    for c in &model.components {
        names.push(&c.name);
        names.extend(c.states.iter().map(|s| s.name.as_str()));
        names.extend(c.transitions.iter().map(|t| t.name.as_str()));
    }
    match names.into_iter().find(|n| !is_valid_name(n)) {
        Some(bad) => Err(SerializeError::Name(bad.to_string())),
        None => Ok(()),
    }
}

fn check_numbers(model: &Model) -> Result<(), SerializeError> {
    let mut nums = Vec::new();
    for d in &model.dynamics {
        match &d.spec {
            DynamicSpec::PoissonCounter { rate } => nums.push(*rate),
            DynamicSpec::TimeSeries(s) => nums.extend(s.samples.iter().flat_map(|(t, v)| [*t, *v])),
            DynamicSpec::Expression(_) => {}
        }
    }
    for c in &model.components {
        for t in &c.transitions {
            nums.extend([t.time, t.probability]);
            collect_constants(&t.trigger, &mut nums);
        }
    }
    nums.extend(model.events.iter().map(|e| e.weight));
    match nums.into_iter().find(|x| !x.is_finite()) {
        Some(bad) => Err(SerializeError::NonFinite(bad)),
        None => Ok(()),
    }
}

fn collect_constants(p: &Predicate, out: &mut Vec<f64>) {
    match p {
        Predicate::DynCompare { value, .. } => out.push(*value),
        Predicate::Not(inner) => collect_constants(inner, out),
        Predicate::And(cs) | Predicate::Or(cs) => cs.iter().for_each(|c| collect_constants(c, out)),
        _ => {}
    }
}
