use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{Model, INITIAL_STATE};
use crate::dynamics::DynamicSpec;

/// Where in a model a violation was found.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Locus {
    Model,
    Dynamic(String),
    Component(String),
    State { component: String, state: String },
    Port { component: String, port: String },
    Transition { component: String, transition: String },
    Event(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub locus: Locus,
    /// Offending identifier inside the locus, when there is one.
    pub symbol: Option<String>,
    pub message: String,
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::Model => f.write_str("model"),
            Locus::Dynamic(d) => write!(f, "dynamic {d}"),
            Locus::Component(c) => write!(f, "component {c}"),
            Locus::State { component, state } => write!(f, "state {component}.{state}"),
            Locus::Port { component, port } => write!(f, "port {component}.{port}"),
            Locus::Transition { component, transition } => {
                write!(f, "transition {component}.{transition}")
            }
            Locus::Event(e) => write!(f, "event {e}"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locus, self.message)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, locus: Locus, message: impl Into<String>) {
        self.0.push(Violation {
            locus,
            symbol: None,
            message: message.into(),
        });
    }

    fn push_symbol(&mut self, locus: Locus, symbol: &str, message: impl Into<String>) {
        self.0.push(Violation {
            locus,
            symbol: Some(symbol.to_string()),
            message: message.into(),
        });
    }
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Checks every structural invariant of `model`. An empty report means the
/// model is well formed.
pub fn validate_model(model: &Model) -> Vec<Violation> {
    let mut r = Report(Vec::new());

    if model.components.is_empty() {
        r.push(Locus::Model, "expected at least one component");
    }

    let mut seen = HashSet::new();
    for d in &model.dynamics {
        let locus = Locus::Dynamic(d.name.clone());
        if !seen.insert(d.name.as_str()) {
            r.push(locus.clone(), format!("duplicate dynamic `{}`", d.name));
        }
        if let Err(e) = d.spec.check() {
            r.push(locus.clone(), e.to_string());
        }
        if d.consumable && !matches!(d.spec, DynamicSpec::PoissonCounter { .. }) {
            r.push(locus, "only counter dynamics can be consumable");
        }
    }
    let dynamics: HashSet<&str> = model.dynamics.iter().map(|d| d.name.as_str()).collect();

    let mut components = HashSet::new();
    // port -> (owner, is_output)
    let mut ports: HashMap<&str, (&str, bool)> = HashMap::new();
    for c in &model.components {
        if !components.insert(c.name.as_str()) {
            r.push(Locus::Component(c.name.clone()), format!("duplicate component `{}`", c.name));
        }
        for (p, is_out) in c
            .inputs
            .iter()
            .map(|p| (p, false))
            .chain(c.outputs.iter().map(|p| (p, true)))
        {
            if ports.insert(p.as_str(), (c.name.as_str(), is_out)).is_some() {
                r.push_symbol(
                    Locus::Port {
                        component: c.name.clone(),
                        port: p.clone(),
                    },
                    p,
                    format!("port `{p}` is declared more than once"),
                );
            }
        }
    }

    for c in &model.components {
        let mut states = HashSet::new();
        for s in &c.states {
            let locus = Locus::State {
                component: c.name.clone(),
                state: s.name.clone(),
            };
            if s.name == INITIAL_STATE {
                r.push(locus, "the initial pseudo-state cannot be redeclared");
            } else if !states.insert(s.name.as_str()) {
                r.push(locus, format!("duplicate state `{}`", s.name));
            }
        }

        let inputs: HashSet<&str> = c.inputs.iter().map(String::as_str).collect();
        let outputs: HashSet<&str> = c.outputs.iter().map(String::as_str).collect();
        let mut names = HashSet::new();
        for t in &c.transitions {
            let locus = Locus::Transition {
                component: c.name.clone(),
                transition: t.name.clone(),
            };
            if !names.insert(t.name.as_str()) {
                r.push(locus.clone(), format!("duplicate transition `{}`", t.name));
            }
            for (role, s) in [("source", &t.source), ("target", &t.target)] {
                if !c.has_state(s) {
                    r.push_symbol(locus.clone(), s, format!("{role} state `{s}` is not declared in {}", c.name));
                }
            }
            for p in &t.action {
                if !outputs.contains(p.as_str()) {
                    r.push_symbol(locus.clone(), p, format!("action port `{p}` is not an output port of {}", c.name));
                }
            }
            for p in t.trigger.ports() {
                if !inputs.contains(p) {
                    r.push_symbol(locus.clone(), p, format!("trigger port `{p}` is not an input port of {}", c.name));
                }
            }
            for d in t.trigger.dynamics() {
                if !dynamics.contains(d) {
                    r.push_symbol(locus.clone(), d, format!("trigger reads undeclared dynamic `{d}`"));
                }
            }
            if !unit_interval(t.probability) {
                r.push(locus.clone(), format!("probability {} is outside [0, 1]", t.probability));
            }
            if !(t.time >= 0.0 && t.time.is_finite()) {
                r.push(locus, format!("time {} must be finite and non-negative", t.time));
            }
        }
    }

    let mut events = HashSet::new();
    for e in &model.events {
        let locus = Locus::Event(e.name.clone());
        if !events.insert(e.name.as_str()) {
            r.push(locus.clone(), format!("duplicate event `{}`", e.name));
        }
        match ports.get(e.source.as_str()) {
            Some((_, true)) => {}
            Some((_, false)) => r.push_symbol(locus.clone(), &e.source, format!("source `{}` is an input port", e.source)),
            None => r.push_symbol(locus.clone(), &e.source, format!("source port `{}` does not exist", e.source)),
        }
        match ports.get(e.target.as_str()) {
            Some((_, false)) => {}
            Some((_, true)) => r.push_symbol(locus.clone(), &e.target, format!("target `{}` is an output port", e.target)),
            None => r.push_symbol(locus.clone(), &e.target, format!("target port `{}` does not exist", e.target)),
        }
        if !unit_interval(e.weight) {
            r.push(locus, format!("weight {} is outside [0, 1]", e.weight));
        }
    }

    r.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Component, Event, Predicate, State, Transition};

    fn valid() -> Model {
        let mut m = Model::new("m");
        let mut a = Component::new("A");
        a.outputs.push("out".into());
        a.states.push(State { name: "up".into(), priority: 1 });
        let mut t = Transition::new("go", ".", "up");
        t.action.push("out".into());
        a.transitions.push(t);
        let mut b = Component::new("B");
        b.inputs.push("inp".into());
        b.states.push(State { name: "up".into(), priority: 1 });
        let mut t = Transition::new("go", ".", "up");
        t.trigger = Predicate::port("inp");
        b.transitions.push(t);
        m.components.push(a);
        m.components.push(b);
        m.events.push(Event {
            name: "e".into(),
            source: "out".into(),
            target: "inp".into(),
            weight: 0.5,
        });
        m
    }

    #[test]
    fn valid_model_has_empty_report() {
        assert_eq!(validate_model(&valid()), vec![]);
    }

    #[test]
    fn dangling_event_target() {
        let mut m = valid();
        m.events[0].target = "nope".into();
        let v = validate_model(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].locus, Locus::Event("e".into()));
    }

    #[test]
    fn action_on_foreign_port() {
        let mut m = valid();
        m.components[1].outputs.push("b_out".into());
        m.components[0].transitions[0].action = vec!["b_out".into()];
        let v = validate_model(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].symbol.as_deref(), Some("b_out"));
    }

    #[test]
    fn empty_model() {
        let v = validate_model(&Model::new("x"));
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("at least one component"));
    }
}
