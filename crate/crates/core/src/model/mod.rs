//! In-memory predictive fault tree models.
//!
//! A [`Model`] is a set of components, each owning boolean input/output
//! ports and a prioritized state machine, plus weighted events that link
//! output ports to input ports and the environment dynamics that triggers
//! may compare against. Identifiers are plain strings; the simulator
//! compiles them to indices after [`validate_model`] has accepted the model.

mod alert;
mod predicate;
mod validate;

pub use alert::{global_alert, AlertAggregator, AlertError, AlertLevel};
pub use predicate::{CompareOp, EvalError, Predicate};
pub use validate::{validate_model, Locus, Violation};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicSpec;

/// Name of the initial pseudo-state every component starts in.
pub const INITIAL_STATE: &str = ".";

/// Absolute tolerance used by `==` and `!=` comparisons on dynamics.
pub const EQ_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub alert: AlertAggregator,
    pub dynamics: Vec<Dynamic>,
    pub components: Vec<Component>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dynamic {
    pub name: String,
    pub spec: DynamicSpec,
    /// When set, every firing of a transition whose trigger reads this
    /// dynamic decrements its counter by one (spare consumption).
    pub consumable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Declared states. The initial pseudo-state is implicit.
    pub states: Vec<State>,
    /// Priority of the initial pseudo-state; `None` means the largest
    /// declared priority.
    pub initial_priority: Option<u32>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub name: String,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub name: String,
    pub source: String,
    pub target: String,
    pub trigger: Predicate,
    /// Output ports driven true on completion; every other output port of
    /// the component is driven false.
    pub action: Vec<String>,
    pub time: f64,
    pub priority: u32,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub name: String,
    pub source: String,
    pub target: String,
    pub weight: f64,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            alert: AlertAggregator::default(),
            dynamics: Vec::new(),
            components: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn component_mut(&mut self, name: &str) -> Option<&mut Component> {
        self.components.iter_mut().find(|c| c.name == name)
    }

    pub fn dynamic(&self, name: &str) -> Option<&Dynamic> {
        self.dynamics.iter().find(|d| d.name == name)
    }

    /// Replaces the spec of an existing dynamic, or appends a new one.
    /// A dynamic that stops being a counter is no longer consumable.
    pub fn set_dynamic(&mut self, name: &str, spec: DynamicSpec) {
        match self.dynamics.iter_mut().find(|d| d.name == name) {
            Some(d) => {
                d.consumable &= spec.is_stochastic();
                d.spec = spec;
            }
            None => self.dynamics.push(Dynamic {
                name: name.to_string(),
                spec,
                consumable: false,
            }),
        }
    }

    /// Maps every declared port to the component that owns it.
    pub fn port_owners(&self) -> HashMap<&str, &str> {
        let mut owners = HashMap::new();
        for c in &self.components {
            for p in c.inputs.iter().chain(&c.outputs) {
                owners.entry(p.as_str()).or_insert(c.name.as_str());
            }
        }
        owners
    }

    /// All port identifiers in declaration order.
    pub fn ports(&self) -> impl Iterator<Item = &str> {
        self.components
            .iter()
            .flat_map(|c| c.inputs.iter().chain(&c.outputs))
            .map(String::as_str)
    }
}

impl Component {
    pub fn new(name: impl Into<String>) -> Self {
        Component {
            name: name.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            states: Vec::new(),
            initial_priority: None,
            transitions: Vec::new(),
        }
    }

    pub fn has_state(&self, name: &str) -> bool {
        name == INITIAL_STATE || self.states.iter().any(|s| s.name == name)
    }

    /// State priority, with the initial pseudo-state defaulting to the
    /// largest declared priority (0 when no states are declared).
    pub fn state_priority(&self, state: &str) -> Option<u32> {
        if state == INITIAL_STATE {
            return Some(self.initial_priority.unwrap_or_else(|| {
                self.states.iter().map(|s| s.priority).max().unwrap_or(0)
            }));
        }
        self.states
            .iter()
            .find(|s| s.name == state)
            .map(|s| s.priority)
    }

    pub fn transition(&self, name: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.name == name)
    }

    /// Outbound transitions of `current_state` whose trigger holds, in
    /// declaration order.
    pub fn enabled_transitions(
        &self,
        current_state: &str,
        ports: &dyn Fn(&str) -> Option<bool>,
        dynamics: &dyn Fn(&str) -> Option<f64>,
    ) -> Result<Vec<&Transition>, EvalError> {
        let mut enabled = Vec::new();
        for t in self.transitions.iter().filter(|t| t.source == current_state) {
            if t.trigger.evaluate(ports, dynamics)? {
                enabled.push(t);
            }
        }
        Ok(enabled)
    }
}

impl Transition {
    /// A transition with the DSL defaults: always enabled, no action,
    /// immediate, priority 0, probability 1.
    pub fn new(name: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        Transition {
            name: name.into(),
            source: source.into(),
            target: target.into(),
            trigger: Predicate::True,
            action: Vec::new(),
            time: 0.0,
            priority: 0,
            probability: 1.0,
        }
    }
}

/// Convenience wrapper around [`Component::enabled_transitions`] for
/// map-backed environments.
pub fn enabled_transitions<'c>(
    component: &'c Component,
    current_state: &str,
    port_env: &HashMap<String, bool>,
    dyn_env: &HashMap<String, f64>,
) -> Result<Vec<&'c Transition>, EvalError> {
    component.enabled_transitions(
        current_state,
        &|p| port_env.get(p).copied(),
        &|d| dyn_env.get(d).copied(),
    )
}
