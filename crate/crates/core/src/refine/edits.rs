use serde::{Deserialize, Serialize};

use super::RefineError;
use crate::model::{validate_model, Component, Event, Model, Predicate, State, Transition};

/// One change to a model. Edits are serialized as JSON objects tagged by
/// `edit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "edit", rename_all = "snake_case")]
pub enum RefinementEdit {
    AddState {
        component: String,
        state: String,
        priority: u32,
    },
    AddInputPort {
        component: String,
        port: String,
    },
    /// Adds an output port and asserts it on every transition entering
    /// `state`, so that it signals "component is in `state`".
    AddAnnouncingPort {
        component: String,
        state: String,
        port: String,
    },
    AddEvent {
        name: String,
        source: String,
        target: String,
        weight: f64,
    },
    AddTransition {
        component: String,
        transition: Transition,
    },
    SetTransitionTime {
        component: String,
        transition: String,
        time: f64,
    },
    SetTrigger {
        component: String,
        transition: String,
        trigger: Predicate,
    },
}

fn component<'m>(model: &'m mut Model, name: &str) -> Result<&'m mut Component, RefineError> {
    model
        .component_mut(name)
        .ok_or_else(|| RefineError::UnknownComponent(name.to_string()))
}

fn transition<'c>(c: &'c mut Component, name: &str) -> Result<&'c mut Transition, RefineError> {
    let component = c.name.clone();
    c.transitions
        .iter_mut()
        .find(|t| t.name == name)
        .ok_or_else(|| RefineError::UnknownTransition {
            component,
            transition: name.to_string(),
        })
}

fn port_taken(model: &Model, port: &str) -> Result<(), RefineError> {
    if model.ports().any(|p| p == port) {
        return Err(RefineError::Duplicate(port.to_string()));
    }
    Ok(())
}

impl RefinementEdit {
    /// Applies the edit without re-validating the whole model.
    pub fn apply(&self, model: &mut Model) -> Result<(), RefineError> {
        match self {
            RefinementEdit::AddState { component: c, state, priority } => {
                let c = component(model, c)?;
                if c.has_state(state) {
                    return Err(RefineError::Duplicate(format!("{}.{state}", c.name)));
                }
                c.states.push(State {
                    name: state.clone(),
                    priority: *priority,
                });
            }
            RefinementEdit::AddInputPort { component: c, port } => {
                port_taken(model, port)?;
                component(model, c)?.inputs.push(port.clone());
            }
            RefinementEdit::AddAnnouncingPort { component: c, state, port } => {
                port_taken(model, port)?;
                let c = component(model, c)?;
                if !c.has_state(state) {
                    return Err(RefineError::UnknownState {
                        component: c.name.clone(),
                        state: state.clone(),
                    });
                }
                c.outputs.push(port.clone());
                for t in c.transitions.iter_mut().filter(|t| &t.target == state) {
                    t.action.push(port.clone());
                }
            }
            RefinementEdit::AddEvent { name, source, target, weight } => {
                if model.events.iter().any(|e| &e.name == name) {
                    return Err(RefineError::Duplicate(name.clone()));
                }
                model.events.push(Event {
                    name: name.clone(),
                    source: source.clone(),
                    target: target.clone(),
                    weight: *weight,
                });
            }
            RefinementEdit::AddTransition { component: c, transition: t } => {
                let c = component(model, c)?;
                if c.transition(&t.name).is_some() {
                    return Err(RefineError::Duplicate(format!("{}.{}", c.name, t.name)));
                }
                c.transitions.push(t.clone());
            }
            RefinementEdit::SetTransitionTime { component: c, transition: t, time } => {
                transition(component(model, c)?, t)?.time = *time;
            }
            RefinementEdit::SetTrigger { component: c, transition: t, trigger } => {
                transition(component(model, c)?, t)?.trigger = trigger.clone();
            }
        }
        Ok(())
    }
}

/// Applies `edits` in order to a copy of `model` and returns it only if
/// the result validates.
pub fn apply_edits(model: &Model, edits: &[RefinementEdit]) -> Result<Model, RefineError> {
    let mut out = model.clone();
    for e in edits {
        e.apply(&mut out)?;
    }
    let violations = validate_model(&out);
    if !violations.is_empty() {
        return Err(RefineError::Invalid(violations));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    fn fig1() -> Model {
        parse_model(crate::fixtures::FIG1).unwrap()
    }

    #[test]
    fn json_shape() {
        let e = RefinementEdit::AddInputPort {
            component: "TOP".into(),
            port: "p_x".into(),
        };
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"edit":"add_input_port","component":"TOP","port":"p_x"}"#);
        assert_eq!(serde_json::from_str::<RefinementEdit>(&json).unwrap(), e);
    }

    #[test]
    fn announcing_port_joins_entering_actions() {
        let m = apply_edits(
            &fig1(),
            &[RefinementEdit::AddAnnouncingPort {
                component: "C2".into(),
                state: "ok".into(),
                port: "C2_is_ok".into(),
            }],
        )
        .unwrap();
        let c2 = m.component("C2").unwrap();
        assert_eq!(c2.transition("init").unwrap().action, ["C2_is_ok"]);
        assert_eq!(c2.transition("t6").unwrap().action, ["p7"]);
    }

    #[test]
    fn invalid_result_is_refused() {
        let dangling = RefinementEdit::AddEvent {
            name: "ex".into(),
            source: "p8".into(),
            target: "nowhere".into(),
            weight: 0.5,
        };
        assert!(matches!(apply_edits(&fig1(), &[dangling]), Err(RefineError::Invalid(_))));
    }

    #[test]
    fn duplicates_and_unknowns() {
        let m = fig1();
        let dup = RefinementEdit::AddInputPort { component: "TOP".into(), port: "p8".into() };
        assert!(matches!(apply_edits(&m, &[dup]), Err(RefineError::Duplicate(_))));
        let unknown = RefinementEdit::SetTransitionTime { component: "C1".into(), transition: "zz".into(), time: 1.0 };
        assert!(matches!(apply_edits(&m, &[unknown]), Err(RefineError::UnknownTransition { .. })));
    }

    #[test]
    fn set_time_and_trigger() {
        let m = apply_edits(
            &fig1(),
            &[
                RefinementEdit::SetTransitionTime { component: "C1".into(), transition: "t5".into(), time: 5.0 },
                RefinementEdit::SetTrigger {
                    component: "C1".into(),
                    transition: "t5".into(),
                    trigger: Predicate::True,
                },
            ],
        )
        .unwrap();
        let t5 = m.component("C1").unwrap().transition("t5").unwrap();
        assert_eq!((t5.time, &t5.trigger), (5.0, &Predicate::True));
    }
}
