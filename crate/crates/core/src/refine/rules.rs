use super::{AssociationRule, Literal, RefineError, RefinementEdit};
use crate::model::{Component, Model, Predicate, Transition, INITIAL_STATE};

/// An output port of `component` that is asserted by every transition
/// entering `state` and by no transition entering any other state.
pub fn announcing_port(component: &Component, state: &str) -> Option<String> {
    let entering: Vec<&Transition> = component.transitions.iter().filter(|t| t.target == state).collect();
    if entering.is_empty() {
        return None;
    }
    component
        .outputs
        .iter()
        .find(|p| {
            entering.iter().all(|t| t.action.contains(p))
                && component
                    .transitions
                    .iter()
                    .filter(|t| t.target != state)
                    .all(|t| !t.action.contains(p))
        })
        .cloned()
}

struct Names<'m> {
    model: &'m Model,
    taken: Vec<String>,
}

impl Names<'_> {
    fn fresh(&mut self, base: &str, in_use: impl Fn(&Model, &str) -> bool) -> String {
        let mut k = 0;
        loop {
            let name = if k == 0 { base.to_string() } else { format!("{base}{k}") };
            if !in_use(self.model, &name) && !self.taken.contains(&name) {
                self.taken.push(name.clone());
                return name;
            }
            k += 1;
        }
    }
}

fn check_literal(model: &Model, l: &Literal) -> Result<(), RefineError> {
    let c = model
        .component(&l.component)
        .ok_or_else(|| RefineError::UnknownComponent(l.component.clone()))?;
    if l.state == INITIAL_STATE || !c.has_state(&l.state) {
        return Err(RefineError::UnknownState {
            component: l.component.clone(),
            state: l.state.clone(),
        });
    }
    Ok(())
}

/// Turns `A => K==s` into edits on `model`:
///
/// * one fresh input port on `K` per antecedent literal on another
///   component (`p_x`, `p_x1`, ...), each fed by an event of weight equal to
///   the rule confidence from the port announcing that literal (created as
///   `<comp>_is_<state>` when no such port exists);
/// * one transition of `K` from the state named by the antecedent's literal
///   on `K` to `s`, triggered by the conjunction of the new ports.
pub fn rule_to_edits(model: &Model, rule: &AssociationRule) -> Result<Vec<RefinementEdit>, RefineError> {
    for l in rule.antecedent.iter().chain([&rule.consequent]) {
        check_literal(model, l)?;
    }
    let target = &rule.consequent;
    let owner = model.component(&target.component).expect("checked");
    let own: Vec<&Literal> = rule.antecedent.iter().filter(|l| l.component == target.component).collect();
    let source = match own.as_slice() {
        [one] => one.state.clone(),
        [] => {
            return Err(RefineError::AmbiguousSource(format!(
                "antecedent does not name a state of `{}`",
                target.component
            )))
        }
        _ => {
            return Err(RefineError::AmbiguousSource(format!(
                "antecedent names several states of `{}`",
                target.component
            )))
        }
    };
    let cross: Vec<&Literal> = rule.antecedent.iter().filter(|l| l.component != target.component).collect();
    if cross.is_empty() {
        return Err(RefineError::NoCrossComponentLiteral);
    }

    let mut names = Names { model, taken: Vec::new() };
    let port_in_use = |m: &Model, n: &str| m.ports().any(|p| p == n);
    let mut edits = Vec::new();
    let mut inputs = Vec::new();
    for l in cross {
        let c = model.component(&l.component).expect("checked");
        let announcer = match announcing_port(c, &l.state) {
            Some(p) => p,
            None => {
                let port = names.fresh(&format!("{}_is_{}", l.component, l.state), port_in_use);
                edits.push(RefinementEdit::AddAnnouncingPort {
                    component: l.component.clone(),
                    state: l.state.clone(),
                    port: port.clone(),
                });
                port
            }
        };
        let input = names.fresh("p_x", port_in_use);
        edits.push(RefinementEdit::AddInputPort {
            component: target.component.clone(),
            port: input.clone(),
        });
        edits.push(RefinementEdit::AddEvent {
            name: names.fresh("e_x", |m, n| m.events.iter().any(|e| e.name == n)),
            source: announcer,
            target: input.clone(),
            weight: rule.confidence,
        });
        inputs.push(input);
    }

    let mut t = Transition::new(
        names.fresh("t_x", |m, n| m.components.iter().any(|c| c.transition(n).is_some())),
        source,
        target.state.clone(),
    );
    t.trigger = match inputs.len() {
        1 => Predicate::PortRef(inputs.remove(0)),
        _ => Predicate::And(inputs.into_iter().map(Predicate::PortRef).collect()),
    };
    // keep whatever the component already signals on entering the target
    let entering: Vec<&Transition> = owner.transitions.iter().filter(|x| x.target == target.state).collect();
    if let Some((first, rest)) = entering.split_first() {
        t.action = first
            .action
            .iter()
            .filter(|p| rest.iter().all(|x| x.action.contains(p)))
            .cloned()
            .collect();
    }
    edits.push(RefinementEdit::AddTransition {
        component: target.component.clone(),
        transition: t,
    });
    Ok(edits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::model::validate_model;
    use crate::refine::apply_edits;

    fn fig1() -> Model {
        parse_model(crate::fixtures::FIG1).unwrap()
    }

    fn rule(antecedent: &[&str], consequent: &str, confidence: f64) -> AssociationRule {
        AssociationRule {
            antecedent: antecedent.iter().map(|s| s.parse().unwrap()).collect(),
            consequent: consequent.parse().unwrap(),
            support: 0.25,
            confidence,
            count: 4,
            antecedent_count: 10,
        }
    }

    #[test]
    fn announcing_ports_of_fixture() {
        let m = fig1();
        assert_eq!(announcing_port(m.component("C1").unwrap(), "ko").as_deref(), Some("p8"));
        assert_eq!(announcing_port(m.component("C1").unwrap(), "ok"), None);
        assert_eq!(announcing_port(m.component("TOP").unwrap(), "ko").as_deref(), Some("p9"));
    }

    #[test]
    fn worked_rule_gives_three_edits() {
        let m = fig1();
        let edits = rule_to_edits(&m, &rule(&["C1=ko", "TOP=ok"], "TOP=ko", 0.4)).unwrap();
        assert_eq!(edits.len(), 3);
        assert_eq!(edits[0], RefinementEdit::AddInputPort { component: "TOP".into(), port: "p_x".into() });
        assert_eq!(
            edits[1],
            RefinementEdit::AddEvent { name: "e_x".into(), source: "p8".into(), target: "p_x".into(), weight: 0.4 }
        );
        let RefinementEdit::AddTransition { component, transition } = &edits[2] else { panic!() };
        assert_eq!(component, "TOP");
        assert_eq!((transition.source.as_str(), transition.target.as_str()), ("ok", "ko"));
        assert_eq!(transition.trigger, Predicate::port("p_x"));
        let refined = apply_edits(&m, &edits).unwrap();
        assert!(validate_model(&refined).is_empty());
    }

    #[test]
    fn confidence_passes_through() {
        let edits = rule_to_edits(&fig1(), &rule(&["C1=ko", "TOP=ok"], "TOP=ko", 1.0)).unwrap();
        assert!(edits.iter().any(|e| matches!(e, RefinementEdit::AddEvent { weight, .. } if *weight == 1.0)));
    }

    #[test]
    fn missing_announcer_is_created() {
        let m = fig1();
        let edits = rule_to_edits(&m, &rule(&["C1=ok", "C2=ko", "TOP=failing"], "TOP=ok", 0.7)).unwrap();
        assert!(edits.contains(&RefinementEdit::AddAnnouncingPort {
            component: "C1".into(),
            state: "ok".into(),
            port: "C1_is_ok".into(),
        }));
        let refined = apply_edits(&m, &edits).unwrap();
        let t = refined.component("TOP").unwrap().transition("t_x").unwrap();
        assert_eq!(t.trigger, Predicate::And(vec![Predicate::port("p_x"), Predicate::port("p_x1")]));
    }

    #[test]
    fn errors() {
        let m = fig1();
        assert!(matches!(
            rule_to_edits(&m, &rule(&["C1=ko"], "TOP=ko", 0.4)),
            Err(RefineError::AmbiguousSource(_))
        ));
        assert!(matches!(
            rule_to_edits(&m, &rule(&["C9=ko", "TOP=ok"], "TOP=ko", 0.4)),
            Err(RefineError::UnknownComponent(_))
        ));
        assert!(matches!(
            rule_to_edits(&m, &rule(&["C1=melted", "TOP=ok"], "TOP=ko", 0.4)),
            Err(RefineError::UnknownState { .. })
        ));
        assert!(matches!(
            rule_to_edits(&m, &rule(&["TOP=ok"], "TOP=ko", 0.4)),
            Err(RefineError::NoCrossComponentLiteral)
        ));
    }
}
