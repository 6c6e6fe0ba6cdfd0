use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EventLog, RefineError, RefinementEdit};
use crate::model::{Model, Transition, INITIAL_STATE};

/// How sojourn times of one directly-follows pair are summarised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SojournStatistic {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedTransition {
    pub source: String,
    pub target: String,
    pub count: usize,
    pub sojourn: f64,
    /// Share of this pair among pairs leaving the same source.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMachineSkeleton {
    pub component: String,
    /// In order of first appearance.
    pub states: Vec<String>,
    /// Includes `. -> s0` where s0 is the most common first state per case.
    pub transitions: Vec<MinedTransition>,
}

/// Directly-follows discovery for one component. Repeated records of the
/// same state are merged; the sojourn of `a -> b` runs from entering `a`
/// to entering `b`.
pub fn mine_state_machine(
    log: &EventLog,
    component: &str,
    statistic: SojournStatistic,
) -> Result<StateMachineSkeleton, RefineError> {
    let mut states: Vec<String> = Vec::new();
    let mut firsts: Vec<String> = Vec::new();
    let mut pairs: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for (_, records) in log.cases() {
        let mut prev: Option<(usize, f64)> = None;
        for r in records.iter().filter(|r| r.component == component) {
            let s = match states.iter().position(|x| *x == r.state) {
                Some(i) => i,
                None => {
                    states.push(r.state.clone());
                    states.len() - 1
                }
            };
            match prev {
                None => firsts.push(r.state.clone()),
                Some((p, _)) if p == s => continue,
                Some((p, t)) => pairs.entry((p, s)).or_default().push(r.timestamp - t),
            }
            prev = Some((s, r.timestamp));
        }
    }
    if states.is_empty() {
        return Err(RefineError::ComponentNotInLog(component.to_string()));
    }

    // majority first state; ties go to the earliest-seen state
    let initial = states
        .iter()
        .map(|s| (s, firsts.iter().filter(|f| *f == s).count()))
        .fold(None::<(&String, usize)>, |best, (s, c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((s, c)),
        })
        .expect("states non-empty");
    let mut transitions = vec![MinedTransition {
        source: INITIAL_STATE.to_string(),
        target: initial.0.clone(),
        count: initial.1,
        sojourn: 0.0,
        probability: 1.0,
    }];
    let mut out_counts = vec![0usize; states.len()];
    for ((p, _), xs) in &pairs {
        out_counts[*p] += xs.len();
    }
    for ((p, s), mut xs) in pairs {
        xs.sort_by(f64::total_cmp);
        let sojourn = match statistic {
            SojournStatistic::Mean => xs.iter().sum::<f64>() / xs.len() as f64,
            SojournStatistic::Median => {
                let m = xs.len() / 2;
                if xs.len() % 2 == 1 {
                    xs[m]
                } else {
                    (xs[m - 1] + xs[m]) / 2.0
                }
            }
        };
        transitions.push(MinedTransition {
            source: states[p].clone(),
            target: states[s].clone(),
            count: xs.len(),
            sojourn,
            probability: xs.len() as f64 / out_counts[p] as f64,
        });
    }
    Ok(StateMachineSkeleton {
        component: component.to_string(),
        states,
        transitions,
    })
}

impl StateMachineSkeleton {
    /// Source/target pairs, for comparing skeletons.
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        self.transitions.iter().map(|t| (t.source.as_str(), t.target.as_str())).collect()
    }

    /// Edits that graft the skeleton onto the component of the same name:
    /// unknown states are added at the component's initial priority, known
    /// transitions get the mined time, new ones are added with trigger
    /// `true`, the mined time and probability.
    pub fn to_edits(&self, model: &Model) -> Result<Vec<RefinementEdit>, RefineError> {
        let c = model
            .component(&self.component)
            .ok_or_else(|| RefineError::UnknownComponent(self.component.clone()))?;
        let neutral = c.state_priority(INITIAL_STATE).unwrap_or(0);
        let mut edits = Vec::new();
        for s in &self.states {
            if !c.has_state(s) {
                edits.push(RefinementEdit::AddState {
                    component: c.name.clone(),
                    state: s.clone(),
                    priority: neutral,
                });
            }
        }
        let mut used: Vec<String> = c.transitions.iter().map(|t| t.name.clone()).collect();
        for m in &self.transitions {
            let existing = c.transitions.iter().find(|t| t.source == m.source && t.target == m.target);
            match existing {
                // initialisation is immediate; leave it alone
                Some(_) if m.source == INITIAL_STATE => {}
                Some(t) => edits.push(RefinementEdit::SetTransitionTime {
                    component: c.name.clone(),
                    transition: t.name.clone(),
                    time: m.sojourn,
                }),
                None => {
                    let src = if m.source == INITIAL_STATE { "init" } else { &m.source };
                    let base = format!("m_{src}_{}", m.target);
                    let mut name = base.clone();
                    let mut k = 0;
                    while used.contains(&name) {
                        k += 1;
                        name = format!("{base}{k}");
                    }
                    used.push(name.clone());
                    let mut t = Transition::new(name, m.source.clone(), m.target.clone());
                    t.time = m.sojourn;
                    t.probability = m.probability;
                    edits.push(RefinementEdit::AddTransition {
                        component: c.name.clone(),
                        transition: t,
                    });
                }
            }
        }
        Ok(edits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Component;
    use crate::refine::{apply_edits, LogRecord};

    fn log(cases: &[&[(&str, f64)]]) -> EventLog {
        let mut records = Vec::new();
        for (i, case) in cases.iter().enumerate() {
            for (state, t) in case.iter() {
                records.push(LogRecord {
                    case_id: format!("c{i}"),
                    component: "C1".into(),
                    state: state.to_string(),
                    timestamp: *t,
                });
            }
        }
        EventLog::new(records).unwrap()
    }

    #[test]
    fn single_trace() {
        let sk = mine_state_machine(&log(&[&[("ok", 0.0), ("ko", 10.0), ("ok", 15.0)]]), "C1", SojournStatistic::Mean)
            .unwrap();
        assert_eq!(sk.states, ["ok", "ko"]);
        assert_eq!(sk.pairs(), [(".", "ok"), ("ok", "ko"), ("ko", "ok")]);
        assert_eq!(sk.transitions[1].sojourn, 10.0);
        assert_eq!(sk.transitions[2].sojourn, 5.0);
    }

    #[test]
    fn split_frequencies() {
        let l = log(&[
            &[("ok", 0.0), ("ko", 1.0)],
            &[("ok", 0.0), ("ko", 2.0)],
            &[("ok", 0.0), ("ko", 3.0)],
            &[("ok", 0.0), ("degraded", 4.0)],
        ]);
        let sk = mine_state_machine(&l, "C1", SojournStatistic::Mean).unwrap();
        let p = |t: &str| sk.transitions.iter().find(|x| x.source == "ok" && x.target == t).unwrap().probability;
        assert_eq!((p("ko"), p("degraded")), (0.75, 0.25));
        let med = mine_state_machine(&l, "C1", SojournStatistic::Median).unwrap();
        assert_eq!(med.transitions.iter().find(|x| x.target == "ko").unwrap().sojourn, 2.0);
    }

    #[test]
    fn repeated_records_merge() {
        let sk = mine_state_machine(&log(&[&[("ok", 0.0), ("ok", 3.0), ("ko", 10.0)]]), "C1", SojournStatistic::Mean)
            .unwrap();
        assert_eq!(sk.pairs(), [(".", "ok"), ("ok", "ko")]);
        assert_eq!(sk.transitions[1].sojourn, 10.0);
    }

    #[test]
    fn absent_component() {
        assert!(matches!(
            mine_state_machine(&log(&[&[("ok", 0.0)]]), "C9", SojournStatistic::Mean),
            Err(RefineError::ComponentNotInLog(_))
        ));
    }

    #[test]
    fn edits_graft_onto_template() {
        let mut m = Model::new("m");
        let mut c = Component::new("C1");
        c.states.push(crate::model::State { name: "ok".into(), priority: 9 });
        c.transitions.push(Transition::new("init", INITIAL_STATE, "ok"));
        m.components.push(c);
        let l = log(&[&[("ok", 0.0), ("ko", 10.0), ("ok", 14.0)], &[("ok", 0.0), ("ko", 20.0), ("ok", 26.0)]]);
        let sk = mine_state_machine(&l, "C1", SojournStatistic::Mean).unwrap();
        let refined = apply_edits(&m, &sk.to_edits(&m).unwrap()).unwrap();
        let c = refined.component("C1").unwrap();
        assert_eq!(c.state_priority("ko"), Some(9));
        assert_eq!(c.transition("m_ok_ko").unwrap().time, 15.0);
        assert_eq!(c.transition("m_ko_ok").unwrap().time, 5.0);
        assert_eq!(c.transitions.len(), 3);
    }
}
