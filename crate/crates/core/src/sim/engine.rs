use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::metrics::{MetricsAccumulator, RunMetrics};
use super::rng::{stream, Purpose, Stream};
use super::{PortChange, SimError, SimulationConfig, TraceRecord, TransitionRef};
use crate::dynamics::DynamicEnvironment;
use crate::model::{validate_model, AlertLevel, CompareOp, Model, Predicate, INITIAL_STATE};

/// Trigger with names resolved to indices. Validation guarantees every
/// reference resolves, so evaluation cannot fail.
#[derive(Debug)]
enum Guard {
    Const(bool),
    Port(usize),
    Cmp { dynamic: usize, op: CompareOp, value: f64 },
    Not(Box<Guard>),
    And(Vec<Guard>),
    Or(Vec<Guard>),
}

impl Guard {
    fn eval(&self, ports: &[bool], dynamics: &[f64]) -> bool {
        match self {
            Guard::Const(b) => *b,
            Guard::Port(p) => ports[*p],
            Guard::Cmp { dynamic, op, value } => op.apply(dynamics[*dynamic], *value),
            Guard::Not(g) => !g.eval(ports, dynamics),
            Guard::And(gs) => gs.iter().all(|g| g.eval(ports, dynamics)),
            Guard::Or(gs) => gs.iter().any(|g| g.eval(ports, dynamics)),
        }
    }
}

#[derive(Debug)]
struct CompiledTransition {
    name: String,
    source: usize,
    target: usize,
    guard: Guard,
    action: Vec<usize>,
    delay: u64,
    priority: u32,
    probability: f64,
    /// Consumable dynamics referenced by the trigger.
    consumes: Vec<usize>,
}

#[derive(Debug)]
struct CompiledComponent {
    name: String,
    /// Index 0 is the initial pseudo-state.
    states: Vec<String>,
    priorities: Vec<u32>,
    outputs: Vec<usize>,
    transitions: Vec<CompiledTransition>,
    /// Transition indices grouped by source state.
    outgoing: Vec<Vec<usize>>,
}

#[derive(Debug)]
struct CompiledEvent {
    name: String,
    source: usize,
    target: usize,
    weight: f64,
}

#[derive(Debug)]
struct Compiled {
    model: Model,
    config: SimulationConfig,
    ports: Vec<String>,
    components: Vec<CompiledComponent>,
    events: Vec<CompiledEvent>,
    /// For every port, the events targeting it.
    inbound: Vec<Vec<usize>>,
}

fn compile_guard(p: &Predicate, ports: &BTreeMap<&str, usize>, model: &Model) -> Guard {
    match p {
        Predicate::True => Guard::Const(true),
        Predicate::False => Guard::Const(false),
        Predicate::PortRef(name) => Guard::Port(ports[name.as_str()]),
        Predicate::DynCompare { dynamic, op, value } => Guard::Cmp {
            dynamic: model.dynamics.iter().position(|d| &d.name == dynamic).expect("validated"),
            op: *op,
            value: *value,
        },
        Predicate::Not(g) => Guard::Not(Box::new(compile_guard(g, ports, model))),
        Predicate::And(gs) => Guard::And(gs.iter().map(|g| compile_guard(g, ports, model)).collect()),
        Predicate::Or(gs) => Guard::Or(gs.iter().map(|g| compile_guard(g, ports, model)).collect()),
    }
}

impl Compiled {
    fn new(model: &Model, config: &SimulationConfig) -> Self {
        let ports: Vec<String> = model.ports().map(str::to_string).collect();
        let port_index: BTreeMap<&str, usize> = ports.iter().enumerate().map(|(i, p)| (p.as_str(), i)).collect();
        let components = model
            .components
            .iter()
            .map(|c| {
                let mut states = vec![INITIAL_STATE.to_string()];
                states.extend(c.states.iter().map(|s| s.name.clone()));
                let priorities = states.iter().map(|s| c.state_priority(s).expect("declared")).collect();
                let state_index = |s: &str| states.iter().position(|x| x == s).expect("validated");
                let transitions: Vec<CompiledTransition> = c
                    .transitions
                    .iter()
                    .map(|t| CompiledTransition {
                        name: t.name.clone(),
                        source: state_index(&t.source),
                        target: state_index(&t.target),
                        guard: compile_guard(&t.trigger, &port_index, model),
                        action: t.action.iter().map(|p| port_index[p.as_str()]).collect(),
                        delay: config.delay_cycles(t.time),
                        priority: t.priority,
                        probability: t.probability,
                        consumes: {
                            let mut v: Vec<usize> = t
                                .trigger
                                .dynamics()
                                .into_iter()
                                .filter_map(|d| model.dynamics.iter().position(|x| x.name == d && x.consumable))
                                .collect();
                            v.sort_unstable();
                            v.dedup();
                            v
                        },
                    })
                    .collect();
                let mut outgoing = vec![Vec::new(); states.len()];
                for (i, t) in transitions.iter().enumerate() {
                    outgoing[t.source].push(i);
                }
                CompiledComponent {
                    name: c.name.clone(),
                    outputs: c.outputs.iter().map(|p| port_index[p.as_str()]).collect(),
                    states,
                    priorities,
                    transitions,
                    outgoing,
                }
            })
            .collect();
        let events: Vec<CompiledEvent> = model
            .events
            .iter()
            .map(|e| CompiledEvent {
                name: e.name.clone(),
                source: port_index[e.source.as_str()],
                target: port_index[e.target.as_str()],
                weight: e.weight,
            })
            .collect();
        let mut inbound = vec![Vec::new(); ports.len()];
        for (i, e) in events.iter().enumerate() {
            inbound[e.target].push(i);
        }
        Compiled {
            model: model.clone(),
            config: config.clone(),
            ports,
            components,
            events,
            inbound,
        }
    }
}

/// A validated model paired with a validated configuration, ready to run
/// any number of replications.
#[derive(Debug, Clone)]
pub struct Simulator {
    compiled: Arc<Compiled>,
}

impl Simulator {
    pub fn new(model: &Model, config: &SimulationConfig) -> Result<Self, SimError> {
        let violations = validate_model(model);
        if !violations.is_empty() {
            return Err(SimError::InvalidModel(violations));
        }
        config.validate()?;
        Ok(Simulator {
            compiled: Arc::new(Compiled::new(model, config)),
        })
    }

    pub fn model(&self) -> &Model {
        &self.compiled.model
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.compiled.config
    }

    /// Initial state for a run with the given seed.
    pub fn init(&self, seed: u64) -> Result<SimulationState, SimError> {
        let c = &self.compiled;
        let env = DynamicEnvironment::new(&c.model.dynamics).map_err(|(name, source)| SimError::Dynamic {
            name,
            clock: 0.0,
            source,
        })?;
        Ok(SimulationState {
            compiled: Arc::clone(c),
            step: 0,
            current: vec![0; c.components.len()],
            ports: vec![false; c.ports.len()],
            link_active: vec![false; c.events.len()],
            pending: vec![None; c.components.len()],
            env,
            dynamic_rngs: c.model.dynamics.iter().map(|d| stream(seed, Purpose::Dynamic, &d.name)).collect(),
            selection_rngs: c.components.iter().map(|k| stream(seed, Purpose::Selection, &k.name)).collect(),
            propagation_rngs: c.events.iter().map(|e| stream(seed, Purpose::Propagation, &e.name)).collect(),
            failures: vec![0; c.components.len()],
        })
    }

    /// Runs `config.cycles()` cycles and returns the trace with its metrics.
    pub fn run(&self, seed: u64) -> Result<(Vec<TraceRecord>, RunMetrics), SimError> {
        let mut trace = Vec::with_capacity(self.config().cycles() as usize);
        let metrics = self.run_with(seed, |r| trace.push(r))?;
        Ok((trace, metrics))
    }

    /// Runs one replication, handing each record to `sink` as it is produced.
    pub fn run_with(&self, seed: u64, mut sink: impl FnMut(TraceRecord)) -> Result<RunMetrics, SimError> {
        let mut state = self.init(seed)?;
        let mut acc = MetricsAccumulator::new(self.model().alert, self.config().alarm_threshold);
        for _ in 0..self.config().cycles() {
            let (alert, record) = state.cycle(true)?;
            acc.observe(state.clock(), alert);
            sink(record.expect("requested"));
        }
        Ok(acc.finish(&state))
    }

    /// Metrics only; no trace records are built.
    pub fn run_metrics(&self, seed: u64) -> Result<RunMetrics, SimError> {
        let mut state = self.init(seed)?;
        let mut acc = MetricsAccumulator::new(self.model().alert, self.config().alarm_threshold);
        for _ in 0..self.config().cycles() {
            let (alert, _) = state.cycle(false)?;
            acc.observe(state.clock(), alert);
        }
        Ok(acc.finish(&state))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingTransition {
    pub transition: String,
    /// Step at which the transition completes.
    pub completion_step: u64,
    pub completion_time: f64,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SimulationState {
    compiled: Arc<Compiled>,
    step: u64,
    current: Vec<usize>,
    ports: Vec<bool>,
    /// Whether each event's last rising edge propagated.
    link_active: Vec<bool>,
    /// (transition index, completion step) per component.
    pending: Vec<Option<(usize, u64)>>,
    env: DynamicEnvironment,
    dynamic_rngs: Vec<Stream>,
    selection_rngs: Vec<Stream>,
    propagation_rngs: Vec<Stream>,
    failures: Vec<u64>,
}

/// Validates `model` and `config` and returns the state at clock 0 seeded
/// with `config.seed`.
pub fn init_simulation(model: &Model, config: &SimulationConfig) -> Result<SimulationState, SimError> {
    Simulator::new(model, config)?.init(config.seed)
}

/// Executes exactly one cycle.
pub fn step(state: &mut SimulationState) -> Result<TraceRecord, SimError> {
    state.cycle(true).map(|(_, r)| r.expect("requested"))
}

impl SimulationState {
    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn clock(&self) -> f64 {
        self.step as f64 * self.compiled.config.delta_t
    }

    pub fn component_state(&self, component: &str) -> Option<&str> {
        let i = self.compiled.components.iter().position(|c| c.name == component)?;
        Some(&self.compiled.components[i].states[self.current[i]])
    }

    pub fn port(&self, port: &str) -> Option<bool> {
        self.compiled.ports.iter().position(|p| p == port).map(|i| self.ports[i])
    }

    pub fn ports(&self) -> impl Iterator<Item = (&str, bool)> {
        self.compiled.ports.iter().map(String::as_str).zip(self.ports.iter().copied())
    }

    pub fn pending(&self, component: &str) -> Option<PendingTransition> {
        let i = self.compiled.components.iter().position(|c| c.name == component)?;
        let (t, at) = self.pending[i]?;
        Some(PendingTransition {
            transition: self.compiled.components[i].transitions[t].name.clone(),
            completion_step: at,
            completion_time: at as f64 * self.compiled.config.delta_t,
        })
    }

    pub fn dynamic_value(&self, name: &str) -> Option<f64> {
        self.env.get(name)
    }

    pub fn alert(&self) -> AlertLevel {
        let levels = self.compiled.components.iter().zip(&self.current).map(|(c, s)| c.priorities[*s]);
        AlertLevel(self.compiled.model.alert.fold(levels).expect("at least one component"))
    }

    pub(super) fn failure_counts(&self) -> impl Iterator<Item = (&str, u64)> {
        self.compiled.components.iter().map(|c| c.name.as_str()).zip(self.failures.iter().copied())
    }

    fn complete(&mut self, ci: usize, ti: usize) {
        let comp = &self.compiled.components[ci];
        let t = &comp.transitions[ti];
        if self.compiled.model.alert.more_severe(comp.priorities[t.target], comp.priorities[t.source]) {
            self.failures[ci] += 1;
        }
        self.current[ci] = t.target;
        for &p in &comp.outputs {
            self.ports[p] = false;
        }
        for &p in &t.action {
            self.ports[p] = true;
        }
        self.pending[ci] = None;
    }

    /// Picks among the max-priority enabled transitions of component `ci`.
    fn select(&mut self, ci: usize, dynamics: &[f64]) -> Option<usize> {
        let comp = &self.compiled.components[ci];
        let mut best: Option<u32> = None;
        let mut candidates: Vec<usize> = Vec::new();
        for &ti in &comp.outgoing[self.current[ci]] {
            let t = &comp.transitions[ti];
            if !t.guard.eval(&self.ports, dynamics) {
                continue;
            }
            match best {
                Some(b) if t.priority < b => {}
                Some(b) if t.priority == b => candidates.push(ti),
                _ => {
                    best = Some(t.priority);
                    candidates.clear();
                    candidates.push(ti);
                }
            }
        }
        if candidates.is_empty() {
            return None;
        }
        let total: f64 = candidates.iter().map(|&ti| comp.transitions[ti].probability).sum();
        let scale = total.max(1.0);
        let u: f64 = self.selection_rngs[ci].random();
        let mut acc = 0.0;
        for &ti in &candidates {
            acc += comp.transitions[ti].probability / scale;
            if u < acc {
                return Some(ti);
            }
        }
        None
    }

    fn cycle(&mut self, record: bool) -> Result<(AlertLevel, Option<TraceRecord>), SimError> {
        let compiled = Arc::clone(&self.compiled);
        let before = self.ports.clone();
        self.step += 1;
        let clock = self.clock();
        self.env
            .advance(clock, &mut self.dynamic_rngs)
            .map_err(|(name, source)| SimError::Dynamic { name, clock, source })?;

        let mut fired = Vec::new();
        let mut completed = Vec::new();
        let tref = |ci: usize, ti: usize| TransitionRef {
            component: compiled.components[ci].name.clone(),
            transition: compiled.components[ci].transitions[ti].name.clone(),
        };

        for ci in 0..compiled.components.len() {
            if let Some((ti, at)) = self.pending[ci] {
                if at <= self.step {
                    self.complete(ci, ti);
                    if record {
                        completed.push(tref(ci, ti));
                    }
                }
            }
        }

        // every component sees the same snapshot, so select before applying
        let dynamics = self.env.values().to_vec();
        let mut chosen = Vec::new();
        for ci in 0..compiled.components.len() {
            if self.pending[ci].is_none() {
                if let Some(ti) = self.select(ci, &dynamics) {
                    chosen.push((ci, ti));
                }
            }
        }
        for &(ci, ti) in &chosen {
            let t = &compiled.components[ci].transitions[ti];
            if record {
                fired.push(tref(ci, ti));
            }
            if t.delay == 0 {
                self.complete(ci, ti);
                if record {
                    completed.push(tref(ci, ti));
                }
            } else {
                self.pending[ci] = Some((ti, self.step + t.delay));
            }
        }
        for &(ci, ti) in &chosen {
            for &d in &compiled.components[ci].transitions[ti].consumes {
                self.env.consume(d);
            }
        }

        for (ei, e) in compiled.events.iter().enumerate() {
            if !self.ports[e.source] {
                self.link_active[ei] = false;
            } else if !before[e.source] {
                let u: f64 = self.propagation_rngs[ei].random();
                self.link_active[ei] = u < e.weight;
            }
        }
        for (p, events) in compiled.inbound.iter().enumerate() {
            if !events.is_empty() {
                self.ports[p] = events.iter().any(|&ei| self.link_active[ei]);
            }
        }

        let alert = self.alert();
        if !record {
            return Ok((alert, None));
        }
        let port_changes = before
            .iter()
            .zip(&self.ports)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, (_, b))| PortChange {
                port: compiled.ports[i].clone(),
                value: *b,
            })
            .collect();
        Ok((
            alert,
            Some(TraceRecord {
                step: self.step,
                clock,
                fired,
                completed,
                port_changes,
                alert,
                states: compiled
                    .components
                    .iter()
                    .zip(&self.current)
                    .map(|(c, s)| (c.name.clone(), c.states[*s].clone()))
                    .collect(),
                dynamic_values: self
                    .env
                    .names()
                    .iter()
                    .cloned()
                    .zip(self.env.values().iter().copied())
                    .collect(),
            }),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicSpec;
    use crate::model::{global_alert, Component, State, Transition};
    use proptest::prelude::*;

    fn fig1() -> Model {
        let mut m = crate::dsl::parse_model(crate::fixtures::FIG1).unwrap();
        m.set_dynamic("g", DynamicSpec::expression("0").unwrap());
        m
    }

    fn config(horizon: f64) -> SimulationConfig {
        SimulationConfig {
            delta_t: 1.0,
            horizon,
            seed: 7,
            ..Default::default()
        }
    }

    fn first_entry(trace: &[TraceRecord], comp: &str, state: &str) -> Option<f64> {
        trace.iter().find(|r| r.states[comp] == state).map(|r| r.clock)
    }

    #[test]
    fn initial_state() {
        let s = init_simulation(&fig1(), &config(10.0)).unwrap();
        assert_eq!(s.clock(), 0.0);
        assert_eq!(s.ports().count(), 9);
        assert!(s.ports().all(|(_, v)| !v));
        for c in ["TOP", "AND", "C1", "C2"] {
            assert_eq!(s.component_state(c), Some(INITIAL_STATE));
            assert!(s.pending(c).is_none());
        }
    }

    #[test]
    fn empty_model_rejected() {
        assert!(matches!(
            init_simulation(&Model::new("m"), &config(10.0)),
            Err(SimError::InvalidModel(_))
        ));
    }

    #[test]
    fn fig1_cascade() {
        let (trace, metrics) = run_fixture();
        assert_eq!(trace.len(), 60);
        assert_eq!(first_entry(&trace, "C1", "ko"), Some(35.0));
        assert_eq!(first_entry(&trace, "TOP", "failing"), Some(36.0));
        assert_eq!(first_entry(&trace, "C2", "ko"), Some(40.0));
        assert_eq!(first_entry(&trace, "AND", "fired"), Some(41.0));
        assert_eq!(first_entry(&trace, "TOP", "ko"), Some(42.0));
        assert_eq!(trace.last().unwrap().alert, AlertLevel(2));
        assert_eq!(metrics.failure_count["TOP"], 2);
    }

    fn run_fixture() -> (Vec<TraceRecord>, RunMetrics) {
        super::super::run(&fig1(), &config(60.0)).unwrap()
    }

    #[test]
    fn trace_alert_matches_global_alert() {
        let (trace, _) = run_fixture();
        let m = fig1();
        for r in &trace {
            let expected = global_alert(&m, &|c: &str| r.states.get(c).cloned()).unwrap();
            assert_eq!(r.alert, expected, "step {}", r.step);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut m = crate::dsl::parse_model(crate::fixtures::FIG1).unwrap();
        m.components[2].transitions[1].probability = 0.3;
        m.events[0].weight = 0.5;
        let cfg = SimulationConfig { horizon: 300.0, ..config(0.0) };
        let a = super::super::run(&m, &cfg).unwrap();
        let b = super::super::run(&m, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn component_order_does_not_matter() {
        let mut m = crate::dsl::parse_model(crate::fixtures::FIG1).unwrap();
        m.components[2].transitions[1].probability = 0.3;
        m.components[2].transitions[2].probability = 0.6;
        m.events[2].weight = 0.5;
        let cfg = SimulationConfig { horizon: 400.0, ..config(0.0) };
        let (a, _) = super::super::run(&m, &cfg).unwrap();
        m.components.reverse();
        m.events.reverse();
        let (b, _) = super::super::run(&m, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.states, y.states);
            assert_eq!(x.alert, y.alert);
        }
    }

    fn two_state(time: f64, probability: f64) -> Model {
        let mut m = Model::new("m");
        let mut c = Component::new("C");
        c.states.push(State { name: "a".into(), priority: 1 });
        c.states.push(State { name: "b".into(), priority: 0 });
        c.transitions.push(Transition::new("init", INITIAL_STATE, "a"));
        let mut t = Transition::new("go", "a", "b");
        t.time = time;
        t.probability = probability;
        c.transitions.push(t);
        m.components.push(c);
        m
    }

    #[test]
    fn immediate_transition_completes_in_its_cycle() {
        let (trace, _) = super::super::run(&two_state(0.0, 1.0), &config(3.0)).unwrap();
        assert_eq!(trace[0].states["C"], "a");
        assert_eq!(trace[1].states["C"], "b");
        assert_eq!(trace[1].fired, trace[1].completed);
    }

    #[test]
    fn all_probabilities_zero_never_fire() {
        let mut m = two_state(0.0, 0.0);
        m.components[0].transitions[0].probability = 0.0;
        let (trace, metrics) = super::super::run(&m, &config(50.0)).unwrap();
        assert!(trace.iter().all(|r| r.fired.is_empty()));
        assert!(trace.iter().all(|r| r.alert == trace[0].alert));
        assert_eq!(metrics.residence_fraction.len(), 1);
    }

    #[test]
    fn higher_priority_excludes_lower() {
        let mut m = two_state(0.0, 1.0);
        let c = &mut m.components[0];
        c.states.push(State { name: "x".into(), priority: 5 });
        let mut hi = Transition::new("hi", "a", "x");
        hi.priority = 2;
        hi.probability = 0.5;
        c.transitions.push(hi);
        for seed in 0..50 {
            let cfg = SimulationConfig { seed, ..config(5.0) };
            let (trace, _) = super::super::run(&m, &cfg).unwrap();
            assert!(trace.iter().flat_map(|r| &r.fired).all(|f| f.transition != "go"));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn completion_after_ceil_delta_cycles(delta in 0.0f64..20.0, dt_milli in 50u32..3000) {
            let dt = f64::from(dt_milli) / 1000.0;
            let expected = (delta / dt - 1e-9).ceil().max(0.0) as u64;
            let cfg = SimulationConfig { delta_t: dt, horizon: dt * (expected as f64 + 5.0), seed: 1, ..Default::default() };
            let (trace, _) = super::super::run(&two_state(delta, 1.0), &cfg).unwrap();
            let sel = trace.iter().find(|r| r.fired.iter().any(|f| f.transition == "go")).unwrap().step;
            let done = trace.iter().find(|r| r.completed.iter().any(|f| f.transition == "go")).unwrap().step;
            prop_assert_eq!(done - sel, expected);
        }
    }

    #[test]
    fn consumable_counter_is_decremented_on_fire() {
        let build = |consumable| {
            let mut m = two_state(0.0, 1.0);
            m.dynamics.push(crate::model::Dynamic {
                name: "g".into(),
                spec: DynamicSpec::PoissonCounter { rate: 50.0 },
                consumable,
            });
            let c = &mut m.components[0];
            c.transitions[1].trigger = Predicate::compare("g", CompareOp::Ge, 1.0);
            let mut back = Transition::new("back", "b", "a");
            back.trigger = Predicate::compare("g", CompareOp::Ge, 1.0);
            c.transitions.push(back);
            super::super::run(&m, &config(10.0)).unwrap().0
        };
        let (kept, consumed) = (build(false), build(true));
        let mut fires = 0.0;
        for (a, b) in kept.iter().zip(&consumed) {
            fires += b.fired.iter().filter(|f| f.transition != "init").count() as f64;
            assert_eq!(a.dynamic_values["g"] - b.dynamic_values["g"], fires);
        }
        assert_eq!(fires, 9.0);
    }
}
