//! Data-driven refinement of model templates.
//!
//! Each miner turns an [`EventLog`] (or labelled dynamic samples) into
//! [`RefinementEdit`]s that fill open parameters of a model:
//!
//! * [`mine_association_rules`] + [`rule_to_edits`]: ports, weighted events
//!   and triggered transitions from co-occurring component states;
//! * [`estimate_transition_time`]: transition delays from logged intervals;
//! * [`infer_threshold_trigger`]: a univariate `d > c` / `d < c` trigger;
//! * [`mine_state_machine`]: a directly-follows skeleton for one component.

mod apriori;
mod discovery;
mod edits;
mod log;
mod rules;
mod threshold;
mod timing;

pub use apriori::{
    frequent_itemsets, mine_association_rules, mine_rules_from_transactions, transactions, AssociationRule,
    Literal, MiningConfig, TransactionWindow,
};
pub use discovery::{mine_state_machine, MinedTransition, SojournStatistic, StateMachineSkeleton};
pub use edits::{apply_edits, RefinementEdit};
pub use log::{load_event_log, trace_to_event_log, EventLog, LogRecord};
pub use rules::{announcing_port, rule_to_edits};
pub use threshold::{infer_threshold_trigger, ThresholdTrigger};
pub use timing::{estimate_transition_time, transition_intervals, TransitionTimeEstimate};

use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("event log is empty")]
    EmptyLog,
    #[error("event log row {row}: {message}")]
    LogRow { row: usize, message: String },
    #[error("case `{case}`: timestamp {timestamp} precedes the previous record")]
    Unordered { case: String, timestamp: f64 },
    #[error("reading event log: {0}")]
    Csv(#[from] csv::Error),
    #[error("{name} must be in (0, 1], got {value}")]
    Threshold { name: &'static str, value: f64 },
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("component `{component}` has no state `{state}`")]
    UnknownState { component: String, state: String },
    #[error("component `{component}` has no transition `{transition}`")]
    UnknownTransition { component: String, transition: String },
    #[error("`{0}` is already declared")]
    Duplicate(String),
    #[error("ambiguous source state: {0}")]
    AmbiguousSource(String),
    #[error("rule antecedent has no literal on another component")]
    NoCrossComponentLiteral,
    #[error("insufficient evidence: {0}")]
    InsufficientEvidence(String),
    #[error("component `{0}` does not appear in the log")]
    ComponentNotInLog(String),
    #[error("samples contain a single class")]
    SingleClass,
    #[error("refined model is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}
