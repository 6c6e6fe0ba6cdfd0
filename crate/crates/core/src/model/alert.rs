use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Model;

/// Global alert level, ordered as naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlertLevel(pub u32);

impl fmt::Display for AlertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How per-component state priorities fold into the global alert.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlertAggregator {
    #[default]
    Min,
    Max,
}

impl AlertAggregator {
    pub fn fold(self, levels: impl IntoIterator<Item = u32>) -> Option<u32> {
        let it = levels.into_iter();
        match self {
            AlertAggregator::Min => it.min(),
            AlertAggregator::Max => it.max(),
        }
    }

    /// Whether `level` has reached `threshold` in the alarming direction:
    /// at or below it under `Min`, at or above it under `Max`.
    pub fn is_alarm(self, level: AlertLevel, threshold: AlertLevel) -> bool {
        match self {
            AlertAggregator::Min => level <= threshold,
            AlertAggregator::Max => level >= threshold,
        }
    }

    /// True when `a` is strictly more severe than `b`.
    pub fn more_severe(self, a: u32, b: u32) -> bool {
        match self {
            AlertAggregator::Min => a < b,
            AlertAggregator::Max => a > b,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            AlertAggregator::Min => "min",
            AlertAggregator::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlertError {
    #[error("no state assigned to component `{0}`")]
    MissingComponent(String),
    #[error("component `{component}` has no state `{state}`")]
    UnknownState { component: String, state: String },
    #[error("model has no components")]
    Empty,
}

/// Folds the priority of each component's current state with the model's
/// aggregator. `current_states` is looked up by component name.
pub fn global_alert<S: AsRef<str>>(
    model: &Model,
    current_states: &dyn Fn(&str) -> Option<S>,
) -> Result<AlertLevel, AlertError> {
    let mut levels = Vec::with_capacity(model.components.len());
    for c in &model.components {
        let state = current_states(&c.name).ok_or_else(|| AlertError::MissingComponent(c.name.clone()))?;
        let state = state.as_ref();
        let p = c.state_priority(state).ok_or_else(|| AlertError::UnknownState {
            component: c.name.clone(),
            state: state.to_string(),
        })?;
        levels.push(p);
    }
    model.alert.fold(levels).map(AlertLevel).ok_or(AlertError::Empty)
}
