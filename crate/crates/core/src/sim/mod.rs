//! Discrete-time stochastic simulation of predictive fault tree models.
//!
//! Each cycle of length `delta_t`:
//!
//! 1. the clock advances and every dynamic is re-evaluated;
//! 2. pending transitions that are due complete (state change plus action);
//! 3. every idle component evaluates the triggers leaving its current state
//!    against one shared snapshot, keeps the highest-priority enabled
//!    transitions, and picks one with probability `rho_i / max(1, sum rho)`
//!    (no firing with the residual `max(0, 1 - sum rho)`); zero-delay
//!    transitions complete at once, others become pending;
//! 4. events propagate rising edges of their source with probability equal
//!    to their weight and clear their target when the source drops;
//! 5. the global alert is evaluated and a [`TraceRecord`] is emitted.

mod engine;
mod metrics;
mod output;
pub mod rng;

pub use engine::{init_simulation, step, PendingTransition, SimulationState, Simulator};
pub use metrics::{run_monte_carlo, Estimate, MonteCarloReport, RunMetrics};
pub use output::{write_trace_csv, write_trace_jsonl};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicError;
use crate::model::{AlertLevel, Model, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub delta_t: f64,
    pub horizon: f64,
    pub seed: u64,
    pub replications: usize,
    /// Alert level that counts as an alarm: reached from above under the
    /// min aggregator, from below under max.
    pub alarm_threshold: Option<AlertLevel>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            delta_t: 1.0,
            horizon: 100.0,
            seed: 0,
            replications: 1,
            alarm_threshold: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(self.delta_t.is_finite() && self.delta_t > 0.0) {
            return bad(format!("delta_t must be positive, got {}", self.delta_t));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.horizon < self.delta_t {
            return bad(format!("horizon {} is shorter than delta_t {}", self.horizon, self.delta_t));
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        Ok(())
    }

    /// Number of whole cycles that fit in the horizon.
    pub fn cycles(&self) -> u64 {
        (self.horizon / self.delta_t + 1e-9).floor() as u64
    }

    /// Cycles needed to complete a transition of duration `time`:
    /// `ceil(time / delta_t)`.
    pub fn delay_cycles(&self, time: f64) -> u64 {
        if time <= 0.0 {
            return 0;
        }
        (time / self.delta_t - 1e-9).ceil().max(1.0) as u64
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Violation>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dynamic `{name}` at t={clock}: {source}")]
    Dynamic {
        name: String,
        clock: f64,
        #[source]
        source: DynamicError,
    },
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing output: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing output: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRef {
    pub component: String,
    pub transition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortChange {
    pub port: String,
    pub value: bool,
}

/// Everything that happened in one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub clock: f64,
    pub fired: Vec<TransitionRef>,
    pub completed: Vec<TransitionRef>,
    pub port_changes: Vec<PortChange>,
    pub alert: AlertLevel,
    /// Current state of every component after propagation.
    pub states: BTreeMap<String, String>,
    pub dynamic_values: BTreeMap<String, f64>,
}

/// Runs one replication and returns its full trace and metrics.
pub fn run(model: &Model, config: &SimulationConfig) -> Result<(Vec<TraceRecord>, RunMetrics), SimError> {
    Simulator::new(model, config)?.run(config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_checks() {
        let ok = SimulationConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SimulationConfig { delta_t: 0.0, ..ok.clone() },
            SimulationConfig { horizon: 0.5, ..ok.clone() },
            SimulationConfig { replications: 0, ..ok.clone() },
            SimulationConfig { delta_t: f64::NAN, ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(), Err(SimError::Config(_))), "{bad:?}");
        }
    }

    #[test]
    fn cycle_counts() {
        let c = SimulationConfig { delta_t: 0.1, horizon: 100.0, ..Default::default() };
        assert_eq!(c.cycles(), 1000);
        assert_eq!(c.delay_cycles(0.0), 0);
        assert_eq!(c.delay_cycles(0.05), 1);
        assert_eq!(c.delay_cycles(0.3), 3);
        assert_eq!(c.delay_cycles(0.31), 4);
    }
}
