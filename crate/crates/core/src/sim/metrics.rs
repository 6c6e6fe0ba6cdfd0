use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{SimulationState, Simulator};
use super::{SimError, SimulationConfig};
use crate::model::{AlertAggregator, AlertLevel, Model};

/// Summary of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub cycles: u64,
    /// Share of cycles spent at each global alert level.
    pub residence_fraction: BTreeMap<u32, f64>,
    /// Clock of the first cycle whose alert reached the alarm threshold.
    pub time_to_first_alarm: Option<f64>,
    /// Completed transitions into a strictly more severe state, per component.
    pub failure_count: BTreeMap<String, u64>,
}

pub(super) struct MetricsAccumulator {
    aggregator: AlertAggregator,
    threshold: Option<AlertLevel>,
    cycles: u64,
    counts: BTreeMap<u32, u64>,
    first_alarm: Option<f64>,
}

impl MetricsAccumulator {
    pub(super) fn new(aggregator: AlertAggregator, threshold: Option<AlertLevel>) -> Self {
        MetricsAccumulator {
            aggregator,
            threshold,
            cycles: 0,
            counts: BTreeMap::new(),
            first_alarm: None,
        }
    }

    pub(super) fn observe(&mut self, clock: f64, alert: AlertLevel) {
        self.cycles += 1;
        *self.counts.entry(alert.0).or_default() += 1;
        if self.first_alarm.is_none() {
            if let Some(th) = self.threshold {
                if self.aggregator.is_alarm(alert, th) {
                    self.first_alarm = Some(clock);
                }
            }
        }
    }

    pub(super) fn finish(self, state: &SimulationState) -> RunMetrics {
        let n = self.cycles as f64;
        RunMetrics {
            cycles: self.cycles,
            residence_fraction: self.counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect(),
            time_to_first_alarm: self.first_alarm,
            failure_count: state.failure_counts().map(|(c, k)| (c.to_string(), k)).collect(),
        }
    }
}

/// Sample mean with its standard error (sample sd / sqrt n; 0 for n = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Option<Estimate> {
        if xs.is_empty() {
            return None;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std_error = if xs.len() < 2 {
            0.0
        } else {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        Some(Estimate {
            mean,
            std_error,
            samples: xs.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub replications: usize,
    pub seed: u64,
    /// Levels never visited by a replication count as 0 for it.
    pub residence_fraction: BTreeMap<u32, Estimate>,
    /// Over the replications that raised an alarm.
    pub time_to_first_alarm: Option<Estimate>,
    pub alarm_replications: usize,
    pub failure_count: BTreeMap<String, Estimate>,
}

impl MonteCarloReport {
    pub fn from_runs(seed: u64, runs: &[RunMetrics]) -> MonteCarloReport {
        let levels: std::collections::BTreeSet<u32> =
            runs.iter().flat_map(|r| r.residence_fraction.keys().copied()).collect();
        let residence_fraction = levels
            .into_iter()
            .map(|l| {
                let xs: Vec<f64> = runs.iter().map(|r| r.residence_fraction.get(&l).copied().unwrap_or(0.0)).collect();
                (l, Estimate::from_samples(&xs).expect("at least one run"))
            })
            .collect();
        let alarms: Vec<f64> = runs.iter().filter_map(|r| r.time_to_first_alarm).collect();
        let failure_count = runs
            .first()
            .map(|r| r.failure_count.keys().cloned().collect::<Vec<_>>())
            .unwrap_or_default()
            .into_iter()
            .map(|c| {
                let xs: Vec<f64> = runs.iter().map(|r| r.failure_count[&c] as f64).collect();
                (c, Estimate::from_samples(&xs).expect("at least one run"))
            })
            .collect();
        MonteCarloReport {
            replications: runs.len(),
            seed,
            residence_fraction,
            time_to_first_alarm: Estimate::from_samples(&alarms),
            alarm_replications: alarms.len(),
            failure_count,
        }
    }
}

/// Runs `config.replications` independent replications in parallel;
/// replication `i` is seeded with `config.seed + i`.
pub fn run_monte_carlo(model: &Model, config: &SimulationConfig) -> Result<MonteCarloReport, SimError> {
    let sim = Simulator::new(model, config)?;
    let runs = (0..config.replications)
        .into_par_iter()
        .map(|i| sim.run_metrics(config.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MonteCarloReport::from_runs(config.seed, &runs))
}
