//! Environment signals that triggers compare against.
//!
//! A dynamic is a real function of time. Three kinds are supported: closed
//! form expressions over `t`, sampled series (hold or linear), and Poisson
//! arrival counters that advance once per simulation cycle.

mod expr;
mod series;

pub use expr::{BinOp, Expr, ExprError, ExprParseError, Func};
pub use series::{load_timeseries, Interpolation, SeriesError, TimeSeries};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Dynamic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DynamicSpec {
    Expression(Expr),
    TimeSeries(TimeSeries),
    /// Count of arrivals of a Poisson process with `rate` events per time unit.
    PoissonCounter { rate: f64 },
}

#[derive(Debug, Error)]
pub enum DynamicError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("counter rate must be finite and positive, got {0}")]
    Rate(f64),
    #[error("dynamics are undefined before t = 0 (t = {0})")]
    NegativeTime(f64),
}

impl DynamicSpec {
    pub fn expression(src: &str) -> Result<Self, ExprParseError> {
        Expr::parse(src).map(DynamicSpec::Expression)
    }

    pub fn check(&self) -> Result<(), DynamicError> {
        match self {
            DynamicSpec::Expression(_) => Ok(()),
            DynamicSpec::TimeSeries(s) => Ok(s.check()?),
            DynamicSpec::PoissonCounter { rate } if rate.is_finite() && *rate > 0.0 => Ok(()),
            DynamicSpec::PoissonCounter { rate } => Err(DynamicError::Rate(*rate)),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, DynamicSpec::PoissonCounter { .. })
    }
}

/// One-shot evaluation at time `t`. Counters draw their whole `[0, t]`
/// arrival count from `rng`; use [`DynamicEnvironment`] for trajectories.
pub fn eval_dynamic<R: Rng + ?Sized>(spec: &DynamicSpec, t: f64, rng: &mut R) -> Result<f64, DynamicError> {
    if t < 0.0 {
        return Err(DynamicError::NegativeTime(t));
    }
    match spec {
        DynamicSpec::Expression(e) => Ok(e.eval(t)?),
        DynamicSpec::TimeSeries(s) => Ok(s.value_at(t)),
        DynamicSpec::PoissonCounter { rate } => Ok(poisson_arrivals(*rate * t, rng)?),
    }
}

fn poisson_arrivals<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64, DynamicError> {
    if mean == 0.0 {
        return Ok(0.0);
    }
    let d = Poisson::new(mean).map_err(|_| DynamicError::Rate(mean))?;
    Ok(d.sample(rng))
}

/// Current values of every dynamic in a model, advanced once per cycle.
#[derive(Debug, Clone)]
pub struct DynamicEnvironment {
    names: Vec<String>,
    specs: Vec<DynamicSpec>,
    values: Vec<f64>,
    clock: f64,
}

impl DynamicEnvironment {
    /// Evaluates every dynamic at `t = 0`; counters start empty.
    pub fn new(dynamics: &[Dynamic]) -> Result<Self, (String, DynamicError)> {
        let mut env = DynamicEnvironment {
            names: dynamics.iter().map(|d| d.name.clone()).collect(),
            specs: dynamics.iter().map(|d| d.spec.clone()).collect(),
            values: vec![0.0; dynamics.len()],
            clock: 0.0,
        };
        for (i, spec) in env.specs.iter().enumerate() {
            env.values[i] = match spec {
                DynamicSpec::Expression(e) => e.eval(0.0).map_err(|e| (env.names[i].clone(), e.into()))?,
                DynamicSpec::TimeSeries(s) => s.value_at(0.0),
                DynamicSpec::PoissonCounter { .. } => 0.0,
            };
        }
        Ok(env)
    }

    /// Moves the clock to `t`; counters receive Poisson(rate * (t - previous))
    /// arrivals drawn from their own stream in `rngs` (one per dynamic).
    pub fn advance<R: Rng>(&mut self, t: f64, rngs: &mut [R]) -> Result<(), (String, DynamicError)> {
        assert_eq!(rngs.len(), self.specs.len(), "one random stream per dynamic");
        let dt = t - self.clock;
        for ((i, spec), rng) in self.specs.iter().enumerate().zip(rngs.iter_mut()) {
            let err = |e: DynamicError| (self.names[i].clone(), e);
            match spec {
                DynamicSpec::Expression(e) => self.values[i] = e.eval(t).map_err(|e| err(e.into()))?,
                DynamicSpec::TimeSeries(s) => self.values[i] = s.value_at(t),
                DynamicSpec::PoissonCounter { rate } => {
                    self.values[i] += poisson_arrivals(rate * dt, rng).map_err(err)?;
                }
            }
        }
        self.clock = t;
        Ok(())
    }

    /// Removes one unit from a counter, never going below zero.
    pub fn consume(&mut self, index: usize) {
        if self.specs[index].is_stochastic() {
            self.values[index] = (self.values[index] - 1.0).max(0.0);
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}
