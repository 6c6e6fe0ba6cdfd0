//! Sampled signals and their CSV ingestion.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    #[default]
    Hold,
    Linear,
}

impl Interpolation {
    pub fn keyword(self) -> &'static str {
        match self {
            Interpolation::Hold => "hold",
            Interpolation::Linear => "linear",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "hold" => Some(Interpolation::Hold),
            "linear" => Some(Interpolation::Linear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// `(time, value)` samples with strictly increasing times.
    pub samples: Vec<(f64, f64)>,
    pub interpolation: Interpolation,
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("time series has no samples")]
    Empty,
    #[error("expected header `time,value`, found `{0}`")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },
    #[error("row {row}: time {time} does not increase on the previous row")]
    NotIncreasing { row: u64, time: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl TimeSeries {
    pub fn check(&self) -> Result<(), SeriesError> {
        if self.samples.is_empty() {
            return Err(SeriesError::Empty);
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(SeriesError::NotIncreasing {
                    row: i as u64 + 2,
                    time: w[1].0,
                });
            }
        }
        if let Some(i) = self.samples.iter().position(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(SeriesError::Row {
                row: i as u64 + 1,
                message: "non-finite sample".into(),
            });
        }
        Ok(())
    }

    /// Value at `t`. Hold returns the latest sample at or before `t` (the
    /// first sample before the series starts); linear interpolates between
    /// neighbours and clamps outside the sampled range.
    pub fn value_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        // index of the first sample strictly after t
        let after = s.partition_point(|(ts, _)| *ts <= t);
        if after == 0 {
            return s[0].1;
        }
        let (t0, v0) = s[after - 1];
        match self.interpolation {
            Interpolation::Hold => v0,
            Interpolation::Linear => match s.get(after) {
                None => v0,
                Some(&(t1, v1)) => v0 + (v1 - v0) * (t - t0) / (t1 - t0),
            },
        }
    }
}

/// Reads a `time,value` CSV document. Rows must have strictly increasing
/// times; row numbers in errors count the header as row 1.
pub fn load_timeseries<R: Read>(reader: R, interpolation: Interpolation) -> Result<TimeSeries, SeriesError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "time" || &header[1] != "value" {
        return Err(SeriesError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64, SeriesError> {
            rec.get(i)
                .ok_or_else(|| SeriesError::Row { row, message: format!("missing {name}") })?
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| SeriesError::Row {
                    row,
                    message: format!("{name} `{}` is not a real number", &rec[i]),
                })
        };
        let (t, v) = (field(0, "time")?, field(1, "value")?);
        if samples.last().is_some_and(|&(prev, _)| !(t > prev)) {
            return Err(SeriesError::NotIncreasing { row, time: t });
        }
        samples.push((t, v));
    }
    if samples.is_empty() {
        return Err(SeriesError::Empty);
    }
    Ok(TimeSeries { samples, interpolation })
}
