use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::RefineError;
use crate::model::Model;
use crate::sim::TraceRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub case_id: String,
    pub component: String,
    pub state: String,
    pub timestamp: f64,
}

/// Records of component states observed per case, in file order.
/// Timestamps never decrease within a case.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    records: Vec<LogRecord>,
}

impl EventLog {
    pub fn new(records: Vec<LogRecord>) -> Result<Self, RefineError> {
        let mut last: std::collections::HashMap<&str, f64> = std::collections::HashMap::new();
        for r in &records {
            if !r.timestamp.is_finite() {
                return Err(RefineError::Unordered {
                    case: r.case_id.clone(),
                    timestamp: r.timestamp,
                });
            }
            if let Some(prev) = last.insert(&r.case_id, r.timestamp) {
                if r.timestamp < prev {
                    return Err(RefineError::Unordered {
                        case: r.case_id.clone(),
                        timestamp: r.timestamp,
                    });
                }
            }
        }
        Ok(EventLog { records })
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records grouped by case, cases in order of first appearance.
    pub fn cases(&self) -> Vec<(&str, Vec<&LogRecord>)> {
        let mut order: Vec<(&str, Vec<&LogRecord>)> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for r in &self.records {
            let i = *index.entry(r.case_id.as_str()).or_insert_with(|| {
                order.push((r.case_id.as_str(), Vec::new()));
                order.len() - 1
            });
            order[i].1.push(r);
        }
        order
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RefineError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Reads `case_id,component,state,timestamp` CSV.
pub fn load_event_log<R: Read>(reader: R) -> Result<EventLog, RefineError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["case_id", "component", "state", "timestamp"] {
        return Err(RefineError::LogRow {
            row: 1,
            message: "expected header `case_id,component,state,timestamp`".into(),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.deserialize::<LogRecord>().enumerate() {
        records.push(row.map_err(|e| RefineError::LogRow {
            row: i + 2,
            message: e.to_string(),
        })?);
    }
    EventLog::new(records)
}

/// One record per completed transition: the component's new state at the
/// cycle's clock. `model` supplies transition targets.
pub fn trace_to_event_log(model: &Model, trace: &[TraceRecord], case_id: &str) -> EventLog {
    let mut records = Vec::new();
    for r in trace {
        for c in &r.completed {
            let target = model
                .component(&c.component)
                .and_then(|k| k.transition(&c.transition))
                .map(|t| t.target.clone());
            if let Some(state) = target {
                records.push(LogRecord {
                    case_id: case_id.to_string(),
                    component: c.component.clone(),
                    state,
                    timestamp: r.clock,
                });
            }
        }
    }
    EventLog { records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_groups() {
        let csv = "case_id,component,state,timestamp\na,C1,ok,0\nb,C1,ok,1\na,C1,ko,4\n";
        let log = load_event_log(csv.as_bytes()).unwrap();
        let cases = log.cases();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].0, "a");
        assert_eq!(cases[0].1.len(), 2);
    }

    #[test]
    fn rejects_time_going_backwards() {
        let csv = "case_id,component,state,timestamp\na,C1,ok,5\na,C1,ko,4\n";
        assert!(matches!(load_event_log(csv.as_bytes()), Err(RefineError::Unordered { .. })));
    }

    #[test]
    fn reports_bad_row() {
        let csv = "case_id,component,state,timestamp\na,C1,ok,soon\n";
        assert!(matches!(load_event_log(csv.as_bytes()), Err(RefineError::LogRow { row: 2, .. })));
        assert!(load_event_log("a,b,c,d\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let csv = "case_id,component,state,timestamp\na,C1,ok,0.5\n";
        let log = load_event_log(csv.as_bytes()).unwrap();
        let mut out = Vec::new();
        log.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), csv);
    }
}
