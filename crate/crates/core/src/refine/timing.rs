use serde::{Deserialize, Serialize};

use super::{EventLog, RefineError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionTimeEstimate {
    pub mean: f64,
    pub count: usize,
    /// Sample standard deviation; 0 for a single interval.
    pub std_dev: f64,
}

/// Intervals between a record of `from` and the immediately following
/// record of the same component in the same case, when that one is `to`.
pub fn transition_intervals(log: &EventLog, component: &str, from: &str, to: &str) -> Vec<f64> {
    let mut out = Vec::new();
    for (_, records) in log.cases() {
        let own: Vec<_> = records.iter().filter(|r| r.component == component).collect();
        for w in own.windows(2) {
            if w[0].state == from && w[1].state == to {
                out.push(w[1].timestamp - w[0].timestamp);
            }
        }
    }
    out
}

pub fn estimate_transition_time(
    log: &EventLog,
    component: &str,
    from: &str,
    to: &str,
) -> Result<TransitionTimeEstimate, RefineError> {
    let mut xs = transition_intervals(log, component, from, to);
    if xs.is_empty() {
        return Err(RefineError::InsufficientEvidence(format!(
            "no adjacent {from} -> {to} records for `{component}`"
        )));
    }
    // summing in a fixed order makes the result independent of case order
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std_dev = if xs.len() < 2 {
        0.0
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(TransitionTimeEstimate {
        mean,
        count: xs.len(),
        std_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::LogRecord;
    use proptest::prelude::*;

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
    fn two_point_mean() {
        let l = log(&[&[("ko", 0.0), ("ok", 4.0)], &[("ko", 10.0), ("ok", 16.0)]]);
        let e = estimate_transition_time(&l, "C1", "ko", "ok").unwrap();
        assert_eq!((e.mean, e.count), (5.0, 2));
    }

    #[test]
    fn singleton_has_zero_spread() {
        let l = log(&[&[("ko", 2.5), ("ok", 10.0)]]);
        let e = estimate_transition_time(&l, "C1", "ko", "ok").unwrap();
        assert_eq!((e.mean, e.std_dev), (7.5, 0.0));
    }

    #[test]
    fn only_adjacent_pairs_count() {
        let l = log(&[&[("ko", 0.0), ("repairing", 1.0), ("ok", 4.0)]]);
        assert!(matches!(
            estimate_transition_time(&l, "C1", "ko", "ok"),
            Err(RefineError::InsufficientEvidence(_))
        ));
    }

    proptest! {
        #[test]
        fn invariant_under_case_permutation(gaps in prop::collection::vec(0.0f64..100.0, 1..30), rot in 0usize..30) {
            let cases: Vec<Vec<(&str, f64)>> = gaps.iter().map(|g| vec![("ko", 1.0), ("ok", 1.0 + g)]).collect();
            let mut rotated = cases.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            rotated.reverse();
            let as_refs = |c: &[Vec<(&'static str, f64)>]| log(&c.iter().map(Vec::as_slice).collect::<Vec<_>>());
            let a = estimate_transition_time(&as_refs(&cases), "C1", "ko", "ok").unwrap();
            let b = estimate_transition_time(&as_refs(&rotated), "C1", "ko", "ok").unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
