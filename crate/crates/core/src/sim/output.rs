//! Trace serialization.
//!
//! CSV columns: `step,clock,alert`, then `state.<component>` for every
//! component and `dyn.<name>` for every dynamic (declaration order), then
//! `fired`, `completed` and `port_changes`. List cells are `;`-separated;
//! transitions are written `component.transition`, port changes `port=0|1`.

use std::io::Write;

use super::{SimError, TraceRecord};
use crate::model::Model;

pub fn write_trace_csv<W: Write>(model: &Model, trace: &[TraceRecord], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "clock".into(), "alert".into()];
    header.extend(model.components.iter().map(|c| format!("state.{}", c.name)));
    header.extend(model.dynamics.iter().map(|d| format!("dyn.{}", d.name)));
    header.extend(["fired".into(), "completed".into(), "port_changes".into()]);
    w.write_record(&header)?;
    for r in trace {
        let mut row = vec![r.step.to_string(), r.clock.to_string(), r.alert.0.to_string()];
        row.extend(model.components.iter().map(|c| r.states.get(&c.name).cloned().unwrap_or_default()));
        row.extend(
            model
                .dynamics
                .iter()
                .map(|d| r.dynamic_values.get(&d.name).map(f64::to_string).unwrap_or_default()),
        );
        let refs = |v: &[super::TransitionRef]| {
            v.iter()
                .map(|t| format!("{}.{}", t.component, t.transition))
                .collect::<Vec<_>>()
                .join(";")
        };
        row.push(refs(&r.fired));
        row.push(refs(&r.completed));
        row.push(
            r.port_changes
                .iter()
                .map(|c| format!("{}={}", c.port, u8::from(c.value)))
                .collect::<Vec<_>>()
                .join(";"),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line.
pub fn write_trace_jsonl<W: Write>(trace: &[TraceRecord], mut out: W) -> Result<(), SimError> {
    for r in trace {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run, SimulationConfig};

    #[test]
    fn csv_layout() {
        let m = crate::dsl::parse_model(crate::fixtures::FIG1).unwrap();
        let cfg = SimulationConfig { horizon: 40.0, ..Default::default() };
        let (trace, _) = run(&m, &cfg).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&m, &trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,clock,alert,state.TOP,state.AND,state.C1,state.C2,dyn.f,dyn.g,dyn.h,fired,completed,port_changes"
        );
        assert_eq!(text.lines().count(), 41);
        assert!(lines.next().unwrap().starts_with("1,1,9,ok,idle,ok,ok,20.5,"));
    }

    #[test]
    fn jsonl_parses_back() {
        let m = crate::dsl::parse_model(crate::fixtures::FIG1).unwrap();
        let (trace, _) = run(&m, &SimulationConfig { horizon: 10.0, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_trace_jsonl(&trace, &mut buf).unwrap();
        let back: Vec<TraceRecord> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(back, trace);
    }
}
