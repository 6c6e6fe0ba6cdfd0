//! Estimate a repair time from logged ko -> ok intervals and write it into
//! the model.

use pdft::dsl::parse_model;
use pdft::fixtures::FIG1;
use pdft::refine::{apply_edits, estimate_transition_time, load_event_log, RefinementEdit};

const REPAIRS: &str = "\
case_id,component,state,timestamp
a,C1,ok,0
a,C1,ko,36
a,C1,ok,40
b,C1,ok,0
b,C1,ko,35
b,C1,ok,41
b,C1,ko,44
b,C1,ok,49.5
";

fn main() {
    let log = load_event_log(REPAIRS.as_bytes()).unwrap();
    let est = estimate_transition_time(&log, "C1", "ko", "ok").unwrap();
    println!("repair time: mean {} sd {:.3} from {} intervals", est.mean, est.std_dev, est.count);

    let model = parse_model(FIG1).unwrap();
    let refined = apply_edits(
        &model,
        &[RefinementEdit::SetTransitionTime {
            component: "C1".into(),
            transition: "t5".into(),
            time: est.mean,
        }],
    )
    .unwrap();
    let t5 = refined.component("C1").unwrap().transition("t5").unwrap();
    println!("C1.t5 now takes {} time units", t5.time);
}
