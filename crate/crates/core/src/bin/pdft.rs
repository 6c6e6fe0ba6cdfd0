//! Command line front end. Exit status: 0 success, 1 invalid model or
//! failed analysis, 2 usage error (bad flags, unreadable input).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdft::dsl::{parse_document, serialize_model, Severity};
use pdft::dynamics::{load_timeseries, DynamicSpec, Interpolation};
use pdft::model::{AlertLevel, Model};
use pdft::refine::{
    apply_edits, estimate_transition_time, infer_threshold_trigger, load_event_log, mine_association_rules,
    mine_state_machine, rule_to_edits, trace_to_event_log, EventLog, Literal, MiningConfig, RefinementEdit,
    SojournStatistic, TransactionWindow,
};
use pdft::sim::{run_monte_carlo, write_trace_csv, write_trace_jsonl, SimError, SimulationConfig, Simulator};

#[derive(Parser)]
#[command(name = "pdft", version, about = "Predictive fault tree modelling, simulation and refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model; prints OK or diagnostics.
    Validate { model: PathBuf },
    /// Simulate a model, writing a trace and/or metrics.
    Simulate(SimulateArgs),
    /// Simulate and write the completed transitions as an event log.
    Export(ExportArgs),
    /// Mine a log (or samples) and write the edits and the refined model.
    Refine(RefineArgs),
    /// Apply a JSON edit list to a model.
    Apply {
        model: PathBuf,
        #[arg(long)]
        edits: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    model: PathBuf,
    /// Cycle length.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
    #[arg(long, env = "PDFT_SEED", default_value_t = 0)]
    seed: u64,
    /// Replace a dynamic by a sampled series: NAME=PATH to a time,value CSV.
    #[arg(long = "series", value_name = "NAME=PATH")]
    series: Vec<String>,
    #[arg(long, value_enum, default_value_t = Interp::Hold)]
    interpolation: Interp,
    /// Replace a dynamic by a closed-form expression in t: NAME=EXPR.
    #[arg(long = "expr", value_name = "NAME=EXPR")]
    exprs: Vec<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Trace output; `.jsonl` selects JSON lines, anything else CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Metrics report (JSON). Printed to stdout when omitted.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    #[arg(long)]
    alarm_threshold: Option<u32>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of runs; run i uses seed + i and case id `run<i>`.
    #[arg(long, default_value_t = 1)]
    cases: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interp {
    Hold,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Rules,
    Times,
    Threshold,
    Statemachine,
}

#[derive(Args)]
struct RefineArgs {
    model: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Event log CSV (case_id,component,state,timestamp).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Refined model output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Edit list output (JSON).
    #[arg(long)]
    edits: Option<PathBuf>,

    #[arg(long, default_value_t = 0.1)]
    min_support: f64,
    #[arg(long, default_value_t = 0.5)]
    min_confidence: f64,
    #[arg(long, default_value_t = 3)]
    max_antecedent: usize,
    /// Cut cases into windows of this length instead of one transaction per case.
    #[arg(long)]
    window: Option<f64>,
    /// Only consider rules with this consequent (COMPONENT=STATE).
    #[arg(long)]
    consequent: Option<String>,

    #[arg(long)]
    component: Option<String>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    /// Transition to update (times, threshold).
    #[arg(long)]
    transition: Option<String>,

    /// Labelled samples CSV with header `value,failed`.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    dynamic: Option<String>,

    /// Summarise sojourn times by the median instead of the mean.
    #[arg(long)]
    median: bool,
}

enum Failure {
    Usage(String),
    Domain(String),
}

type Outcome = Result<(), Failure>;

fn usage(m: impl std::fmt::Display) -> Failure {
    Failure::Usage(m.to_string())
}

fn domain(m: impl std::fmt::Display) -> Failure {
    Failure::Domain(m.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { model } => cmd_validate(&model),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Export(a) => cmd_export(a),
        Command::Refine(a) => cmd_refine(a),
        Command::Apply { model, edits, out } => cmd_apply(&model, &edits, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Parses a model, printing diagnostics as `path:line:col: severity: message`.
fn load_model(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    let outcome = parse_document(&text);
    for d in &outcome.diagnostics {
        eprintln!("{}:{d}", path.display());
    }
    let errors = outcome.diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
    match outcome.model {
        Some(m) if errors == 0 => Ok(m),
        _ => Err(domain(format!("{}: {errors} error(s)", path.display()))),
    }
}

fn cmd_validate(path: &Path) -> Outcome {
    load_model(path)?;
    println!("OK");
    Ok(())
}

fn split_assignment(s: &str) -> Result<(&str, &str), Failure> {
    s.split_once('=').ok_or_else(|| usage(format!("expected NAME=VALUE, got `{s}`")))
}

fn prepare(run: &RunArgs) -> Result<Model, Failure> {
    let mut model = load_model(&run.model)?;
    let interp = match run.interpolation {
        Interp::Hold => Interpolation::Hold,
        Interp::Linear => Interpolation::Linear,
    };
    for s in &run.series {
        let (name, path) = split_assignment(s)?;
        let file = File::open(path).map_err(|e| usage(format!("{path}: {e}")))?;
        let series = load_timeseries(file, interp).map_err(|e| domain(format!("{path}: {e}")))?;
        model.set_dynamic(name, DynamicSpec::TimeSeries(series));
    }
    for s in &run.exprs {
        let (name, src) = split_assignment(s)?;
        let spec = DynamicSpec::expression(src).map_err(|e| usage(format!("--expr {name}: {e}")))?;
        model.set_dynamic(name, spec);
    }
    Ok(model)
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::Config(_) => usage(e),
        _ => domain(e),
    }
}

fn config(run: &RunArgs, replications: usize, alarm_threshold: Option<u32>) -> SimulationConfig {
    SimulationConfig {
        delta_t: run.dt,
        horizon: run.horizon,
        seed: run.seed,
        replications,
        alarm_threshold: alarm_threshold.map(AlertLevel),
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(domain)? + "\n";
    match path {
        Some(p) => create(p)?.write_all(text.as_bytes()).map_err(domain),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    let model = prepare(&a.run)?;
    let cfg = config(&a.run, a.replications, a.alarm_threshold);
    cfg.validate().map_err(sim_failure)?;
    if a.replications > 1 {
        if a.trace.is_some() {
            return Err(usage("--trace needs --replications 1"));
        }
        let report = run_monte_carlo(&model, &cfg).map_err(sim_failure)?;
        return write_json(&report, a.metrics.as_deref());
    }
    let sim = Simulator::new(&model, &cfg).map_err(sim_failure)?;
    let (trace, metrics) = sim.run(cfg.seed).map_err(sim_failure)?;
    if let Some(path) = &a.trace {
        let out = create(path)?;
        let jsonl = path.extension().is_some_and(|e| e == "jsonl");
        if jsonl {
            write_trace_jsonl(&trace, out)
        } else {
            write_trace_csv(&model, &trace, out)
        }
        .map_err(domain)?;
    }
    if a.metrics.is_some() || a.trace.is_none() {
        write_json(&metrics, a.metrics.as_deref())?;
    }
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Outcome {
    let model = prepare(&a.run)?;
    let cfg = config(&a.run, 1, None);
    let sim = Simulator::new(&model, &cfg).map_err(sim_failure)?;
    let mut records = Vec::new();
    for i in 0..a.cases {
        let (trace, _) = sim.run(cfg.seed.wrapping_add(i as u64)).map_err(sim_failure)?;
        let log = trace_to_event_log(&model, &trace, &format!("run{i}"));
        records.extend(log.records().iter().cloned());
    }
    let log = EventLog::new(records).map_err(domain)?;
    log.write_csv(create(&a.out)?).map_err(domain)
}

fn require<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    v.as_ref().ok_or_else(|| usage(format!("this method needs --{flag}")))
}

fn load_log(path: &Option<PathBuf>) -> Result<EventLog, Failure> {
    let path = require(path, "log")?;
    let file = File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    load_event_log(file).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn load_samples(path: &Path) -> Result<Vec<(f64, bool)>, Failure> {
    #[derive(serde::Deserialize)]
    struct Row {
        value: f64,
        failed: String,
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| domain(format!("{}: {e}", path.display())))?;
        let failed = match row.failed.as_str() {
            "1" | "true" | "yes" => true,
            "0" | "false" | "no" => false,
            other => return Err(domain(format!("{} row {}: bad label `{other}`", path.display(), i + 2))),
        };
        out.push((row.value, failed));
    }
    Ok(out)
}

/// The transition of `component` named by `--transition`, else the unique
/// one from `from` to `to`.
fn pick_transition(model: &Model, component: &str, name: Option<&String>, from: Option<&String>, to: Option<&String>) -> Result<String, Failure> {
    let c = model
        .component(component)
        .ok_or_else(|| domain(format!("unknown component `{component}`")))?;
    if let Some(n) = name {
        return Ok(n.clone());
    }
    let (from, to) = match (from, to) {
        (Some(f), Some(t)) => (f, t),
        _ => return Err(usage("name the transition with --transition or --from/--to")),
    };
    c.transitions
        .iter()
        .find(|t| &t.source == from && &t.target == to)
        .map(|t| t.name.clone())
        .ok_or_else(|| domain(format!("`{component}` has no transition from {from} to {to}")))
}

fn cmd_refine(a: RefineArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let edits: Vec<RefinementEdit> = match a.method {
        Method::Rules => {
            let log = load_log(&a.log)?;
            let cfg = MiningConfig {
                min_support: a.min_support,
                min_confidence: a.min_confidence,
                max_antecedent: a.max_antecedent,
                window: a.window.map_or(TransactionWindow::Case, TransactionWindow::Duration),
            };
            let consequent: Option<Literal> = a.consequent.as_deref().map(str::parse).transpose().map_err(usage)?;
            let rules = mine_association_rules(&log, &cfg).map_err(domain)?;
            let chosen = rules
                .iter()
                .filter(|r| consequent.as_ref().is_none_or(|c| &r.consequent == c))
                .find_map(|r| rule_to_edits(&model, r).ok().map(|e| (r, e)));
            let (rule, edits) = chosen.ok_or_else(|| domain("no mined rule maps onto the model"))?;
            println!("rule: {rule}");
            edits
        }
        Method::Times => {
            let log = load_log(&a.log)?;
            let component = require(&a.component, "component")?;
            let from = require(&a.from, "from")?;
            let to = require(&a.to, "to")?;
            let est = estimate_transition_time(&log, component, from, to).map_err(domain)?;
            let transition = pick_transition(&model, component, a.transition.as_ref(), Some(from), Some(to))?;
            println!("{component} {from} -> {to}: mean {} over {} interval(s), sd {}", est.mean, est.count, est.std_dev);
            vec![RefinementEdit::SetTransitionTime {
                component: component.clone(),
                transition,
                time: est.mean,
            }]
        }
        Method::Threshold => {
            let samples = load_samples(require(&a.samples, "samples")?)?;
            let dynamic = require(&a.dynamic, "dynamic")?;
            let component = require(&a.component, "component")?;
            let transition = pick_transition(&model, component, a.transition.as_ref(), a.from.as_ref(), a.to.as_ref())?;
            let t = infer_threshold_trigger(&samples, dynamic).map_err(domain)?;
            println!("trigger: {} (accuracy {})", t.predicate, t.accuracy);
            vec![RefinementEdit::SetTrigger {
                component: component.clone(),
                transition,
                trigger: t.predicate,
            }]
        }
        Method::Statemachine => {
            let log = load_log(&a.log)?;
            let component = require(&a.component, "component")?;
            let stat = if a.median { SojournStatistic::Median } else { SojournStatistic::Mean };
            let sk = mine_state_machine(&log, component, stat).map_err(domain)?;
            for t in &sk.transitions {
                println!("{} -> {}: count {}, sojourn {}, probability {}", t.source, t.target, t.count, t.sojourn, t.probability);
            }
            sk.to_edits(&model).map_err(domain)?
        }
    };
    finish_refinement(&model, &edits, a.edits.as_deref(), a.out.as_deref())
}

fn finish_refinement(model: &Model, edits: &[RefinementEdit], edits_out: Option<&Path>, out: Option<&Path>) -> Outcome {
    let refined = apply_edits(model, edits).map_err(domain)?;
    let text = serialize_model(&refined).map_err(domain)?;
    if let Some(p) = edits_out {
        write_json(&edits, Some(p))?;
    }
    match out {
        Some(p) => create(p)?.write_all(text.as_bytes()).map_err(domain)?,
        None if edits_out.is_none() => print!("{text}"),
        None => {}
    }
    Ok(())
}

fn cmd_apply(model: &Path, edits: &Path, out: &Path) -> Outcome {
    let m = load_model(model)?;
    let list: Vec<RefinementEdit> =
        serde_json::from_str(&read(edits)?).map_err(|e| usage(format!("{}: {e}", edits.display())))?;
    finish_refinement(&m, &list, None, Some(out))
}
