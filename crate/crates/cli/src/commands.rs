use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use persistency::model::{
    generate_grid, parse_uai, serialize_uai, GraphicalModel, GridSpec, Labeling,
};
use persistency::persist::{
    choose_test_labeling, find_persistency_observed, Observer, PersistencyConfig,
    PersistencyReport, Speedups,
};
use persistency::substitution::SubsetToOne;
use persistency::trws::{self, SweepTrace};
use persistency::Error;
use serde::Serialize;
use serde_json::json;

use crate::pgm;
use crate::{GenArgs, PersistArgs, RenderArgs, SolveArgs, StatsArgs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit code 1.
    Usage(String),
    /// Unreadable or invalid input, or failed output; exit code 2.
    Data(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    match output {
        Some(p) => write_bytes(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_model(path: &Path) -> Result<GraphicalModel> {
    parse_uai(&read(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn gen(a: GenArgs) -> Result<()> {
    let spec = GridSpec {
        family: a.family,
        rows: a.rows,
        cols: a.cols,
        labels: a.labels,
        cost_range: (a.cost_min, a.cost_max),
        seed: a.seed,
    };
    let model = generate_grid(&spec)?;
    write_bytes(&a.output, serialize_uai(&model).as_bytes())?;
    emit_json(&spec, Some(&a.output.with_extension("json")))
}

#[derive(Serialize)]
struct SolveOutput {
    labeling: Labeling,
    energy: f64,
    lower_bound: f64,
    sweeps: usize,
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let s = trws::solve(&model, a.budget);
    let out = SolveOutput {
        labeling: s.best,
        energy: s.best_energy,
        lower_bound: s.lower_bound,
        sweeps: s.sweeps,
    };
    emit_json(&out, a.output.as_deref())
}

struct TraceWriter {
    out: BufWriter<File>,
    error: Option<std::io::Error>,
}

impl TraceWriter {
    fn line(&mut self, value: serde_json::Value) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{value}") {
                self.error = Some(e);
            }
        }
    }
}

impl Observer for TraceWriter {
    fn round(&mut self, round: usize, sub: &SubsetToOne) {
        self.line(
            json!({ "event": "round", "round": round, "movable_labels": sub.total_eliminated() }),
        );
    }

    fn sweep(&mut self, trace: &SweepTrace) {
        let mut v = serde_json::to_value(trace).expect("trace serializes");
        v["event"] = json!("sweep");
        self.line(v);
    }
}

fn config(a: &PersistArgs) -> PersistencyConfig {
    PersistencyConfig {
        mode: a.mode,
        sweeps_per_round: a.sweeps_per_round,
        max_outer_rounds: a.max_outer_rounds,
        speedups: Speedups {
            single_node: !a.no_single_node,
            pruning_cut: !a.no_pruning_cut,
            fast_messages: !a.naive_messages,
        },
        test_labeling_budget: a.budget,
        ..PersistencyConfig::default()
    }
}

pub fn persist(a: PersistArgs) -> Result<()> {
    let cfg = config(&a);
    cfg.validate()?;
    let model = load_model(&a.model)?;
    let y = match &a.labeling {
        Some(p) => parse_json::<Labeling>(p)?,
        None => choose_test_labeling(&model, &cfg)?,
    };
    let mut report = match &a.trace {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let mut w = TraceWriter {
                out: BufWriter::new(file),
                error: None,
            };
            let r = find_persistency_observed(&model, &y, &cfg, &mut w)?;
            if let Some(e) = w.error.or_else(|| w.out.flush().err()) {
                return Err(CliError::Data(format!("{}: {e}", path.display())));
            }
            r
        }
        None => find_persistency_observed(&model, &y, &cfg, &mut ())?,
    };
    if !a.timing {
        report.wall_time_ms = None;
    }
    if let Some(path) = &a.emit_remainder {
        let rest = model.restrict(&report.substitution.remaining(model.labels()))?;
        write_bytes(path, serialize_uai(&rest).as_bytes())?;
    }
    emit_json(&report, a.output.as_deref())
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(xs: &[f64]) -> Summary {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Summary {
            mean,
            stddev: var.sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Serialize)]
struct Stats {
    count: usize,
    label_fraction: Summary,
    log_fraction: Summary,
    outer_rounds: Summary,
    total_sweeps: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<Summary>,
    capped: usize,
    dichotomy_violations: usize,
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let reports: Vec<PersistencyReport> = a
        .reports
        .iter()
        .map(|p| parse_json(p))
        .collect::<Result<_>>()?;
    let pick =
        |f: fn(&PersistencyReport) -> f64| Summary::of(&reports.iter().map(f).collect::<Vec<_>>());
    let times: Option<Vec<f64>> = reports.iter().map(|r| r.wall_time_ms).collect();
    let out = Stats {
        count: reports.len(),
        label_fraction: pick(|r| r.measures.label_fraction),
        log_fraction: pick(|r| r.measures.log_fraction),
        outer_rounds: pick(|r| r.outer_rounds as f64),
        total_sweeps: pick(|r| r.total_sweeps as f64),
        wall_time_ms: times.map(|t| Summary::of(&t)),
        capped: reports.iter().filter(|r| r.capped).count(),
        dichotomy_violations: reports.iter().map(|r| r.dichotomy_violations).sum(),
    };
    emit_json(&out, a.output.as_deref())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn render(a: RenderArgs) -> Result<()> {
    let report: PersistencyReport = parse_json(&a.report)?;
    let n = report.labels.len();
    if a.rows * a.cols != n {
        return Err(CliError::Data(format!(
            "{}x{} grid does not match {n} nodes",
            a.rows, a.cols
        )));
    }
    if report.substitution.num_nodes() != n {
        return Err(CliError::Data(
            "substitution does not match the label counts".into(),
        ));
    }
    let remaining: Vec<usize> = report
        .substitution
        .remaining(&report.labels)
        .iter()
        .map(Vec::len)
        .collect();
    if remaining.contains(&0) {
        return Err(CliError::Data(
            "substitution eliminates every label of a node".into(),
        ));
    }
    write_bytes(
        &with_suffix(&a.output, ".remaining.pgm"),
        &pgm::remaining_map(a.rows, a.cols, &report.labels, &remaining),
    )?;
    write_bytes(
        &with_suffix(&a.output, ".unique.pgm"),
        &pgm::unique_map(a.rows, a.cols, &remaining),
    )
}
