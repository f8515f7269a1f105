//! Command-line front end: validate, infer, simulate, rank, fuzzmath.
//!
//! Every command is deterministic — identical inputs and flags produce
//! byte-identical standard output. Floats are emitted with 17
//! significant digits so output comparisons can be byte-level while
//! still round-tripping the exact f64. Exit codes: 0 success, 2 for
//! domain or validation failures, 3 for I/O failures.

use clap::{Parser, Subcommand, ValueEnum};
use fuzzrisk::engine::{infer, EngineError, Scenario};
use fuzzrisk::experts::{blend_outputs, equal_weight, ExpertError, PanelMode};
use fuzzrisk::fuznum::{arith, ArithOp, FuzzyNumber};
use fuzzrisk::modelfile::{
    load_model, load_portfolio, load_simulation, LoadError, LoadedModel,
};
use fuzzrisk::montecarlo::{percentile, summarize, SimulationSpec, Summary};
use fuzzrisk::portfolio::{
    assess_all, mitigation_priority, rank, rollup, Combiner, Hierarchy, RankKey, RiskEvaluator,
};
use fuzzrisk::rulelang::format_rule;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fuzzrisk", version, about = "Fuzzy-logic risk assessment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file; prints OK or one diagnostic per line
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Run scenarios from a CSV file through a model
    Infer {
        #[arg(long)]
        model: PathBuf,
        /// CSV with a header naming every input variable
        #[arg(long)]
        scenario: PathBuf,
        /// Trace per-rule strengths (or per-expert outputs for panels)
        #[arg(long)]
        explain: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Simulate a loss distribution and summarize it
    Simulate {
        #[arg(long)]
        model: PathBuf,
        /// Simulation file: seed, samples, per-input distributions
        #[arg(long)]
        sim: PathBuf,
        /// Overrides the simulation file's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the simulation file's sample count
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 99.5)]
        percentile: f64,
        /// Write every sampled loss to this file, one per line
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Output variable to track (defaults to the only output)
        #[arg(long)]
        output: Option<String>,
    },
    /// Assess, rank, and roll up a risk portfolio
    Rank {
        #[arg(long)]
        portfolio: PathBuf,
        /// Defaults to tail when every risk is simulated, else extreme
        #[arg(long, value_enum)]
        key: Option<KeyArg>,
        /// Overrides the portfolio's combiner
        #[arg(long, value_enum)]
        combiner: Option<CombinerArg>,
        /// Tail percentile used when assessing simulated risks
        #[arg(long, default_value_t = 99.5)]
        percentile: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fuzzy-number arithmetic as an alpha-cut table (CSV)
    Fuzzmath {
        #[arg(long, value_enum)]
        op: OpArg,
        /// e.g. {"triangle":[0,1,2]} or {"trapezoid":[0,1,2,3]}
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 101)]
        levels: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum KeyArg {
    Extreme,
    Tail,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombinerArg {
    Sum,
    Max,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Add,
    Sub,
    Mul,
    Div,
}

/// Domain failures exit 2, I/O failures exit 3.
enum Failure {
    Domain(String),
    Io(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Io(e.to_string()),
            LoadError::Invalid(_) => Failure::Domain(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { model } => cmd_validate(&model),
        Command::Infer {
            model,
            scenario,
            explain,
            format,
        } => cmd_infer(&model, &scenario, explain, format),
        Command::Simulate {
            model,
            sim,
            seed,
            samples,
            percentile,
            dump,
            output,
        } => cmd_simulate(&model, &sim, seed, samples, percentile, dump.as_deref(), output),
        Command::Rank {
            portfolio,
            key,
            combiner,
            percentile,
            format,
        } => cmd_rank(&portfolio, key, combiner, percentile, format),
        Command::Fuzzmath { op, x, y, levels } => cmd_fuzzmath(op, &x, &y, levels),
    }
}

// ---- deterministic emission -------------------------------------------

/// 17 significant digits: round-trip exact for f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("JSON is UTF-8")
}

fn print_line(line: &str) -> Result<(), Failure> {
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{line}").map_err(|e| Failure::Io(e.to_string()))
}

fn grid_override() -> Result<Option<usize>, Failure> {
    match std::env::var("FUZZRISK_GRID") {
        Ok(s) => s.trim().parse::<usize>().map(Some).map_err(|_| {
            Failure::Domain(format!("FUZZRISK_GRID must be a positive integer, got {s:?}"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Domain(format!("FUZZRISK_GRID: {e}"))),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

// ---- validate ----------------------------------------------------------

fn cmd_validate(model: &Path) -> Result<(), Failure> {
    match load_model(model, grid_override()?) {
        Ok(_) => print_line("OK"),
        Err(e @ LoadError::Io { .. }) => Err(Failure::Io(e.to_string())),
        Err(LoadError::Invalid(diags)) => {
            let lines = diags
                .iter()
                .map(|d| format!("{}: {}", model.display(), d))
                .collect::<Vec<_>>()
                .join("\n");
            Err(Failure::Domain(lines))
        }
    }
}

// ---- infer -------------------------------------------------------------

fn csv_failure(e: csv::Error) -> Failure {
    if matches!(e.kind(), csv::ErrorKind::Io(_)) {
        Failure::Io(e.to_string())
    } else {
        Failure::Domain(e.to_string())
    }
}

/// Header names plus one parsed scenario per data row.
fn read_scenarios(path: &Path) -> Result<(Vec<String>, Vec<Scenario>), Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_failure)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_failure)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut scenarios = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_failure)?;
        let mut values = Vec::with_capacity(headers.len());
        for (name, cell) in headers.iter().zip(record.iter()) {
            let value: f64 = cell.parse().map_err(|_| {
                Failure::Domain(format!(
                    "scenario row {}, column {name:?}: {cell:?} is not a number",
                    i + 1
                ))
            })?;
            values.push((name.clone(), value));
        }
        if record.len() != headers.len() {
            return Err(Failure::Domain(format!(
                "scenario row {}: {} cells for {} columns",
                i + 1,
                record.len(),
                headers.len()
            )));
        }
        scenarios.push(Scenario::new(values));
    }
    Ok((headers, scenarios))
}

#[derive(Serialize)]
struct TraceEntry {
    rule: usize,
    text: String,
    strength: f64,
}

#[derive(Serialize)]
struct ExpertTrace {
    id: String,
    outputs: IndexMap<String, f64>,
}

#[derive(Serialize)]
struct InferRecord {
    row: usize,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    outputs: Option<IndexMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    experts: Option<Vec<ExpertTrace>>,
}

/// `Ok(None)` means the row fired no rule; real errors abort the run.
fn infer_row(
    loaded: &LoadedModel,
    scenario: &Scenario,
    explain: bool,
) -> Result<Option<(IndexMap<String, f64>, Option<Vec<TraceEntry>>, Option<Vec<ExpertTrace>>)>, Failure>
{
    match loaded {
        LoadedModel::Single(model) => match infer(model, scenario) {
            Ok(result) => {
                let outputs = result
                    .outputs
                    .iter()
                    .map(|(name, out)| (name.clone(), out.crisp))
                    .collect();
                let trace = explain.then(|| {
                    model
                        .rules()
                        .iter()
                        .zip(&result.activations)
                        .enumerate()
                        .map(|(i, (rule, strength))| TraceEntry {
                            rule: i,
                            text: format_rule(rule),
                            strength: strength.value(),
                        })
                        .collect()
                });
                Ok(Some((outputs, trace, None)))
            }
            Err(EngineError::NoRuleFired { .. }) => Ok(None),
            Err(e) => Err(Failure::Domain(e.to_string())),
        },
        LoadedModel::Panel(panel) => {
            let pooled = match panel.mode() {
                PanelMode::BlendOutputs => blend_outputs(panel, scenario),
                PanelMode::EqualWeights => equal_weight(panel, scenario),
                PanelMode::BlendMemberships => unreachable!("resolved at load"),
            };
            match pooled {
                Ok(map) => {
                    // Model declaration order, not map order.
                    let outputs: IndexMap<String, f64> = loaded
                        .outputs()
                        .iter()
                        .map(|v| (v.name().to_string(), map[v.name()]))
                        .collect();
                    let experts = if explain {
                        let models = panel.models().expect("pooled panel");
                        let mut traces = Vec::with_capacity(models.len());
                        for (profile, model) in panel.experts().iter().zip(models) {
                            let result = infer(model, scenario)
                                .map_err(|e| Failure::Domain(e.to_string()))?;
                            traces.push(ExpertTrace {
                                id: profile.id.clone(),
                                outputs: result
                                    .outputs
                                    .iter()
                                    .map(|(name, out)| (name.clone(), out.crisp))
                                    .collect(),
                            });
                        }
                        Some(traces)
                    } else {
                        None
                    };
                    Ok(Some((outputs, None, experts)))
                }
                Err(ExpertError::InferenceFailed {
                    source: EngineError::NoRuleFired { .. },
                    ..
                }) => Ok(None),
                Err(e) => Err(Failure::Domain(e.to_string())),
            }
        }
    }
}

fn cmd_infer(model: &Path, scenario: &Path, explain: bool, format: Format) -> Result<(), Failure> {
    let loaded = load_model(model, grid_override()?)?;
    let (_, scenarios) = read_scenarios(scenario)?;
    if scenarios.is_empty() {
        return Err(Failure::Domain("scenario file has no data rows".to_string()));
    }

    let output_names: Vec<String> = loaded
        .outputs()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    let mut rows: Vec<InferRecord> = Vec::with_capacity(scenarios.len());
    let mut fired = 0usize;
    for (i, sc) in scenarios.iter().enumerate() {
        let record = match infer_row(&loaded, sc, explain)? {
            Some((outputs, trace, experts)) => {
                fired += 1;
                InferRecord {
                    row: i + 1,
                    status: "ok",
                    outputs: Some(outputs),
                    trace,
                    experts,
                }
            }
            None => InferRecord {
                row: i + 1,
                status: "no_rule_fired",
                outputs: None,
                trace: None,
                experts: None,
            },
        };
        rows.push(record);
    }

    match format {
        Format::Json => {
            let mut stdout = std::io::stdout().lock();
            for record in &rows {
                writeln!(stdout, "{}", to_json(record)).map_err(|e| Failure::Io(e.to_string()))?;
            }
        }
        Format::Csv => write_infer_csv(&rows, &output_names, &loaded, explain)?,
    }

    if fired == 0 {
        return Err(Failure::Domain(format!(
            "no scenario row fired any rule ({} rows)",
            rows.len()
        )));
    }
    Ok(())
}

fn write_infer_csv(
    rows: &[InferRecord],
    output_names: &[String],
    loaded: &LoadedModel,
    explain: bool,
) -> Result<(), Failure> {
    let mut header: Vec<String> = vec!["row".to_string(), "status".to_string()];
    header.extend(output_names.iter().cloned());
    if explain {
        match loaded {
            LoadedModel::Single(model) => {
                for i in 0..model.rules().len() {
                    header.push(format!("rule:{i}"));
                }
            }
            LoadedModel::Panel(panel) => {
                for profile in panel.experts() {
                    for name in output_names {
                        header.push(format!("expert:{}:{}", profile.id, name));
                    }
                }
            }
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&header).map_err(csv_failure)?;
    for record in rows {
        let mut cells: Vec<String> = vec![record.row.to_string(), record.status.to_string()];
        match &record.outputs {
            Some(outputs) => cells.extend(output_names.iter().map(|n| fmt(outputs[n]))),
            None => cells.extend(output_names.iter().map(|_| String::new())),
        }
        if explain {
            if let Some(trace) = &record.trace {
                cells.extend(trace.iter().map(|t| fmt(t.strength)));
            }
            if let Some(experts) = &record.experts {
                for e in experts {
                    cells.extend(output_names.iter().map(|n| fmt(e.outputs[n])));
                }
            }
            while cells.len() < header.len() {
                cells.push(String::new());
            }
        }
        writer.write_record(&cells).map_err(csv_failure)?;
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(&bytes)
        .map_err(|e| Failure::Io(e.to_string()))
}

// ---- simulate ------------------------------------------------------------

#[derive(Serialize)]
struct Requested {
    percentile: f64,
    loss: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    seed: u64,
    output: String,
    summary: Summary,
    requested: Requested,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model: &Path,
    sim: &Path,
    seed: Option<u64>,
    samples: Option<usize>,
    p: f64,
    dump: Option<&Path>,
    output: Option<String>,
) -> Result<(), Failure> {
    let loaded = load_model(model, grid_override()?)?;
    let mut spec: SimulationSpec = load_simulation(sim)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(samples) = samples {
        spec.n_samples = samples;
    }
    let output = match output {
        Some(name) => name,
        None => {
            let outputs = loaded.outputs();
            if outputs.len() != 1 {
                let names: Vec<&str> = outputs.iter().map(|v| v.name()).collect();
                return Err(Failure::Domain(format!(
                    "model has {} outputs ({}); pick one with --output",
                    outputs.len(),
                    names.join(", ")
                )));
            }
            outputs[0].name().to_string()
        }
    };

    let evaluator = RiskEvaluator::from(loaded);
    let dist = evaluator
        .simulate(&spec, &output, workers())
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let loss = percentile(&dist, p).map_err(|e| Failure::Domain(e.to_string()))?;
    let report = SimulateReport {
        seed: dist.seed(),
        output,
        summary: summarize(&dist),
        requested: Requested { percentile: p, loss },
    };

    if let Some(path) = dump {
        let mut lines = String::with_capacity(dist.len() * 24);
        for &loss in dist.samples() {
            lines.push_str(&fmt(loss));
            lines.push('\n');
        }
        std::fs::write(path, lines)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    }

    print_line(&to_json(&report))
}

// ---- rank ------------------------------------------------------------

#[derive(Serialize)]
struct RankRow {
    rank: usize,
    id: String,
    name: String,
    extreme_loss: f64,
    tail_loss: Option<f64>,
    hedging_cost: Option<f64>,
    /// Key loss per unit of hedging cost; null when not rankable.
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct UnitRow {
    name: String,
    value: f64,
}

#[derive(Serialize)]
struct RollupReport {
    units: Vec<UnitRow>,
    enterprise: f64,
}

#[derive(Serialize)]
struct ExcludedRow {
    id: String,
    status: String,
}

#[derive(Serialize)]
struct RankReport {
    key: &'static str,
    percentile: f64,
    ranking: Vec<RankRow>,
    rollup: Option<RollupReport>,
    excluded: Vec<ExcludedRow>,
}

fn cmd_rank(
    portfolio: &Path,
    key: Option<KeyArg>,
    combiner: Option<CombinerArg>,
    p: f64,
    format: Format,
) -> Result<(), Failure> {
    let loaded = load_portfolio(portfolio, grid_override()?)?;
    let assessment = assess_all(&loaded.risks, p, workers());
    if assessment.exposures.is_empty() {
        let mut msg = String::from("every risk assessment failed:");
        for (id, err) in &assessment.failures {
            msg.push_str(&format!("\n{id}: {err}"));
        }
        return Err(Failure::Domain(msg));
    }

    let key = match key {
        Some(KeyArg::Extreme) => RankKey::ExtremeLoss,
        Some(KeyArg::Tail) => RankKey::TailLoss,
        // Tail when every assessed risk carries one, else extreme.
        None => {
            if assessment.exposures.iter().all(|e| e.tail_loss.is_some()) {
                RankKey::TailLoss
            } else {
                RankKey::ExtremeLoss
            }
        }
    };

    let hierarchy = match combiner {
        None => loaded.hierarchy,
        Some(arg) => {
            let new_combiner = match arg {
                CombinerArg::Sum => Combiner::Sum,
                CombinerArg::Max => Combiner::Max,
                CombinerArg::Weighted => match loaded.hierarchy.combiner() {
                    // Keep the file's weights when it already had some.
                    Combiner::WeightedSum {
                        risk_weights,
                        unit_weights,
                    } => Combiner::WeightedSum {
                        risk_weights: risk_weights.clone(),
                        unit_weights: unit_weights.clone(),
                    },
                    _ => Combiner::WeightedSum {
                        risk_weights: BTreeMap::new(),
                        unit_weights: BTreeMap::new(),
                    },
                },
            };
            Hierarchy::new(loaded.hierarchy.units().to_vec(), new_combiner)
                .map_err(|e| Failure::Domain(e.to_string()))?
        }
    };

    let ranked = rank(&assessment.exposures, key).map_err(|e| Failure::Domain(e.to_string()))?;
    let priorities = mitigation_priority(&assessment.exposures, key);
    let ratio_by_id: BTreeMap<&str, f64> = priorities
        .ranked
        .iter()
        .map(|m| (m.id.as_str(), m.ratio))
        .collect();

    let ranking: Vec<RankRow> = ranked
        .iter()
        .enumerate()
        .map(|(i, e)| RankRow {
            rank: i + 1,
            id: e.id.clone(),
            name: e.name.clone(),
            extreme_loss: e.extreme_loss,
            tail_loss: e.tail_loss,
            hedging_cost: e.hedging_cost,
            ratio: ratio_by_id.get(e.id.as_str()).copied(),
        })
        .collect();

    // A failed risk leaves its unit incomputable; report roll-ups only
    // when the whole register assessed.
    let rollup_report = if assessment.failures.is_empty() {
        let r = rollup(&hierarchy, &assessment.exposures, key)
            .map_err(|e| Failure::Domain(e.to_string()))?;
        Some(RollupReport {
            units: r
                .units
                .into_iter()
                .map(|(name, value)| UnitRow { name, value })
                .collect(),
            enterprise: r.enterprise,
        })
    } else {
        None
    };

    let excluded: Vec<ExcludedRow> = assessment
        .failures
        .iter()
        .map(|(id, err)| ExcludedRow {
            id: id.clone(),
            status: err.to_string(),
        })
        .collect();

    let report = RankReport {
        key: match key {
            RankKey::ExtremeLoss => "extreme",
            RankKey::TailLoss => "tail",
        },
        percentile: p,
        ranking,
        rollup: rollup_report,
        excluded,
    };

    match format {
        Format::Json => print_line(&to_json(&report)),
        Format::Csv => write_rank_csv(&report),
    }
}

fn write_rank_csv(report: &RankReport) -> Result<(), Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "section",
            "rank",
            "id",
            "name",
            "extreme_loss",
            "tail_loss",
            "hedging_cost",
            "ratio",
            "value",
            "status",
        ])
        .map_err(csv_failure)?;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for row in &report.ranking {
        writer
            .write_record([
                "ranking".to_string(),
                row.rank.to_string(),
                row.id.clone(),
                row.name.clone(),
                fmt(row.extreme_loss),
                opt(row.tail_loss),
                opt(row.hedging_cost),
                opt(row.ratio),
                String::new(),
                String::new(),
            ])
            .map_err(csv_failure)?;
    }
    if let Some(rollup) = &report.rollup {
        for unit in &rollup.units {
            writer
                .write_record([
                    "unit".to_string(),
                    String::new(),
                    String::new(),
                    unit.name.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    fmt(unit.value),
                    String::new(),
                ])
                .map_err(csv_failure)?;
        }
        writer
            .write_record([
                "enterprise".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt(rollup.enterprise),
                String::new(),
            ])
            .map_err(csv_failure)?;
    }
    for row in &report.excluded {
        writer
            .write_record([
                "excluded".to_string(),
                String::new(),
                row.id.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                row.status.clone(),
            ])
            .map_err(csv_failure)?;
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(&bytes)
        .map_err(|e| Failure::Io(e.to_string()))
}

// ---- fuzzmath ------------------------------------------------------------

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum OperandDoc {
    Triangle([f64; 3]),
    Trapezoid([f64; 4]),
}

fn parse_operand(which: &str, text: &str) -> Result<FuzzyNumber, Failure> {
    let doc: OperandDoc = serde_json::from_str(text)
        .map_err(|e| Failure::Domain(format!("--{which}: {e}")))?;
    let built = match doc {
        OperandDoc::Triangle([a, b, c]) => FuzzyNumber::triangle(a, b, c),
        OperandDoc::Trapezoid([a, b, c, d]) => FuzzyNumber::trapezoid(a, b, c, d),
    };
    built.map_err(|e| Failure::Domain(format!("--{which}: {e}")))
}

fn cmd_fuzzmath(op: OpArg, x: &str, y: &str, levels: usize) -> Result<(), Failure> {
    let x = parse_operand("x", x)?;
    let y = parse_operand("y", y)?;
    let op = match op {
        OpArg::Add => ArithOp::Add,
        OpArg::Sub => ArithOp::Sub,
        OpArg::Mul => ArithOp::Mul,
        OpArg::Div => ArithOp::Div,
    };
    let cuts = arith(op, &x, &y, levels).map_err(|e| Failure::Domain(e.to_string()))?;
    let mut out = String::with_capacity(cuts.len() * 64 + 16);
    out.push_str("alpha,lo,hi\n");
    for cut in cuts.iter().rev() {
        out.push_str(&fmt(cut.alpha));
        out.push(',');
        out.push_str(&fmt(cut.interval.lo()));
        out.push(',');
        out.push_str(&fmt(cut.interval.hi()));
        out.push('\n');
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(out.as_bytes())
        .map_err(|e| Failure::Io(e.to_string()))
}
