//! JSON documents for models, simulations, and portfolios, and the
//! loaders that turn them into engine objects.
//!
//! Loading re-checks every structural invariant and reports all
//! problems at once, each tagged with a location path into the
//! document (`variables[0].terms.low`, `rules[2]`, ...). A file that
//! loads cleanly is exactly a file the engine can run: there is no
//! validate-pass/run-fail gap.

use crate::engine::{
    FuzzyModel, InferenceConfig, LinguisticVariable, ModelError, Scenario, VarKind,
};
use crate::experts::{
    blend_memberships, resolve_conflicts, ConflictPolicy, ExpertPanel, ExpertProfile, PanelMode,
    PanelPayload, RuleConflict, TermOverrides,
};
use crate::membership::{MembershipFunction, Universe};
use crate::montecarlo::{Distribution, SimulationSpec};
use crate::portfolio::{BusinessUnit, Combiner, Hierarchy, RiskDefinition, RiskEvaluator};
use crate::rulelang::{parse, validate_against, Rule};
use indexmap::IndexMap;
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// One located problem in a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadDiagnostic {
    /// Path into the document, e.g. `variables[1].terms.high`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for LoadDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", format_diagnostics(.0))]
    Invalid(Vec<LoadDiagnostic>),
}

impl LoadError {
    pub fn diagnostics(&self) -> &[LoadDiagnostic] {
        match self {
            LoadError::Io { .. } => &[],
            LoadError::Invalid(d) => d,
        }
    }
}

fn format_diagnostics(diags: &[LoadDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// What a model document resolves to. Membership-blending panels are
/// merged at load time, so they come back as `Single`.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel {
    Single(FuzzyModel),
    Panel(ExpertPanel),
}

impl LoadedModel {
    pub fn inputs(&self) -> &[LinguisticVariable] {
        match self {
            LoadedModel::Single(m) => m.inputs(),
            LoadedModel::Panel(p) => p.models().expect("pooled panel")[0].inputs(),
        }
    }

    pub fn outputs(&self) -> &[LinguisticVariable] {
        match self {
            LoadedModel::Single(m) => m.outputs(),
            LoadedModel::Panel(p) => p.models().expect("pooled panel")[0].outputs(),
        }
    }
}

impl From<LoadedModel> for RiskEvaluator {
    fn from(loaded: LoadedModel) -> Self {
        match loaded {
            LoadedModel::Single(m) => RiskEvaluator::Model(m),
            LoadedModel::Panel(p) => RiskEvaluator::Panel(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPortfolio {
    pub risks: Vec<RiskDefinition>,
    /// From the document, or a synthesized single-unit hierarchy over
    /// all risks when the document has none.
    pub hierarchy: Hierarchy,
}

// ---- document shapes -------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    variables: Vec<VariableDoc>,
    rules: Vec<String>,
    #[serde(default)]
    experts: Option<ExpertsDoc>,
    #[serde(default)]
    config: Option<ConfigDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDoc {
    name: String,
    kind: KindDoc,
    universe: [f64; 2],
    terms: IndexMap<String, ShapeDoc>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Input,
    Output,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeDoc {
    shape: String,
    params: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    grid_points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpertsDoc {
    mode: ModeDoc,
    experts: Vec<ExpertDoc>,
    /// Per-expert term replacements, blend_memberships mode.
    #[serde(default)]
    overrides: Option<Vec<BTreeMap<String, BTreeMap<String, ShapeDoc>>>>,
    /// Per-expert models, blend_outputs / equal_weights modes.
    #[serde(default)]
    models: Option<Vec<ExpertModelDoc>>,
    #[serde(default)]
    conflict_policy: Option<PolicyDoc>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ModeDoc {
    BlendMemberships,
    BlendOutputs,
    EqualWeights,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PolicyDoc {
    Report,
    DropBoth,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpertDoc {
    id: String,
    #[serde(default = "one")]
    weight: f64,
    #[serde(default)]
    basis: Option<String>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpertModelDoc {
    rules: Vec<String>,
    /// Term replacements relative to the shared variable declarations.
    #[serde(default)]
    terms: Option<BTreeMap<String, BTreeMap<String, ShapeDoc>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimDoc {
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_samples")]
    samples: usize,
    distributions: BTreeMap<String, DistributionDoc>,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum DistributionDoc {
    Point { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    Triangular { lo: f64, mode: f64, hi: f64 },
    Empirical { values: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortfolioDoc {
    risks: Vec<RiskDoc>,
    #[serde(default)]
    hierarchy: Option<HierarchyDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RiskDoc {
    id: String,
    #[serde(default)]
    name: Option<String>,
    /// Inline model document; exactly one of `model` / `model_path`.
    #[serde(default)]
    model: Option<ModelDoc>,
    /// Path to a model document, relative to the portfolio file.
    #[serde(default)]
    model_path: Option<String>,
    loss_output: String,
    extreme_scenario: BTreeMap<String, f64>,
    #[serde(default)]
    simulation: Option<SimDoc>,
    #[serde(default)]
    hedging_cost: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HierarchyDoc {
    units: Vec<UnitDoc>,
    #[serde(default)]
    combiner: Option<CombinerDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitDoc {
    name: String,
    risks: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CombinerDoc {
    Sum,
    Max,
    Weighted(WeightsDoc),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsDoc {
    #[serde(default)]
    risk_weights: BTreeMap<String, f64>,
    #[serde(default)]
    unit_weights: BTreeMap<String, f64>,
}

// ---- building --------------------------------------------------------

fn at(prefix: &str, loc: &str) -> String {
    match (prefix.is_empty(), loc.is_empty()) {
        (true, true) => "model".to_string(),
        (true, false) => loc.to_string(),
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{loc}"),
    }
}

fn push(diags: &mut Vec<LoadDiagnostic>, prefix: &str, loc: &str, message: impl Into<String>) {
    diags.push(LoadDiagnostic {
        location: at(prefix, loc),
        message: message.into(),
    });
}

fn build_mf(doc: &ShapeDoc) -> Result<MembershipFunction, String> {
    let p = &doc.params;
    let arity = |n: usize| {
        if p.len() == n {
            Ok(())
        } else {
            Err(format!(
                "shape {:?} takes {} params, got {}",
                doc.shape,
                n,
                p.len()
            ))
        }
    };
    let built = match doc.shape.as_str() {
        "triangle" => {
            arity(3)?;
            MembershipFunction::triangle(p[0], p[1], p[2])
        }
        "trapezoid" => {
            arity(4)?;
            MembershipFunction::trapezoid(p[0], p[1], p[2], p[3])
        }
        "gaussian" => {
            arity(2)?;
            MembershipFunction::gaussian(p[0], p[1])
        }
        "bell" => {
            arity(3)?;
            MembershipFunction::generalized_bell(p[0], p[1], p[2])
        }
        "sigmoid" => {
            arity(2)?;
            MembershipFunction::sigmoid(p[0], p[1])
        }
        other => {
            return Err(format!(
                "unknown shape {other:?} (expected triangle, trapezoid, gaussian, bell, or sigmoid)"
            ))
        }
    };
    built.map_err(|e| e.to_string())
}

/// Splits into (inputs, outputs) preserving document order. `None`
/// when anything failed; diagnostics carry the details.
fn build_variables(
    docs: &[VariableDoc],
    prefix: &str,
    diags: &mut Vec<LoadDiagnostic>,
) -> Option<(Vec<LinguisticVariable>, Vec<LinguisticVariable>)> {
    let before = diags.len();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let universe = match Universe::new(doc.universe[0], doc.universe[1]) {
            Ok(u) => u,
            Err(e) => {
                push(diags, prefix, &format!("variables[{i}].universe"), e.to_string());
                continue;
            }
        };
        let mut terms = Vec::with_capacity(doc.terms.len());
        let mut ok = true;
        for (term, shape) in &doc.terms {
            match build_mf(shape) {
                Ok(mf) => terms.push((term.clone(), mf)),
                Err(msg) => {
                    push(diags, prefix, &format!("variables[{i}].terms.{term}"), msg);
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        let kind = match doc.kind {
            KindDoc::Input => VarKind::Input,
            KindDoc::Output => VarKind::Output,
        };
        match LinguisticVariable::new(doc.name.clone(), kind, universe, terms) {
            Ok(var) => match kind {
                VarKind::Input => inputs.push(var),
                VarKind::Output => outputs.push(var),
            },
            Err(e) => push(diags, prefix, &format!("variables[{i}]"), e.to_string()),
        }
    }
    (diags.len() == before).then_some((inputs, outputs))
}

fn build_rules(
    texts: &[String],
    loc_base: &str,
    prefix: &str,
    diags: &mut Vec<LoadDiagnostic>,
) -> Option<Vec<Rule>> {
    let before = diags.len();
    let mut rules = Vec::with_capacity(texts.len());
    for (i, text) in texts.iter().enumerate() {
        match parse(text) {
            Ok(rule) => rules.push(rule),
            Err(e) => push(diags, prefix, &format!("{loc_base}[{i}]"), e.to_string()),
        }
    }
    (diags.len() == before).then_some(rules)
}

/// Builds the model with name problems reported for every offending
/// rule, where the constructor alone would stop at the first.
fn construct_model(
    inputs: Vec<LinguisticVariable>,
    outputs: Vec<LinguisticVariable>,
    rules: Vec<Rule>,
    config: InferenceConfig,
    rules_loc: &str,
    prefix: &str,
    diags: &mut Vec<LoadDiagnostic>,
) -> Option<FuzzyModel> {
    let before = diags.len();
    for (i, rule) in rules.iter().enumerate() {
        for d in validate_against(rule, &inputs, &outputs) {
            push(diags, prefix, &format!("{rules_loc}[{i}]"), d.to_string());
        }
    }
    if diags.len() != before {
        return None;
    }
    match FuzzyModel::new(inputs, outputs, rules, config) {
        Ok(m) => Some(m),
        Err(e) => {
            push_model_error(e, rules_loc, prefix, diags);
            None
        }
    }
}

/// Maps a model-construction error onto located diagnostics; rule
/// validation failures point at the individual rule.
fn push_model_error(
    e: ModelError,
    rules_loc: &str,
    prefix: &str,
    diags: &mut Vec<LoadDiagnostic>,
) {
    match e {
        ModelError::InvalidRule { index, diagnostics } => {
            for d in diagnostics {
                push(diags, prefix, &format!("{rules_loc}[{index}]"), d.to_string());
            }
        }
        ModelError::InvalidGrid(n) => push(
            diags,
            prefix,
            "config.grid_points",
            ModelError::InvalidGrid(n).to_string(),
        ),
        other => push(diags, prefix, "", other.to_string()),
    }
}

/// Rebuilds variables with some terms replaced. Unknown names become
/// diagnostics under `loc`.
fn apply_term_overrides(
    inputs: &[LinguisticVariable],
    outputs: &[LinguisticVariable],
    replacements: &BTreeMap<String, BTreeMap<String, ShapeDoc>>,
    loc: &str,
    prefix: &str,
    diags: &mut Vec<LoadDiagnostic>,
) -> Option<(Vec<LinguisticVariable>, Vec<LinguisticVariable>)> {
    let before = diags.len();
    let mut known = BTreeSet::new();
    for var in inputs.iter().chain(outputs) {
        for (term, _) in var.terms() {
            known.insert((var.name().to_string(), term.to_string()));
        }
    }
    for (var, terms) in replacements {
        for term in terms.keys() {
            if !known.contains(&(var.clone(), term.clone())) {
                push(
                    diags,
                    prefix,
                    &format!("{loc}.{var}.{term}"),
                    "unknown variable or term".to_string(),
                );
            }
        }
    }
    let rebuild = |vars: &[LinguisticVariable], diags: &mut Vec<LoadDiagnostic>| {
        let mut out = Vec::with_capacity(vars.len());
        for var in vars {
            let vr = replacements.get(var.name());
            let mut terms = Vec::new();
            let mut ok = true;
            for (term, mf) in var.terms() {
                match vr.and_then(|m| m.get(term)) {
                    Some(shape) => match build_mf(shape) {
                        Ok(new_mf) => terms.push((term.to_string(), new_mf)),
                        Err(msg) => {
                            push(diags, prefix, &format!("{loc}.{}.{term}", var.name()), msg);
                            ok = false;
                        }
                    },
                    None => terms.push((term.to_string(), mf.clone())),
                }
            }
            if !ok {
                continue;
            }
            match LinguisticVariable::new(var.name(), var.kind(), var.universe(), terms) {
                Ok(v) => out.push(v),
                Err(e) => push(
                    diags,
                    prefix,
                    &format!("{loc}.{}", var.name()),
                    e.to_string(),
                ),
            }
        }
        out
    };
    let new_inputs = rebuild(inputs, diags);
    let new_outputs = rebuild(outputs, diags);
    (diags.len() == before).then_some((new_inputs, new_outputs))
}

fn describe_conflict(c: &RuleConflict) -> String {
    let sides = c
        .assignments
        .iter()
        .map(|a| format!("{} says {:?}", a.expert, a.term))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "conflicting rules for output {:?} under antecedent \"{}\": {}",
        c.output,
        crate::rulelang::format_condition(&c.antecedent),
        sides
    )
}

fn build_model_doc(
    doc: &ModelDoc,
    grid_override: Option<usize>,
    prefix: &str,
    diags: &mut Vec<LoadDiagnostic>,
) -> Option<LoadedModel> {
    let variables = build_variables(&doc.variables, prefix, diags);
    let base_rules = build_rules(&doc.rules, "rules", prefix, diags);

    let grid_points = grid_override
        .or(doc.config.as_ref().and_then(|c| c.grid_points))
        .unwrap_or(InferenceConfig::default().grid_points);
    let config = InferenceConfig {
        grid_points,
        ..InferenceConfig::default()
    };

    let Some(experts) = &doc.experts else {
        let (inputs, outputs) = variables?;
        let rules = base_rules?;
        return construct_model(inputs, outputs, rules, config, "rules", prefix, diags)
            .map(LoadedModel::Single);
    };

    let profiles: Vec<ExpertProfile> = experts
        .experts
        .iter()
        .map(|e| ExpertProfile {
            id: e.id.clone(),
            weight: e.weight,
            basis: e.basis.clone(),
        })
        .collect();

    match experts.mode {
        ModeDoc::BlendMemberships => {
            if experts.models.is_some() {
                push(
                    diags,
                    prefix,
                    "experts.models",
                    "not used in blend_memberships mode (use overrides)",
                );
            }
            let Some(override_docs) = &experts.overrides else {
                push(
                    diags,
                    prefix,
                    "experts.overrides",
                    "blend_memberships mode needs one overrides entry per expert",
                );
                return None;
            };
            let mut payload: Vec<TermOverrides> = Vec::with_capacity(override_docs.len());
            let mut ok = true;
            for (i, per_expert) in override_docs.iter().enumerate() {
                let mut map = TermOverrides::new();
                for (var, terms) in per_expert {
                    for (term, shape) in terms {
                        match build_mf(shape) {
                            Ok(mf) => {
                                map.insert((var.clone(), term.clone()), mf);
                            }
                            Err(msg) => {
                                push(
                                    diags,
                                    prefix,
                                    &format!("experts.overrides[{i}].{var}.{term}"),
                                    msg,
                                );
                                ok = false;
                            }
                        }
                    }
                }
                payload.push(map);
            }
            let (inputs, outputs) = variables?;
            let rules = base_rules?;
            let base = construct_model(inputs, outputs, rules, config, "rules", prefix, diags);
            if !ok {
                return None;
            }
            let panel = match ExpertPanel::new(
                profiles,
                PanelMode::BlendMemberships,
                PanelPayload::MembershipOverrides(payload),
            ) {
                Ok(p) => p,
                Err(e) => {
                    push(diags, prefix, "experts", e.to_string());
                    return None;
                }
            };
            match blend_memberships(&panel, &base?) {
                Ok(m) => Some(LoadedModel::Single(m)),
                Err(e) => {
                    push(diags, prefix, "experts", e.to_string());
                    None
                }
            }
        }
        ModeDoc::BlendOutputs | ModeDoc::EqualWeights => {
            let mode = match experts.mode {
                ModeDoc::BlendOutputs => PanelMode::BlendOutputs,
                _ => PanelMode::EqualWeights,
            };
            if experts.overrides.is_some() {
                push(
                    diags,
                    prefix,
                    "experts.overrides",
                    "not used in output-pooling modes (use models)",
                );
            }
            if !doc.rules.is_empty() {
                push(
                    diags,
                    prefix,
                    "rules",
                    "must be empty when experts.models carry per-expert rules",
                );
            }
            let Some(model_docs) = &experts.models else {
                push(
                    diags,
                    prefix,
                    "experts.models",
                    "output-pooling modes need one model entry per expert",
                );
                return None;
            };
            // Parse every expert's rules first so all syntax errors
            // surface in one pass.
            let mut parsed: Vec<Option<Vec<Rule>>> = Vec::with_capacity(model_docs.len());
            for (i, m) in model_docs.iter().enumerate() {
                parsed.push(build_rules(
                    &m.rules,
                    &format!("experts.models[{i}].rules"),
                    prefix,
                    diags,
                ));
            }
            let (inputs, outputs) = variables?;
            let mut rule_sets: Vec<(String, Vec<Rule>)> = Vec::with_capacity(model_docs.len());
            for (e, rules) in experts.experts.iter().zip(&parsed) {
                rule_sets.push((e.id.clone(), rules.clone()?));
            }
            let policy = match experts.conflict_policy {
                Some(PolicyDoc::DropBoth) => ConflictPolicy::DropBoth,
                _ => ConflictPolicy::Report,
            };
            let resolution = resolve_conflicts(&rule_sets, policy);
            if policy == ConflictPolicy::Report && !resolution.conflicts.is_empty() {
                for c in &resolution.conflicts {
                    push(diags, prefix, "experts.models", describe_conflict(c));
                }
                return None;
            }
            let mut models = Vec::with_capacity(model_docs.len());
            let mut ok = true;
            for (i, (m, (_, rules))) in
                model_docs.iter().zip(&resolution.rule_sets).enumerate()
            {
                let vars = match &m.terms {
                    Some(replacements) => apply_term_overrides(
                        &inputs,
                        &outputs,
                        replacements,
                        &format!("experts.models[{i}].terms"),
                        prefix,
                        diags,
                    ),
                    None => Some((inputs.clone(), outputs.clone())),
                };
                let Some((ins, outs)) = vars else {
                    ok = false;
                    continue;
                };
                match construct_model(
                    ins,
                    outs,
                    rules.clone(),
                    config,
                    &format!("experts.models[{i}].rules"),
                    prefix,
                    diags,
                ) {
                    Some(model) => models.push(model),
                    None => ok = false,
                }
            }
            if !ok {
                return None;
            }
            match ExpertPanel::new(profiles, mode, PanelPayload::Models(models)) {
                Ok(p) => Some(LoadedModel::Panel(p)),
                Err(e) => {
                    push(diags, prefix, "experts", e.to_string());
                    None
                }
            }
        }
    }
}

fn build_sim_doc(doc: SimDoc) -> SimulationSpec {
    let distributions = doc
        .distributions
        .into_iter()
        .map(|(variable, d)| {
            let dist = match d {
                DistributionDoc::Point { value } => Distribution::Point { value },
                DistributionDoc::Uniform { lo, hi } => Distribution::Uniform { lo, hi },
                DistributionDoc::Normal { mean, sd } => Distribution::Normal { mean, sd },
                DistributionDoc::Triangular { lo, mode, hi } => {
                    Distribution::Triangular { lo, mode, hi }
                }
                DistributionDoc::Empirical { values } => Distribution::empirical(values),
            };
            (variable, dist)
        })
        .collect();
    SimulationSpec {
        distributions,
        n_samples: doc.samples,
        seed: doc.seed,
    }
}

fn parse_doc<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, Vec<LoadDiagnostic>> {
    serde_json::from_str(text).map_err(|e| {
        vec![LoadDiagnostic {
            location: "$".to_string(),
            message: e.to_string(),
        }]
    })
}

// ---- public loaders --------------------------------------------------

/// Parses and fully validates a model document. `grid_override`
/// replaces the document's grid resolution (and the default).
pub fn parse_model(
    text: &str,
    grid_override: Option<usize>,
) -> Result<LoadedModel, Vec<LoadDiagnostic>> {
    let doc: ModelDoc = parse_doc(text)?;
    let mut diags = Vec::new();
    let loaded = build_model_doc(&doc, grid_override, "", &mut diags);
    match loaded {
        Some(m) if diags.is_empty() => Ok(m),
        _ => Err(diags),
    }
}

pub fn load_model(path: &Path, grid_override: Option<usize>) -> Result<LoadedModel, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text, grid_override).map_err(LoadError::Invalid)
}

/// Parses a simulation document (seed, sample count, per-input
/// distributions). Distribution-vs-universe checks happen when the
/// simulation runs against a concrete model.
pub fn parse_simulation(text: &str) -> Result<SimulationSpec, Vec<LoadDiagnostic>> {
    let doc: SimDoc = parse_doc(text)?;
    Ok(build_sim_doc(doc))
}

pub fn load_simulation(path: &Path) -> Result<SimulationSpec, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_simulation(&text).map_err(LoadError::Invalid)
}

/// Parses a portfolio document. `base_dir` anchors `model_path`
/// references; referenced files that cannot be read are I/O errors,
/// not diagnostics.
pub fn parse_portfolio(
    text: &str,
    base_dir: &Path,
    grid_override: Option<usize>,
) -> Result<LoadedPortfolio, LoadError> {
    let doc: PortfolioDoc = parse_doc(text).map_err(LoadError::Invalid)?;
    let mut diags = Vec::new();
    if doc.risks.is_empty() {
        push(&mut diags, "", "risks", "portfolio has no risks");
    }
    let mut risks: Vec<RiskDefinition> = Vec::with_capacity(doc.risks.len());
    let mut seen = BTreeSet::new();
    for (i, rd) in doc.risks.into_iter().enumerate() {
        let prefix = format!("risks[{i}]");
        if !seen.insert(rd.id.clone()) {
            push(&mut diags, &prefix, "id", format!("duplicate risk id {:?}", rd.id));
            continue;
        }
        let loaded = match (&rd.model, &rd.model_path) {
            (Some(model), None) => {
                build_model_doc(model, grid_override, &at(&prefix, "model"), &mut diags)
            }
            (None, Some(rel)) => {
                let full = base_dir.join(rel);
                let text = std::fs::read_to_string(&full).map_err(|source| LoadError::Io {
                    path: full.clone(),
                    source,
                })?;
                match parse_doc::<ModelDoc>(&text) {
                    Ok(model) => build_model_doc(&model, grid_override, rel, &mut diags),
                    Err(mut e) => {
                        for d in &mut e {
                            d.location = format!("{rel}: {}", d.location);
                        }
                        diags.extend(e);
                        None
                    }
                }
            }
            _ => {
                push(
                    &mut diags,
                    &prefix,
                    "",
                    "exactly one of \"model\" and \"model_path\" is required",
                );
                None
            }
        };
        let Some(loaded) = loaded else { continue };
        let name = rd.name.clone().unwrap_or_else(|| rd.id.clone());
        match RiskDefinition::new(
            rd.id,
            name,
            loaded.into(),
            rd.loss_output,
            Scenario::new(rd.extreme_scenario),
            rd.simulation.map(build_sim_doc),
            rd.hedging_cost,
        ) {
            Ok(risk) => risks.push(risk),
            Err(e) => push(&mut diags, &prefix, "", e.to_string()),
        }
    }

    let hierarchy = match doc.hierarchy {
        Some(h) => {
            let known: BTreeSet<&str> = risks.iter().map(|r| r.id.as_str()).collect();
            // Report unknown references only once the register itself
            // parsed; otherwise every reference would double-report.
            if diags.is_empty() {
                for (i, unit) in h.units.iter().enumerate() {
                    for id in &unit.risks {
                        if !known.contains(id.as_str()) {
                            push(
                                &mut diags,
                                "",
                                &format!("hierarchy.units[{i}]"),
                                format!("unknown risk id {id:?}"),
                            );
                        }
                    }
                }
            }
            let units = h
                .units
                .into_iter()
                .map(|u| BusinessUnit {
                    name: u.name,
                    risks: u.risks,
                })
                .collect();
            let combiner = match h.combiner {
                None | Some(CombinerDoc::Sum) => Combiner::Sum,
                Some(CombinerDoc::Max) => Combiner::Max,
                Some(CombinerDoc::Weighted(w)) => Combiner::WeightedSum {
                    risk_weights: w.risk_weights,
                    unit_weights: w.unit_weights,
                },
            };
            match Hierarchy::new(units, combiner) {
                Ok(h) => Some(h),
                Err(e) => {
                    push(&mut diags, "", "hierarchy", e.to_string());
                    None
                }
            }
        }
        None => {
            let all = risks.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
            if all.is_empty() {
                None
            } else {
                Some(
                    Hierarchy::new(
                        vec![BusinessUnit {
                            name: "portfolio".to_string(),
                            risks: all,
                        }],
                        Combiner::Sum,
                    )
                    .expect("register ids are unique and non-empty"),
                )
            }
        }
    };

    match hierarchy {
        Some(hierarchy) if diags.is_empty() => Ok(LoadedPortfolio { risks, hierarchy }),
        _ => Err(LoadError::Invalid(diags)),
    }
}

pub fn load_portfolio(
    path: &Path,
    grid_override: Option<usize>,
) -> Result<LoadedPortfolio, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_portfolio(&text, base_dir, grid_override)
}
