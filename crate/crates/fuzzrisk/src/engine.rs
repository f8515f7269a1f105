//! Linguistic variables, fuzzy models, and Mamdani inference.
//!
//! Inference runs in five steps, each exposed as a public operation so
//! a caller can reproduce [`infer`] by composing them:
//!
//! 1. [`fuzzify`] — membership degrees for every (input, term) pair;
//! 2. [`activate`] — rule strength from the antecedent via min/max/1-x;
//! 3. [`implicate`] — clip the consequent term at the rule strength;
//! 4. [`aggregate`] — pointwise max of the clipped sets per output;
//! 5. [`defuzzify_centroid`] — centroid of the aggregated set.
//!
//! Everything is deterministic: variables, terms, and rules keep their
//! declaration order, and no step consults ambient state.

use crate::logic::{fuzzy_and, fuzzy_not, fuzzy_or, Degree};
use crate::membership::{
    sample, support, MembershipError, MembershipFunction, Sampled, Universe,
};
use crate::rulelang::{self, Condition, Rule};
use indexmap::IndexMap;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Membership(#[from] MembershipError),
    #[error("{0:?} is not a legal name (identifier, not a rule keyword)")]
    BadName(String),
    #[error("duplicate variable {0:?}")]
    DuplicateVariable(String),
    #[error("variable {variable:?} declares term {term:?} twice")]
    DuplicateTerm { variable: String, term: String },
    #[error("variable {0:?} declares no terms")]
    NoTerms(String),
    #[error("term {term:?} of {variable:?} is never active on its universe")]
    TermNeverActive { variable: String, term: String },
    #[error("variable {name:?} declared as {expected:?} in the wrong position")]
    WrongKind { name: String, expected: VarKind },
    #[error("model declares no input variables")]
    NoInputs,
    #[error("model declares no output variables")]
    NoOutputs,
    #[error("model declares no rules")]
    NoRules,
    #[error("no rule assigns output {0:?}")]
    OutputNeverAssigned(String),
    #[error("grid_points must be odd and at least 11, got {0}")]
    InvalidGrid(usize),
    #[error("rule {index}: {}", join_diagnostics(.diagnostics))]
    InvalidRule {
        /// Zero-based index into the rule list.
        index: usize,
        diagnostics: Vec<rulelang::Diagnostic>,
    },
}

fn join_diagnostics(diags: &[rulelang::Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Membership(#[from] MembershipError),
    #[error("scenario names unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("scenario is missing input {0:?}")]
    MissingInput(String),
    #[error("scenario value for {variable:?} must be finite, got {value}")]
    NonFiniteValue { variable: String, value: f64 },
    #[error("{value} for {variable:?} lies outside its universe [{lo}, {hi}]")]
    OutOfUniverse {
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("no fuzzified degree for {variable:?} IS {term:?}")]
    UnknownAtom { variable: String, term: String },
    #[error("aggregation needs at least one clipped set")]
    NothingToAggregate,
    #[error("aggregation requires all sets to share one grid")]
    GridMismatch,
    #[error("defuzzification of an identically zero set")]
    ZeroArea,
    #[error("no rule fired for output {output:?}")]
    NoRuleFired { output: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Input,
    Output,
}

/// A named variable with a bounded universe and a set of linguistic
/// terms, each with a membership function that is somewhere active.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    name: String,
    kind: VarKind,
    universe: Universe,
    terms: IndexMap<String, MembershipFunction>,
}

/// Names must be parseable back out of rule text.
fn check_name(name: &str) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    let tail_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    let keyword = ["if", "then", "is", "and", "or", "not", "with"]
        .iter()
        .any(|k| name.eq_ignore_ascii_case(k));
    if head_ok && tail_ok && !keyword {
        Ok(())
    } else {
        Err(ModelError::BadName(name.to_string()))
    }
}

impl LinguisticVariable {
    pub fn new(
        name: impl Into<String>,
        kind: VarKind,
        universe: Universe,
        terms: impl IntoIterator<Item = (String, MembershipFunction)>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        check_name(&name)?;
        let mut map = IndexMap::new();
        for (term, mf) in terms {
            check_name(&term)?;
            mf.validate()?;
            // A term whose support misses the universe can never fire.
            support(&mf, &universe).map_err(|err| match err {
                MembershipError::EmptySupport { .. } => ModelError::TermNeverActive {
                    variable: name.clone(),
                    term: term.clone(),
                },
                other => ModelError::Membership(other),
            })?;
            if map.insert(term.clone(), mf).is_some() {
                return Err(ModelError::DuplicateTerm {
                    variable: name,
                    term,
                });
            }
        }
        if map.is_empty() {
            return Err(ModelError::NoTerms(name));
        }
        Ok(LinguisticVariable {
            name,
            kind,
            universe,
            terms: map,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> VarKind {
        self.kind
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn term(&self, name: &str) -> Option<&MembershipFunction> {
        self.terms.get(name)
    }

    /// Terms in declaration order.
    pub fn terms(&self) -> impl Iterator<Item = (&str, &MembershipFunction)> {
        self.terms.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TNorm {
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SNorm {
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Implication {
    /// Clip the consequent at the rule strength.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Defuzzifier {
    Centroid,
}

/// Operator selection and output-grid resolution for one model.
///
/// `grid_points` must be odd and at least 11 so that the universe
/// midpoint falls on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    pub grid_points: usize,
    pub and_op: TNorm,
    pub or_op: SNorm,
    pub implication: Implication,
    pub aggregation: Aggregation,
    pub defuzzifier: Defuzzifier,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            grid_points: 1001,
            and_op: TNorm::Min,
            or_op: SNorm::Max,
            implication: Implication::Min,
            aggregation: Aggregation::Max,
            defuzzifier: Defuzzifier::Centroid,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.grid_points < 11 || self.grid_points % 2 == 0 {
            return Err(ModelError::InvalidGrid(self.grid_points));
        }
        Ok(())
    }
}

/// A complete Mamdani model: inputs, outputs, rules, and configuration.
/// Construction validates everything; an existing model is always
/// runnable on any in-universe scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyModel {
    inputs: Vec<LinguisticVariable>,
    outputs: Vec<LinguisticVariable>,
    rules: Vec<Rule>,
    config: InferenceConfig,
}

impl FuzzyModel {
    pub fn new(
        inputs: Vec<LinguisticVariable>,
        outputs: Vec<LinguisticVariable>,
        rules: Vec<Rule>,
        config: InferenceConfig,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        if inputs.is_empty() {
            return Err(ModelError::NoInputs);
        }
        if outputs.is_empty() {
            return Err(ModelError::NoOutputs);
        }
        if rules.is_empty() {
            return Err(ModelError::NoRules);
        }
        for var in &inputs {
            if var.kind() != VarKind::Input {
                return Err(ModelError::WrongKind {
                    name: var.name().to_string(),
                    expected: VarKind::Input,
                });
            }
        }
        for var in &outputs {
            if var.kind() != VarKind::Output {
                return Err(ModelError::WrongKind {
                    name: var.name().to_string(),
                    expected: VarKind::Output,
                });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for var in inputs.iter().chain(&outputs) {
            if !seen.insert(var.name().to_string()) {
                return Err(ModelError::DuplicateVariable(var.name().to_string()));
            }
        }
        let model = FuzzyModel {
            inputs,
            outputs,
            rules,
            config,
        };
        for (index, rule) in model.rules.iter().enumerate() {
            let diagnostics = rulelang::validate(rule, &model);
            if !diagnostics.is_empty() {
                return Err(ModelError::InvalidRule { index, diagnostics });
            }
        }
        for var in &model.outputs {
            if !model
                .rules
                .iter()
                .any(|r| r.consequent.variable == var.name())
            {
                return Err(ModelError::OutputNeverAssigned(var.name().to_string()));
            }
        }
        Ok(model)
    }

    pub fn inputs(&self) -> &[LinguisticVariable] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[LinguisticVariable] {
        &self.outputs
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn config(&self) -> &InferenceConfig {
        &self.config
    }

    pub fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .find(|v| v.name() == name)
    }

    /// Checks that `scenario` assigns exactly the declared inputs,
    /// each finite and inside its universe.
    pub fn check_scenario(&self, scenario: &Scenario) -> Result<(), EngineError> {
        for name in scenario.values.keys() {
            if !self.inputs.iter().any(|v| v.name() == name) {
                return Err(EngineError::UnknownVariable(name.clone()));
            }
        }
        for var in &self.inputs {
            let value = scenario
                .get(var.name())
                .ok_or_else(|| EngineError::MissingInput(var.name().to_string()))?;
            if !value.is_finite() {
                return Err(EngineError::NonFiniteValue {
                    variable: var.name().to_string(),
                    value,
                });
            }
            if !var.universe().contains(value) {
                return Err(EngineError::OutOfUniverse {
                    variable: var.name().to_string(),
                    value,
                    lo: var.universe().lo(),
                    hi: var.universe().hi(),
                });
            }
        }
        Ok(())
    }
}

/// Crisp input assignment: variable name to value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scenario {
    values: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn new(values: impl IntoIterator<Item = (String, f64)>) -> Self {
        Scenario {
            values: values.into_iter().collect(),
        }
    }

    pub fn get(&self, variable: &str) -> Option<f64> {
        self.values.get(variable).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Membership degrees for every (input variable, term) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Fuzzified {
    degrees: BTreeMap<(String, String), Degree>,
}

impl Fuzzified {
    pub fn degree(&self, variable: &str, term: &str) -> Option<Degree> {
        self.degrees
            .get(&(variable.to_string(), term.to_string()))
            .copied()
    }
}

/// Step 1: membership degrees of the scenario under every input term.
pub fn fuzzify(model: &FuzzyModel, scenario: &Scenario) -> Result<Fuzzified, EngineError> {
    model.check_scenario(scenario)?;
    let mut degrees = BTreeMap::new();
    for var in model.inputs() {
        let x = scenario.get(var.name()).expect("checked above");
        for (term, mf) in var.terms() {
            let mu = mf.evaluate(x)?;
            degrees.insert(
                (var.name().to_string(), term.to_string()),
                Degree::new(mu).expect("membership degrees lie in [0, 1]"),
            );
        }
    }
    Ok(Fuzzified { degrees })
}

fn eval_condition(cond: &Condition, fuzz: &Fuzzified) -> Result<Degree, EngineError> {
    match cond {
        Condition::Atom { variable, term, .. } => {
            fuzz.degree(variable, term)
                .ok_or_else(|| EngineError::UnknownAtom {
                    variable: variable.clone(),
                    term: term.clone(),
                })
        }
        Condition::And { left, right, .. } => Ok(fuzzy_and(
            eval_condition(left, fuzz)?,
            eval_condition(right, fuzz)?,
        )),
        Condition::Or { left, right, .. } => Ok(fuzzy_or(
            eval_condition(left, fuzz)?,
            eval_condition(right, fuzz)?,
        )),
        Condition::Not { inner, .. } => Ok(fuzzy_not(eval_condition(inner, fuzz)?)),
    }
}

/// Step 2: rule strength — the antecedent evaluated over the fuzzified
/// degrees, scaled by the rule weight.
pub fn activate(rule: &Rule, fuzz: &Fuzzified) -> Result<Degree, EngineError> {
    Ok(eval_condition(&rule.antecedent, fuzz)?.scaled(rule.weight))
}

/// Step 3: the consequent term clipped at the rule strength, sampled
/// on an even grid over the output universe.
pub fn implicate(
    strength: Degree,
    mf: &MembershipFunction,
    universe: &Universe,
    points: usize,
) -> Result<Sampled, EngineError> {
    let sampled = sample(mf, universe, points)?;
    Ok(sampled.map(|_, mu| mu.min(strength.value())))
}

/// Step 4: pointwise max over clipped sets sharing one grid.
pub fn aggregate(sets: &[Sampled]) -> Result<Sampled, EngineError> {
    let (first, rest) = sets.split_first().ok_or(EngineError::NothingToAggregate)?;
    let mut merged = first.points().to_vec();
    for s in rest {
        let pts = s.points();
        if pts.len() != merged.len() || pts.iter().zip(&merged).any(|(a, b)| a.0 != b.0) {
            return Err(EngineError::GridMismatch);
        }
        for (m, &(_, y)) in merged.iter_mut().zip(pts) {
            m.1 = m.1.max(y);
        }
    }
    Ok(Sampled::new(first.universe(), merged).expect("merged set keeps the validated grid"))
}

/// Step 5: centroid by the trapezoidal rule over the sampled grid.
/// Errors on an identically zero set (no rule gave the output mass).
pub fn defuzzify_centroid(aggregated: &Sampled) -> Result<f64, EngineError> {
    let pts = aggregated.points();
    let mut num = 0.0;
    let mut den = 0.0;
    for pair in pts.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        let dx = x1 - x0;
        num += 0.5 * (y0 * x0 + y1 * x1) * dx;
        den += 0.5 * (y0 + y1) * dx;
    }
    if den <= 1e-12 {
        return Err(EngineError::ZeroArea);
    }
    let centroid = num / den;
    // The centroid is a weighted mean of grid points; clamping absorbs
    // last-bit rounding at the universe edges.
    Ok(centroid.clamp(pts[0].0, pts[pts.len() - 1].0))
}

/// Result of one inference run.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    /// Rule activation strengths, indexed like `model.rules()`.
    pub activations: Vec<Degree>,
    /// Per output (declaration order): crisp value and aggregated set.
    pub outputs: IndexMap<String, OutputResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputResult {
    pub crisp: f64,
    pub aggregated: Sampled,
}

impl InferenceResult {
    pub fn crisp(&self, output: &str) -> Option<f64> {
        self.outputs.get(output).map(|o| o.crisp)
    }
}

/// Full pipeline: fuzzify, activate every rule, implicate, aggregate
/// per output, defuzzify. Equivalent to composing the step functions.
pub fn infer(model: &FuzzyModel, scenario: &Scenario) -> Result<InferenceResult, EngineError> {
    let fuzz = fuzzify(model, scenario)?;
    let mut activations = Vec::with_capacity(model.rules().len());
    for rule in model.rules() {
        activations.push(activate(rule, &fuzz)?);
    }
    let points = model.config().grid_points;
    let mut outputs = IndexMap::new();
    for var in model.outputs() {
        let mut clipped = Vec::new();
        for (rule, &strength) in model.rules().iter().zip(&activations) {
            if rule.consequent.variable != var.name() {
                continue;
            }
            let mf = var
                .term(&rule.consequent.term)
                .expect("rules validated at model construction");
            clipped.push(implicate(strength, mf, &var.universe(), points)?);
        }
        let aggregated = match clipped.is_empty() {
            // No rule mentions this output at all: same failure as all
            // strengths being zero.
            true => {
                return Err(EngineError::NoRuleFired {
                    output: var.name().to_string(),
                })
            }
            false => aggregate(&clipped)?,
        };
        let crisp = defuzzify_centroid(&aggregated).map_err(|err| match err {
            EngineError::ZeroArea => EngineError::NoRuleFired {
                output: var.name().to_string(),
            },
            other => other,
        })?;
        outputs.insert(
            var.name().to_string(),
            OutputResult { crisp, aggregated },
        );
    }
    Ok(InferenceResult {
        activations,
        outputs,
    })
}
