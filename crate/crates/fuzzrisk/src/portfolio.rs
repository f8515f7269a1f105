//! Risk registers: per-risk exposure assessment, ranking, hierarchy
//! roll-ups, and mitigation priority.
//!
//! A risk is scored two ways: the crisp loss inferred for a fixed
//! "extreme" scenario, and optionally a tail percentile (1-in-N-year
//! loss) of a simulated loss distribution. Ranking sorts descending by
//! the chosen key with ascending-id tie-breaks, so the order is total
//! and deterministic.

use crate::engine::{infer, EngineError, FuzzyModel, LinguisticVariable, Scenario};
use crate::experts::{blend_outputs, equal_weight, ExpertError, ExpertPanel, PanelMode};
use crate::montecarlo::{
    percentile, simulate_scenarios, LossDistribution, SampleEval, SimulationError, SimulationSpec,
};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("risk {id:?}: {reason}")]
    BadRisk { id: String, reason: String },
    #[error("risk {id:?} has no output named {output:?}")]
    UnknownLossOutput { id: String, output: String },
    #[error("risk {id:?}: extreme scenario invalid: {source}")]
    BadScenario {
        id: String,
        #[source]
        source: EngineError,
    },
    #[error("risk {id:?}: evaluation failed: {source}")]
    EvaluationFailed {
        id: String,
        #[source]
        source: ExpertError,
    },
    #[error("risk {id:?}: inference failed: {source}")]
    InferenceFailed {
        id: String,
        #[source]
        source: EngineError,
    },
    #[error("risk {id:?}: simulation failed: {source}")]
    SimulationFailed {
        id: String,
        #[source]
        source: SimulationError,
    },
    #[error("risk {id:?} has no tail loss; rank by extreme loss or add a simulation")]
    MissingTailLoss { id: String },
    #[error("risk id {0:?} appears more than once")]
    DuplicateRisk(String),
    #[error("hierarchy references unknown risk {0:?}")]
    UnknownRisk(String),
    #[error("no exposure provided for risk {0:?}")]
    MissingExposure(String),
    #[error("hierarchy has no business units")]
    NoUnits,
    #[error("business unit {0:?} lists no risks")]
    EmptyUnit(String),
    #[error("duplicate business unit {0:?}")]
    DuplicateUnit(String),
    #[error("weight for {name:?} must be finite and >= 0, got {weight}")]
    BadWeight { name: String, weight: f64 },
    #[error("weights in unit {0:?} are all zero")]
    AllZeroUnitWeights(String),
    #[error("unit weights are all zero")]
    AllZeroUnits,
    #[error("panel for risk {0:?} must pool outputs (blend memberships into a model first)")]
    UnsupportedPanel(String),
}

/// What produces crisp losses for a risk: a single model, or a panel
/// of expert models pooled per scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskEvaluator {
    Model(FuzzyModel),
    Panel(ExpertPanel),
}

impl RiskEvaluator {
    fn inputs(&self) -> &[LinguisticVariable] {
        match self {
            RiskEvaluator::Model(m) => m.inputs(),
            RiskEvaluator::Panel(p) => p.models().expect("validated panel")[0].inputs(),
        }
    }

    fn has_output(&self, name: &str) -> bool {
        let outputs = match self {
            RiskEvaluator::Model(m) => m.outputs(),
            RiskEvaluator::Panel(p) => p.models().expect("validated panel")[0].outputs(),
        };
        outputs.iter().any(|v| v.name() == name)
    }

    fn check_scenario(&self, scenario: &Scenario) -> Result<(), EngineError> {
        match self {
            RiskEvaluator::Model(m) => m.check_scenario(scenario),
            RiskEvaluator::Panel(p) => {
                p.models().expect("validated panel")[0].check_scenario(scenario)
            }
        }
    }

    /// Crisp outputs for one scenario.
    pub fn evaluate(&self, scenario: &Scenario) -> Result<BTreeMap<String, f64>, PortfolioError> {
        match self {
            RiskEvaluator::Model(m) => {
                let result = infer(m, scenario).map_err(|source| PortfolioError::InferenceFailed {
                    id: String::new(),
                    source,
                })?;
                Ok(result
                    .outputs
                    .iter()
                    .map(|(k, v)| (k.clone(), v.crisp))
                    .collect())
            }
            RiskEvaluator::Panel(p) => {
                let pooled = match p.mode() {
                    PanelMode::BlendOutputs => blend_outputs(p, scenario),
                    PanelMode::EqualWeights => equal_weight(p, scenario),
                    PanelMode::BlendMemberships => {
                        return Err(PortfolioError::UnsupportedPanel(String::new()))
                    }
                };
                pooled.map_err(|source| PortfolioError::EvaluationFailed {
                    id: String::new(),
                    source,
                })
            }
        }
    }

    /// Loss distribution for `output` under `spec`; panels pool expert
    /// outputs per sample.
    pub fn simulate(
        &self,
        spec: &SimulationSpec,
        output: &str,
        workers: usize,
    ) -> Result<LossDistribution, SimulationError> {
        match self {
            RiskEvaluator::Model(m) => {
                crate::montecarlo::simulate_with_workers(m, spec, output, workers)
            }
            RiskEvaluator::Panel(p) => {
                let eval = |scenario: &Scenario| -> Result<SampleEval, SimulationError> {
                    let pooled = match p.mode() {
                        PanelMode::BlendOutputs => blend_outputs(p, scenario),
                        PanelMode::EqualWeights => equal_weight(p, scenario),
                        PanelMode::BlendMemberships => unreachable!("rejected at construction"),
                    };
                    match pooled {
                        Ok(outputs) => Ok(SampleEval::Loss(outputs[output])),
                        // One expert with no firing rule fails the
                        // sample, mirroring the single-model case.
                        Err(ExpertError::InferenceFailed {
                            source: EngineError::NoRuleFired { .. },
                            ..
                        }) => Ok(SampleEval::Failed),
                        Err(other) => Err(SimulationError::Evaluation(other.to_string())),
                    }
                };
                simulate_scenarios(self.inputs(), spec, workers, eval)
            }
        }
    }
}

/// One register entry: identity, how to evaluate it, which output is
/// the loss, the extreme scenario, and optional simulation/hedging.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskDefinition {
    pub id: String,
    pub name: String,
    pub evaluator: RiskEvaluator,
    pub loss_output: String,
    pub extreme_scenario: Scenario,
    pub simulation: Option<SimulationSpec>,
    /// Annual cost of hedging this risk; crisp by design.
    pub hedging_cost: Option<f64>,
}

impl RiskDefinition {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        evaluator: RiskEvaluator,
        loss_output: impl Into<String>,
        extreme_scenario: Scenario,
        simulation: Option<SimulationSpec>,
        hedging_cost: Option<f64>,
    ) -> Result<Self, PortfolioError> {
        let id = id.into();
        let loss_output = loss_output.into();
        if id.is_empty() {
            return Err(PortfolioError::BadRisk {
                id,
                reason: "empty id".to_string(),
            });
        }
        if let RiskEvaluator::Panel(p) = &evaluator {
            if p.mode() == PanelMode::BlendMemberships || p.models().is_none() {
                return Err(PortfolioError::UnsupportedPanel(id));
            }
        }
        if !evaluator.has_output(&loss_output) {
            return Err(PortfolioError::UnknownLossOutput {
                id,
                output: loss_output,
            });
        }
        evaluator
            .check_scenario(&extreme_scenario)
            .map_err(|source| PortfolioError::BadScenario {
                id: id.clone(),
                source,
            })?;
        if let Some(cost) = hedging_cost {
            if !(cost.is_finite() && cost >= 0.0) {
                return Err(PortfolioError::BadRisk {
                    id,
                    reason: format!("hedging cost must be finite and >= 0, got {cost}"),
                });
            }
        }
        Ok(RiskDefinition {
            id,
            name: name.into(),
            evaluator,
            loss_output,
            extreme_scenario,
            simulation,
            hedging_cost,
        })
    }
}

/// Assessment outcome for one risk.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskExposure {
    pub id: String,
    pub name: String,
    /// Crisp loss for the extreme scenario.
    pub extreme_loss: f64,
    /// Tail percentile of the simulated losses, when simulated.
    pub tail_loss: Option<f64>,
    /// The percentile behind `tail_loss`.
    pub tail_percentile: Option<f64>,
    pub hedging_cost: Option<f64>,
}

// Evaluator errors are produced without knowing the risk id; stamp it in.
fn stamp_id(id: &str, e: PortfolioError) -> PortfolioError {
    match e {
        PortfolioError::InferenceFailed { source, .. } => PortfolioError::InferenceFailed {
            id: id.to_string(),
            source,
        },
        PortfolioError::EvaluationFailed { source, .. } => PortfolioError::EvaluationFailed {
            id: id.to_string(),
            source,
        },
        PortfolioError::UnsupportedPanel(_) => PortfolioError::UnsupportedPanel(id.to_string()),
        other => other,
    }
}

/// Assesses one risk: extreme-scenario loss, plus the tail percentile
/// `p` when the risk carries a simulation spec.
pub fn assess(risk: &RiskDefinition, p: f64) -> Result<RiskExposure, PortfolioError> {
    assess_with_workers(risk, p, 1)
}

pub fn assess_with_workers(
    risk: &RiskDefinition,
    p: f64,
    workers: usize,
) -> Result<RiskExposure, PortfolioError> {
    let outputs = risk
        .evaluator
        .evaluate(&risk.extreme_scenario)
        .map_err(|e| stamp_id(&risk.id, e))?;
    let extreme_loss = outputs[&risk.loss_output];
    let (tail_loss, tail_percentile) = match &risk.simulation {
        Some(spec) => {
            let dist = risk
                .evaluator
                .simulate(spec, &risk.loss_output, workers)
                .map_err(|source| PortfolioError::SimulationFailed {
                    id: risk.id.clone(),
                    source,
                })?;
            let tail =
                percentile(&dist, p).map_err(|source| PortfolioError::SimulationFailed {
                    id: risk.id.clone(),
                    source,
                })?;
            (Some(tail), Some(p))
        }
        None => (None, None),
    };
    Ok(RiskExposure {
        id: risk.id.clone(),
        name: risk.name.clone(),
        extreme_loss,
        tail_loss,
        tail_percentile,
        hedging_cost: risk.hedging_cost,
    })
}

/// Which number orders the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKey {
    ExtremeLoss,
    TailLoss,
}

impl RankKey {
    fn value(&self, exposure: &RiskExposure) -> Option<f64> {
        match self {
            RankKey::ExtremeLoss => Some(exposure.extreme_loss),
            RankKey::TailLoss => exposure.tail_loss,
        }
    }
}

/// Sorts exposures descending by the key, ascending id on ties. Fails
/// if any exposure lacks the key (tail loss without a simulation).
pub fn rank(
    exposures: &[RiskExposure],
    key: RankKey,
) -> Result<Vec<RiskExposure>, PortfolioError> {
    let mut ranked = exposures.to_vec();
    for e in &ranked {
        if key.value(e).is_none() {
            return Err(PortfolioError::MissingTailLoss { id: e.id.clone() });
        }
    }
    ranked.sort_by(|a, b| {
        let (va, vb) = (key.value(a).unwrap(), key.value(b).unwrap());
        vb.total_cmp(&va).then_with(|| a.id.cmp(&b.id))
    });
    Ok(ranked)
}

/// A business unit groups risks by id.
#[derive(Debug, Clone, PartialEq)]
pub struct BusinessUnit {
    pub name: String,
    pub risks: Vec<String>,
}

/// How member values combine into a unit value (and unit values into
/// the enterprise value).
#[derive(Debug, Clone, PartialEq)]
pub enum Combiner {
    Sum,
    Max,
    /// Weighted mean; weights default to 1 where not listed.
    WeightedSum {
        risk_weights: BTreeMap<String, f64>,
        unit_weights: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    units: Vec<BusinessUnit>,
    combiner: Combiner,
}

impl Hierarchy {
    pub fn new(units: Vec<BusinessUnit>, combiner: Combiner) -> Result<Self, PortfolioError> {
        if units.is_empty() {
            return Err(PortfolioError::NoUnits);
        }
        let mut unit_names = BTreeSet::new();
        let mut risk_ids = BTreeSet::new();
        for unit in &units {
            if unit.name.is_empty() || !unit_names.insert(unit.name.clone()) {
                return Err(PortfolioError::DuplicateUnit(unit.name.clone()));
            }
            if unit.risks.is_empty() {
                return Err(PortfolioError::EmptyUnit(unit.name.clone()));
            }
            for id in &unit.risks {
                if !risk_ids.insert(id.clone()) {
                    return Err(PortfolioError::DuplicateRisk(id.clone()));
                }
            }
        }
        if let Combiner::WeightedSum {
            risk_weights,
            unit_weights,
        } = &combiner
        {
            for (name, &w) in risk_weights.iter().chain(unit_weights) {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(PortfolioError::BadWeight {
                        name: name.clone(),
                        weight: w,
                    });
                }
            }
            for name in risk_weights.keys() {
                if !risk_ids.contains(name) {
                    return Err(PortfolioError::UnknownRisk(name.clone()));
                }
            }
            for name in unit_weights.keys() {
                if !unit_names.contains(name) {
                    return Err(PortfolioError::DuplicateUnit(name.clone()));
                }
            }
            let weight_of = |w: &BTreeMap<String, f64>, name: &str| -> f64 {
                w.get(name).copied().unwrap_or(1.0)
            };
            for unit in &units {
                if unit
                    .risks
                    .iter()
                    .all(|id| weight_of(risk_weights, id) == 0.0)
                {
                    return Err(PortfolioError::AllZeroUnitWeights(unit.name.clone()));
                }
            }
            if units
                .iter()
                .all(|u| weight_of(unit_weights, &u.name) == 0.0)
            {
                return Err(PortfolioError::AllZeroUnits);
            }
        }
        Ok(Hierarchy { units, combiner })
    }

    pub fn units(&self) -> &[BusinessUnit] {
        &self.units
    }

    pub fn combiner(&self) -> &Combiner {
        &self.combiner
    }

    /// Every risk id in declaration order.
    pub fn risk_ids(&self) -> Vec<&str> {
        self.units
            .iter()
            .flat_map(|u| u.risks.iter().map(String::as_str))
            .collect()
    }
}

/// Per-unit and enterprise-level combined exposure.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollup {
    /// `(unit name, combined value)` in declaration order.
    pub units: Vec<(String, f64)>,
    pub enterprise: f64,
}

fn combine(
    values: &[(String, f64)],
    weights: Option<&BTreeMap<String, f64>>,
    combiner_is_sum: bool,
    owner: &str,
) -> Result<f64, PortfolioError> {
    match weights {
        None => {
            if combiner_is_sum {
                Ok(values.iter().map(|(_, v)| v).sum())
            } else {
                Ok(values.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max))
            }
        }
        Some(w) => {
            let mut num = 0.0;
            let mut den = 0.0;
            for (name, v) in values {
                let weight = w.get(name).copied().unwrap_or(1.0);
                num += weight * v;
                den += weight;
            }
            if den <= 0.0 {
                return Err(PortfolioError::AllZeroUnitWeights(owner.to_string()));
            }
            Ok(num / den)
        }
    }
}

/// Combines exposures up the hierarchy: members to unit, units to
/// enterprise, with the same combiner at both levels.
pub fn rollup(
    hierarchy: &Hierarchy,
    exposures: &[RiskExposure],
    key: RankKey,
) -> Result<Rollup, PortfolioError> {
    let by_id: BTreeMap<&str, &RiskExposure> =
        exposures.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut unit_values = Vec::with_capacity(hierarchy.units.len());
    for unit in &hierarchy.units {
        let mut members = Vec::with_capacity(unit.risks.len());
        for id in &unit.risks {
            let exposure = by_id
                .get(id.as_str())
                .ok_or_else(|| PortfolioError::MissingExposure(id.clone()))?;
            let value = key
                .value(exposure)
                .ok_or_else(|| PortfolioError::MissingTailLoss { id: id.clone() })?;
            members.push((id.clone(), value));
        }
        let value = match &hierarchy.combiner {
            Combiner::Sum => combine(&members, None, true, &unit.name)?,
            Combiner::Max => combine(&members, None, false, &unit.name)?,
            Combiner::WeightedSum { risk_weights, .. } => {
                combine(&members, Some(risk_weights), false, &unit.name)?
            }
        };
        unit_values.push((unit.name.clone(), value));
    }
    let enterprise = match &hierarchy.combiner {
        Combiner::Sum => combine(&unit_values, None, true, "enterprise")?,
        Combiner::Max => combine(&unit_values, None, false, "enterprise")?,
        Combiner::WeightedSum { unit_weights, .. } => {
            combine(&unit_values, Some(unit_weights), false, "enterprise")?
        }
    };
    Ok(Rollup {
        units: unit_values,
        enterprise,
    })
}

/// Loss averted per cost unit, highest first.
#[derive(Debug, Clone, PartialEq)]
pub struct MitigationEntry {
    pub id: String,
    /// Key loss divided by hedging cost.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MitigationExclusion {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MitigationReport {
    pub ranked: Vec<MitigationEntry>,
    /// Risks that cannot be ratio-ranked, with the reason.
    pub excluded: Vec<MitigationExclusion>,
}

/// Orders risks by loss-to-cost ratio. Risks without a positive
/// hedging cost (or without the key value) are excluded, each with a
/// diagnostic, never silently dropped.
pub fn mitigation_priority(exposures: &[RiskExposure], key: RankKey) -> MitigationReport {
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for e in exposures {
        let loss = match key.value(e) {
            Some(v) => v,
            None => {
                excluded.push(MitigationExclusion {
                    id: e.id.clone(),
                    reason: "no tail loss (risk has no simulation)".to_string(),
                });
                continue;
            }
        };
        match e.hedging_cost {
            Some(cost) if cost > 0.0 => ranked.push(MitigationEntry {
                id: e.id.clone(),
                ratio: loss / cost,
            }),
            Some(_) => excluded.push(MitigationExclusion {
                id: e.id.clone(),
                reason: "hedging cost is zero".to_string(),
            }),
            None => excluded.push(MitigationExclusion {
                id: e.id.clone(),
                reason: "no hedging cost".to_string(),
            }),
        }
    }
    ranked.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then_with(|| a.id.cmp(&b.id)));
    MitigationReport { ranked, excluded }
}

/// Assesses a whole register; failures are collected per risk instead
/// of aborting the batch.
pub struct PortfolioAssessment {
    pub exposures: Vec<RiskExposure>,
    pub failures: Vec<(String, PortfolioError)>,
}

pub fn assess_all(risks: &[RiskDefinition], p: f64, workers: usize) -> PortfolioAssessment {
    let mut exposures = Vec::new();
    let mut failures = Vec::new();
    for risk in risks {
        match assess_with_workers(risk, p, workers) {
            Ok(exposure) => exposures.push(exposure),
            Err(err) => failures.push((risk.id.clone(), err)),
        }
    }
    PortfolioAssessment {
        exposures,
        failures,
    }
}
