//! Multi-expert pooling.
//!
//! Three approaches to combining expert opinion, all weight-aware:
//!
//! 1. [`blend_memberships`] — experts supply alternative membership
//!    functions for individual terms of a shared base model; the terms
//!    are replaced by their weighted pointwise blend and a single
//!    merged model is inferred.
//! 2. [`blend_outputs`] — each expert has a complete model over shared
//!    variable declarations; every model runs on the scenario and the
//!    crisp outputs are pooled as a weighted mean.
//! 3. [`equal_weight`] — approach 2 with all weights forced to 1.
//!
//! Rule conflicts (same antecedent, same output variable, different
//! term) across expert rule sets are detected against a canonical
//! antecedent form (commutative operands of AND/OR sorted), and can
//! either be reported or resolved by dropping every conflicting rule.

use crate::engine::{infer, EngineError, FuzzyModel, LinguisticVariable, Scenario};
use crate::membership::{blend, MembershipError, MembershipFunction};
use crate::rulelang::{format_condition, Condition, Rule};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpertError {
    #[error("panel has no experts")]
    NoExperts,
    #[error("duplicate expert id {0:?}")]
    DuplicateExpert(String),
    #[error("expert {expert:?} has invalid weight {weight} (must be finite and >= 0)")]
    BadWeight { expert: String, weight: f64 },
    #[error("expert weights must not all be zero")]
    AllZeroWeights,
    #[error("panel has {experts} experts but {payload} payload entries")]
    PayloadLengthMismatch { experts: usize, payload: usize },
    #[error("panel payload does not match mode {0:?}")]
    PayloadKindMismatch(PanelMode),
    #[error("expert {expert:?} model declarations differ from the first expert: {reason}")]
    DeclarationMismatch { expert: String, reason: String },
    #[error("expert {expert:?} overrides unknown term {variable:?}/{term:?}")]
    UnknownOverride {
        expert: String,
        variable: String,
        term: String,
    },
    #[error("all experts overriding {variable:?}/{term:?} have zero weight")]
    DegenerateBlend { variable: String, term: String },
    #[error("inference failed for expert {expert:?}: {source}")]
    InferenceFailed {
        expert: String,
        #[source]
        source: EngineError,
    },
    #[error(transparent)]
    Model(#[from] crate::engine::ModelError),
    #[error(transparent)]
    Membership(#[from] MembershipError),
}

/// One expert: id, pooling weight, and an optional free-text basis
/// (experience, data provenance) carried for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertProfile {
    pub id: String,
    pub weight: f64,
    pub basis: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelMode {
    BlendMemberships,
    BlendOutputs,
    EqualWeights,
}

/// Membership replacements one expert proposes, keyed by
/// (variable, term) of the base model.
pub type TermOverrides = BTreeMap<(String, String), MembershipFunction>;

/// Per-expert payload, parallel to the expert list.
#[derive(Debug, Clone, PartialEq)]
pub enum PanelPayload {
    /// For [`PanelMode::BlendMemberships`].
    MembershipOverrides(Vec<TermOverrides>),
    /// For [`PanelMode::BlendOutputs`] and [`PanelMode::EqualWeights`].
    Models(Vec<FuzzyModel>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertPanel {
    experts: Vec<ExpertProfile>,
    mode: PanelMode,
    payload: PanelPayload,
}

fn check_shared_declarations(first: &FuzzyModel, other: &FuzzyModel) -> Result<(), String> {
    let sig = |m: &FuzzyModel| {
        let ins: Vec<_> = m
            .inputs()
            .iter()
            .map(|v| (v.name().to_string(), v.universe()))
            .collect();
        let outs: Vec<_> = m
            .outputs()
            .iter()
            .map(|v| (v.name().to_string(), v.universe()))
            .collect();
        (ins, outs)
    };
    let (fi, fo) = sig(first);
    let (oi, oo) = sig(other);
    if fi != oi {
        return Err("input variables or universes differ".to_string());
    }
    if fo != oo {
        return Err("output variables or universes differ".to_string());
    }
    Ok(())
}

impl ExpertPanel {
    pub fn new(
        experts: Vec<ExpertProfile>,
        mode: PanelMode,
        payload: PanelPayload,
    ) -> Result<Self, ExpertError> {
        if experts.is_empty() {
            return Err(ExpertError::NoExperts);
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &experts {
            if e.id.is_empty() || !seen.insert(e.id.clone()) {
                return Err(ExpertError::DuplicateExpert(e.id.clone()));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(ExpertError::BadWeight {
                    expert: e.id.clone(),
                    weight: e.weight,
                });
            }
        }
        // Weighted modes need at least one expert that counts.
        if mode != PanelMode::EqualWeights && experts.iter().all(|e| e.weight == 0.0) {
            return Err(ExpertError::AllZeroWeights);
        }
        let payload_len = match &payload {
            PanelPayload::MembershipOverrides(v) => {
                if mode != PanelMode::BlendMemberships {
                    return Err(ExpertError::PayloadKindMismatch(mode));
                }
                v.len()
            }
            PanelPayload::Models(models) => {
                if mode == PanelMode::BlendMemberships {
                    return Err(ExpertError::PayloadKindMismatch(mode));
                }
                if let Some((first, rest)) = models.split_first() {
                    for (expert, model) in experts.iter().skip(1).zip(rest) {
                        check_shared_declarations(first, model).map_err(|reason| {
                            ExpertError::DeclarationMismatch {
                                expert: expert.id.clone(),
                                reason,
                            }
                        })?;
                    }
                }
                models.len()
            }
        };
        if payload_len != experts.len() {
            return Err(ExpertError::PayloadLengthMismatch {
                experts: experts.len(),
                payload: payload_len,
            });
        }
        Ok(ExpertPanel {
            experts,
            mode,
            payload,
        })
    }

    pub fn experts(&self) -> &[ExpertProfile] {
        &self.experts
    }

    pub fn mode(&self) -> PanelMode {
        self.mode
    }

    pub fn payload(&self) -> &PanelPayload {
        &self.payload
    }

    /// Models payload, when present (approaches 2 and 3).
    pub fn models(&self) -> Option<&[FuzzyModel]> {
        match &self.payload {
            PanelPayload::Models(m) => Some(m),
            PanelPayload::MembershipOverrides(_) => None,
        }
    }

    /// Per-expert rule sets for conflict analysis (approaches 2 and 3).
    pub fn rule_sets(&self) -> Option<Vec<(String, Vec<Rule>)>> {
        let models = self.models()?;
        Some(
            self.experts
                .iter()
                .zip(models)
                .map(|(e, m)| (e.id.clone(), m.rules().to_vec()))
                .collect(),
        )
    }
}

/// Approach 1: replace overridden terms of `base` by the weighted
/// blend of the expert proposals and return the merged model.
///
/// Terms no expert overrides keep the base membership function. When
/// every overriding expert proposes the same function it is kept
/// analytically (blending identical functions is the identity);
/// otherwise the blend is a sampled function on the model grid.
pub fn blend_memberships(
    panel: &ExpertPanel,
    base: &FuzzyModel,
) -> Result<FuzzyModel, ExpertError> {
    let overrides = match &panel.payload {
        PanelPayload::MembershipOverrides(v) => v,
        PanelPayload::Models(_) => {
            return Err(ExpertError::PayloadKindMismatch(panel.mode));
        }
    };
    // Reject overrides that name nothing in the base model.
    for (expert, terms) in panel.experts.iter().zip(overrides) {
        for (variable, term) in terms.keys() {
            let known = base
                .variable(variable)
                .is_some_and(|v| v.term(term).is_some());
            if !known {
                return Err(ExpertError::UnknownOverride {
                    expert: expert.id.clone(),
                    variable: variable.clone(),
                    term: term.clone(),
                });
            }
        }
    }

    let grid_points = base.config().grid_points;
    let rebuild = |var: &LinguisticVariable| -> Result<LinguisticVariable, ExpertError> {
        let mut terms = Vec::new();
        for (term, base_mf) in var.terms() {
            let key = (var.name().to_string(), term.to_string());
            let mut mfs = Vec::new();
            let mut weights = Vec::new();
            for (expert, ov) in panel.experts.iter().zip(overrides) {
                if let Some(mf) = ov.get(&key) {
                    mfs.push(mf.clone());
                    weights.push(expert.weight);
                }
            }
            let blended = if mfs.is_empty() {
                base_mf.clone()
            } else if weights.iter().all(|&w| w == 0.0) {
                return Err(ExpertError::DegenerateBlend {
                    variable: key.0,
                    term: key.1,
                });
            } else if mfs.windows(2).all(|p| p[0] == p[1]) {
                // Unanimous proposal: blending is the identity, so keep
                // the analytic shape instead of a sampled approximation.
                mfs[0].clone()
            } else {
                MembershipFunction::Sampled(blend(&mfs, &weights, &var.universe(), grid_points)?)
            };
            terms.push((term.to_string(), blended));
        }
        Ok(LinguisticVariable::new(
            var.name(),
            var.kind(),
            var.universe(),
            terms,
        )?)
    };

    let inputs = base
        .inputs()
        .iter()
        .map(&rebuild)
        .collect::<Result<Vec<_>, _>>()?;
    let outputs = base
        .outputs()
        .iter()
        .map(&rebuild)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FuzzyModel::new(
        inputs,
        outputs,
        base.rules().to_vec(),
        *base.config(),
    )?)
}

fn pooled_outputs(
    panel: &ExpertPanel,
    scenario: &Scenario,
    weights: &[f64],
) -> Result<BTreeMap<String, f64>, ExpertError> {
    let models = match &panel.payload {
        PanelPayload::Models(m) => m,
        PanelPayload::MembershipOverrides(_) => {
            return Err(ExpertError::PayloadKindMismatch(panel.mode));
        }
    };
    let total: f64 = weights.iter().sum();
    debug_assert!(total > 0.0, "panel validation guarantees a usable weight");
    let mut pooled: BTreeMap<String, f64> = BTreeMap::new();
    // Accumulate in expert order so the sum is deterministic.
    for ((expert, model), &w) in panel.experts.iter().zip(models).zip(weights) {
        let result = infer(model, scenario).map_err(|source| ExpertError::InferenceFailed {
            expert: expert.id.clone(),
            source,
        })?;
        for (name, out) in &result.outputs {
            *pooled.entry(name.clone()).or_insert(0.0) += w * out.crisp;
        }
    }
    for value in pooled.values_mut() {
        *value /= total;
    }
    Ok(pooled)
}

/// Approach 2: run every expert model on the scenario and pool the
/// crisp outputs as the weighted mean. Any expert failure (including
/// no-rule-fired) aborts with an error naming the expert.
pub fn blend_outputs(
    panel: &ExpertPanel,
    scenario: &Scenario,
) -> Result<BTreeMap<String, f64>, ExpertError> {
    let weights: Vec<f64> = panel.experts.iter().map(|e| e.weight).collect();
    pooled_outputs(panel, scenario, &weights)
}

/// Approach 3: as [`blend_outputs`] with every expert counted once,
/// whatever the declared weights.
pub fn equal_weight(
    panel: &ExpertPanel,
    scenario: &Scenario,
) -> Result<BTreeMap<String, f64>, ExpertError> {
    let weights = vec![1.0; panel.experts.len()];
    pooled_outputs(panel, scenario, &weights)
}

/// Antecedent with commutative operands of AND/OR put in a canonical
/// order, so `a AND b` and `b AND a` compare equal.
fn canonicalize(cond: &Condition) -> Condition {
    match cond {
        Condition::Atom { .. } => cond.clone(),
        Condition::Not { inner, span } => Condition::Not {
            inner: Box::new(canonicalize(inner)),
            span: *span,
        },
        Condition::And { left, right, span } => {
            let (l, r) = order_pair(canonicalize(left), canonicalize(right));
            Condition::And {
                left: Box::new(l),
                right: Box::new(r),
                span: *span,
            }
        }
        Condition::Or { left, right, span } => {
            let (l, r) = order_pair(canonicalize(left), canonicalize(right));
            Condition::Or {
                left: Box::new(l),
                right: Box::new(r),
                span: *span,
            }
        }
    }
}

fn order_pair(a: Condition, b: Condition) -> (Condition, Condition) {
    if format_condition(&a) <= format_condition(&b) {
        (a, b)
    } else {
        (b, a)
    }
}

/// A detected disagreement: the same (canonical) antecedent drives the
/// same output variable to different terms across experts.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleConflict {
    /// Canonical antecedent shared by the conflicting rules.
    pub antecedent: Condition,
    /// Output variable the rules disagree about.
    pub output: String,
    /// Who claims which term, in encounter order.
    pub assignments: Vec<ConflictAssignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictAssignment {
    pub expert: String,
    pub term: String,
}

/// Scans per-expert rule sets for conflicts. Identical rules from
/// several experts agree and are not conflicts; the same antecedent
/// driving one output to different terms is.
pub fn detect_conflicts(rule_sets: &[(String, Vec<Rule>)]) -> Vec<RuleConflict> {
    // Key: canonical antecedent text + output variable. BTreeMap makes
    // the report order independent of expert order.
    let mut groups: BTreeMap<(String, String), (Condition, Vec<ConflictAssignment>)> =
        BTreeMap::new();
    for (expert, rules) in rule_sets {
        for rule in rules {
            let canonical = canonicalize(&rule.antecedent);
            let key = (
                format_condition(&canonical),
                rule.consequent.variable.clone(),
            );
            let entry = groups
                .entry(key)
                .or_insert_with(|| (canonical, Vec::new()));
            let assignment = ConflictAssignment {
                expert: expert.clone(),
                term: rule.consequent.term.clone(),
            };
            if !entry.1.contains(&assignment) {
                entry.1.push(assignment);
            }
        }
    }
    groups
        .into_iter()
        .filter_map(|((_, output), (antecedent, assignments))| {
            let mut terms: Vec<&str> = assignments.iter().map(|a| a.term.as_str()).collect();
            terms.sort_unstable();
            terms.dedup();
            if terms.len() >= 2 {
                Some(RuleConflict {
                    antecedent,
                    output,
                    assignments,
                })
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictPolicy {
    /// Keep all rules; conflicts are diagnostics only.
    Report,
    /// Remove every rule involved in a conflict, on all sides.
    DropBoth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictResolution {
    pub conflicts: Vec<RuleConflict>,
    /// Rule sets after the policy is applied, same expert order.
    pub rule_sets: Vec<(String, Vec<Rule>)>,
    /// Rules removed by [`ConflictPolicy::DropBoth`], original order.
    pub removed: Vec<(String, Rule)>,
}

/// Detects conflicts and applies the policy to the rule sets.
pub fn resolve_conflicts(
    rule_sets: &[(String, Vec<Rule>)],
    policy: ConflictPolicy,
) -> ConflictResolution {
    let conflicts = detect_conflicts(rule_sets);
    match policy {
        ConflictPolicy::Report => ConflictResolution {
            conflicts,
            rule_sets: rule_sets.to_vec(),
            removed: Vec::new(),
        },
        ConflictPolicy::DropBoth => {
            let keys: std::collections::BTreeSet<(String, String)> = conflicts
                .iter()
                .map(|c| (format_condition(&c.antecedent), c.output.clone()))
                .collect();
            let mut kept = Vec::new();
            let mut removed = Vec::new();
            for (expert, rules) in rule_sets {
                let mut mine = Vec::new();
                for rule in rules {
                    let key = (
                        format_condition(&canonicalize(&rule.antecedent)),
                        rule.consequent.variable.clone(),
                    );
                    if keys.contains(&key) {
                        removed.push((expert.clone(), rule.clone()));
                    } else {
                        mine.push(rule.clone());
                    }
                }
                kept.push((expert.clone(), mine));
            }
            ConflictResolution {
                conflicts,
                rule_sets: kept,
                removed,
            }
        }
    }
}
