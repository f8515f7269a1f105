//! Seeded Monte Carlo propagation of input uncertainty.
//!
//! Each (sample, variable) pair gets its own counter-based ChaCha8
//! stream keyed by `(seed, sample index, variable index)`, so a draw
//! never depends on how samples are partitioned across workers:
//! `simulate` and `simulate_with_workers(n)` produce byte-identical
//! loss distributions for any worker count.
//!
//! Samples where inference reports no-rule-fired are not losses; they
//! are counted separately in `n_failed`. Any other failure aborts the
//! simulation.

use crate::engine::{infer, EngineError, FuzzyModel, LinguisticVariable, Scenario};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Attempts allowed when rejection-sampling a truncated normal before
/// giving up; hitting it means the universe holds almost no mass.
const REJECTION_CAP: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("model has no output named {0:?}")]
    UnknownOutput(String),
    #[error("no distribution provided for input {0:?}")]
    MissingDistribution(String),
    #[error("distribution provided for unknown input {0:?}")]
    UnknownDistribution(String),
    #[error("invalid distribution for {variable:?}: {reason}")]
    InvalidDistribution { variable: String, reason: String },
    #[error("n_samples must be at least 1")]
    InvalidSampleCount,
    #[error("truncated normal for {variable:?} exceeded {REJECTION_CAP} rejection attempts")]
    RejectionCapExceeded { variable: String },
    #[error("all {n_failed} samples failed inference; loss distribution is empty")]
    EmptyLossDistribution { n_failed: usize },
    #[error("loss samples must be finite, got {0}")]
    NonFiniteLoss(f64),
    #[error("percentile must lie in (0, 100), got {0}")]
    InvalidPercentile(f64),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("sample evaluation failed: {0}")]
    Evaluation(String),
}

/// Input uncertainty model for one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Degenerate distribution: every draw is `value`.
    Point { value: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Normal truncated to the variable's universe by rejection.
    Normal { mean: f64, sd: f64 },
    Triangular { lo: f64, mode: f64, hi: f64 },
    /// Draws uniformly from the given values (sorted ascending).
    Empirical { samples: Vec<f64> },
}

impl Distribution {
    /// Empirical distribution; sorts the samples so that on-disk order
    /// does not matter.
    pub fn empirical(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Distribution::Empirical { samples }
    }

    /// Checks shape parameters and containment in the variable's
    /// universe (the normal is exempt: it is truncated at draw time).
    fn validate_for(&self, var: &LinguisticVariable) -> Result<(), SimulationError> {
        let u = var.universe();
        let fail = |reason: String| SimulationError::InvalidDistribution {
            variable: var.name().to_string(),
            reason,
        };
        match self {
            Distribution::Point { value } => {
                if !value.is_finite() || !u.contains(*value) {
                    return Err(fail(format!(
                        "point {value} outside universe [{}, {}]",
                        u.lo(),
                        u.hi()
                    )));
                }
            }
            Distribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(fail(format!("uniform requires lo < hi, got [{lo}, {hi}]")));
                }
                if !u.contains(*lo) || !u.contains(*hi) {
                    return Err(fail(format!(
                        "uniform [{lo}, {hi}] outside universe [{}, {}]",
                        u.lo(),
                        u.hi()
                    )));
                }
            }
            Distribution::Normal { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && *sd > 0.0) {
                    return Err(fail(format!(
                        "normal requires finite mean and sd > 0, got ({mean}, {sd})"
                    )));
                }
            }
            Distribution::Triangular { lo, mode, hi } => {
                if !(lo.is_finite()
                    && mode.is_finite()
                    && hi.is_finite()
                    && lo <= mode
                    && mode <= hi
                    && lo < hi)
                {
                    return Err(fail(format!(
                        "triangular requires lo <= mode <= hi and lo < hi, got ({lo}, {mode}, {hi})"
                    )));
                }
                if !u.contains(*lo) || !u.contains(*hi) {
                    return Err(fail(format!(
                        "triangular [{lo}, {hi}] outside universe [{}, {}]",
                        u.lo(),
                        u.hi()
                    )));
                }
            }
            Distribution::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(fail("empirical requires at least one sample".to_string()));
                }
                if samples.windows(2).any(|p| !(p[0] <= p[1])) {
                    return Err(fail("empirical samples must be sorted ascending".to_string()));
                }
                for &s in samples {
                    if !s.is_finite() || !u.contains(s) {
                        return Err(fail(format!(
                            "empirical sample {s} outside universe [{}, {}]",
                            u.lo(),
                            u.hi()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// What to simulate: distributions covering every input, the sample
/// count, and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub distributions: BTreeMap<String, Distribution>,
    pub n_samples: usize,
    pub seed: u64,
}

/// Sorted loss samples from one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDistribution {
    samples: Vec<f64>,
    n_failed: usize,
    seed: u64,
}

impl LossDistribution {
    /// Wraps externally computed losses so they can be summarized and
    /// queried for percentiles. Sorts; rejects empty or non-finite data.
    pub fn from_losses(mut samples: Vec<f64>) -> Result<Self, SimulationError> {
        if samples.is_empty() {
            return Err(SimulationError::EmptyLossDistribution { n_failed: 0 });
        }
        if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(SimulationError::NonFiniteLoss(bad));
        }
        samples.sort_by(f64::total_cmp);
        Ok(LossDistribution {
            samples,
            n_failed: 0,
            seed: 0,
        })
    }

    /// Losses in ascending order.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn n_failed(&self) -> usize {
        self.n_failed
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// One stream per (seed, sample, variable): the key layout is
/// `[seed | sample | variable | "fuzzrisk"]` as little-endian u64s.
fn stream(seed: u64, sample: u64, variable: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample.to_le_bytes());
    key[16..24].copy_from_slice(&variable.to_le_bytes());
    key[24..32].copy_from_slice(b"fuzzrisk");
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in `[0, 1)` with 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn draw(
    dist: &Distribution,
    var: &LinguisticVariable,
    rng: &mut ChaCha8Rng,
) -> Result<f64, SimulationError> {
    let u = var.universe();
    let value = match dist {
        Distribution::Point { value } => *value,
        Distribution::Uniform { lo, hi } => {
            let t = unit(rng);
            (lo + t * (hi - lo)).clamp(*lo, *hi)
        }
        Distribution::Normal { mean, sd } => {
            // Box-Muller, rejected until the draw lands in the universe.
            let mut attempts = 0;
            loop {
                attempts += 1;
                if attempts > REJECTION_CAP {
                    return Err(SimulationError::RejectionCapExceeded {
                        variable: var.name().to_string(),
                    });
                }
                let u1 = 1.0 - unit(rng); // in (0, 1]: log stays finite
                let u2 = unit(rng);
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                let x = mean + sd * z;
                if u.contains(x) {
                    break x;
                }
            }
        }
        Distribution::Triangular { lo, mode, hi } => {
            // Inverse CDF; the split point is the mode's quantile.
            let t = unit(rng);
            let split = (mode - lo) / (hi - lo);
            let x = if t < split {
                lo + (t * (hi - lo) * (mode - lo)).sqrt()
            } else {
                hi - ((1.0 - t) * (hi - lo) * (hi - mode)).sqrt()
            };
            x.clamp(*lo, *hi)
        }
        Distribution::Empirical { samples } => {
            let idx = ((unit(rng) * samples.len() as f64) as usize).min(samples.len() - 1);
            samples[idx]
        }
    };
    Ok(value)
}

/// Outcome of evaluating one sampled scenario.
pub(crate) enum SampleEval {
    Loss(f64),
    /// No rule fired; the sample is counted, not scored.
    Failed,
}

enum Outcome {
    Loss(f64),
    Failed,
    Error(SimulationError),
}

/// Drives the sampling loop for any scenario evaluator. Inputs define
/// the draw order (declaration order indexes the per-variable streams).
pub(crate) fn simulate_scenarios<F>(
    inputs: &[LinguisticVariable],
    spec: &SimulationSpec,
    workers: usize,
    eval: F,
) -> Result<LossDistribution, SimulationError>
where
    F: Fn(&Scenario) -> Result<SampleEval, SimulationError> + Sync,
{
    for name in spec.distributions.keys() {
        if !inputs.iter().any(|v| v.name() == name) {
            return Err(SimulationError::UnknownDistribution(name.clone()));
        }
    }
    for var in inputs {
        let dist = spec
            .distributions
            .get(var.name())
            .ok_or_else(|| SimulationError::MissingDistribution(var.name().to_string()))?;
        dist.validate_for(var)?;
    }
    if spec.n_samples == 0 {
        return Err(SimulationError::InvalidSampleCount);
    }

    let n = spec.n_samples;
    let run_sample = |i: usize| -> Outcome {
        let mut values = Vec::with_capacity(inputs.len());
        for (j, var) in inputs.iter().enumerate() {
            let dist = &spec.distributions[var.name()];
            let mut rng = stream(spec.seed, i as u64, j as u64);
            match draw(dist, var, &mut rng) {
                Ok(x) => values.push((var.name().to_string(), x)),
                Err(err) => return Outcome::Error(err),
            }
        }
        match eval(&Scenario::new(values)) {
            Ok(SampleEval::Loss(loss)) => Outcome::Loss(loss),
            Ok(SampleEval::Failed) => Outcome::Failed,
            Err(err) => Outcome::Error(err),
        }
    };

    let workers = workers.max(1).min(n);
    let mut outcomes: Vec<Outcome> = Vec::with_capacity(n);
    if workers == 1 {
        for i in 0..n {
            outcomes.push(run_sample(i));
        }
    } else {
        // Disjoint contiguous chunks; stream keying makes the result
        // independent of this partition.
        outcomes.resize_with(n, || Outcome::Failed);
        let chunk = n.div_ceil(workers);
        std::thread::scope(|scope| {
            for (ci, slots) in outcomes.chunks_mut(chunk).enumerate() {
                let run_sample = &run_sample;
                scope.spawn(move || {
                    for (off, slot) in slots.iter_mut().enumerate() {
                        *slot = run_sample(ci * chunk + off);
                    }
                });
            }
        });
    }

    let mut samples = Vec::with_capacity(n);
    let mut n_failed = 0;
    for outcome in outcomes {
        match outcome {
            Outcome::Loss(loss) => samples.push(loss),
            Outcome::Failed => n_failed += 1,
            Outcome::Error(err) => return Err(err),
        }
    }
    if samples.is_empty() {
        return Err(SimulationError::EmptyLossDistribution { n_failed });
    }
    samples.sort_by(f64::total_cmp);
    Ok(LossDistribution {
        samples,
        n_failed,
        seed: spec.seed,
    })
}

fn model_evaluator<'m>(
    model: &'m FuzzyModel,
    output: &'m str,
) -> impl Fn(&Scenario) -> Result<SampleEval, SimulationError> + Sync + 'm {
    move |scenario| match infer(model, scenario) {
        Ok(result) => Ok(SampleEval::Loss(
            result.crisp(output).expect("output checked before the run"),
        )),
        Err(EngineError::NoRuleFired { .. }) => Ok(SampleEval::Failed),
        Err(other) => Err(SimulationError::Engine(other)),
    }
}

/// Single-threaded simulation of `output` under the spec.
pub fn simulate(
    model: &FuzzyModel,
    spec: &SimulationSpec,
    output: &str,
) -> Result<LossDistribution, SimulationError> {
    simulate_with_workers(model, spec, output, 1)
}

/// Same result as [`simulate`], computed on `workers` threads.
pub fn simulate_with_workers(
    model: &FuzzyModel,
    spec: &SimulationSpec,
    output: &str,
    workers: usize,
) -> Result<LossDistribution, SimulationError> {
    if !model.outputs().iter().any(|v| v.name() == output) {
        return Err(SimulationError::UnknownOutput(output.to_string()));
    }
    simulate_scenarios(model.inputs(), spec, workers, model_evaluator(model, output))
}

/// Nearest-rank percentile: the smallest sample such that at least
/// `p` percent of the distribution is at or below it.
pub fn percentile(dist: &LossDistribution, p: f64) -> Result<f64, SimulationError> {
    if !(p.is_finite() && p > 0.0 && p < 100.0) {
        return Err(SimulationError::InvalidPercentile(p));
    }
    let n = dist.samples.len();
    let rank = (p / 100.0 * n as f64).ceil() as usize;
    let rank = rank.clamp(1, n);
    Ok(dist.samples[rank - 1])
}

/// Headline statistics of a loss distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n_samples: usize,
    pub n_failed: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p50: f64,
    pub p95: f64,
    #[serde(rename = "p99.5")]
    pub p99_5: f64,
}

pub fn summarize(dist: &LossDistribution) -> Summary {
    let n = dist.samples.len();
    let mean = dist.samples.iter().sum::<f64>() / n as f64;
    Summary {
        n_samples: n,
        n_failed: dist.n_failed,
        mean,
        min: dist.samples[0],
        max: dist.samples[n - 1],
        p50: percentile(dist, 50.0).expect("fixed percentile"),
        p95: percentile(dist, 95.0).expect("fixed percentile"),
        p99_5: percentile(dist, 99.5).expect("fixed percentile"),
    }
}
