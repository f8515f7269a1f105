//! Deterministic fuzzy-logic risk assessment.
//!
//! The crate is organised around a Mamdani-style inference pipeline:
//!
//! * [`membership`] — membership functions over bounded universes,
//!   support/core extraction, grid sampling, weighted blending.
//! * [`logic`] — min/max/complement operators on membership degrees.
//! * [`rulelang`] — the `IF .. THEN .. IS ..` rule language: parser,
//!   validator, canonical formatter.
//! * [`engine`] — linguistic variables, models, and the fuzzify →
//!   activate → implicate → aggregate → defuzzify pipeline.
//! * [`experts`] — multi-expert pooling: membership blending, output
//!   blending, and rule-conflict handling.
//! * [`fuznum`] — fuzzy numbers, alpha-cut interval arithmetic, and an
//!   extension-principle oracle.
//! * [`montecarlo`] — seeded Monte Carlo propagation of input
//!   distributions through a model, with reproducible parallelism.
//! * [`portfolio`] — risk registers, exposure assessment, ranking, and
//!   hierarchy roll-ups.
//! * [`modelfile`] — the on-disk JSON/CSV formats and deterministic
//!   number formatting.
//!
//! Determinism is a design requirement throughout: identical inputs
//! (including seeds and worker counts) produce byte-identical outputs.

pub mod engine;
pub mod experts;
pub mod fuznum;
pub mod logic;
pub mod membership;
pub mod modelfile;
pub mod montecarlo;
pub mod portfolio;
pub mod rulelang;
