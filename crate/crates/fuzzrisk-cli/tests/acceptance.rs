//! End-to-end guarantees, one test per shipped promise. Every test
//! prints a single `PASS`/`FAIL` line (visible with `--nocapture`)
//! and fails the build when the guarantee does not hold.

use fuzzrisk::engine::{
    activate, aggregate, defuzzify_centroid, fuzzify, implicate, infer, FuzzyModel,
    InferenceConfig, LinguisticVariable, Scenario, VarKind,
};
use fuzzrisk::experts::{
    blend_memberships, blend_outputs, equal_weight, resolve_conflicts, ConflictPolicy,
    ExpertPanel, ExpertProfile, PanelMode, PanelPayload,
};
use fuzzrisk::fuznum::{alpha_cut, alpha_cut_from_sampled, arith, extension_oracle, ArithOp, FuzzyNumber};
use fuzzrisk::logic::{fuzzy_and, fuzzy_not, fuzzy_or, Degree};
use fuzzrisk::membership::{MembershipFunction, Universe};
use fuzzrisk::montecarlo::{
    percentile, simulate_with_workers, Distribution, LossDistribution, SimulationSpec,
};
use fuzzrisk::portfolio::{rank, rollup, BusinessUnit, Combiner, Hierarchy, RankKey, RiskExposure};
use fuzzrisk::rulelang::{format_rule, parse, Condition, Consequent, Rule, Span};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::Command;

// ---- harness -------------------------------------------------------------

fn check(label: &str, result: Result<(), String>) {
    match &result {
        Ok(()) => println!("acceptance {label}: PASS"),
        Err(why) => println!("acceptance {label}: FAIL — {why}"),
    }
    if let Err(why) = result {
        panic!("acceptance {label}: {why}");
    }
}

fn near(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} (tol {tol})"))
    }
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

// ---- 1: membership anchors -------------------------------------------

#[test]
fn c01_trapezoid_anchor_points() {
    check("01 trapezoid anchor points", (|| {
        let mf = MembershipFunction::trapezoid(20.5, 28.0, 40.0, 40.0).map_err(s)?;
        for (x, want) in [(33.0, 1.0), (18.0, 0.0), (25.0, 0.6)] {
            near(mf.evaluate(x).map_err(s)?, want, 1e-9, &format!("mu({x})"))?;
        }
        Ok(())
    })());
}

// ---- 2: centroid vs independent integration -------------------------

/// Pointwise maximum of clipped analytic curves — the same function
/// the engine aggregates, evaluated directly instead of on a grid.
fn clipped_max(terms: &[(MembershipFunction, f64)], z: f64) -> f64 {
    terms
        .iter()
        .map(|(mf, clip)| mf.evaluate(z).expect("analytic shapes never fail").min(*clip))
        .fold(0.0, f64::max)
}

/// Midpoint-rule centroid with one million intervals.
fn riemann_centroid(terms: &[(MembershipFunction, f64)], lo: f64, hi: f64) -> f64 {
    const N: usize = 1_000_000;
    let dz = (hi - lo) / N as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..N {
        let z = lo + (k as f64 + 0.5) * dz;
        let mu = clipped_max(terms, z);
        num += mu * z;
        den += mu;
    }
    num / den
}

/// Strictly increasing points inside [lo, hi] with comfortable gaps.
fn spread_points<const K: usize>(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; K] {
    let mut gaps = [0.0; K];
    let mut total = 0.05 + unit(rng); // trailing gap
    for g in &mut gaps {
        *g = 0.05 + unit(rng);
        total += *g;
    }
    let mut out = [0.0; K];
    let mut cum = 0.0;
    for (o, g) in out.iter_mut().zip(&gaps) {
        cum += g;
        *o = lo + (hi - lo) * (cum / total);
    }
    out
}

#[test]
fn c02_centroid_matches_riemann_oracle() {
    check("02 centroid matches 1e6-point integration", (|| {
        // A symmetric clipped triangle balances at its axis.
        let u = Universe::new(0.0, 100.0).map_err(s)?;
        let tri = MembershipFunction::triangle(20.0, 50.0, 80.0).map_err(s)?;
        let clipped = implicate(Degree::new(0.4).map_err(s)?, &tri, &u, 1001).map_err(s)?;
        let agg = aggregate(&[clipped]).map_err(s)?;
        near(defuzzify_centroid(&agg).map_err(s)?, 50.0, 1e-6, "symmetric centroid")?;

        let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
        for case in 0..100 {
            let lo = -50.0 + 100.0 * unit(&mut rng);
            let span = 10.0 + 190.0 * unit(&mut rng);
            let hi = lo + span;
            let u = Universe::new(lo, hi).map_err(s)?;

            let n_terms = 1 + (rng.next_u64() % 3) as usize;
            let mut terms = Vec::with_capacity(n_terms);
            for _ in 0..n_terms {
                let mf = if rng.next_u64() % 2 == 0 {
                    let [a, b, c] = spread_points::<3>(&mut rng, lo, hi);
                    MembershipFunction::triangle(a, b, c).map_err(s)?
                } else {
                    let [a, b, c, d] = spread_points::<4>(&mut rng, lo, hi);
                    MembershipFunction::trapezoid(a, b, c, d).map_err(s)?
                };
                terms.push((mf, 0.1 + 0.9 * unit(&mut rng)));
            }

            let clipped: Vec<_> = terms
                .iter()
                .map(|(mf, clip)| {
                    implicate(Degree::new(*clip).expect("clip in (0,1]"), mf, &u, 1001)
                })
                .collect::<Result<_, _>>()
                .map_err(s)?;
            let engine = defuzzify_centroid(&aggregate(&clipped).map_err(s)?).map_err(s)?;
            let oracle = riemann_centroid(&terms, lo, hi);
            near(engine, oracle, 1e-4 * span, &format!("random aggregate {case}"))?;
        }
        Ok(())
    })());
}

// ---- 3: Boolean limits ---------------------------------------------

#[test]
fn c03_boolean_limits_and_de_morgan() {
    check("03 Boolean truth tables and De Morgan", (|| {
        let d = |v: f64| Degree::new(v).expect("0 or 1");
        let (f, t) = (d(0.0), d(1.0));
        let table = [
            (fuzzy_and(f, f), 0.0),
            (fuzzy_and(f, t), 0.0),
            (fuzzy_and(t, f), 0.0),
            (fuzzy_and(t, t), 1.0),
            (fuzzy_or(f, f), 0.0),
            (fuzzy_or(f, t), 1.0),
            (fuzzy_or(t, f), 1.0),
            (fuzzy_or(t, t), 1.0),
            (fuzzy_not(f), 1.0),
            (fuzzy_not(t), 0.0),
        ];
        for (i, (got, want)) in table.iter().enumerate() {
            if got.value() != *want {
                return Err(format!("truth-table entry {i}: got {}, want {want}", got.value()));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
        for _ in 0..10_000 {
            let a = d(unit(&mut rng));
            let b = d(unit(&mut rng));
            let left = fuzzy_not(fuzzy_and(a, b)).value();
            let right = fuzzy_or(fuzzy_not(a), fuzzy_not(b)).value();
            if left != right {
                return Err(format!("NOT(a AND b) != NOT a OR NOT b at a={:?} b={:?}", a, b));
            }
            let left = fuzzy_not(fuzzy_or(a, b)).value();
            let right = fuzzy_and(fuzzy_not(a), fuzzy_not(b)).value();
            if left != right {
                return Err(format!("NOT(a OR b) != NOT a AND NOT b at a={:?} b={:?}", a, b));
            }
        }
        Ok(())
    })());
}

// ---- 4: pipeline equals its composed stages --------------------------

const INPUT_TERMS: [&str; 2] = ["low", "high"];

fn random_small_model(rng: &mut ChaCha8Rng) -> (FuzzyModel, Scenario) {
    let n_inputs = 1 + (rng.next_u64() % 3) as usize;
    let mut inputs = Vec::new();
    let mut values = Vec::new();
    for i in 0..n_inputs {
        let lo = -10.0 + 20.0 * unit(rng);
        let hi = lo + 1.0 + 9.0 * unit(rng);
        let name = format!("in{i}");
        inputs.push(
            LinguisticVariable::new(
                &name,
                VarKind::Input,
                Universe::new(lo, hi).unwrap(),
                [
                    ("low".to_string(), MembershipFunction::triangle(lo, lo, hi).unwrap()),
                    ("high".to_string(), MembershipFunction::triangle(lo, hi, hi).unwrap()),
                ],
            )
            .unwrap(),
        );
        // Interior point: both terms strictly between 0 and 1.
        values.push((name, lo + (0.1 + 0.8 * unit(rng)) * (hi - lo)));
    }
    let output = LinguisticVariable::new(
        "out",
        VarKind::Output,
        Universe::new(0.0, 100.0).unwrap(),
        [
            ("low".to_string(), MembershipFunction::triangle(0.0, 0.0, 60.0).unwrap()),
            ("high".to_string(), MembershipFunction::triangle(40.0, 100.0, 100.0).unwrap()),
        ],
    )
    .unwrap();

    let n_rules = 2 + (rng.next_u64() % 8) as usize;
    let mut rules = Vec::new();
    for _ in 0..n_rules {
        let atom = |rng: &mut ChaCha8Rng| {
            format!(
                "in{} IS {}",
                rng.next_u64() % n_inputs as u64,
                INPUT_TERMS[(rng.next_u64() % 2) as usize]
            )
        };
        let cond = match rng.next_u64() % 4 {
            0 => atom(rng),
            1 => format!("{} AND {}", atom(rng), atom(rng)),
            2 => format!("{} OR NOT {}", atom(rng), atom(rng)),
            _ => format!("NOT {}", atom(rng)),
        };
        let term = INPUT_TERMS[(rng.next_u64() % 2) as usize];
        let text = match rng.next_u64() % 3 {
            0 => format!("IF {cond} THEN out IS {term}"),
            _ => format!(
                "IF {cond} THEN out IS {term} WITH 0.{}",
                25 + rng.next_u64() % 75
            ),
        };
        rules.push(parse(&text).unwrap());
    }

    let model = FuzzyModel::new(inputs, vec![output], rules, InferenceConfig::default()).unwrap();
    (model, Scenario::new(values))
}

#[test]
fn c04_pipeline_equals_manual_stages() {
    check("04 pipeline equals composed stages", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
        for case in 0..50 {
            let (model, scenario) = random_small_model(&mut rng);
            let result = infer(&model, &scenario).map_err(s)?;

            let fz = fuzzify(&model, &scenario).map_err(s)?;
            let strengths: Vec<Degree> = model
                .rules()
                .iter()
                .map(|r| activate(r, &fz))
                .collect::<Result<_, _>>()
                .map_err(s)?;
            for out_var in model.outputs() {
                let universe = out_var.universe();
                let mut clipped = Vec::new();
                for (rule, strength) in model.rules().iter().zip(&strengths) {
                    if rule.consequent.variable == out_var.name() {
                        let mf = out_var.term(&rule.consequent.term).expect("validated");
                        clipped.push(
                            implicate(*strength, mf, &universe, model.config().grid_points)
                                .map_err(s)?,
                        );
                    }
                }
                let manual =
                    defuzzify_centroid(&aggregate(&clipped).map_err(s)?).map_err(s)?;
                let pipeline = result.crisp(out_var.name()).expect("output present");
                near(pipeline, manual, 1e-12, &format!("case {case}, {}", out_var.name()))?;
            }
        }
        Ok(())
    })());
}

// ---- 5: parser round-trip ---------------------------------------------

const Z: Span = Span { start: 0, end: 0 };
const NAMES: [&str; 6] = ["x", "cost", "likelihood", "supply_risk", "q2", "impact"];
const TERMS: [&str; 5] = ["low", "medium", "high", "very_high", "ok"];

fn gen_condition(rng: &mut ChaCha8Rng, depth: usize) -> Condition {
    let pick = if depth == 0 { 0 } else { rng.next_u64() % 4 };
    match pick {
        0 => Condition::Atom {
            variable: NAMES[(rng.next_u64() % 6) as usize].to_string(),
            term: TERMS[(rng.next_u64() % 5) as usize].to_string(),
            span: Z,
        },
        1 => Condition::And {
            left: Box::new(gen_condition(rng, depth - 1)),
            right: Box::new(gen_condition(rng, depth - 1)),
            span: Z,
        },
        2 => Condition::Or {
            left: Box::new(gen_condition(rng, depth - 1)),
            right: Box::new(gen_condition(rng, depth - 1)),
            span: Z,
        },
        _ => Condition::Not {
            inner: Box::new(gen_condition(rng, depth - 1)),
            span: Z,
        },
    }
}

#[test]
fn c05_rule_text_round_trips() {
    check("05 rule text round-trips", (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
        for case in 0..10_000 {
            let rule = Rule {
                antecedent: gen_condition(&mut rng, 3),
                consequent: Consequent {
                    variable: NAMES[(rng.next_u64() % 6) as usize].to_string(),
                    term: TERMS[(rng.next_u64() % 5) as usize].to_string(),
                    span: Z,
                },
                weight: match rng.next_u64() % 3 {
                    0 => 1.0,
                    1 => (1 + rng.next_u64() % 100) as f64 / 100.0,
                    _ => 0.5 + 0.5 * unit(&mut rng),
                },
                expert: None,
            };
            let text = format_rule(&rule);
            let back = parse(&text).map_err(|e| format!("case {case}: {text:?}: {e}"))?;
            if back != rule {
                return Err(format!("case {case}: {text:?} parsed differently"));
            }
        }

        // Documented single-atom forms.
        for (text, var, term, out_var, out_term) in [
            ("IF hardness IS hard THEN speed IS slow", "hardness", "hard", "speed", "slow"),
            ("IF x IS low THEN y IS low", "x", "low", "y", "low"),
        ] {
            let rule = parse(text).map_err(s)?;
            let want = Condition::Atom {
                variable: var.to_string(),
                term: term.to_string(),
                span: Z,
            };
            if rule.antecedent != want
                || rule.consequent.variable != out_var
                || rule.consequent.term != out_term
                || rule.weight != 1.0
            {
                return Err(format!("{text:?} did not parse to a bare atom rule"));
            }
        }

        // Negation sugar: IS NOT desugars to NOT around the atom.
        let sugar = parse("IF x IS NOT low THEN y IS high").map_err(s)?;
        let want = Condition::Not {
            inner: Box::new(Condition::Atom {
                variable: "x".to_string(),
                term: "low".to_string(),
                span: Z,
            }),
            span: Z,
        };
        if sugar.antecedent != want {
            return Err("IS NOT did not desugar to NOT(atom)".to_string());
        }
        Ok(())
    })());
}

// ---- 6: expert pooling consistency ----------------------------------

fn panel_base_model(weights: [f64; 2]) -> FuzzyModel {
    let x = LinguisticVariable::new(
        "x",
        VarKind::Input,
        Universe::new(0.0, 10.0).unwrap(),
        [
            ("low".to_string(), MembershipFunction::triangle(0.0, 0.0, 10.0).unwrap()),
            ("high".to_string(), MembershipFunction::triangle(0.0, 10.0, 10.0).unwrap()),
        ],
    )
    .unwrap();
    let y = LinguisticVariable::new(
        "y",
        VarKind::Output,
        Universe::new(0.0, 100.0).unwrap(),
        [
            ("low".to_string(), MembershipFunction::triangle(0.0, 0.0, 50.0).unwrap()),
            ("high".to_string(), MembershipFunction::triangle(50.0, 100.0, 100.0).unwrap()),
        ],
    )
    .unwrap();
    let rules = vec![
        parse(&format!("IF x IS low THEN y IS low WITH {}", weights[0])).unwrap(),
        parse(&format!("IF x IS high THEN y IS high WITH {}", weights[1])).unwrap(),
    ];
    FuzzyModel::new(vec![x], vec![y], rules, InferenceConfig::default()).unwrap()
}

fn profiles(weights: &[f64]) -> Vec<ExpertProfile> {
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| ExpertProfile {
            id: format!("e{i}"),
            weight: *w,
            basis: None,
        })
        .collect()
}

#[test]
fn c06_expert_pooling_consistency() {
    check("06 expert pooling consistency", (|| {
        let base = panel_base_model([1.0, 1.0]);
        let scenario = Scenario::new([("x".to_string(), 3.0)]);
        let single = infer(&base, &scenario).map_err(s)?.crisp("y").expect("output y");

        // Identical experts: every pooling approach must agree with
        // the lone model.
        let same_mf = MembershipFunction::triangle(0.0, 0.0, 50.0).unwrap();
        let overrides: Vec<BTreeMap<(String, String), MembershipFunction>> = (0..3)
            .map(|_| {
                let mut m = BTreeMap::new();
                m.insert(("y".to_string(), "low".to_string()), same_mf.clone());
                m
            })
            .collect();
        let p1 = ExpertPanel::new(
            profiles(&[1.0, 2.0, 0.5]),
            PanelMode::BlendMemberships,
            PanelPayload::MembershipOverrides(overrides),
        )
        .map_err(s)?;
        let blended = blend_memberships(&p1, &base).map_err(s)?;
        let a1 = infer(&blended, &scenario).map_err(s)?.crisp("y").expect("output y");
        near(a1, single, 1e-9, "membership blending vs single")?;

        let identical = PanelPayload::Models(vec![base.clone(), base.clone(), base.clone()]);
        let p2 = ExpertPanel::new(profiles(&[1.0, 2.0, 0.5]), PanelMode::BlendOutputs, identical)
            .map_err(s)?;
        let a2 = blend_outputs(&p2, &scenario).map_err(s)?["y"];
        near(a2, single, 1e-9, "output blending vs single")?;

        let identical = PanelPayload::Models(vec![base.clone(), base.clone(), base.clone()]);
        let p3 = ExpertPanel::new(profiles(&[1.0, 2.0, 0.5]), PanelMode::EqualWeights, identical)
            .map_err(s)?;
        let a3 = equal_weight(&p3, &scenario).map_err(s)?["y"];
        near(a3, single, 1e-9, "equal weighting vs single")?;

        // Weight scaling cannot move a weighted mean.
        let distinct = || {
            PanelPayload::Models(vec![
                panel_base_model([1.0, 1.0]),
                panel_base_model([0.6, 0.9]),
                panel_base_model([0.3, 1.0]),
            ])
        };
        let weights = [1.2, 3.4, 0.6];
        let reference = blend_outputs(
            &ExpertPanel::new(profiles(&weights), PanelMode::BlendOutputs, distinct())
                .map_err(s)?,
            &scenario,
        )
        .map_err(s)?["y"];
        for k in [0.1, 7.0, 1000.0] {
            let scaled: Vec<f64> = weights.iter().map(|w| w * k).collect();
            let panel =
                ExpertPanel::new(profiles(&scaled), PanelMode::BlendOutputs, distinct())
                    .map_err(s)?;
            let pooled = blend_outputs(&panel, &scenario).map_err(s)?["y"];
            near(pooled, reference, 1e-12, &format!("weights scaled by {k}"))?;
        }

        // A head-on disagreement drops both sides, nothing else.
        let rule_sets = vec![
            ("I".to_string(), vec![parse("IF x IS low THEN y IS low").unwrap()]),
            (
                "II".to_string(),
                vec![
                    parse("IF x IS low THEN y IS high").unwrap(),
                    parse("IF x IS high THEN y IS high").unwrap(),
                ],
            ),
        ];
        let resolution = resolve_conflicts(&rule_sets, ConflictPolicy::DropBoth);
        if resolution.conflicts.len() != 1 {
            return Err(format!("expected 1 conflict, got {}", resolution.conflicts.len()));
        }
        let removed: Vec<(&str, String)> = resolution
            .removed
            .iter()
            .map(|(id, r)| (id.as_str(), format_rule(r)))
            .collect();
        let want_removed = vec![
            ("I", "IF x IS low THEN y IS low".to_string()),
            ("II", "IF x IS low THEN y IS high".to_string()),
        ];
        if removed != want_removed {
            return Err(format!("removed {removed:?}, want {want_removed:?}"));
        }
        let kept: Vec<(String, Vec<String>)> = resolution
            .rule_sets
            .iter()
            .map(|(id, rules)| (id.clone(), rules.iter().map(format_rule).collect()))
            .collect();
        let want_kept = vec![
            ("I".to_string(), vec![]),
            ("II".to_string(), vec!["IF x IS high THEN y IS high".to_string()]),
        ];
        if kept != want_kept {
            return Err(format!("kept {kept:?}, want {want_kept:?}"));
        }
        Ok(())
    })());
}

// ---- 7: alpha-cut arithmetic ---------------------------------------

fn nested(cuts: &[fuzzrisk::fuznum::AlphaCut]) -> Result<(), String> {
    // Ascending alpha: every cut sits inside its predecessor, exactly.
    for pair in cuts.windows(2) {
        let (outer, inner) = (&pair[0], &pair[1]);
        if inner.interval.lo() < outer.interval.lo() || inner.interval.hi() > outer.interval.hi() {
            return Err(format!(
                "cut at alpha={} escapes the one at alpha={}",
                inner.alpha, outer.alpha
            ));
        }
    }
    Ok(())
}

#[test]
fn c07_alpha_cut_arithmetic() {
    check("07 alpha-cut arithmetic", (|| {
        let x = FuzzyNumber::triangle(1.0, 2.0, 4.0).map_err(s)?;
        let y = FuzzyNumber::triangle(10.0, 20.0, 25.0).map_err(s)?;

        // Triangular addition has a closed form: add the vertices.
        let closed = FuzzyNumber::triangle(11.0, 22.0, 29.0).map_err(s)?;
        let sums = arith(ArithOp::Add, &x, &y, 101).map_err(s)?;
        for cut in &sums {
            let want = alpha_cut(&closed, cut.alpha).map_err(s)?;
            near(cut.interval.lo(), want.lo(), 1e-12, &format!("sum lo at {}", cut.alpha))?;
            near(cut.interval.hi(), want.hi(), 1e-12, &format!("sum hi at {}", cut.alpha))?;
        }

        // Level-wise endpoints against the brute-force sup-min scan.
        for op in [ArithOp::Add, ArithOp::Sub] {
            let grid = 1001;
            let oracle = extension_oracle(op, &x, &y, grid).map_err(s)?;
            let tol = 2.0 * oracle.universe().span() / grid as f64;
            let cuts = arith(op, &x, &y, 100).map_err(s)?;
            for want_alpha in [0.25, 0.5, 0.75] {
                let cut = cuts
                    .iter()
                    .find(|c| (c.alpha - want_alpha).abs() < 1e-12)
                    .expect("level present at 100 levels");
                let from_oracle = alpha_cut_from_sampled(&oracle, want_alpha)
                    .ok_or_else(|| format!("oracle empty at alpha={want_alpha}"))?;
                near(cut.interval.lo(), from_oracle.lo(), tol, &format!("{op:?} lo at {want_alpha}"))?;
                near(cut.interval.hi(), from_oracle.hi(), tol, &format!("{op:?} hi at {want_alpha}"))?;
            }
        }

        // Nestedness is exact for every operation, divisor kept off 0.
        for op in [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div] {
            nested(&arith(op, &x, &y, 101).map_err(s)?)?;
        }
        let wide = FuzzyNumber::trapezoid(-8.0, -2.0, 3.0, 9.0).map_err(s)?;
        for op in [ArithOp::Add, ArithOp::Sub, ArithOp::Mul] {
            nested(&arith(op, &wide, &x, 101).map_err(s)?)?;
        }
        Ok(())
    })());
}

// ---- 8: simulation determinism and tails -----------------------------

fn sim_model() -> FuzzyModel {
    let x = LinguisticVariable::new(
        "x",
        VarKind::Input,
        Universe::new(0.0, 100.0).unwrap(),
        [
            ("low".to_string(), MembershipFunction::triangle(0.0, 0.0, 100.0).unwrap()),
            ("high".to_string(), MembershipFunction::triangle(0.0, 100.0, 100.0).unwrap()),
        ],
    )
    .unwrap();
    let loss = LinguisticVariable::new(
        "loss",
        VarKind::Output,
        Universe::new(0.0, 1000.0).unwrap(),
        [
            ("small".to_string(), MembershipFunction::triangle(0.0, 0.0, 600.0).unwrap()),
            ("large".to_string(), MembershipFunction::triangle(400.0, 1000.0, 1000.0).unwrap()),
        ],
    )
    .unwrap();
    let rules = vec![
        parse("IF x IS low THEN loss IS small").unwrap(),
        parse("IF x IS high THEN loss IS large").unwrap(),
    ];
    FuzzyModel::new(vec![x], vec![loss], rules, InferenceConfig::default()).unwrap()
}

#[test]
fn c08_simulation_determinism_and_percentiles() {
    check("08 simulation determinism and percentiles", (|| {
        let model = sim_model();
        let spec = SimulationSpec {
            distributions: BTreeMap::from([(
                "x".to_string(),
                Distribution::Uniform { lo: 5.0, hi: 95.0 },
            )]),
            n_samples: 2001,
            seed: 42,
        };
        let baseline = simulate_with_workers(&model, &spec, "loss", 1).map_err(s)?;
        for workers in [2, 3, 8] {
            let other = simulate_with_workers(&model, &spec, "loss", workers).map_err(s)?;
            let same = baseline.len() == other.len()
                && baseline
                    .samples()
                    .iter()
                    .zip(other.samples())
                    .all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                return Err(format!("samples differ between 1 and {workers} workers"));
            }
        }

        // Point inputs: the simulation is the plain inference, n times.
        let point_spec = SimulationSpec {
            distributions: BTreeMap::from([(
                "x".to_string(),
                Distribution::Point { value: 37.5 },
            )]),
            n_samples: 64,
            seed: 7,
        };
        let crisp = infer(&model, &Scenario::new([("x".to_string(), 37.5)]))
            .map_err(s)?
            .crisp("loss")
            .expect("output loss");
        let collapsed = simulate_with_workers(&model, &point_spec, "loss", 4).map_err(s)?;
        if !collapsed.samples().iter().all(|v| v.to_bits() == crisp.to_bits()) {
            return Err("point distributions did not collapse to the inferred value".to_string());
        }

        // Nearest-rank percentile on a known ladder.
        let ladder = LossDistribution::from_losses((1..=200).map(f64::from).collect()).map_err(s)?;
        let p995 = percentile(&ladder, 99.5).map_err(s)?;
        if p995 != 199.0 {
            return Err(format!("p99.5 of 1..=200: got {p995}, want 199"));
        }
        let mut prev = f64::NEG_INFINITY;
        let mut p = 0.5;
        while p < 100.0 {
            let v = percentile(&ladder, p).map_err(s)?;
            if v < prev {
                return Err(format!("percentile fell from {prev} to {v} at p={p}"));
            }
            prev = v;
            p += 0.5;
        }
        Ok(())
    })());
}

// ---- 9: ranking invariance ---------------------------------------------

fn exposure(id: &str, extreme: f64) -> RiskExposure {
    RiskExposure {
        id: id.to_string(),
        name: id.to_uppercase(),
        extreme_loss: extreme,
        tail_loss: None,
        tail_percentile: None,
        hedging_cost: None,
    }
}

#[test]
fn c09_ranking_invariance() {
    check("09 ranking invariance", (|| {
        let base = vec![
            exposure("cyber", 84.0),
            exposure("fraud", 12.5),
            exposure("quake", 91.25),
            exposure("churn", 43.0),
            exposure("flood", 67.0),
        ];

        let ranked = rank(&base, RankKey::ExtremeLoss).map_err(s)?;
        let mut got: Vec<&str> = ranked.iter().map(|e| e.id.as_str()).collect();
        let mut want: Vec<&str> = base.iter().map(|e| e.id.as_str()).collect();
        let order = got.clone();
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Err("ranking is not a permutation of its input".to_string());
        }

        // Same order from any input permutation and any uniform scale.
        let mut shuffled = base.clone();
        shuffled.rotate_left(2);
        shuffled.swap(0, 3);
        for k in [1.0, 7.3e-3, 5.0, 1e6] {
            let scaled: Vec<RiskExposure> = shuffled
                .iter()
                .map(|e| RiskExposure {
                    extreme_loss: e.extreme_loss * k,
                    ..e.clone()
                })
                .collect();
            let reranked = rank(&scaled, RankKey::ExtremeLoss).map_err(s)?;
            let reordered: Vec<&str> = reranked.iter().map(|e| e.id.as_str()).collect();
            if reordered != order {
                return Err(format!("order changed under scale {k}: {reordered:?}"));
            }
        }

        // Equal keys: ascending id breaks the tie.
        let tied = vec![exposure("zeta", 50.0), exposure("alpha", 50.0), exposure("mid", 50.0)];
        let tie_order: Vec<String> = rank(&tied, RankKey::ExtremeLoss)
            .map_err(s)?
            .into_iter()
            .map(|e| e.id)
            .collect();
        if tie_order != ["alpha", "mid", "zeta"] {
            return Err(format!("ties not broken by id: {tie_order:?}"));
        }

        // Max roll-up is the exact member maximum, no arithmetic.
        let hierarchy = Hierarchy::new(
            vec![
                BusinessUnit {
                    name: "ops".to_string(),
                    risks: vec!["cyber".to_string(), "fraud".to_string(), "churn".to_string()],
                },
                BusinessUnit {
                    name: "nature".to_string(),
                    risks: vec!["quake".to_string(), "flood".to_string()],
                },
            ],
            Combiner::Max,
        )
        .map_err(s)?;
        let rolled = rollup(&hierarchy, &base, RankKey::ExtremeLoss).map_err(s)?;
        let by_name: BTreeMap<&str, f64> =
            rolled.units.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        if by_name["ops"] != 84.0 || by_name["nature"] != 91.25 || rolled.enterprise != 91.25 {
            return Err(format!("max roll-up inexact: {:?}", rolled));
        }
        Ok(())
    })());
}

// ---- 10: CLI determinism and exit codes ------------------------------

const CLI_MODEL: &str = r#"{
  "variables": [
    {
      "name": "likelihood",
      "kind": "input",
      "universe": [0.0, 10.0],
      "terms": {
        "low":  {"shape": "triangle", "params": [0.0, 0.0, 6.0]},
        "high": {"shape": "triangle", "params": [4.0, 10.0, 10.0]}
      }
    },
    {
      "name": "loss",
      "kind": "output",
      "universe": [0.0, 500.0],
      "terms": {
        "minor": {"shape": "triangle", "params": [0.0, 0.0, 300.0]},
        "major": {"shape": "triangle", "params": [200.0, 500.0, 500.0]}
      }
    }
  ],
  "rules": [
    "IF likelihood IS low THEN loss IS minor",
    "IF likelihood IS high THEN loss IS major"
  ]
}"#;

const CLI_SCENARIOS: &str = "likelihood\n1.5\n5.0\n8.75\n";

const CLI_SIM: &str = r#"{
  "seed": 99,
  "samples": 500,
  "distributions": {
    "likelihood": {"triangular": {"lo": 0.5, "mode": 4.0, "hi": 9.5}}
  }
}"#;

fn cli_portfolio(dir: &std::path::Path) -> String {
    let mut doc = String::from("{\n  \"risks\": [\n");
    for (id, scenario) in [("alpha", 8.0), ("beta", 6.5)] {
        write!(
            doc,
            r#"    {{
      "id": "{id}",
      "model_path": "model.json",
      "loss_output": "loss",
      "extreme_scenario": {{"likelihood": {scenario}}},
      "hedging_cost": 25.0
    }},
"#
        )
        .unwrap();
    }
    doc.truncate(doc.len() - 2);
    doc.push_str("\n  ]\n}\n");
    std::fs::write(dir.join("portfolio.json"), &doc).unwrap();
    doc
}

fn cli() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fuzzrisk"));
    cmd.env_remove("FUZZRISK_GRID");
    cmd
}

fn run_twice(args: &[&str]) -> Result<Vec<u8>, String> {
    let first = cli().args(args).output().map_err(s)?;
    if !first.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&first.stderr)
        ));
    }
    let second = cli().args(args).output().map_err(s)?;
    if first.stdout != second.stdout {
        return Err(format!("{args:?} output differs between invocations"));
    }
    Ok(first.stdout)
}

#[test]
fn c10_cli_determinism_and_exit_codes() {
    check("10 CLI determinism and exit codes", (|| {
        let dir = tempfile::tempdir().map_err(s)?;
        let path = |name: &str| dir.path().join(name).display().to_string();
        std::fs::write(dir.path().join("model.json"), CLI_MODEL).map_err(s)?;
        std::fs::write(dir.path().join("scen.csv"), CLI_SCENARIOS).map_err(s)?;
        std::fs::write(dir.path().join("sim.json"), CLI_SIM).map_err(s)?;
        std::fs::write(dir.path().join("broken.json"), "{\"variables\": [], \"rules\": []}")
            .map_err(s)?;
        cli_portfolio(dir.path());

        // Identical invocations, identical bytes.
        let model = path("model.json");
        run_twice(&["infer", "--model", &model, "--scenario", &path("scen.csv"), "--explain"])?;
        run_twice(&["infer", "--model", &model, "--scenario", &path("scen.csv"), "--format", "csv"])?;
        run_twice(&["simulate", "--model", &model, "--sim", &path("sim.json")])?;
        run_twice(&["rank", "--portfolio", &path("portfolio.json"), "--format", "csv"])?;
        run_twice(&["rank", "--portfolio", &path("portfolio.json")])?;

        // Exit codes: 0 success, 2 domain, 3 I/O.
        let matrix: Vec<(Vec<String>, i32)> = vec![
            (vec!["validate".into(), "--model".into(), model.clone()], 0),
            (
                vec![
                    "fuzzmath".into(), "--op".into(), "add".into(),
                    "--x".into(), r#"{"triangle":[0,1,2]}"#.into(),
                    "--y".into(), r#"{"trapezoid":[1,2,3,4]}"#.into(),
                ],
                0,
            ),
            (vec!["validate".into(), "--model".into(), path("broken.json")], 2),
            (
                vec![
                    "fuzzmath".into(), "--op".into(), "div".into(),
                    "--x".into(), r#"{"triangle":[0,1,2]}"#.into(),
                    "--y".into(), r#"{"triangle":[-1,0,1]}"#.into(),
                ],
                2,
            ),
            (vec!["validate".into(), "--model".into(), path("absent.json")], 3),
            (
                vec![
                    "infer".into(), "--model".into(), model.clone(),
                    "--scenario".into(), path("absent.csv"),
                ],
                3,
            ),
            (
                vec![
                    "simulate".into(), "--model".into(), model.clone(),
                    "--sim".into(), path("absent.json"),
                ],
                3,
            ),
            (vec!["rank".into(), "--portfolio".into(), path("absent.json")], 3),
        ];
        for (args, want) in &matrix {
            let out = cli().args(args).output().map_err(s)?;
            let got = out.status.code();
            if got != Some(*want) {
                return Err(format!("{args:?}: exit {got:?}, want {want}"));
            }
        }

        // Bad grid override is a domain error, not a crash.
        let out = cli()
            .env("FUZZRISK_GRID", "abc")
            .args(["validate", "--model", &model])
            .output()
            .map_err(s)?;
        if out.status.code() != Some(2) {
            return Err(format!(
                "garbage FUZZRISK_GRID: exit {:?}, want 2",
                out.status.code()
            ));
        }
        Ok(())
    })());
}
