//! Membership functions over bounded universes.
//!
//! A membership function maps a crisp value to a degree in `[0, 1]`.
//! Analytic shapes (triangle, trapezoid, Gaussian, generalized bell,
//! sigmoid) are evaluated in closed form; [`Sampled`] functions are
//! piecewise-linear interpolants over an explicit grid.
//!
//! Support and core are reported as the smallest closed intervals
//! containing `{x : mu(x) > SUPPORT_EPSILON}` and
//! `{x : mu(x) >= 1 - CORE_EPSILON}` respectively, intersected with the
//! universe. For tail shapes that never reach zero (Gaussian, bell,
//! sigmoid) the thresholds make both sets well defined.

use thiserror::Error;

/// Degrees at or below this threshold count as zero for support extraction.
pub const SUPPORT_EPSILON: f64 = 1e-12;
/// Degrees at or above `1 - CORE_EPSILON` count as full membership.
pub const CORE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MembershipError {
    #[error("universe requires lo < hi with finite bounds, got [{lo}, {hi}]")]
    InvalidUniverse { lo: f64, hi: f64 },
    #[error("invalid {shape} parameters: {reason}")]
    InvalidShape { shape: &'static str, reason: String },
    #[error("membership evaluation requires a finite input, got {0}")]
    NonFiniteInput(f64),
    #[error("{x} lies outside the sampled universe [{lo}, {hi}]")]
    OutOfUniverse { x: f64, lo: f64, hi: f64 },
    #[error("membership function is identically zero on [{lo}, {hi}]")]
    EmptySupport { lo: f64, hi: f64 },
    #[error("sampling requires at least 2 grid points, got {0}")]
    InvalidResolution(usize),
    #[error("sampled points must be strictly increasing in x")]
    UnorderedSamples,
    #[error("sampled degree {0} lies outside [0, 1]")]
    DegreeOutOfRange(f64),
    #[error("blend weights must be non-negative, got {0}")]
    NegativeWeight(f64),
    #[error("blend weights must not all be zero")]
    DegenerateWeights,
    #[error("blend got {mfs} membership functions but {weights} weights")]
    LengthMismatch { mfs: usize, weights: usize },
}

/// A closed, bounded, non-degenerate interval of crisp values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Universe {
    lo: f64,
    hi: f64,
}

impl Universe {
    pub fn new(lo: f64, hi: f64) -> Result<Self, MembershipError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MembershipError::InvalidUniverse { lo, hi });
        }
        Ok(Universe { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Evenly spaced grid with both endpoints included exactly.
    pub fn grid(&self, points: usize) -> Result<Vec<f64>, MembershipError> {
        if points < 2 {
            return Err(MembershipError::InvalidResolution(points));
        }
        let step = self.span() / (points - 1) as f64;
        let mut xs = Vec::with_capacity(points);
        for i in 0..points {
            xs.push(self.lo + i as f64 * step);
        }
        // Pin the last point: accumulated rounding must not shave the bound.
        xs[points - 1] = self.hi;
        Ok(xs)
    }
}

/// A closed interval `[lo, hi]` with `lo <= hi`; zero width is allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either bound is non-finite; callers are
    /// expected to order bounds before constructing.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "interval bounds must be finite and ordered: [{lo}, {hi}]"
        );
        Interval { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// True when `self` is contained in `other` (both ends inclusive).
    pub fn within(&self, other: &Interval) -> bool {
        self.lo >= other.lo && self.hi <= other.hi
    }
}

/// Piecewise-linear membership function over an explicit grid.
///
/// Points are strictly increasing in x, degrees lie in `[0, 1]`, and
/// evaluation outside the universe is an error rather than an implicit
/// zero: a sampled function carries no information beyond its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    universe: Universe,
    points: Vec<(f64, f64)>,
}

impl Sampled {
    pub fn new(universe: Universe, points: Vec<(f64, f64)>) -> Result<Self, MembershipError> {
        if points.len() < 2 {
            return Err(MembershipError::InvalidResolution(points.len()));
        }
        for pair in points.windows(2) {
            if !(pair[0].0 < pair[1].0) {
                return Err(MembershipError::UnorderedSamples);
            }
        }
        for &(x, y) in &points {
            if !x.is_finite() || !universe.contains(x) {
                return Err(MembershipError::OutOfUniverse {
                    x,
                    lo: universe.lo,
                    hi: universe.hi,
                });
            }
            if !(y.is_finite() && (0.0..=1.0).contains(&y)) {
                return Err(MembershipError::DegreeOutOfRange(y));
            }
        }
        Ok(Sampled { universe, points })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn evaluate(&self, x: f64) -> Result<f64, MembershipError> {
        if !x.is_finite() {
            return Err(MembershipError::NonFiniteInput(x));
        }
        let (first, last) = (self.points[0].0, self.points[self.points.len() - 1].0);
        if x < first || x > last {
            return Err(MembershipError::OutOfUniverse {
                x,
                lo: first,
                hi: last,
            });
        }
        // Index of the first point strictly beyond x.
        let idx = self.points.partition_point(|&(px, _)| px <= x);
        if idx == self.points.len() {
            return Ok(self.points[idx - 1].1);
        }
        let (x0, y0) = self.points[idx - 1];
        if x == x0 {
            return Ok(y0);
        }
        let (x1, y1) = self.points[idx];
        let t = (x - x0) / (x1 - x0);
        Ok((y0 + t * (y1 - y0)).clamp(0.0, 1.0))
    }

    /// Builds the pointwise result of `f(x, mu(x))` over the same grid.
    pub(crate) fn map(&self, mut f: impl FnMut(f64, f64) -> f64) -> Sampled {
        let points = self
            .points
            .iter()
            .map(|&(x, y)| (x, f(x, y).clamp(0.0, 1.0)))
            .collect();
        Sampled {
            universe: self.universe,
            points,
        }
    }
}

/// A membership function shape. Closed-form shapes keep their defining
/// parameters; `Sampled` wraps an explicit grid.
#[derive(Debug, Clone, PartialEq)]
pub enum MembershipFunction {
    /// Vertices `a <= b <= c`, `a < c`; peak 1 at `b`.
    Triangle { a: f64, b: f64, c: f64 },
    /// Shoulders `a <= b <= c <= d`, `a < d`; plateau 1 on `[b, c]`.
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
    /// `exp(-(x - mean)^2 / (2 sigma^2))`, `sigma > 0`.
    Gaussian { mean: f64, sigma: f64 },
    /// `1 / (1 + |(x - c) / a|^(2b))`, `a > 0`, `b > 0`.
    GeneralizedBell { a: f64, b: f64, c: f64 },
    /// `1 / (1 + exp(-a (x - c)))`.
    Sigmoid { a: f64, c: f64 },
    Sampled(Sampled),
}

impl MembershipFunction {
    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self, MembershipError> {
        let mf = MembershipFunction::Triangle { a, b, c };
        mf.validate()?;
        Ok(mf)
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self, MembershipError> {
        let mf = MembershipFunction::Trapezoid { a, b, c, d };
        mf.validate()?;
        Ok(mf)
    }

    pub fn gaussian(mean: f64, sigma: f64) -> Result<Self, MembershipError> {
        let mf = MembershipFunction::Gaussian { mean, sigma };
        mf.validate()?;
        Ok(mf)
    }

    pub fn generalized_bell(a: f64, b: f64, c: f64) -> Result<Self, MembershipError> {
        let mf = MembershipFunction::GeneralizedBell { a, b, c };
        mf.validate()?;
        Ok(mf)
    }

    pub fn sigmoid(a: f64, c: f64) -> Result<Self, MembershipError> {
        let mf = MembershipFunction::Sigmoid { a, c };
        mf.validate()?;
        Ok(mf)
    }

    /// Checks shape invariants; needed for values built field-by-field.
    pub fn validate(&self) -> Result<(), MembershipError> {
        fn invalid(shape: &'static str, reason: String) -> MembershipError {
            MembershipError::InvalidShape { shape, reason }
        }
        match *self {
            MembershipFunction::Triangle { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(invalid("triangle", format!("non-finite ({a}, {b}, {c})")));
                }
                if !(a <= b && b <= c && a < c) {
                    return Err(invalid(
                        "triangle",
                        format!("requires a <= b <= c and a < c, got ({a}, {b}, {c})"),
                    ));
                }
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
                    return Err(invalid(
                        "trapezoid",
                        format!("non-finite ({a}, {b}, {c}, {d})"),
                    ));
                }
                if !(a <= b && b <= c && c <= d && a < d) {
                    return Err(invalid(
                        "trapezoid",
                        format!("requires a <= b <= c <= d and a < d, got ({a}, {b}, {c}, {d})"),
                    ));
                }
            }
            MembershipFunction::Gaussian { mean, sigma } => {
                if !(mean.is_finite() && sigma.is_finite() && sigma > 0.0) {
                    return Err(invalid(
                        "gaussian",
                        format!("requires finite mean and sigma > 0, got ({mean}, {sigma})"),
                    ));
                }
            }
            MembershipFunction::GeneralizedBell { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite() && a > 0.0 && b > 0.0) {
                    return Err(invalid(
                        "bell",
                        format!("requires a > 0, b > 0, finite c, got ({a}, {b}, {c})"),
                    ));
                }
            }
            MembershipFunction::Sigmoid { a, c } => {
                if !(a.is_finite() && c.is_finite()) {
                    return Err(invalid("sigmoid", format!("non-finite ({a}, {c})")));
                }
            }
            MembershipFunction::Sampled(_) => {}
        }
        Ok(())
    }

    /// Membership degree of `x`, always in `[0, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<f64, MembershipError> {
        if !x.is_finite() {
            return Err(MembershipError::NonFiniteInput(x));
        }
        let mu = match *self {
            MembershipFunction::Triangle { a, b, c } => {
                if x < a || x > c {
                    0.0
                } else if x == b {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (c - x) / (c - b)
                }
            }
            MembershipFunction::Trapezoid { a, b, c, d } => {
                if x < a || x > d {
                    0.0
                } else if x >= b && x <= c {
                    1.0
                } else if x < b {
                    (x - a) / (b - a)
                } else {
                    (d - x) / (d - c)
                }
            }
            MembershipFunction::Gaussian { mean, sigma } => {
                let t = (x - mean) / sigma;
                (-0.5 * t * t).exp()
            }
            MembershipFunction::GeneralizedBell { a, b, c } => {
                let t = ((x - c) / a).abs();
                1.0 / (1.0 + t.powf(2.0 * b))
            }
            MembershipFunction::Sigmoid { a, c } => 1.0 / (1.0 + (-a * (x - c)).exp()),
            MembershipFunction::Sampled(ref s) => return s.evaluate(x),
        };
        Ok(mu.clamp(0.0, 1.0))
    }
}

/// Smallest closed interval containing `{x : mu(x) > SUPPORT_EPSILON}`,
/// intersected with `universe`. Identically-zero functions are an error.
pub fn support(
    mf: &MembershipFunction,
    universe: &Universe,
) -> Result<Interval, MembershipError> {
    let eps = SUPPORT_EPSILON;
    let raw = match *mf {
        MembershipFunction::Triangle { a, c, .. } => (a, c),
        MembershipFunction::Trapezoid { a, d, .. } => (a, d),
        MembershipFunction::Gaussian { mean, sigma } => {
            let r = sigma * (-2.0 * eps.ln()).sqrt();
            (mean - r, mean + r)
        }
        MembershipFunction::GeneralizedBell { a, b, c } => {
            let r = a * (1.0 / eps - 1.0).powf(1.0 / (2.0 * b));
            (c - r, c + r)
        }
        MembershipFunction::Sigmoid { a, c } => {
            if a == 0.0 {
                // Constant 1/2 everywhere.
                (universe.lo, universe.hi)
            } else {
                // mu > eps solves to a half line ending at the cut point.
                let cut = c - (1.0 / eps - 1.0).ln() / a;
                if a > 0.0 {
                    (cut, f64::MAX)
                } else {
                    (-f64::MAX, cut)
                }
            }
        }
        MembershipFunction::Sampled(ref s) => {
            return scan_level_set(s, eps, false)
                .ok_or(MembershipError::EmptySupport {
                    lo: universe.lo,
                    hi: universe.hi,
                })
                .and_then(|(lo, hi)| clip_to_universe(lo, hi, universe));
        }
    };
    clip_to_universe(raw.0, raw.1, universe).and_then(|iv| {
        // A clipped shape can degenerate to a boundary point where mu = 0.
        if iv.width() == 0.0 && mf.evaluate(iv.lo())? <= eps {
            return Err(MembershipError::EmptySupport {
                lo: universe.lo,
                hi: universe.hi,
            });
        }
        Ok(iv)
    })
}

/// Smallest closed interval containing `{x : mu(x) >= 1 - CORE_EPSILON}`,
/// intersected with `universe`; `None` if the function never gets there.
pub fn core(mf: &MembershipFunction, universe: &Universe) -> Option<Interval> {
    let theta = 1.0 - CORE_EPSILON;
    let raw = match *mf {
        MembershipFunction::Triangle { a, b, c } => {
            (b - CORE_EPSILON * (b - a), b + CORE_EPSILON * (c - b))
        }
        MembershipFunction::Trapezoid { a, b, c, d } => {
            (b - CORE_EPSILON * (b - a), c + CORE_EPSILON * (d - c))
        }
        MembershipFunction::Gaussian { mean, sigma } => {
            let r = sigma * (-2.0 * theta.ln()).sqrt();
            (mean - r, mean + r)
        }
        MembershipFunction::GeneralizedBell { a, b, c } => {
            let r = a * (1.0 / theta - 1.0).powf(1.0 / (2.0 * b));
            (c - r, c + r)
        }
        MembershipFunction::Sigmoid { a, c } => {
            if a == 0.0 {
                return None;
            }
            let cut = c + (theta / (1.0 - theta)).ln() / a;
            if a > 0.0 {
                (cut, f64::MAX)
            } else {
                (-f64::MAX, cut)
            }
        }
        MembershipFunction::Sampled(ref s) => {
            let (lo, hi) = scan_level_set(s, theta, true)?;
            return clip_to_universe(lo, hi, universe).ok();
        }
    };
    clip_to_universe(raw.0, raw.1, universe).ok()
}

fn clip_to_universe(lo: f64, hi: f64, universe: &Universe) -> Result<Interval, MembershipError> {
    let lo = lo.max(universe.lo);
    let hi = hi.min(universe.hi);
    if lo > hi {
        return Err(MembershipError::EmptySupport {
            lo: universe.lo,
            hi: universe.hi,
        });
    }
    Ok(Interval::new(lo, hi))
}

/// Smallest closed interval containing the level set of a
/// piecewise-linear function: `{x : mu(x) > threshold}` when
/// `inclusive` is false, `{x : mu(x) >= threshold}` when true.
/// Boundary crossings inside a segment are linearly interpolated.
fn scan_level_set(s: &Sampled, threshold: f64, inclusive: bool) -> Option<(f64, f64)> {
    let pts = s.points();
    let inside = |y: f64| if inclusive { y >= threshold } else { y > threshold };
    let cross = |(x0, y0): (f64, f64), (x1, y1): (f64, f64)| -> f64 {
        // y0 != y1 here: `inside` flips across the segment.
        x0 + (threshold - y0) / (y1 - y0) * (x1 - x0)
    };

    let i = pts.iter().position(|&(_, y)| inside(y))?;
    let lo = if i == 0 {
        pts[0].0
    } else {
        cross(pts[i - 1], pts[i])
    };
    let j = pts.iter().rposition(|&(_, y)| inside(y))?;
    let hi = if j == pts.len() - 1 {
        pts[j].0
    } else {
        cross(pts[j + 1], pts[j])
    };
    Some((lo, hi))
}

/// Samples `mf` on an even `points`-point grid over `universe`.
pub fn sample(
    mf: &MembershipFunction,
    universe: &Universe,
    points: usize,
) -> Result<Sampled, MembershipError> {
    let xs = universe.grid(points)?;
    let mut pts = Vec::with_capacity(xs.len());
    for x in xs {
        pts.push((x, mf.evaluate(x)?));
    }
    Sampled::new(*universe, pts)
}

/// Weighted pointwise mean of several membership functions on a shared
/// grid. Weights are non-negative and not all zero; each grid value is
/// `sum(w_i * mu_i(x)) / sum(w_i)`, a convex combination.
pub fn blend(
    mfs: &[MembershipFunction],
    weights: &[f64],
    universe: &Universe,
    points: usize,
) -> Result<Sampled, MembershipError> {
    if mfs.len() != weights.len() {
        return Err(MembershipError::LengthMismatch {
            mfs: mfs.len(),
            weights: weights.len(),
        });
    }
    for &w in weights {
        if !(w.is_finite() && w >= 0.0) {
            return Err(MembershipError::NegativeWeight(w));
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(MembershipError::DegenerateWeights);
    }
    let xs = universe.grid(points)?;
    let mut pts = Vec::with_capacity(xs.len());
    for x in xs {
        let mut acc = 0.0;
        for (mf, &w) in mfs.iter().zip(weights) {
            acc += w * mf.evaluate(x)?;
        }
        // Convex combination of degrees; clamp absorbs last-bit rounding.
        pts.push((x, (acc / total).clamp(0.0, 1.0)));
    }
    Sampled::new(*universe, pts)
}
