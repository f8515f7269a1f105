//! Fuzzy numbers and alpha-cut interval arithmetic.
//!
//! A fuzzy number here is a normal, convex triangular or trapezoidal
//! shape; degenerate (crisp) numbers with zero-width support are
//! allowed. The alpha-cut of a fuzzy number is a closed interval, and
//! arithmetic runs level-by-level on those intervals:
//!
//! * add: `[xl + yl, xu + yu]`
//! * sub: `[xl - yu, xu - yl]`
//! * mul/div: min and max over the four endpoint products/quotients
//!
//! [`extension_oracle`] computes the same operation by brute force
//! from the extension principle (sup-min over a dense grid of operand
//! pairs). It is deliberately independent of the interval route so the
//! two can check each other.

use crate::membership::{Interval, MembershipError, Sampled, Universe};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FuzzNumError {
    #[error("invalid fuzzy number: {0}")]
    InvalidShape(String),
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("alpha levels must be at least 2, got {0}")]
    InvalidLevels(usize),
    #[error("extension oracle needs at least 101 grid points, got {0}")]
    InvalidGrid(usize),
    #[error("division requires 0 outside the divisor's support [{lo}, {hi}]")]
    DivisorSpansZero { lo: f64, hi: f64 },
    #[error(transparent)]
    Membership(#[from] MembershipError),
}

/// Normal, convex fuzzy quantity. Unlike model membership functions,
/// zero-width (crisp singleton) shapes are legal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FuzzyNumber {
    /// `a <= b <= c`; membership 1 at `b`.
    Triangle { a: f64, b: f64, c: f64 },
    /// `a <= b <= c <= d`; membership 1 on `[b, c]`.
    Trapezoid { a: f64, b: f64, c: f64, d: f64 },
}

impl FuzzyNumber {
    pub fn triangle(a: f64, b: f64, c: f64) -> Result<Self, FuzzNumError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && a <= b && b <= c) {
            return Err(FuzzNumError::InvalidShape(format!(
                "triangle requires finite a <= b <= c, got ({a}, {b}, {c})"
            )));
        }
        Ok(FuzzyNumber::Triangle { a, b, c })
    }

    pub fn trapezoid(a: f64, b: f64, c: f64, d: f64) -> Result<Self, FuzzNumError> {
        if !(a.is_finite()
            && b.is_finite()
            && c.is_finite()
            && d.is_finite()
            && a <= b
            && b <= c
            && c <= d)
        {
            return Err(FuzzNumError::InvalidShape(format!(
                "trapezoid requires finite a <= b <= c <= d, got ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(FuzzyNumber::Trapezoid { a, b, c, d })
    }

    /// Crisp value as a zero-width fuzzy number.
    pub fn crisp(value: f64) -> Result<Self, FuzzNumError> {
        FuzzyNumber::triangle(value, value, value)
    }

    pub fn support(&self) -> Interval {
        match *self {
            FuzzyNumber::Triangle { a, c, .. } => Interval::new(a, c),
            FuzzyNumber::Trapezoid { a, d, .. } => Interval::new(a, d),
        }
    }

    /// Membership degree; piecewise linear, 1 on the core.
    pub fn evaluate(&self, x: f64) -> f64 {
        let (a, b, c, d) = match *self {
            FuzzyNumber::Triangle { a, b, c } => (a, b, b, c),
            FuzzyNumber::Trapezoid { a, b, c, d } => (a, b, c, d),
        };
        if x < a || x > d {
            0.0
        } else if x >= b && x <= c {
            1.0
        } else if x < b {
            // b > a here, since a <= x < b.
            ((x - a) / (b - a)).clamp(0.0, 1.0)
        } else {
            ((d - x) / (d - c)).clamp(0.0, 1.0)
        }
    }
}

/// The alpha-cut `{x : mu(x) >= alpha}` as a closed interval, for
/// `alpha` in `(0, 1]`. Cuts shrink as alpha grows (nestedness); each
/// endpoint's closed form is monotone in alpha even after rounding,
/// and alpha = 1 returns the stored core outright so the top cut is
/// exact rather than reconstructed.
pub fn alpha_cut(x: &FuzzyNumber, alpha: f64) -> Result<Interval, FuzzNumError> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
        return Err(FuzzNumError::InvalidAlpha(alpha));
    }
    let (mut lo, mut hi) = match *x {
        FuzzyNumber::Triangle { a, b, c } => {
            if alpha == 1.0 {
                (b, b)
            } else {
                (a + alpha * (b - a), c - alpha * (c - b))
            }
        }
        FuzzyNumber::Trapezoid { a, b, c, d } => {
            if alpha == 1.0 {
                (b, c)
            } else {
                (a + alpha * (b - a), d - alpha * (d - c))
            }
        }
    };
    // The two sides are rounded independently; on a near-degenerate
    // cut they can cross by an ulp. Mathematically lo <= hi always.
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    Ok(Interval::new(lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// One level of an alpha-cut decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCut {
    pub alpha: f64,
    pub interval: Interval,
}

fn interval_op(op: ArithOp, x: Interval, y: Interval) -> Interval {
    let (xl, xu) = (x.lo(), x.hi());
    let (yl, yu) = (y.lo(), y.hi());
    match op {
        ArithOp::Add => Interval::new(xl + yl, xu + yu),
        ArithOp::Sub => Interval::new(xl - yu, xu - yl),
        ArithOp::Mul => {
            let candidates = [xl * yl, xl * yu, xu * yl, xu * yu];
            Interval::new(fold_min(&candidates), fold_max(&candidates))
        }
        ArithOp::Div => {
            // 0 outside [yl, yu] checked by the caller.
            let candidates = [xl / yl, xl / yu, xu / yl, xu / yu];
            Interval::new(fold_min(&candidates), fold_max(&candidates))
        }
    }
}

fn fold_min(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

fn fold_max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn check_divisor(op: ArithOp, y: &FuzzyNumber) -> Result<(), FuzzNumError> {
    if op == ArithOp::Div {
        let s = y.support();
        if s.lo() <= 0.0 && s.hi() >= 0.0 {
            return Err(FuzzNumError::DivisorSpansZero {
                lo: s.lo(),
                hi: s.hi(),
            });
        }
    }
    Ok(())
}

/// Level-wise interval arithmetic at alphas `j / levels` for
/// `j = 1..=levels`; the result is a nested family of cuts.
pub fn arith(
    op: ArithOp,
    x: &FuzzyNumber,
    y: &FuzzyNumber,
    levels: usize,
) -> Result<Vec<AlphaCut>, FuzzNumError> {
    if levels < 2 {
        return Err(FuzzNumError::InvalidLevels(levels));
    }
    check_divisor(op, y)?;
    let mut cuts = Vec::with_capacity(levels);
    for j in 1..=levels {
        let alpha = j as f64 / levels as f64;
        let cx = alpha_cut(x, alpha)?;
        let cy = alpha_cut(y, alpha)?;
        cuts.push(AlphaCut {
            alpha,
            interval: interval_op(op, cx, cy),
        });
    }
    Ok(cuts)
}

/// Brute-force extension principle:
/// `mu(z) = sup { min(mu_x(u), mu_y(v)) : u op v = z }`, approximated
/// by scanning `grid x grid` operand pairs over the supports and
/// accumulating the max into the nearest output grid bucket.
pub fn extension_oracle(
    op: ArithOp,
    x: &FuzzyNumber,
    y: &FuzzyNumber,
    grid: usize,
) -> Result<Sampled, FuzzNumError> {
    if grid < 101 {
        return Err(FuzzNumError::InvalidGrid(grid));
    }
    check_divisor(op, y)?;

    let z_range = interval_op(op, x.support(), y.support());
    // A degenerate range (both operands crisp) still needs a real grid.
    let (zlo, zhi) = if z_range.width() > 0.0 {
        (z_range.lo(), z_range.hi())
    } else {
        (z_range.lo() - 0.5, z_range.hi() + 0.5)
    };
    let universe = Universe::new(zlo, zhi)?;
    let zs = universe.grid(grid)?;
    let mut degrees = vec![0.0f64; grid];
    let step = (zhi - zlo) / (grid - 1) as f64;

    // Even grid over the support, plus the core vertices so the
    // sup-min surface attains 1 exactly somewhere.
    let operand_grid = |n: &FuzzyNumber| -> Vec<f64> {
        let iv = n.support();
        let mut g = if iv.width() == 0.0 {
            vec![iv.lo()]
        } else {
            let step = iv.width() / (grid - 1) as f64;
            (0..grid).map(|i| iv.lo() + i as f64 * step).collect()
        };
        match *n {
            FuzzyNumber::Triangle { b, .. } => g.push(b),
            FuzzyNumber::Trapezoid { b, c, .. } => {
                g.push(b);
                g.push(c);
            }
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    };
    let us = operand_grid(x);
    let vs = operand_grid(y);

    for &u in &us {
        let mu_u = x.evaluate(u);
        if mu_u == 0.0 {
            continue;
        }
        for &v in &vs {
            let m = mu_u.min(y.evaluate(v));
            if m == 0.0 {
                continue;
            }
            let z = match op {
                ArithOp::Add => u + v,
                ArithOp::Sub => u - v,
                ArithOp::Mul => u * v,
                ArithOp::Div => u / v,
            };
            let idx = (((z - zlo) / step).round() as isize).clamp(0, grid as isize - 1) as usize;
            if m > degrees[idx] {
                degrees[idx] = m;
            }
        }
    }

    let points: Vec<(f64, f64)> = zs.into_iter().zip(degrees).collect();
    Ok(Sampled::new(universe, points)?)
}

/// Alpha-cut of a sampled set: smallest closed interval containing
/// `{x : mu(x) >= alpha}`, with linear interpolation at the crossings.
/// `None` when the set never reaches `alpha`.
pub fn alpha_cut_from_sampled(s: &Sampled, alpha: f64) -> Option<Interval> {
    let pts = s.points();
    let cross = |(x0, y0): (f64, f64), (x1, y1): (f64, f64)| -> f64 {
        x0 + (alpha - y0) / (y1 - y0) * (x1 - x0)
    };
    let i = pts.iter().position(|&(_, y)| y >= alpha)?;
    let lo = if i == 0 { pts[0].0 } else { cross(pts[i - 1], pts[i]) };
    let j = pts.iter().rposition(|&(_, y)| y >= alpha)?;
    let hi = if j == pts.len() - 1 {
        pts[j].0
    } else {
        cross(pts[j + 1], pts[j])
    };
    Some(Interval::new(lo.min(hi), lo.max(hi)))
}
