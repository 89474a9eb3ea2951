//! Subsequence surgery: the comparison function between two characteristic
//! logarithms, the subsequence it selects, and the double-point adjustment
//! that separates the selected exponents from the original ones.

use crate::error::{MuntzError, Result};
use crate::sequences::{EpsilonTable, ExponentSequence, StepAccumulator};
use crate::special::EULER_GAMMA;

/// Fraction of the horizon on which "for all x" checks are performed.
pub const HORIZON_MARGIN: f64 = 0.9;

/// Relative slack for `[Phi]`: each jump of `phi` is a difference of sums of
/// size `lambda(horizon)`, so rounding in `Phi` grows with the number of jumps.
const FLOOR_SLACK: f64 = 1e-9;

fn slack_floor(v: f64) -> f64 {
    (v + FLOOR_SLACK * v.abs().max(1.0)).floor()
}

/// `phi(x) = inf { lambda'(s) - lambda(s) : x <= s <= horizon }` as an
/// offset plus a nondecreasing step function.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPhi {
    /// `phi(0)`, which may be negative.
    pub initial: f64,
    pub steps: StepAccumulator,
    pub horizon: f64,
}

impl ComparisonPhi {
    pub fn value_at(&self, x: f64) -> f64 {
        self.initial + self.steps.value_at(x)
    }
}

fn merged_points(a: &ExponentSequence, b: &ExponentSequence, horizon: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = a.values().iter().chain(b.values()).copied().filter(|&p| p <= horizon).collect();
    pts.push(0.0);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

/// The difference `lambda'(s) - lambda(s)` on each constancy interval,
/// starting at the returned points.
fn difference_profile(lambda: &ExponentSequence, lambda_prime: &ExponentSequence, horizon: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let pts = merged_points(lambda, lambda_prime, horizon);
    let diffs = pts
        .iter()
        .map(|&p| Ok(lambda_prime.characteristic_logarithm(p)? - lambda.characteristic_logarithm(p)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok((pts, diffs))
}

pub fn comparison_phi(lambda: &ExponentSequence, lambda_prime: &ExponentSequence, horizon: f64) -> Result<ComparisonPhi> {
    if !(horizon > 0.0) {
        return Err(MuntzError::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let (pts, diffs) = difference_profile(lambda, lambda_prime, horizon)?;
    let window_min = |lo: f64, hi: f64| {
        pts.iter()
            .zip(&diffs)
            .filter(|(&p, _)| p >= lo * horizon && p < hi * horizon)
            .map(|(_, &d)| d)
            .fold(f64::INFINITY, f64::min)
    };
    let edge = window_min(0.9, 1.0 + 1e-12);
    let before = window_min(0.8, 0.9);
    if edge < before - 1e-9 {
        return Err(MuntzError::HorizonTooSmall { horizon });
    }
    let mut suffix = diffs.clone();
    for i in (0..suffix.len().saturating_sub(1)).rev() {
        suffix[i] = suffix[i].min(suffix[i + 1]);
    }
    let mut points = Vec::new();
    let mut sizes = Vec::new();
    for i in 1..suffix.len() {
        let jump = suffix[i] - suffix[i - 1];
        if jump > 1e-15 {
            points.push(pts[i]);
            sizes.push(jump);
        }
    }
    Ok(ComparisonPhi { initial: suffix[0], steps: StepAccumulator::new(points, sizes)?, horizon })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryResult {
    pub lambda_star: Vec<f64>,
    /// `A1` from the finite model in which `Phi` is frozen past the horizon.
    pub a1: f64,
    /// Mean of `lambda + lambda* - lambda'` over the upper half of the checked window.
    pub a1_tail_average: f64,
    /// `(x, lambda(x) + lambda*(x) - lambda'(x) - A1)`
    pub residual_table: Vec<(f64, f64)>,
    pub horizon: f64,
}

impl SurgeryResult {
    pub fn lambda_star_sequence(&self) -> Result<ExponentSequence> {
        ExponentSequence::explicit(self.lambda_star.clone())
    }

    /// `lambda*(x)`.
    pub fn star_logarithm(&self, x: f64) -> f64 {
        self.lambda_star.iter().take_while(|&&v| v <= x).map(|v| v.recip()).sum()
    }

    pub fn residual(&self, lambda: &ExponentSequence, lambda_prime: &ExponentSequence, x: f64) -> Result<f64> {
        Ok(lambda.characteristic_logarithm(x)? + self.star_logarithm(x) - lambda_prime.characteristic_logarithm(x)? - self.a1)
    }
}

/// `Phi(t) = sum_{a <= t} a * dphi(a)`; the subsequence sits where `[Phi]` increments.
pub fn build_lambda_star(phi: &ComparisonPhi, lambda: &ExponentSequence, lambda_prime: &ExponentSequence) -> Result<SurgeryResult> {
    let horizon = phi.horizon;
    let mut big_phi = 0.0;
    let mut stars = Vec::new();
    // (left endpoint, frac(Phi)) on each constancy interval of Phi
    let mut pieces = vec![(0.0, 0.0)];
    for (a, d) in phi.steps.jumps() {
        let before = slack_floor(big_phi);
        big_phi += a * d;
        let after = slack_floor(big_phi);
        if after > before {
            stars.push(a);
        }
        pieces.push((a, (big_phi - after).max(0.0)));
    }
    // int_0^inf frac(Phi) / s^2 with Phi frozen past the horizon
    let mut integral = 0.0;
    for (i, &(a, f)) in pieces.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        let next = pieces.get(i + 1).map_or(f64::INFINITY, |p| p.0);
        integral += f * (a.recip() - next.recip());
    }
    let a1 = -phi.initial - integral;
    let mut result = SurgeryResult { lambda_star: stars, a1, a1_tail_average: a1, residual_table: Vec::new(), horizon };
    let x_min = lambda.nth(1).unwrap_or(1.0).max(1.0);
    let x_max = HORIZON_MARGIN * horizon;
    let samples = 200;
    let mut tail_sum = 0.0;
    let mut tail_n = 0usize;
    for i in 0..samples {
        let x = x_min * (x_max / x_min).powf(i as f64 / (samples - 1) as f64);
        let r = result.residual(lambda, lambda_prime, x)?;
        if x >= 0.5 * x_max {
            tail_sum += r + a1;
            tail_n += 1;
        }
        result.residual_table.push((x, r));
    }
    if tail_n > 0 {
        result.a1_tail_average = tail_sum / tail_n as f64;
    }
    Ok(result)
}

/// Smallest decreasing `eps` with `lambda'(x) - lambda(x) - phi(x) <= eps(x)`
/// at every jump point up to the checked window: a running supremum from the right.
pub fn surgery_epsilon(lambda: &ExponentSequence, lambda_prime: &ExponentSequence, phi: &ComparisonPhi) -> Result<EpsilonTable> {
    let (pts, diffs) = difference_profile(lambda, lambda_prime, phi.horizon)?;
    let mut gaps: Vec<f64> = pts.iter().zip(&diffs).map(|(&p, &d)| (d - phi.value_at(p)).max(0.0)).collect();
    for i in (0..gaps.len().saturating_sub(1)).rev() {
        gaps[i] = gaps[i].max(gaps[i + 1]);
    }
    EpsilonTable::new(pts, gaps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentResult {
    pub lambda_double_star: Vec<f64>,
    pub h1: f64,
    pub a3: f64,
    /// `delta(Lambda u Lambda**)` over the materialized range.
    pub union_gap: f64,
    pub disjoint: bool,
}

impl AdjustmentResult {
    pub fn double_star_logarithm(&self, x: f64) -> f64 {
        self.lambda_double_star.iter().filter(|&&v| v <= x).map(|v| v.recip()).sum()
    }
}

/// Moves every element of `Lambda*` that falls within `h1` of an element of
/// `Lambda` away from it by exactly `h1`.
pub fn adjust_double_points(lambda: &ExponentSequence, lambda_star: &[f64], b: f64) -> Result<AdjustmentResult> {
    if !(b > 0.0) {
        return Err(MuntzError::InvalidParameter(format!("b must be positive, got {b}")));
    }
    let h1 = lambda.gap()?.min(b) / 4.0;
    let mut out = Vec::with_capacity(lambda_star.len());
    let mut a3 = 0.0;
    for &s in lambda_star {
        let n = lambda.counting_function(s).or_else(|_| lambda.len().ok_or(MuntzError::EmptySequence))?;
        let below = lambda.nth(n).unwrap_or(0.0);
        let above = lambda.nth(n + 1).unwrap_or(f64::INFINITY);
        let moved = if s < below + h1 {
            s + h1
        } else if s >= above - h1 {
            s - h1
        } else {
            s
        };
        a3 += s.recip() - moved.recip();
        out.push(moved);
    }
    let mut merged: Vec<f64> = lambda.values().iter().chain(&out).copied().collect();
    merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut union_gap = merged.first().copied().unwrap_or(f64::INFINITY);
    for w in merged.windows(2) {
        union_gap = union_gap.min(w[1] - w[0]);
    }
    let disjoint = out.iter().all(|v| !lambda.values().iter().any(|l| (l - v).abs() < 1e-12));
    Ok(AdjustmentResult { lambda_double_star: out, h1, a3, union_gap, disjoint })
}

/// `lambda(x) + lambda**(x) - b log x - A1 - A3 - b log b - b gamma`; the last
/// two terms are the constant in the asymptotics of `lambda_b`.
pub fn combined_residual(
    lambda: &ExponentSequence,
    surgery: &SurgeryResult,
    adjustment: &AdjustmentResult,
    b: f64,
    x: f64,
) -> Result<f64> {
    Ok(lambda.characteristic_logarithm(x)? + adjustment.double_star_logarithm(x)
        - b * x.ln()
        - surgery.a1
        - adjustment.a3
        - b * (b.ln() + EULER_GAMMA))
}
