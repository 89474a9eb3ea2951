//! Exponent sequences, their characteristic logarithm and counting
//! function, the separation gap, the Muntz density verdict and the sector
//! growth condition.

use std::f64::consts::PI;

use crate::error::{MuntzError, Result};
use crate::special::EULER_GAMMA;

/// Closed-form generator of an infinite exponent sequence, indexed from `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SequenceRule {
    /// `start + step * n`
    Arithmetic { start: f64, step: f64 },
    /// `n^exponent`
    Power { exponent: f64 },
    /// `n / b`
    Progression { b: f64 },
    /// `start + step * n + amplitude * sin(n)`: a bounded perturbation of an
    /// arithmetic progression.
    Perturbed { start: f64, step: f64, amplitude: f64 },
}

impl SequenceRule {
    /// The n-th exponent, `n >= 1`.
    pub fn value(&self, n: usize) -> f64 {
        let k = n as f64;
        match *self {
            SequenceRule::Arithmetic { start, step } => start + step * k,
            SequenceRule::Power { exponent } => k.powf(exponent),
            SequenceRule::Progression { b } => k / b,
            SequenceRule::Perturbed { start, step, amplitude } => start + step * k + amplitude * k.sin(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(MuntzError::InvalidParameter(msg.to_string()));
        match *self {
            SequenceRule::Arithmetic { start, step } => {
                if !(step > 0.0) || !(start + step > 0.0) {
                    return bad("arithmetic rule needs step > 0 and start + step > 0");
                }
            }
            SequenceRule::Power { exponent } => {
                if !(exponent >= 1.0) {
                    // exponents below 1 have consecutive differences tending to 0
                    return Err(MuntzError::NonpositiveGap { index: 0 });
                }
            }
            SequenceRule::Progression { b } => {
                if !(b > 0.0) || !b.is_finite() {
                    return bad("progression parameter b must be positive");
                }
            }
            SequenceRule::Perturbed { start, step, amplitude } => {
                if !(step > 0.0) || !amplitude.is_finite() {
                    return bad("perturbed rule needs step > 0");
                }
                if !(start + step + amplitude * 1f64.sin() > 0.0) {
                    return bad("perturbed rule must start at a positive exponent");
                }
            }
        }
        if !(self.analytic_gap() > 0.0) {
            return Err(MuntzError::NonpositiveGap { index: 0 });
        }
        Ok(())
    }

    /// `inf (lambda_{n+1} - lambda_n)` over `n >= 0`, from the rule itself.
    pub fn analytic_gap(&self) -> f64 {
        match *self {
            SequenceRule::Arithmetic { start, step } => (start + step).min(step),
            // (n+1)^p - n^p is nondecreasing for p >= 1
            SequenceRule::Power { .. } => 1.0,
            SequenceRule::Progression { b } => 1.0 / b,
            SequenceRule::Perturbed { start, step, amplitude } => {
                let first = start + step + amplitude * 1f64.sin();
                first.min(step - 2.0 * amplitude.abs() * 0.5f64.sin())
            }
        }
    }

    /// Smallest `n` with `value(n) > t` minus one, i.e. the number of exponents `<= t`.
    fn count_le(&self, t: f64) -> usize {
        let guess = match *self {
            SequenceRule::Arithmetic { start, step } => ((t - start) / step).floor(),
            SequenceRule::Power { exponent } => t.max(0.0).powf(1.0 / exponent).floor(),
            SequenceRule::Progression { b } => (b * t).floor(),
            SequenceRule::Perturbed { start, step, amplitude } => ((t - start - amplitude.abs()) / step).floor(),
        };
        let mut n = if guess.is_finite() && guess > 0.0 { guess as usize } else { 0 };
        // guesses may be off by a few near roundoff or for the perturbed rule
        while n > 0 && self.value(n) > t {
            n -= 1;
        }
        while self.value(n + 1) <= t {
            n += 1;
        }
        n
    }

    /// `int_c^inf lambda(x)^(-p) dx` for the smooth interpolant of the rule.
    fn integral_tail(&self, c: f64, p: f64) -> f64 {
        match *self {
            SequenceRule::Arithmetic { start, step } | SequenceRule::Perturbed { start, step, .. } => {
                (start + step * c).powf(1.0 - p) / (step * (p - 1.0))
            }
            SequenceRule::Progression { b } => (c / b).powf(1.0 - p) * b.recip() / (p - 1.0) * b * b,
            SequenceRule::Power { exponent } => {
                let q = p * exponent;
                c.powf(1.0 - q) / (q - 1.0)
            }
        }
    }

    /// `sum_{n > from} lambda_n^(-p)` for `p > 1`.
    pub fn tail_power_sum(&self, from: usize, p: f64) -> f64 {
        const EXPLICIT_TERMS: usize = 4000;
        let mut sum = 0.0;
        for n in (from + 1..=from + EXPLICIT_TERMS).rev() {
            sum += self.value(n).powf(-p);
        }
        // midpoint rule for the remainder
        sum + self.integral_tail((from + EXPLICIT_TERMS) as f64 + 0.5, p)
    }

    /// Whether `sum 1/lambda_n` diverges.
    pub fn reciprocal_sum_diverges(&self) -> bool {
        match *self {
            SequenceRule::Power { exponent } => exponent <= 1.0,
            _ => true,
        }
    }
}

/// How a sequence was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    /// A finite list; nothing exists beyond the last entry.
    Explicit,
    Generator(SequenceRule),
}

/// Strictly increasing positive exponents with an implicit `lambda_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSequence {
    kind: SequenceKind,
    values: Vec<f64>,
    horizon: f64,
    // cumulative sums of 1/lambda_n over the materialized prefix
    reciprocal_prefix: Vec<f64>,
}

fn prefix_reciprocals(values: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .iter()
        .map(|v| {
            acc += v.recip();
            acc
        })
        .collect()
}

impl ExponentSequence {
    /// A finite explicit list. Ties and decreases are rejected.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MuntzError::EmptySequence);
        }
        let mut prev = 0.0;
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= prev {
                return Err(MuntzError::NonpositiveGap { index: i + 1 });
            }
            prev = v;
        }
        let horizon = *values.last().unwrap();
        let reciprocal_prefix = prefix_reciprocals(&values);
        Ok(Self { kind: SequenceKind::Explicit, values, horizon, reciprocal_prefix })
    }

    /// A generator materialized up to `horizon`.
    pub fn generated(rule: SequenceRule, horizon: f64) -> Result<Self> {
        rule.validate()?;
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(MuntzError::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        let count = rule.count_le(horizon);
        let values: Vec<f64> = (1..=count).map(|n| rule.value(n)).collect();
        for (i, w) in values.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(MuntzError::NonpositiveGap { index: i + 2 });
            }
        }
        let reciprocal_prefix = prefix_reciprocals(&values);
        Ok(Self { kind: SequenceKind::Generator(rule), values, horizon, reciprocal_prefix })
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn rule(&self) -> Option<SequenceRule> {
        match self.kind {
            SequenceKind::Generator(rule) => Some(rule),
            SequenceKind::Explicit => None,
        }
    }

    /// Materialized exponents (all of them for explicit lists).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn is_finite_list(&self) -> bool {
        matches!(self.kind, SequenceKind::Explicit)
    }

    /// `lambda_n` for `n >= 1`; `None` past the end of an explicit list.
    pub fn nth(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(0.0);
        }
        if let Some(&v) = self.values.get(n - 1) {
            return Some(v);
        }
        self.rule().map(|r| r.value(n))
    }

    /// Total number of exponents, `None` for generators. Sequences are never
    /// empty, so there is no `is_empty`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self.kind {
            SequenceKind::Explicit => Some(self.values.len()),
            SequenceKind::Generator(_) => None,
        }
    }

    fn check_extent(&self, t: f64) -> Result<()> {
        if self.is_finite_list() && t > self.horizon {
            return Err(MuntzError::HorizonExceeded { t, horizon: self.horizon });
        }
        Ok(())
    }

    fn count_unchecked(&self, t: f64) -> usize {
        if t <= self.horizon || self.is_finite_list() {
            self.values.partition_point(|&v| v <= t)
        } else {
            self.rule().expect("generator").count_le(t)
        }
    }

    /// Number of exponents `<= t`.
    pub fn counting_function(&self, t: f64) -> Result<usize> {
        self.check_extent(t)?;
        Ok(self.count_unchecked(t))
    }

    /// `sum_{0 < lambda_n <= t} 1/lambda_n`, an exact partial sum.
    pub fn characteristic_logarithm(&self, t: f64) -> Result<f64> {
        self.check_extent(t)?;
        Ok(self.characteristic_unchecked(t))
    }

    fn characteristic_unchecked(&self, t: f64) -> f64 {
        let count = self.count_unchecked(t);
        let materialized = count.min(self.values.len());
        let mut sum = if materialized == 0 { 0.0 } else { self.reciprocal_prefix[materialized - 1] };
        if count > materialized {
            let rule = self.rule().expect("generator");
            for n in materialized + 1..=count {
                sum += rule.value(n).recip();
            }
        }
        sum
    }

    /// `lambda(t)` for any `t >= 0`: past the end of an explicit list this is
    /// the full (finite) sum, since no further exponents exist.
    pub fn characteristic_extended(&self, t: f64) -> f64 {
        self.characteristic_unchecked(t)
    }

    /// Index and value of the exponent closest to `x`, if any.
    pub fn nearest(&self, x: f64) -> Option<(usize, f64)> {
        let below = self.count_unchecked(x);
        let mut best: Option<(usize, f64)> = None;
        for n in [below, below + 1] {
            if n == 0 {
                continue;
            }
            if let Some(v) = self.nth(n) {
                if best.is_none_or(|(_, b)| (v - x).abs() < (b - x).abs()) {
                    best = Some((n, v));
                }
            }
        }
        best
    }

    /// `delta(Lambda) = inf (lambda_{n+1} - lambda_n)`, including `lambda_1 - 0`.
    pub fn gap(&self) -> Result<f64> {
        if self.values.is_empty() && self.rule().is_none() {
            return Err(MuntzError::EmptySequence);
        }
        let mut gap = self.rule().map(|r| r.analytic_gap()).unwrap_or(f64::INFINITY);
        let mut prev = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let d = v - prev;
            if !(d > 0.0) {
                return Err(MuntzError::NonpositiveGap { index: i + 1 });
            }
            gap = gap.min(d);
            prev = v;
        }
        Ok(gap)
    }

    /// `lim_{t -> inf} lambda(t)` when it is finite: the full sum for an
    /// explicit list, `zeta(p)` for a power rule with `p > 1`.
    pub fn characteristic_limit(&self) -> Option<f64> {
        match self.kind {
            SequenceKind::Explicit => self.reciprocal_prefix.last().copied(),
            SequenceKind::Generator(rule) if !rule.reciprocal_sum_diverges() => {
                let n = 100_000usize;
                let head: f64 = (1..=n).rev().map(|k| rule.value(k).recip()).sum();
                let p = match rule {
                    SequenceRule::Power { exponent } => exponent,
                    _ => unreachable!(),
                };
                // midpoint tail with the first Euler-Maclaurin correction
                let c = n as f64 + 0.5;
                let tail = c.powf(1.0 - p) / (p - 1.0) - p / 24.0 * c.powf(-p - 1.0);
                Some(head + tail)
            }
            SequenceKind::Generator(_) => None,
        }
    }

    /// Least-squares free estimate of `A2 = lim (lambda(x) - b log x)`:
    /// the mean of the residual over jump midpoints in `[x_max / 2, x_max]`.
    pub fn log_growth_constant(&self, b: f64, x_max: f64) -> Result<f64> {
        if b == 0.0 {
            return self
                .characteristic_limit()
                .ok_or_else(|| MuntzError::Precondition("lambda(t) is unbounded".into()));
        }
        self.check_extent(x_max)?;
        let first = self.count_unchecked(0.5 * x_max) + 1;
        let last = self.count_unchecked(x_max);
        if last <= first {
            return Err(MuntzError::Precondition("too few exponents to estimate A2".into()));
        }
        let mut acc = 0.0;
        let mut m = 0usize;
        for n in first..last {
            let lo = self.nth(n).unwrap();
            let hi = self.nth(n + 1).unwrap();
            let mid = 0.5 * (lo + hi);
            acc += self.characteristic_unchecked(lo) - b * mid.ln();
            m += 1;
        }
        Ok(acc / m as f64)
    }

    /// The materialized prefix merged with another sequence's, sorted.
    pub fn union(&self, other: &ExponentSequence) -> Result<ExponentSequence> {
        let mut merged: Vec<f64> = self.values.iter().chain(other.values.iter()).copied().collect();
        merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ExponentSequence::explicit(merged)
    }
}

/// Right-continuous nondecreasing step function on `[0, inf)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepAccumulator {
    points: Vec<f64>,
    sizes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl StepAccumulator {
    /// Jumps must sit at strictly increasing positive points and be positive.
    pub fn new(points: Vec<f64>, sizes: Vec<f64>) -> Result<Self> {
        if points.len() != sizes.len() {
            return Err(MuntzError::InvalidParameter("jump points and sizes differ in length".into()));
        }
        let mut prev = 0.0;
        for (i, (&p, &s)) in points.iter().zip(&sizes).enumerate() {
            if !(p > prev) && !(i == 0 && p > 0.0) {
                return Err(MuntzError::NonpositiveGap { index: i + 1 });
            }
            if !(s > 0.0) {
                return Err(MuntzError::InvalidParameter(format!("jump {i} has nonpositive size {s}")));
            }
            prev = p;
        }
        let mut acc = 0.0;
        let cumulative = sizes
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        Ok(Self { points, sizes, cumulative })
    }

    /// `lambda(t)` of a sequence: jumps `1/lambda_n` at each materialized exponent.
    pub fn characteristic(seq: &ExponentSequence) -> Self {
        let sizes = seq.values().iter().map(|v| v.recip()).collect();
        Self::new(seq.values().to_vec(), sizes).expect("validated sequence")
    }

    /// Counting function: unit jumps at each materialized exponent.
    pub fn counting(seq: &ExponentSequence) -> Self {
        Self::new(seq.values().to_vec(), vec![1.0; seq.values().len()]).expect("validated sequence")
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|&p| p <= t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Left limit `value(t-)`.
    pub fn value_before(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|&p| p < t);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    pub fn jump_at(&self, t: f64) -> f64 {
        self.value_at(t) - self.value_before(t)
    }

    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.sizes.iter().copied())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Muntz density verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    Dense,
    Incomplete,
    Inconclusive,
}

impl std::fmt::Display for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Density::Dense => "dense",
            Density::Incomplete => "incomplete",
            Density::Inconclusive => "inconclusive",
        })
    }
}

/// Decides divergence of `sum 1/lambda_n` from the generator rule; finite
/// lists cannot decide a tail property.
pub fn muntz_density_test(seq: &ExponentSequence) -> Density {
    match seq.rule() {
        None => Density::Inconclusive,
        Some(rule) if rule.reciprocal_sum_diverges() => Density::Dense,
        Some(_) => Density::Incomplete,
    }
}

/// A decreasing function sampled on a grid, read with step-constant
/// interpolation (value at the largest grid point `<= x`).
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonTable {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl EpsilonTable {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != values.len() {
            return Err(MuntzError::EmptyGrid);
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MuntzError::InvalidParameter("epsilon grid must be increasing".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) || values.iter().any(|v| !(*v >= 0.0)) {
            return Err(MuntzError::InvalidParameter("epsilon must be nonnegative and decreasing".into()));
        }
        Ok(Self { xs, values })
    }

    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, values)
    }

    pub fn constant(value: f64) -> Self {
        Self { xs: vec![0.0], values: vec![value] }
    }

    pub fn at(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&p| p <= x);
        self.values[k.saturating_sub(1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition3Report {
    pub holds: bool,
    /// Minimum over the grid of `eps(x) + (alpha/pi) log(y/x) - (lambda(y) - lambda(x))`.
    pub worst_margin: f64,
    pub worst_pair: (f64, f64),
}

/// Evaluates `lambda(y) - lambda(x) <= (alpha/pi) log(y/x) + eps(x)` on every grid pair.
pub fn check_condition3(
    seq: &ExponentSequence,
    alpha: f64,
    epsilon: &EpsilonTable,
    grid: &[(f64, f64)],
) -> Result<Condition3Report> {
    if grid.is_empty() {
        return Err(MuntzError::EmptyGrid);
    }
    if !(0.0..PI).contains(&alpha) {
        return Err(MuntzError::InvalidParameter(format!("half-angle {alpha} outside [0, pi)")));
    }
    let mut worst = (f64::INFINITY, (0.0, 0.0));
    for &(x, y) in grid {
        if !(x >= 1.0 && y > x) {
            return Err(MuntzError::Precondition(format!("grid pair ({x}, {y}) must satisfy y > x >= 1")));
        }
        let rise = seq.characteristic_logarithm(y)? - seq.characteristic_logarithm(x)?;
        let margin = epsilon.at(x) + alpha / PI * (y / x).ln() - rise;
        if margin < worst.0 {
            worst = (margin, (x, y));
        }
    }
    Ok(Condition3Report { holds: worst.0 >= 0.0, worst_margin: worst.0, worst_pair: worst.1 })
}

/// `Lambda_b = {n / b}` materialized to `horizon`.
pub fn arithmetic_progression(b: f64, horizon: f64) -> Result<ExponentSequence> {
    ExponentSequence::generated(SequenceRule::Progression { b }, horizon)
}

/// `b log t + b log b + b gamma`, the smooth part of `lambda_b(t)`.
pub fn progression_asymptote(b: f64, t: f64) -> f64 {
    b * (t.ln() + b.ln() + EULER_GAMMA)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn squares(h: f64) -> ExponentSequence {
        ExponentSequence::generated(SequenceRule::Power { exponent: 2.0 }, h).unwrap()
    }

    fn naturals(h: f64) -> ExponentSequence {
        ExponentSequence::generated(SequenceRule::Arithmetic { start: 0.0, step: 1.0 }, h).unwrap()
    }

    #[test]
    fn characteristic_logarithm_examples() {
        let s = squares(100.0);
        let direct = 1.0 + 0.25 + 1.0 / 9.0;
        assert!((s.characteristic_logarithm(9.0).unwrap() - direct).abs() < 1e-15);
        assert_eq!(s.characteristic_logarithm(0.5).unwrap(), 0.0);
        let h10: f64 = (1..=10).map(|n| 1.0 / n as f64).sum();
        assert!((naturals(50.0).characteristic_logarithm(10.0).unwrap() - h10).abs() < 1e-15);
        assert!((h10 - 2.928_968_253_968_254).abs() < 1e-14);
    }

    #[test]
    fn counting_examples() {
        let s = squares(100.0);
        assert_eq!(s.counting_function(9.0).unwrap(), 3);
        assert_eq!(s.counting_function(0.5).unwrap(), 0);
        let half = arithmetic_progression(2.0, 10.0).unwrap();
        assert_eq!(half.counting_function(3.0).unwrap(), 6);
        assert_eq!(arithmetic_progression(1.0, 10.0).unwrap().counting_function(7.5).unwrap(), 7);
    }

    #[test]
    fn explicit_lists_enforce_horizon() {
        let s = ExponentSequence::explicit(vec![1.1, 2.7, 3.9]).unwrap();
        assert!(matches!(s.characteristic_logarithm(4.0), Err(MuntzError::HorizonExceeded { .. })));
        assert!(s.counting_function(3.9).is_ok());
    }

    #[test]
    fn generators_extend_past_horizon() {
        let s = squares(10.0);
        assert_eq!(s.counting_function(100.0).unwrap(), 10);
    }

    #[test]
    fn gap_examples() {
        assert_eq!(squares(1000.0).gap().unwrap(), 1.0);
        let shifted = ExponentSequence::generated(SequenceRule::Arithmetic { start: 0.3, step: 1.0 }, 100.0).unwrap();
        assert!((shifted.gap().unwrap() - 1.0).abs() < 1e-12);
        let list = ExponentSequence::explicit(vec![0.5, 0.6, 2.0]).unwrap();
        assert!((list.gap().unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(arithmetic_progression(2.0, 10.0).unwrap().gap().unwrap(), 0.5);
    }

    #[test]
    fn ties_and_decreases_rejected() {
        assert!(matches!(ExponentSequence::explicit(vec![1.0, 1.0]), Err(MuntzError::NonpositiveGap { index: 2 })));
        assert!(matches!(ExponentSequence::explicit(vec![2.0, 1.0]), Err(MuntzError::NonpositiveGap { .. })));
        assert!(ExponentSequence::explicit(vec![]).is_err());
        assert!(ExponentSequence::generated(SequenceRule::Power { exponent: 0.5 }, 10.0).is_err());
    }

    #[test]
    fn density_examples() {
        assert_eq!(muntz_density_test(&squares(10.0)), Density::Incomplete);
        assert_eq!(muntz_density_test(&naturals(10.0)), Density::Dense);
        let list = ExponentSequence::explicit(vec![1.1, 2.7, 3.9]).unwrap();
        assert_eq!(muntz_density_test(&list), Density::Inconclusive);
        assert_eq!(muntz_density_test(&arithmetic_progression(0.25, 10.0).unwrap()), Density::Dense);
    }

    #[test]
    fn condition3_progression_holds() {
        let alpha = PI / 4.0;
        let b = alpha / PI;
        let seq = arithmetic_progression(b, 2000.0).unwrap();
        let eps = EpsilonTable::from_fn((1..=2000).map(|x| x as f64).collect(), |x| 2.0 / x).unwrap();
        let grid: Vec<(f64, f64)> = (0..100).map(|i| (1.0 + 7.3 * i as f64, 1.5 + 19.1 * i as f64 + 3.0)).collect();
        let report = check_condition3(&seq, alpha, &eps, &grid).unwrap();
        assert!(report.holds, "{report:?}");
    }

    #[test]
    fn condition3_harmonic_fails() {
        let seq = naturals(200.0);
        let grid: Vec<(f64, f64)> = (1..=50).map(|x| (x as f64, 2.0 * x as f64)).collect();
        let report = check_condition3(&seq, PI / 2.0, &EpsilonTable::constant(0.01), &grid).unwrap();
        assert!(!report.holds);
    }

    #[test]
    fn condition3_empty_stretch() {
        let seq = squares(100.0);
        // no exponent in (4.5, 8.5]
        let report = check_condition3(&seq, 0.5, &EpsilonTable::constant(0.0), &[(4.5, 8.5)]).unwrap();
        assert!(report.holds);
        assert!((report.worst_margin - 0.5 / PI * (8.5f64 / 4.5).ln()).abs() < 1e-15);
        assert!(matches!(check_condition3(&seq, 0.5, &EpsilonTable::constant(0.0), &[]), Err(MuntzError::EmptyGrid)));
    }

    #[test]
    fn progression_residual_example() {
        let seq = arithmetic_progression(1.0, 1000.0).unwrap();
        let r = seq.characteristic_logarithm(1000.0).unwrap() - progression_asymptote(1.0, 1000.0);
        let h1000 = 7.485_470_860_550_345;
        assert!((r - (h1000 - 1000f64.ln() - EULER_GAMMA)).abs() < 1e-12);
        assert!((r - 5.0e-4).abs() < 1e-6);
    }

    #[test]
    fn zeta_two_limit() {
        let lim = squares(10.0).characteristic_limit().unwrap();
        assert!((lim - PI * PI / 6.0).abs() < 1e-13);
    }

    #[test]
    fn tail_power_sum_matches_direct_sum() {
        let rule = SequenceRule::Arithmetic { start: 0.0, step: 1.0 };
        let direct: f64 = (11..2_000_000).rev().map(|n| (n as f64).powi(-3)).sum::<f64>() + 0.5 / 2e6f64.powi(2);
        assert!((rule.tail_power_sum(10, 3.0) - direct).abs() < 1e-13);
    }

    #[test]
    fn step_accumulator_basics() {
        let acc = StepAccumulator::new(vec![1.0, 2.0], vec![0.5, 0.25]).unwrap();
        assert_eq!(acc.value_at(0.5), 0.0);
        assert_eq!(acc.value_at(1.0), 0.5);
        assert_eq!(acc.value_before(1.0), 0.0);
        assert_eq!(acc.jump_at(2.0), 0.25);
        assert!(StepAccumulator::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(StepAccumulator::new(vec![1.0], vec![-1.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_consistent(t1 in 0.0f64..400.0, dt in 0.0f64..400.0) {
            let s = squares(1000.0);
            let t2 = t1 + dt;
            prop_assert!(s.characteristic_logarithm(t1).unwrap() <= s.characteristic_logarithm(t2).unwrap());
            prop_assert!(s.counting_function(t1).unwrap() <= s.counting_function(t2).unwrap());
            let lam = StepAccumulator::characteristic(&s);
            let cnt = StepAccumulator::counting(&s);
            prop_assert_eq!(lam.points(), cnt.points());
        }

        #[test]
        fn counting_bound(r in 1.0f64..500.0, span in 0.0f64..500.0) {
            let big_r = r + span + 1e-9;
            for seq in [squares(2000.0), naturals(2000.0), arithmetic_progression(0.25, 2000.0).unwrap()] {
                let dc = (seq.counting_function(big_r).unwrap() - seq.counting_function(r).unwrap()) as f64;
                let dl = seq.characteristic_logarithm(big_r).unwrap() - seq.characteristic_logarithm(r).unwrap();
                prop_assert!(dc <= big_r * dl + 1e-9);
            }
        }
    }

    #[test]
    fn progression_asymptotic_residual_constant() {
        // fitted C in |residual| <= C / t stays below 1 on [10, 1e4]
        for b in [0.5, 1.0, 2.0] {
            let seq = arithmetic_progression(b, 1e4).unwrap();
            let mut c_fit: f64 = 0.0;
            let mut t = 10.0;
            while t <= 1e4 {
                let r = seq.characteristic_logarithm(t).unwrap() - progression_asymptote(b, t);
                c_fit = c_fit.max(r.abs() * t);
                t *= 1.01;
            }
            assert!(c_fit <= 1.0, "b={b}: C={c_fit}");
        }
    }
}
