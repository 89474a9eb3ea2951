//! Fuchs-type Blaschke products over the right half-plane and the kernels
//! built from them.

use num_complex::Complex64;

use crate::error::{MuntzError, Result};
use crate::sequences::{ExponentSequence, SequenceRule};

/// Growth factor in `log|G(z)| <= FUCHS_GROWTH_FACTOR * x * lambda(|z|) + A x`.
///
/// A single factor `1 - z/lambda` contributes `2 x / lambda` from the
/// exponential, so the sum over `lambda_n <= |z|` grows like `2 x lambda(|z|)`.
pub const FUCHS_GROWTH_FACTOR: f64 = 2.0;

/// Number of odd powers `3, 5, ..., 13` kept in the tail series.
const TAIL_TERMS: usize = 6;

/// Largest truncation order an adaptive product may use.
pub const DEFAULT_MAX_ORDER: usize = 1 << 21;

/// Adaptive orders are chosen so that `|z| <= lambda_{N+1} / TAIL_RATIO`.
const TAIL_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Choose the order per evaluation point.
    Adaptive,
    /// Always use exactly this many explicit factors.
    Fixed(usize),
}

#[derive(Debug, Clone)]
struct Rung {
    order: usize,
    next: f64,
    // sum_{n > order} lambda_n^(-p) for p = 3, 5, ..., 13
    tails: [f64; TAIL_TERMS],
}

impl Rung {
    fn new(rule: SequenceRule, order: usize) -> Self {
        let mut tails = [0.0; TAIL_TERMS];
        for (j, t) in tails.iter_mut().enumerate() {
            *t = rule.tail_power_sum(order, (2 * j + 3) as f64);
        }
        Self { order, next: rule.value(order + 1), tails }
    }
}

/// `log G(z)` with the order used and a bound on the neglected tail terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductEvaluation {
    pub log_value: Complex64,
    pub order: usize,
    pub remainder_bound: f64,
}

impl ProductEvaluation {
    pub fn value(&self) -> Complex64 {
        self.log_value.exp()
    }
}

/// `G(z) = prod ((lambda_n - z)/(lambda_n + z)) exp(2 z / lambda_n)`.
///
/// Finite lists are multiplied out exactly. For generators the factors past
/// the truncation order are summed through the odd power series of
/// `log((1 - w)/(1 + w)) + 2 w`.
#[derive(Debug, Clone)]
pub struct TruncatedProduct {
    sequence: ExponentSequence,
    truncation: Truncation,
    rungs: Vec<Rung>,
    pole_guard: f64,
}

impl TruncatedProduct {
    pub fn new(sequence: ExponentSequence) -> Result<Self> {
        Self::with_truncation(sequence, Truncation::Adaptive)
    }

    pub fn with_truncation(sequence: ExponentSequence, truncation: Truncation) -> Result<Self> {
        let gap = sequence.gap()?;
        let rungs = match (sequence.rule(), truncation) {
            (None, _) => Vec::new(),
            (Some(rule), Truncation::Fixed(order)) => {
                if order == 0 {
                    return Err(MuntzError::InvalidParameter("truncation order must be positive".into()));
                }
                vec![Rung::new(rule, order)]
            }
            (Some(rule), Truncation::Adaptive) => {
                let mut rungs = Vec::new();
                let mut order = 16;
                while order <= DEFAULT_MAX_ORDER {
                    rungs.push(Rung::new(rule, order));
                    order *= 2;
                }
                rungs
            }
        };
        Ok(Self { sequence, truncation, rungs, pole_guard: 1e-9 * gap.min(1.0) })
    }

    pub fn sequence(&self) -> &ExponentSequence {
        &self.sequence
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    fn rung_for(&self, modulus: f64, min_order: usize) -> Result<&Rung> {
        match self.truncation {
            Truncation::Fixed(_) => {
                let rung = &self.rungs[0];
                if modulus > 0.5 * rung.next || min_order > rung.order {
                    return Err(MuntzError::TruncationInsufficient { modulus, available: rung.next });
                }
                Ok(rung)
            }
            Truncation::Adaptive => self
                .rungs
                .iter()
                .find(|r| r.next >= TAIL_RATIO * modulus && r.order >= min_order)
                .ok_or(MuntzError::TruncationInsufficient {
                    modulus,
                    available: self.rungs.last().map_or(0.0, |r| r.next / TAIL_RATIO),
                }),
        }
    }

    /// `log G(z)`; `G(z) = 1 / G(-z)` handles the left half-plane.
    pub fn log_eval(&self, z: Complex64) -> Result<ProductEvaluation> {
        self.log_eval_excluding(z, None)
    }

    /// `log` of the product with the `skip`-th factor removed.
    pub fn log_eval_excluding(&self, z: Complex64, skip: Option<usize>) -> Result<ProductEvaluation> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(MuntzError::InvalidParameter(format!("non-finite argument {z}")));
        }
        if z.re < 0.0 {
            if let Some((_, pole)) = self.sequence.nearest(-z.re) {
                let distance = (z + pole).norm();
                if distance < self.pole_guard {
                    return Err(MuntzError::PoleProximity { z, pole: -pole, distance });
                }
            }
            let mut mirrored = self.log_eval_right(-z, skip)?;
            mirrored.log_value = -mirrored.log_value;
            return Ok(mirrored);
        }
        self.log_eval_right(z, skip)
    }

    fn log_eval_right(&self, z: Complex64, skip: Option<usize>) -> Result<ProductEvaluation> {
        let factor = |lambda: f64| ((lambda - z) / (lambda + z)).ln() + 2.0 * z / lambda;
        let skip = skip.unwrap_or(0);
        if self.sequence.is_finite_list() {
            let mut sum = Complex64::new(0.0, 0.0);
            for (i, &lambda) in self.sequence.values().iter().enumerate() {
                if i + 1 != skip {
                    sum += factor(lambda);
                }
            }
            let order = self.sequence.values().len();
            return Ok(ProductEvaluation { log_value: sum, order, remainder_bound: 0.0 });
        }
        let rule = self.sequence.rule().expect("generator");
        let modulus = z.norm();
        let rung = self.rung_for(modulus, skip)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for n in (1..=rung.order).rev() {
            if n != skip {
                sum += factor(rule.value(n));
            }
        }
        // log((1-w)/(1+w)) + 2w = -2 (w^3/3 + w^5/5 + ...)
        let z2 = z * z;
        let mut power = z * z2;
        let mut tail = Complex64::new(0.0, 0.0);
        for (j, s) in rung.tails.iter().enumerate() {
            tail += power * (s / (2 * j + 3) as f64);
            power *= z2;
        }
        sum -= 2.0 * tail;
        let ratio = modulus / rung.next;
        let s15 = rung.tails[TAIL_TERMS - 1] / (rung.next * rung.next);
        let remainder_bound = 2.0 * modulus.powi(15) * s15 / (15.0 * (1.0 - ratio * ratio));
        Ok(ProductEvaluation { log_value: sum, order: rung.order, remainder_bound })
    }
}

/// `G(z)` itself.
pub fn evaluate_g_product(product: &TruncatedProduct, z: Complex64) -> Result<Complex64> {
    let eval = product.log_eval(z)?;
    if eval.log_value.re > 709.0 {
        return Err(MuntzError::Overflow(eval.log_value.re));
    }
    Ok(eval.value())
}

/// Closed right half-plane with open discs of radius `delta0` removed
/// around every exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveRegion {
    pub delta0: f64,
}

impl SieveRegion {
    /// The standard radius `delta(Lambda) / 4`.
    pub fn for_sequence(seq: &ExponentSequence) -> Result<Self> {
        Ok(Self { delta0: seq.gap()? / 4.0 })
    }

    pub fn contains(&self, seq: &ExponentSequence, z: Complex64) -> bool {
        if z.re < 0.0 {
            return false;
        }
        match seq.nearest(z.re) {
            Some((_, lambda)) => (z - lambda).norm() >= self.delta0,
            None => true,
        }
    }
}

pub fn sieve_membership(seq: &ExponentSequence, z: Complex64) -> Result<bool> {
    Ok(SieveRegion::for_sequence(seq)?.contains(seq, z))
}

/// One sampled point of a growth certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuchsSample {
    pub z: Complex64,
    pub log_abs: f64,
    /// `(log|G| - 2 x lambda(|z|)) / x`
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuchsCertificate {
    /// Smallest `A` with `log|G| <= 2 x lambda(|z|) + A x` on the upper grid.
    pub a_upper: f64,
    /// Smallest `A` with `log|G| >= 2 x lambda(|z|) - A x` on the sieve grid.
    pub a_lower: f64,
    pub upper_samples: Vec<FuchsSample>,
    pub lower_samples: Vec<FuchsSample>,
}

/// Points with `Re z` below this are skipped: both bounds divide by `x`.
pub const MIN_CERTIFIED_RE: f64 = 1e-6;

fn sample(product: &TruncatedProduct, z: Complex64) -> Result<FuchsSample> {
    let log_abs = product.log_eval(z)?.log_value.re;
    let lam = product.sequence().characteristic_extended(z.norm());
    let normalized = (log_abs - FUCHS_GROWTH_FACTOR * z.re * lam) / z.re;
    Ok(FuchsSample { z, log_abs, normalized })
}

/// Empirical constants for the two-sided growth bounds.
///
/// `upper` samples the closed right half-plane; `lower` must lie in the
/// sieve region.
pub fn certify_fuchs_bounds(
    product: &TruncatedProduct,
    upper: &[Complex64],
    lower: &[Complex64],
) -> Result<FuchsCertificate> {
    let seq = product.sequence();
    let sieve = SieveRegion::for_sequence(seq)?;
    let keep = |z: &&Complex64| z.re >= MIN_CERTIFIED_RE;
    let upper_samples: Vec<FuchsSample> =
        upper.iter().filter(keep).map(|&z| sample(product, z)).collect::<Result<_>>()?;
    let mut lower_samples = Vec::new();
    for &z in lower.iter().filter(keep) {
        if !sieve.contains(seq, z) {
            return Err(MuntzError::SieveViolation(z));
        }
        lower_samples.push(sample(product, z)?);
    }
    if upper_samples.is_empty() && lower_samples.is_empty() {
        return Err(MuntzError::EmptyGrid);
    }
    let a_upper = upper_samples.iter().map(|s| s.normalized).fold(f64::NEG_INFINITY, f64::max);
    let a_lower = lower_samples.iter().map(|s| -s.normalized).fold(f64::NEG_INFINITY, f64::max);
    Ok(FuchsCertificate { a_upper, a_lower, upper_samples, lower_samples })
}

/// Polar grid on the closed right half-plane: `radii x angles` points.
pub fn half_plane_grid(r_min: f64, r_max: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii * angles);
    for i in 0..radii {
        let t = if radii == 1 { 0.0 } else { i as f64 / (radii - 1) as f64 };
        let r = r_min * (r_max / r_min).powf(t);
        for j in 0..angles {
            let s = (j as f64 + 0.5) / angles as f64;
            let theta = -std::f64::consts::FRAC_PI_2 + s * std::f64::consts::PI;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

/// A function analytic on the closed right half-plane, evaluated through its logarithm.
pub trait LogKernel: Sync + Send {
    fn log_eval(&self, z: Complex64) -> Result<Complex64>;

    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let l = self.log_eval(z)?;
        if l.re > 709.0 {
            return Err(MuntzError::Overflow(l.re));
        }
        Ok(if l.re == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { l.exp() })
    }
}

fn log_z_squared(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        Complex64::new(f64::NEG_INFINITY, 0.0)
    } else {
        2.0 * z.ln()
    }
}

/// `g0(z) = G(z) exp(-a0 z) / Gamma(1/2 + 2 b z)` with `a0 = 2 A2 - 2 b log(2b)`.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedKernel<'a> {
    pub product: &'a TruncatedProduct,
    /// Logarithmic density `b >= 0`.
    pub b: f64,
    /// `A2 = lim (lambda(x) - b log x)`.
    pub a2: f64,
}

impl<'a> NormalizedKernel<'a> {
    pub fn new(product: &'a TruncatedProduct, b: f64, a2: f64) -> Result<Self> {
        if !(b >= 0.0) || !a2.is_finite() {
            return Err(MuntzError::InvalidParameter(format!("need b >= 0 and finite A2, got b={b}, A2={a2}")));
        }
        Ok(Self { product, b, a2 })
    }

    pub fn a0(&self) -> f64 {
        if self.b == 0.0 {
            2.0 * self.a2
        } else {
            2.0 * self.a2 - 2.0 * self.b * (2.0 * self.b).ln()
        }
    }

    fn log_normalizer(&self, z: Complex64) -> Result<Complex64> {
        let lg = crate::special::log_gamma(Complex64::new(0.5, 0.0) + 2.0 * self.b * z)?;
        Ok(-self.a0() * z - lg)
    }

    pub fn log_g0(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.product.log_eval(z)?.log_value + self.log_normalizer(z)?)
    }

    /// `log psi_k(z)` for `psi_k(z) = z^2 g0(z) / ((z - lambda_k)(1 + z)^4)`,
    /// with the vanishing factor divided out analytically.
    pub fn log_psi(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let lambda = self
            .product
            .sequence()
            .nth(k)
            .filter(|_| k > 0)
            .ok_or_else(|| MuntzError::InvalidParameter(format!("no exponent with index {k}")))?;
        let rest = self.product.log_eval_excluding(z, Some(k))?.log_value;
        // ((l - z)/(l + z)) e^{2z/l} / (z - l) = -e^{2z/l} / (l + z)
        let own = Complex64::new(0.0, std::f64::consts::PI) + 2.0 * z / lambda - (lambda + z).ln();
        let one_plus = Complex64::new(1.0, 0.0) + z;
        Ok(log_z_squared(z) + rest + own + self.log_normalizer(z)? - 4.0 * one_plus.ln())
    }
}

pub fn evaluate_g0(product: &TruncatedProduct, b: f64, a2: f64, z: Complex64) -> Result<Complex64> {
    let k = NormalizedKernel::new(product, b, a2)?;
    let l = k.log_g0(z)?;
    if l.re > 709.0 {
        return Err(MuntzError::Overflow(l.re));
    }
    Ok(l.exp())
}

pub fn evaluate_psi_k(product: &TruncatedProduct, b: f64, a2: f64, k: usize, z: Complex64) -> Result<Complex64> {
    PsiKernel { kernel: NormalizedKernel::new(product, b, a2)?, k, damping: 0.0 }.eval(z)
}

/// `psi_k(z) exp(-delta z)`.
#[derive(Debug, Clone, Copy)]
pub struct PsiKernel<'a> {
    pub kernel: NormalizedKernel<'a>,
    pub k: usize,
    pub damping: f64,
}

impl LogKernel for PsiKernel<'_> {
    fn log_eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.kernel.log_psi(self.k, z)? - self.damping * z)
    }
}

/// `g(z) = z^2 G(z) exp(-A z) / (Gamma(1/2 + (2 alpha/pi) z) (1 + z)^4)`.
#[derive(Debug, Clone, Copy)]
pub struct SectorKernel<'a> {
    pub product: &'a TruncatedProduct,
    pub alpha: f64,
    pub shift: f64,
}

impl LogKernel for SectorKernel<'_> {
    fn log_eval(&self, z: Complex64) -> Result<Complex64> {
        let c = 2.0 * self.alpha / std::f64::consts::PI;
        let lg = crate::special::log_gamma(Complex64::new(0.5, 0.0) + c * z)?;
        let one_plus = Complex64::new(1.0, 0.0) + z;
        Ok(log_z_squared(z) + self.product.log_eval(z)?.log_value - self.shift * z - lg - 4.0 * one_plus.ln())
    }
}

pub fn evaluate_g(product: &TruncatedProduct, alpha: f64, shift: f64, z: Complex64) -> Result<Complex64> {
    SectorKernel { product, alpha, shift }.eval(z)
}

/// Exponential shift `A` for the sector kernel: the largest observed
/// `log|G(z)| / Re z` on a moderate half-plane grid plus one, so that
/// `G(z) exp(-A z)` decays along every ray of the open right half-plane.
pub fn default_sector_shift(product: &TruncatedProduct) -> Result<f64> {
    let grid = half_plane_grid(0.05, 200.0, 40, 24);
    let cert = certify_fuchs_bounds(product, &grid, &[])?;
    let total = cert.upper_samples.iter().map(|s| s.log_abs / s.z.re).fold(0.0, f64::max);
    Ok(total + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::arithmetic_progression;
    use crate::special::{log_gamma, EULER_GAMMA};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn squares() -> TruncatedProduct {
        TruncatedProduct::new(ExponentSequence::generated(SequenceRule::Power { exponent: 2.0 }, 1000.0).unwrap()).unwrap()
    }

    // G(z) = exp(2 gamma b z) Gamma(1 + b z) / Gamma(1 - b z) for lambda_n = n / b
    fn progression_closed_form(b: f64, z: Complex64) -> Complex64 {
        let one = c(1.0, 0.0);
        2.0 * EULER_GAMMA * b * z + log_gamma(one + b * z).unwrap() - log_gamma(one - b * z).unwrap()
    }

    #[test]
    fn progression_matches_gamma_ratio() {
        for b in [0.5, 1.0, 2.0] {
            let p = TruncatedProduct::new(arithmetic_progression(b, 100.0).unwrap()).unwrap();
            for z in [c(0.3, 0.0), c(2.5, 1.5), c(10.0, -40.0), c(0.0, 7.0), c(-3.3, 2.0)] {
                let got = p.log_eval(z).unwrap().value();
                let want = progression_closed_form(b, z).exp();
                assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0), "b={b} z={z}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn finite_list_is_exact() {
        let seq = ExponentSequence::explicit(vec![1.0, 2.5]).unwrap();
        let p = TruncatedProduct::new(seq).unwrap();
        let z = c(0.7, 1.1);
        let direct = (1.0 - z) / (1.0 + z) * (2.0 * z).exp() * (2.5 - z) / (2.5 + z) * (2.0 * z / 2.5).exp();
        let got = p.log_eval(z).unwrap();
        assert!((got.value() - direct).norm() < 1e-14);
        assert_eq!(got.remainder_bound, 0.0);
    }

    #[test]
    fn zeros_and_pole_guard() {
        let p = squares();
        assert!(evaluate_g_product(&p, c(4.0, 0.0)).unwrap().norm() < 1e-300);
        assert!(matches!(p.log_eval(c(-4.0, 0.0)), Err(MuntzError::PoleProximity { .. })));
    }

    #[test]
    fn fixed_truncation_limits() {
        let seq = ExponentSequence::generated(SequenceRule::Arithmetic { start: 0.0, step: 1.0 }, 10.0).unwrap();
        let p = TruncatedProduct::with_truncation(seq, Truncation::Fixed(2000)).unwrap();
        assert!(p.log_eval(c(50.0, 20.0)).is_ok());
        assert!(matches!(p.log_eval(c(5000.0, 0.0)), Err(MuntzError::TruncationInsufficient { .. })));
    }

    #[test]
    fn psi_on_diagonal_matches_derivative() {
        let p = squares();
        let kernel = NormalizedKernel::new(&p, 0.0, std::f64::consts::PI.powi(2) / 6.0).unwrap();
        for k in 1..=3 {
            let lk = (k * k) as f64;
            let h = 1e-5 * lk;
            let g0 = |x: f64| kernel.log_g0(c(x, 0.0)).unwrap().exp();
            let derivative = (g0(lk + h) - g0(lk - h)) / (2.0 * h);
            let expected = derivative * lk * lk / (1.0 + lk).powi(4);
            let psi = evaluate_psi_k(&p, 0.0, kernel.a2, k, c(lk, 0.0)).unwrap();
            assert!((psi - expected).norm() <= 1e-6 * expected.norm(), "k={k}: {psi} vs {expected}");
            // vanishes at the other exponents
            let other = ((k + 1) * (k + 1)) as f64;
            assert!(evaluate_psi_k(&p, 0.0, kernel.a2, k, c(other, 0.0)).unwrap().norm() < 1e-300);
        }
    }

    #[test]
    fn growth_constant_stable_with_factor_two() {
        let seq = ExponentSequence::generated(SequenceRule::Arithmetic { start: 0.0, step: 1.0 }, 10.0).unwrap();
        let p = TruncatedProduct::new(seq).unwrap();
        let small = certify_fuchs_bounds(&p, &half_plane_grid(0.5, 50.0, 12, 9), &[]).unwrap();
        let large = certify_fuchs_bounds(&p, &half_plane_grid(0.5, 2000.0, 18, 9), &[]).unwrap();
        assert!(large.a_upper.is_finite());
        assert!((large.a_upper - small.a_upper).abs() < 1.0, "{} vs {}", small.a_upper, large.a_upper);
    }

    #[test]
    fn sieve_rejects_discs() {
        let p = squares();
        assert!(!sieve_membership(p.sequence(), c(4.1, 0.0)).unwrap());
        assert!(sieve_membership(p.sequence(), c(6.0, 0.0)).unwrap());
        assert!(matches!(certify_fuchs_bounds(&p, &[], &[c(9.05, 0.0)]), Err(MuntzError::SieveViolation(_))));
    }

    proptest! {
        #[test]
        fn reflection_and_unit_modulus(x in 0.0f64..30.0, y in -30.0f64..30.0) {
            let p = squares();
            let z = c(x, y);
            let right = p.log_eval(z).unwrap().log_value;
            let left = p.log_eval(-z);
            prop_assume!(left.is_ok());
            prop_assert!((right + left.unwrap().log_value).re.abs() < 1e-9);
            prop_assert!(p.log_eval(c(0.0, y)).unwrap().log_value.re.abs() < 1e-9);
        }

        #[test]
        fn squares_bounded_by_zeta_two(x in 0.0f64..200.0, y in -200.0f64..200.0) {
            let p = squares();
            let bound = 2.0 * x * std::f64::consts::PI.powi(2) / 6.0;
            prop_assert!(p.log_eval(c(x, y)).unwrap().log_value.re <= bound + 1e-9);
        }

        #[test]
        fn doubling_order_converges(x in 0.0f64..20.0, y in -20.0f64..20.0) {
            let seq = ExponentSequence::generated(SequenceRule::Power { exponent: 2.0 }, 10.0).unwrap();
            let a = TruncatedProduct::with_truncation(seq.clone(), Truncation::Fixed(100)).unwrap();
            let b = TruncatedProduct::with_truncation(seq, Truncation::Fixed(200)).unwrap();
            let z = c(x, y);
            let (ea, eb) = (a.log_eval(z).unwrap(), b.log_eval(z).unwrap());
            prop_assert!((ea.value() - eb.value()).norm() <= 1e-10 * eb.value().norm().max(1e-300) + ea.remainder_bound);
        }
    }
}
