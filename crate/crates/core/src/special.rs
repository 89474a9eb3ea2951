//! Complex log-Gamma and the scalar helper functions used by the kernel
//! asymptotics: the Malliavin comparison function, its root, and the
//! auxiliary integral `epsilon3`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{MuntzError, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// A log-Gamma value together with the argument it was computed at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaEvaluation {
    pub argument: Complex64,
    /// `log |Gamma(z)|`
    pub log_modulus: f64,
    /// Principal branch of `log Gamma(z)`.
    pub log_value: Complex64,
}

impl GammaEvaluation {
    pub fn new(z: Complex64) -> Result<Self> {
        let log_value = log_gamma(z)?;
        Ok(Self { argument: z, log_modulus: log_value.re, log_value })
    }

    /// `Gamma(z)` itself; overflows to infinity for large arguments.
    pub fn value(&self) -> Complex64 {
        self.log_value.exp()
    }
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal-branch `log Gamma(z)`.
///
/// Lanczos core on `Re z >= 1/2`, reflection with branch correction
/// elsewhere.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(MuntzError::GammaPole(z));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(MuntzError::InvalidParameter(format!("non-finite log-gamma argument {z}")));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_log_gamma(z));
    }
    let reflected = lanczos_log_gamma(Complex64::new(1.0, 0.0) - z);
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };
    let branch = 2.0 * PI * sign * (0.5 * z.re + 0.25).floor();
    Ok(Complex64::new(PI.ln(), branch) - log_sin_pi(z) - reflected)
}

fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + LN_SQRT_2PI + series.ln()
}

/// Principal `log sin(pi z)`, stable for large `|Im z|`.
pub fn log_sin_pi(z: Complex64) -> Complex64 {
    let w = z * PI;
    let raw = if w.im.abs() < 20.0 {
        w.sin().ln()
    } else if w.im > 0.0 {
        let i = Complex64::i();
        -i * w + (Complex64::new(1.0, 0.0) - (2.0 * i * w).exp()).ln() + Complex64::new(-(2f64.ln()), PI / 2.0)
    } else {
        let i = Complex64::i();
        i * w + (Complex64::new(1.0, 0.0) - (-2.0 * i * w).exp()).ln() + Complex64::new(-(2f64.ln()), -PI / 2.0)
    };
    Complex64::new(raw.re, wrap_phase(raw.im))
}

/// Maps a phase into `(-pi, pi]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase % (2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    } else if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// `Gamma(z) Gamma(1 - z) sin(pi z) - pi`, evaluated through logarithms.
pub fn reflection_residual(z: Complex64) -> Result<f64> {
    let lhs = log_gamma(z)? + log_gamma(Complex64::new(1.0, 0.0) - z)? + log_sin_pi(z);
    Ok((lhs.exp() - PI).norm())
}

/// The remainder `c1(z)` of the Stirling-type estimate
/// `log|Gamma(1/2 + z)| = x log|z + 1/2| - |y arg(z + 1/2)| - x + c1(z)`.
pub fn gamma_asymptotic_residual(z: Complex64) -> Result<f64> {
    if z.re < 0.0 {
        return Err(MuntzError::Precondition(format!("Re z must be nonnegative, got {z}")));
    }
    let shifted = z + 0.5;
    let log_mod = log_gamma(shifted)?.re;
    Ok(log_mod - z.re * shifted.norm().ln() + (z.im * shifted.arg()).abs() + z.re)
}

/// `psi(s) = 2 + s log|(s - 1)/(s + 1)|`; `-inf` at the singular point `s = 1`.
pub fn malliavin_psi(s: f64) -> f64 {
    if s == 1.0 {
        return f64::NEG_INFINITY;
    }
    if s == 0.0 {
        return 2.0;
    }
    2.0 + s * ((s - 1.0) / (s + 1.0)).abs().ln()
}

/// The unique zero of `psi` on `[0, 1)`, located by bisection on `[5/6, 6/7]`.
pub fn psi_root() -> f64 {
    let (mut lo, mut hi) = (5.0 / 6.0, 6.0 / 7.0);
    // psi decreases on [0, 1): positive at lo, negative at hi
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if malliavin_psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `epsilon3(x) = -int_0^x log|(1 - t)/(1 + t)| dt`, closed form
/// `(1 + x) log(1 + x) - (x - 1) log|x - 1|`.
pub fn epsilon3(x: f64) -> f64 {
    let x = x.abs();
    let left = if x == 0.0 { 0.0 } else { (1.0 + x) * (1.0 + x).ln() };
    let right = if x == 1.0 { 0.0 } else { (x - 1.0) * (x - 1.0).abs().ln() };
    left - right
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // reference values from a 30-digit evaluation
    const REFERENCE: [(f64, f64, f64, f64); 6] = [
        (0.3, 2.0, -2.359_449_355_937_571, -0.916_907_613_518_669_8),
        (5.0, -3.0, 2.244_246_717_020_217_7, -4.714_089_538_904_929),
        (20.0, 50.0, -0.863_440_566_351_519, 172.520_867_629_161_72),
        (-2.7, 0.5, -1.136_474_481_937_214_7, -9.427_010_917_385_819),
        (0.5, 0.0, 0.572_364_942_924_700_1, 0.0),
        (-0.3, -4.0, -6.476_528_993_635_203, -0.219_111_477_750_535_5),
    ];

    #[test]
    fn log_gamma_matches_reference() {
        for (re, im, lr, li) in REFERENCE {
            let v = log_gamma(c(re, im)).unwrap();
            assert!((v.re - lr).abs() < 1e-12 * (1.0 + lr.abs()), "{re}+{im}i: {v}");
            assert!((v.im - li).abs() < 1e-12 * (1.0 + li.abs()), "{re}+{im}i: {v}");
        }
    }

    #[test]
    fn log_gamma_special_points() {
        assert!((log_gamma(c(0.5, 0.0)).unwrap().re - PI.sqrt().ln()).abs() < 1e-14);
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(matches!(log_gamma(c(-3.0, 0.0)), Err(MuntzError::GammaPole(_))));
        assert!(matches!(log_gamma(c(0.0, 0.0)), Err(MuntzError::GammaPole(_))));
    }

    #[test]
    fn large_argument_stays_accurate() {
        let v = log_gamma(c(1e5, 3e5)).unwrap();
        assert!((v.re - 791_702.656_256_859_6).abs() < 1e-9 * 791_702.0);
        assert!((wrap_phase(v.im) - wrap_phase(3_624_169.356_156_864_6)).abs() < 1e-5);
    }

    #[test]
    fn reflection_at_example_point() {
        assert!(reflection_residual(c(0.3, 2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn c1_examples() {
        assert!((gamma_asymptotic_residual(c(0.0, 0.0)).unwrap() - PI.sqrt().ln()).abs() < 1e-14);
        assert!(gamma_asymptotic_residual(c(100.0, 0.0)).unwrap().abs() <= 10.0);
        assert!(gamma_asymptotic_residual(c(0.0, 50.0)).unwrap().abs() <= 10.0);
        assert!(gamma_asymptotic_residual(c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn psi_examples() {
        assert_eq!(malliavin_psi(0.0), 2.0);
        assert!((malliavin_psi(10.0) + 0.006_706_954_621_511_613).abs() < 1e-15);
        assert_eq!(malliavin_psi(1.0), f64::NEG_INFINITY);
        let s0 = psi_root();
        assert!(s0 > 5.0 / 6.0 && s0 < 6.0 / 7.0);
        assert!((s0 - 0.833_556_559_600_964_7).abs() < 1e-12);
        assert!(malliavin_psi(s0 - 0.01) > 0.0);
        assert!(malliavin_psi(s0 + 0.01) < 0.0);
    }

    #[test]
    fn epsilon3_examples() {
        assert_eq!(epsilon3(0.0), 0.0);
        assert!((epsilon3(1.0) - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn epsilon3_matches_midpoint_quadrature() {
        // independent check: composite midpoint rule away from the log singularity
        for &x in &[0.3, 0.9, 2.5, 7.0] {
            let n = 200_000;
            let h = x / n as f64;
            let q: f64 = (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    -((1.0 - t) / (1.0 + t)).abs().ln() * h
                })
                .sum();
            assert!((q - epsilon3(x)).abs() < 1e-4, "x={x}: {q} vs {}", epsilon3(x));
        }
    }

    proptest! {
        #[test]
        fn recurrence_holds(re in 0.5f64..20.0, im in -20.0f64..20.0) {
            let z = c(re, im);
            let lhs = log_gamma(z + 1.0).unwrap();
            let rhs = log_gamma(z).unwrap() + z.ln();
            let diff = (lhs - rhs).exp() - 1.0;
            prop_assert!(diff.norm() < 1e-12);
        }

        #[test]
        fn reflection_identity(re in -6.0f64..6.0, im in -8.0f64..8.0) {
            let z = c(re, im);
            prop_assume!((re - re.round()).abs() > 0.05 || im.abs() > 0.05);
            prop_assert!(reflection_residual(z).unwrap() < 1e-11 * PI);
        }

        #[test]
        fn psi_sign_pattern(s in 0.0f64..50.0) {
            let s0 = psi_root();
            let v = malliavin_psi(s);
            if s < s0 - 1e-9 { prop_assert!(v > 0.0); }
            if s > s0 + 1e-9 && s != 1.0 { prop_assert!(v < 0.0); }
        }
    }
}
