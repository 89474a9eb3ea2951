//! Gauss-Kronrod panels and precomputed half-line tables for transforms of
//! the form `int_0^inf K(t d) zeta^(-t d) d dt` along a ray of direction `d`.

use num_complex::Complex64;

use crate::error::{MuntzError, Result};
use crate::fuchs::LogKernel;
use crate::parallel::Execution;

// 15-point Kronrod abscissae on [0, 1] (symmetric); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// A quadrature node on `[a, b]` with its Kronrod weight and (possibly zero)
/// Gauss weight, both already scaled by the half-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub wk: f64,
    pub wg: f64,
}

/// The 15 nodes of one Gauss-Kronrod panel on `[a, b]`, ordered left to right.
pub fn gk15_nodes(a: f64, b: f64) -> [Node; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [Node { x: c, wk: WGK[7] * h, wg: WG[3] * h }; 15];
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[j] = Node { x: c - h * XGK[j], wk: WGK[j] * h, wg };
        out[14 - j] = Node { x: c + h * XGK[j], wk: WGK[j] * h, wg };
    }
    out
}

/// QUADPACK's heuristic sharpening of `|K15 - G7|`.
pub fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut e = err.abs();
    if resasc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / resasc).powf(1.5);
        e = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * resabs);
    }
    e
}

/// Kronrod value and error estimate of one panel from its node values.
pub fn panel_estimate(nodes: &[Node; 15], values: &[Complex64; 15]) -> (Complex64, f64) {
    let mut k = Complex64::new(0.0, 0.0);
    let mut g = Complex64::new(0.0, 0.0);
    let mut resabs = 0.0;
    let mut len = 0.0;
    for (n, v) in nodes.iter().zip(values) {
        k += n.wk * v;
        g += n.wg * v;
        resabs += n.wk * v.norm();
        len += n.wk;
    }
    let mean = k / len;
    let resasc: f64 = nodes.iter().zip(values).map(|(n, v)| n.wk * (v - mean).norm()).sum();
    (k, rescale_error((k - g).norm(), resabs, resasc))
}

/// `int_a^b f` by one 15-point panel.
pub fn gk15(f: impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let nodes = gk15_nodes(a, b);
    let values = nodes.map(|n| f(n.x));
    panel_estimate(&nodes, &values)
}

/// An integral with its quadrature and truncation error estimates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: Complex64,
    pub quadrature_error: f64,
    pub truncation_error: f64,
}

impl Estimate {
    pub fn total_error(&self) -> f64 {
        self.quadrature_error + self.truncation_error
    }
}

/// Composite panels on `[a, b]`, doubled until two successive levels agree
/// to `tol * max(1, |I|)`. The reported quadrature error is the larger of
/// the level difference and the summed panel estimates.
pub fn composite_doubling<F>(f: F, a: f64, b: f64, tol: f64, start: usize, max_panels: usize, exec: Execution) -> Result<Estimate>
where
    F: Fn(f64) -> Result<Complex64> + Sync + Send,
{
    let level = |panels: usize| -> Result<(Complex64, f64)> {
        let h = (b - a) / panels as f64;
        let idx: Vec<usize> = (0..panels).collect();
        let parts = exec.map(&idx, |&i| -> Result<(Complex64, f64)> {
            let nodes = gk15_nodes(a + i as f64 * h, a + (i + 1) as f64 * h);
            let mut values = [Complex64::new(0.0, 0.0); 15];
            for (v, n) in values.iter_mut().zip(&nodes) {
                *v = f(n.x)?;
            }
            Ok(panel_estimate(&nodes, &values))
        });
        let mut sum = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for p in parts {
            let (v, e) = p?;
            sum += v;
            err += e;
        }
        Ok((sum, err))
    };
    let mut panels = start.max(1);
    let mut prev = level(panels)?;
    loop {
        let next_panels = panels * 2;
        let next = level(next_panels)?;
        let diff = (next.0 - prev.0).norm();
        if diff <= tol * next.0.norm().max(1.0) || next_panels >= max_panels {
            return Ok(Estimate { value: next.0, quadrature_error: diff.max(next.1), truncation_error: 0.0 });
        }
        prev = next;
        panels = next_panels;
    }
}

/// Bounds over every `zeta` a table will be asked about, written in terms of
/// `w = -d log zeta` for the ray direction `d`: along the ray
/// `|zeta^(-t d)| = exp(t Re w)` and the phase turns at rate `Im w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsumerBounds {
    pub growth: f64,
    pub frequency: f64,
}

impl ConsumerBounds {
    /// Bounds for the given sample of `log zeta` values.
    pub fn from_logs(direction: Complex64, logs: &[Complex64]) -> Self {
        let mut growth = f64::NEG_INFINITY;
        let mut frequency: f64 = 0.0;
        for l in logs {
            let w = -direction * l;
            growth = growth.max(w.re);
            frequency = frequency.max(w.im.abs());
        }
        Self { growth, frequency }
    }
}

/// Parameters of the half-line tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableSettings {
    /// Longest admissible path length.
    pub cutoff_radius: f64,
    /// At least this many panels per unit length.
    pub panels_per_unit: usize,
    /// Stop once the integrand bound has dropped this far (in log) below its peak.
    pub log_drop: f64,
    pub max_nodes: usize,
}

impl Default for TableSettings {
    fn default() -> Self {
        Self { cutoff_radius: 1e4, panels_per_unit: 1, log_drop: 40.0, max_nodes: 2_000_000 }
    }
}

/// Precomputed `K(z_j) d w_j` along a ray, truncated where the integrand has
/// become negligible for every consumer.
#[derive(Debug, Clone)]
pub struct PathTable {
    direction: Complex64,
    nodes: Vec<[Node; 15]>,
    // z_j and log(K(z_j) d) per panel
    points: Vec<[Complex64; 15]>,
    log_weights: Vec<[Complex64; 15]>,
    end: f64,
    end_log_kernel: Complex64,
    peak_offset: f64,
}

fn log_derivative<K: LogKernel + ?Sized>(kernel: &K, direction: Complex64, t: f64) -> Result<f64> {
    let e = 1e-6 * t.max(1e-3);
    let lo = kernel.log_eval(direction * (t - e).max(0.0))?;
    let hi = kernel.log_eval(direction * (t + e))?;
    let d = (hi - lo) / (t + e - (t - e).max(0.0));
    Ok(if d.re.is_finite() && d.im.is_finite() { d.norm() } else { 0.0 })
}

impl PathTable {
    pub fn build<K: LogKernel + ?Sized>(kernel: &K, direction: Complex64, bounds: ConsumerBounds, settings: &TableSettings) -> Result<Self> {
        let direction = direction / direction.norm();
        let h_max = 1.0 / settings.panels_per_unit.max(1) as f64;
        let mut nodes = Vec::new();
        let mut points = Vec::new();
        let mut log_weights = Vec::new();
        let mut t = 0.0;
        let mut peak = f64::NEG_INFINITY;
        let mut peak_t = 0.0;
        let mut last;
        loop {
            let mut h = h_max.min(2.0 / (bounds.frequency + 1.0));
            for _ in 0..3 {
                let d = log_derivative(kernel, direction, t + 0.5 * h)?;
                h = h_max.min(1.0 / (d + bounds.frequency + bounds.growth.abs() + 1.0));
            }
            let panel = gk15_nodes(t, t + h);
            let mut zs = [Complex64::new(0.0, 0.0); 15];
            let mut lw = [Complex64::new(f64::NEG_INFINITY, 0.0); 15];
            let mut panel_max = f64::NEG_INFINITY;
            for (j, n) in panel.iter().enumerate() {
                let z = direction * n.x;
                zs[j] = z;
                let lk = kernel.log_eval(z)?;
                lw[j] = lk + direction.ln();
                panel_max = panel_max.max(lk.re + n.x * bounds.growth);
            }
            last = kernel.log_eval(direction * (t + h))?;
            nodes.push(panel);
            points.push(zs);
            log_weights.push(lw);
            t += h;
            if panel_max > peak {
                peak = panel_max;
                peak_t = t;
            }
            let tail = last.re + t * bounds.growth;
            if tail < peak - settings.log_drop && t > peak_t {
                break;
            }
            if t > settings.cutoff_radius || nodes.len() * 15 > settings.max_nodes {
                return Err(MuntzError::Nonconvergent { line: 0, zeta: Complex64::new(bounds.growth, bounds.frequency) });
            }
        }
        Ok(Self { direction, nodes, points, log_weights, end: t, end_log_kernel: last, peak_offset: t - peak_t })
    }

    pub fn direction(&self) -> Complex64 {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.nodes.len() * 15
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// `int_ray K(z) zeta^(-z) dz` given `log zeta`.
    pub fn transform(&self, log_zeta: Complex64) -> Estimate {
        let mut value = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for ((panel, zs), lw) in self.nodes.iter().zip(&self.points).zip(&self.log_weights) {
            let mut vals = [Complex64::new(0.0, 0.0); 15];
            for j in 0..15 {
                let l = lw[j] - zs[j] * log_zeta;
                vals[j] = if l.re == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { l.exp() };
            }
            let (v, e) = panel_estimate(panel, &vals);
            value += v;
            err += e;
        }
        // tail: last integrand modulus times the distance over which it fell by log_drop
        let end_z = self.direction * self.end;
        let tail_log = (self.end_log_kernel - end_z * log_zeta).re;
        let truncation_error = if tail_log == f64::NEG_INFINITY { 0.0 } else { tail_log.exp() * self.peak_offset.max(1.0) };
        Estimate { value, quadrature_error: err, truncation_error }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Gaussian;
    impl LogKernel for Gaussian {
        fn log_eval(&self, z: Complex64) -> Result<Complex64> {
            Ok(-z * z)
        }
    }

    struct Decay(f64);
    impl LogKernel for Decay {
        fn log_eval(&self, z: Complex64) -> Result<Complex64> {
            Ok(-self.0 * z)
        }
    }

    #[test]
    fn gk15_is_exact_for_polynomials() {
        let (v, e) = gk15(|x| Complex64::new(x.powi(13), 0.0), 0.0, 2.0);
        assert!((v.re - 2f64.powi(14) / 14.0).abs() < 1e-10);
        assert!(e < 1e-8);
    }

    #[test]
    fn doubling_converges_on_oscillatory_integrand() {
        let f = |x: f64| Ok(Complex64::new(0.0, 10.0 * x).exp());
        let est = composite_doubling(f, 0.0, 3.0, 1e-13, 2, 1 << 12, Execution::Sequential).unwrap();
        let exact = (Complex64::new(0.0, 30.0).exp() - 1.0) / Complex64::new(0.0, 10.0);
        assert!((est.value - exact).norm() < 1e-12);
        assert!(est.quadrature_error < 1e-10);
    }

    #[test]
    fn gaussian_fourier_transform() {
        // int_0^inf exp(-t^2) exp(-i w t) dt with log zeta = i w on the real ray
        let bounds = ConsumerBounds::from_logs(Complex64::new(1.0, 0.0), &[Complex64::new(0.0, 0.5)]);
        let table = PathTable::build(&Gaussian, Complex64::new(1.0, 0.0), bounds, &TableSettings::default()).unwrap();
        let est = table.transform(Complex64::new(0.0, 0.0));
        assert!((est.value.re - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
        assert!(est.total_error() < 1e-10);
    }

    #[test]
    fn rotated_ray_exponential() {
        // int along direction e^{i pi/6} of exp(-2 z) zeta^{-z} = 1 / (2 + log zeta)
        let d = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6);
        let lz = Complex64::new(0.3, -0.2);
        let table = PathTable::build(&Decay(2.0), d, ConsumerBounds::from_logs(d, &[lz]), &TableSettings::default()).unwrap();
        let est = table.transform(lz);
        let exact = 1.0 / (2.0 + lz);
        assert!((est.value - exact).norm() < 1e-13, "{} vs {exact}", est.value);
    }

    #[test]
    fn growing_integrand_is_nonconvergent() {
        let d = Complex64::new(1.0, 0.0);
        let bounds = ConsumerBounds { growth: 3.0, frequency: 0.0 };
        let settings = TableSettings { cutoff_radius: 50.0, ..TableSettings::default() };
        assert!(matches!(PathTable::build(&Decay(2.0), d, bounds, &settings), Err(MuntzError::Nonconvergent { .. })));
    }
}
