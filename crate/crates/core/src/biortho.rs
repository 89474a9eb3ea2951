//! Half-line transforms of the kernels, the bounded functionals they define
//! on the sector boundary, coefficient recovery and the incompleteness witness.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{MuntzError, Result};
use crate::fuchs::{LogKernel, NormalizedKernel, PsiKernel, SectorKernel, TruncatedProduct};
use crate::parallel::Execution;
use crate::quadrature::{gk15_nodes, panel_estimate, ConsumerBounds, Estimate, Node, PathTable, TableSettings};

/// Integration parameters shared by every transform and functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Longest half-line path before giving up.
    pub cutoff_radius: f64,
    /// Minimum Gauss-Kronrod panels per unit length along half-lines.
    pub panels_per_unit: usize,
    /// Target for the node-doubling comparison, relative to the integrand mass.
    pub tolerance: f64,
    /// Radial integrals run over `s = e^(-u)`, `0 <= u <= radial_cutoff`.
    pub radial_cutoff: f64,
    pub execution: Execution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { cutoff_radius: 1e4, panels_per_unit: 1, tolerance: 1e-11, radial_cutoff: 36.0, execution: Execution::default() }
    }
}

impl QuadratureSpec {
    fn table_settings(&self) -> TableSettings {
        TableSettings { cutoff_radius: self.cutoff_radius, panels_per_unit: self.panels_per_unit, ..TableSettings::default() }
    }
}

/// A quadrature value with separate quadrature and truncation error estimates.
pub type FunctionalResult = Estimate;

/// A kernel whose half-line transforms are taken along the straight rays `L_l`.
pub trait HalfLineKernel: LogKernel {
    /// `h_l(zeta)` for `l = +-1` is defined for `angle < -l arg zeta <= pi`.
    fn domain_angle(&self) -> f64 {
        0.0
    }
}

/// The sector kernel for a sector of half-angle `alpha` is built with the
/// angle `KERNEL_ANGLE_FRACTION * alpha` in its Gamma factor. On the sector
/// edges its transforms then decay like `exp(-(alpha - angle) t)` instead
/// of algebraically, and the growth bound on the imaginary axis that the
/// boundary representation relies on still holds with `alpha`.
pub const KERNEL_ANGLE_FRACTION: f64 = 0.5;

impl HalfLineKernel for SectorKernel<'_> {
    fn domain_angle(&self) -> f64 {
        self.alpha
    }
}

impl HalfLineKernel for PsiKernel<'_> {}

fn ray_direction(l: i8) -> Complex64 {
    Complex64::from_polar(1.0, l as f64 * PI / 2.0)
}

fn check_domain<K: HalfLineKernel + ?Sized>(kernel: &K, l: i8, zeta: Complex64) -> Result<()> {
    let ok = match l {
        0 => zeta.norm() >= 1.0 - 1e-12,
        1 | -1 => {
            let a = -(l as f64) * zeta.arg();
            a > kernel.domain_angle() && a <= PI
        }
        _ => return Err(MuntzError::InvalidParameter(format!("line index {l} not in {{-1, 0, 1}}"))),
    };
    if ok {
        Ok(())
    } else {
        Err(MuntzError::DomainViolation { line: l, zeta })
    }
}

fn build_table<K: HalfLineKernel + ?Sized>(kernel: &K, l: i8, logs: &[Complex64], quad: &QuadratureSpec) -> Result<PathTable> {
    let d = ray_direction(l);
    PathTable::build(kernel, d, ConsumerBounds::from_logs(d, logs), &quad.table_settings()).map_err(|e| match e {
        MuntzError::Nonconvergent { .. } => MuntzError::Nonconvergent { line: l, zeta: logs[0].exp() },
        other => other,
    })
}

/// `h_l(zeta) = int_{L_l} K(z) zeta^(-z) dz` with the principal `log zeta`.
pub fn half_line_transform<K: HalfLineKernel + ?Sized>(kernel: &K, l: i8, zeta: Complex64, quad: &QuadratureSpec) -> Result<FunctionalResult> {
    check_domain(kernel, l, zeta)?;
    let log_zeta = zeta.ln();
    Ok(build_table(kernel, l, &[log_zeta], quad)?.transform(log_zeta))
}

/// The arc `e^(i theta)` and the radial edges `e^(-u -+ i alpha)` of the sector.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BoundaryPoint {
    node: Node,
    // arc: (zeta, h0); radial: lower edge (zeta, h1) and upper edge (zeta, h-1)
    zetas: [Complex64; 2],
    h: [Estimate; 2],
}

type Mesh = Vec<[BoundaryPoint; 15]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Arc,
    Radial,
}

const ARC_START_PANELS: usize = 2;
/// The radial range is split at `U 2^-i` for `i = 0..=RADIAL_GRADING`, so the
/// panels shrink toward `u = 0` where integrands like `s^lambda` with a large
/// `lambda` are concentrated.
const RADIAL_GRADING: i32 = 8;
const MAX_LEVELS: usize = 7;

/// The functional
/// `T(f) = (1/2pi) int_{-alpha}^{alpha} f(e^{it}) h0(e^{it}) dt
///       + (1/2pi i) int_0^1 (f(s e^{-i alpha}) h1(s e^{-i alpha}) - f(s e^{i alpha}) h-1(s e^{i alpha})) ds/s`
/// built from a kernel's half-line transforms. The arc and the radial edges
/// are refined independently, and the transforms at the nodes of every
/// refinement level are cached.
pub struct BoundaryFunctional<'k, K: HalfLineKernel + ?Sized> {
    kernel: &'k K,
    alpha: f64,
    quad: QuadratureSpec,
    tables: [PathTable; 3],
    arc_levels: Mutex<Vec<Arc<Mesh>>>,
    radial_levels: Mutex<Vec<Arc<Mesh>>>,
    // radial points at u = cutoff / 2 and u = cutoff for the tail estimate
    edge: [BoundaryPoint; 2],
}

impl<'k, K: HalfLineKernel + ?Sized> BoundaryFunctional<'k, K> {
    pub fn new(kernel: &'k K, alpha: f64, quad: QuadratureSpec) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(MuntzError::InvalidParameter(format!("sector half-angle {alpha} outside (0, pi)")));
        }
        if alpha <= kernel.domain_angle() {
            return Err(MuntzError::InvalidParameter(format!("sector half-angle {alpha} must exceed the kernel angle {}", kernel.domain_angle())));
        }
        let i = Complex64::i();
        let u = quad.radial_cutoff;
        let arc_logs = [i * alpha, -i * alpha];
        let lower = [-i * alpha, -u - i * alpha];
        let upper = [i * alpha, -u + i * alpha];
        let tables = [build_table(kernel, -1, &upper, &quad)?, build_table(kernel, 0, &arc_logs, &quad)?, build_table(kernel, 1, &lower, &quad)?];
        let blank = BoundaryPoint { node: Node { x: 0.0, wk: 0.0, wg: 0.0 }, zetas: [Complex64::new(0.0, 0.0); 2], h: [Estimate::default(); 2] };
        let mut me = Self {
            kernel,
            alpha,
            quad,
            tables,
            arc_levels: Mutex::new(Vec::new()),
            radial_levels: Mutex::new(Vec::new()),
            edge: [blank; 2],
        };
        me.edge = [me.radial_point(Node { x: 0.5 * u, ..blank.node }), me.radial_point(Node { x: u, ..blank.node })];
        Ok(me)
    }

    pub fn kernel(&self) -> &K {
        self.kernel
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn table(&self, l: i8) -> &PathTable {
        &self.tables[(l + 1) as usize]
    }

    fn arc_point(&self, node: Node) -> BoundaryPoint {
        let zeta = Complex64::from_polar(1.0, node.x);
        let h = self.table(0).transform(Complex64::new(0.0, node.x));
        BoundaryPoint { node, zetas: [zeta, zeta], h: [h, h] }
    }

    fn radial_point(&self, node: Node) -> BoundaryPoint {
        let lower_log = Complex64::new(-node.x, -self.alpha);
        let upper_log = Complex64::new(-node.x, self.alpha);
        BoundaryPoint {
            node,
            zetas: [lower_log.exp(), upper_log.exp()],
            h: [self.table(1).transform(lower_log), self.table(-1).transform(upper_log)],
        }
    }

    fn panel_breaks(&self, piece: Piece, level: usize) -> Vec<f64> {
        let base: Vec<f64> = match piece {
            Piece::Arc => (0..=ARC_START_PANELS).map(|p| -self.alpha + 2.0 * self.alpha * p as f64 / ARC_START_PANELS as f64).collect(),
            Piece::Radial => std::iter::once(0.0).chain((0..=RADIAL_GRADING).rev().map(|i| self.quad.radial_cutoff * 0.5f64.powi(i))).collect(),
        };
        let split = 1usize << level;
        let mut out = vec![base[0]];
        for w in base.windows(2) {
            out.extend((1..=split).map(|q| w[0] + (w[1] - w[0]) * q as f64 / split as f64));
        }
        out
    }

    fn mesh(&self, piece: Piece, j: usize) -> Arc<Mesh> {
        let cache = match piece {
            Piece::Arc => &self.arc_levels,
            Piece::Radial => &self.radial_levels,
        };
        let mut levels = cache.lock().expect("level cache poisoned");
        while levels.len() <= j {
            let nodes: Vec<Node> = self.panel_breaks(piece, levels.len()).windows(2).flat_map(|w| gk15_nodes(w[0], w[1])).collect();
            let points = match piece {
                Piece::Arc => self.quad.execution.map(&nodes, |&nd| self.arc_point(nd)),
                Piece::Radial => self.quad.execution.map(&nodes, |&nd| self.radial_point(nd)),
            };
            levels.push(Arc::new(points.chunks(15).map(|c| <[BoundaryPoint; 15]>::try_from(c).expect("whole panels")).collect()));
        }
        levels[j].clone()
    }

    fn sum_mesh(&self, piece: Piece, mesh: &Mesh, f: &(dyn Fn(Complex64) -> Complex64 + Sync)) -> LevelSum {
        let mut sum = LevelSum::default();
        let two_pi = Complex64::new(2.0 * PI, 0.0);
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        for panel in mesh {
            let mut vals = [Complex64::new(0.0, 0.0); 15];
            for (v, p) in vals.iter_mut().zip(panel) {
                if piece == Piece::Arc {
                    let fv = f(p.zetas[0]);
                    *v = fv * p.h[0].value / two_pi;
                    sum.absorb_inner(p.node.wk * fv.norm() / (2.0 * PI), &p.h[0]);
                } else {
                    let (f1, f2) = (f(p.zetas[0]), f(p.zetas[1]));
                    *v = (f1 * p.h[0].value - f2 * p.h[1].value) / two_pi_i;
                    sum.absorb_inner(p.node.wk * f1.norm() / (2.0 * PI), &p.h[0]);
                    sum.absorb_inner(p.node.wk * f2.norm() / (2.0 * PI), &p.h[1]);
                }
            }
            sum.absorb_panel(panel, &vals);
        }
        sum
    }

    /// Refines one piece until two successive levels agree. Once they do the
    /// finer level is far more accurate than their difference, so the panel
    /// heuristics only enter the error without convergence.
    fn integrate(&self, piece: Piece, f: &(dyn Fn(Complex64) -> Complex64 + Sync)) -> LevelSum {
        let mut prev = self.sum_mesh(piece, &self.mesh(piece, 0), f);
        for j in 1..MAX_LEVELS {
            let mut cur = self.sum_mesh(piece, &self.mesh(piece, j), f);
            let diff = (cur.value - prev.value).norm();
            if diff <= self.quad.tolerance * cur.mass {
                cur.panel_error = diff;
                return cur;
            }
            if j + 1 == MAX_LEVELS {
                cur.panel_error = cur.panel_error.max(diff);
                return cur;
            }
            prev = cur;
        }
        unreachable!("loop returns at the last level")
    }

    fn radial_integrand(&self, p: &BoundaryPoint, f: &(dyn Fn(Complex64) -> Complex64 + Sync)) -> f64 {
        ((f(p.zetas[0]) * p.h[0].value - f(p.zetas[1]) * p.h[1].value) / (2.0 * PI)).norm()
    }

    /// Estimate of the neglected radial range `u > radial_cutoff`, from the
    /// decay rate measured between the half cutoff and the cutoff.
    fn radial_tail(&self, f: &(dyn Fn(Complex64) -> Complex64 + Sync)) -> f64 {
        let u = self.quad.radial_cutoff;
        let mid = self.radial_integrand(&self.edge[0], f);
        let end = self.radial_integrand(&self.edge[1], f);
        if end == 0.0 {
            return 0.0;
        }
        let rate = (mid / end).ln() / (0.5 * u);
        if rate > 0.05 {
            end / rate
        } else {
            end * u
        }
    }

    /// `T(f)` for a function given on the sector boundary.
    pub fn apply(&self, f: &(dyn Fn(Complex64) -> Complex64 + Sync)) -> Result<FunctionalResult> {
        let arc = self.integrate(Piece::Arc, f);
        let radial = self.integrate(Piece::Radial, f);
        let value = arc.value + radial.value;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(MuntzError::Overflow(value.norm()));
        }
        Ok(FunctionalResult {
            value,
            quadrature_error: arc.panel_error + radial.panel_error + arc.inner_quadrature + radial.inner_quadrature,
            truncation_error: arc.inner_truncation + radial.inner_truncation + self.radial_tail(f),
        })
    }

    /// Upper bound for the norm of the functional under the sup norm on the
    /// boundary: `(1/2pi) (int |h0| dtheta + int (|h1| + |h-1|) ds/s)` plus
    /// every error estimate involved.
    pub fn norm_upper(&self) -> f64 {
        let mass = |j: usize| {
            let mut total = 0.0;
            let mut inner = 0.0;
            for p in self.mesh(Piece::Arc, j).iter().flatten() {
                total += p.node.wk * p.h[0].value.norm();
                inner += p.node.wk * p.h[0].total_error();
            }
            for p in self.mesh(Piece::Radial, j).iter().flatten() {
                total += p.node.wk * (p.h[0].value.norm() + p.h[1].value.norm());
                inner += p.node.wk * (p.h[0].total_error() + p.h[1].total_error());
            }
            (total / (2.0 * PI), inner / (2.0 * PI))
        };
        let (mut coarse, _) = mass(0);
        let (mut fine, mut inner) = mass(1);
        for j in 2..MAX_LEVELS {
            if (fine - coarse).abs() <= 1e-3 * fine {
                break;
            }
            coarse = fine;
            (fine, inner) = mass(j);
        }
        let tail = self.edge[1].h[0].value.norm().max(self.edge[1].h[1].value.norm()) / (2.0 * PI) * self.quad.radial_cutoff;
        fine + (fine - coarse).abs() + inner + tail
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct LevelSum {
    value: Complex64,
    panel_error: f64,
    mass: f64,
    inner_quadrature: f64,
    inner_truncation: f64,
}

impl LevelSum {
    fn absorb_inner(&mut self, weight: f64, h: &Estimate) {
        self.inner_quadrature += weight * h.quadrature_error;
        self.inner_truncation += weight * h.truncation_error;
    }

    fn absorb_panel(&mut self, panel: &[BoundaryPoint; 15], vals: &[Complex64; 15]) {
        let nodes = panel.map(|p| p.node);
        let (v, e) = panel_estimate(&nodes, vals);
        self.value += v;
        self.panel_error += e;
        self.mass += nodes.iter().zip(vals).map(|(n, v)| n.wk * v.norm()).sum::<f64>();
    }
}

/// The sector kernel `g` for the sector of half-angle `alpha`, with the
/// default exponential shift.
pub fn sector_kernel(product: &TruncatedProduct, alpha: f64) -> Result<SectorKernel<'_>> {
    let shift = crate::fuchs::default_sector_shift(product)?;
    Ok(SectorKernel { product, alpha: KERNEL_ANGLE_FRACTION * alpha, shift })
}

/// `T(f)` on the sector of half-angle `alpha` for the sector kernel.
pub fn functional_t(kernel: &SectorKernel<'_>, alpha: f64, f: &(dyn Fn(Complex64) -> Complex64 + Sync), quad: &QuadratureSpec) -> Result<FunctionalResult> {
    BoundaryFunctional::new(kernel, alpha, *quad)?.apply(f)
}

/// `T_{k,delta}(f)`: the functional built from `psi_k(z) e^(-delta z)`, so that
/// `T_{k,delta}(zeta^lambda) = psi_k(lambda) e^(-delta lambda)`.
pub fn functional_t_k_delta(
    kernel: &NormalizedKernel<'_>,
    k: usize,
    delta: f64,
    alpha: f64,
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    quad: &QuadratureSpec,
) -> Result<FunctionalResult> {
    if !(delta > 0.0) {
        return Err(MuntzError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let psi = PsiKernel { kernel: *kernel, k, damping: delta };
    BoundaryFunctional::new(&psi, alpha, *quad)?.apply(f)
}

/// `zeta^lambda` on the principal branch.
pub fn monomial(lambda: Complex64) -> impl Fn(Complex64) -> Complex64 + Sync {
    move |zeta: Complex64| if zeta.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { (lambda * zeta.ln()).exp() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckReport {
    pub z: Complex64,
    /// Right-hand side of the boundary representation, by quadrature.
    pub represented: FunctionalResult,
    /// `g(z)` evaluated directly.
    pub direct: Complex64,
    pub residual: f64,
}

/// Compares the boundary representation `T(zeta^z)` with `g(z)`.
pub fn representation_crosscheck<K: HalfLineKernel + ?Sized>(functional: &BoundaryFunctional<'_, K>, z: Complex64) -> Result<CrosscheckReport> {
    if !(z.re > 0.0) {
        return Err(MuntzError::Precondition(format!("Re z must be positive, got {z}")));
    }
    let represented = functional.apply(&monomial(z))?;
    let direct = functional.kernel().eval(z)?;
    Ok(CrosscheckReport { z, represented, direct, residual: (represented.value - direct).norm() })
}

/// `sum a_k z^(lambda_k)` with per-coefficient error estimates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MuntzExpansion {
    pub terms: Vec<(f64, Complex64)>,
    pub errors: Vec<f64>,
    /// `|a_k(delta) - a_k(delta/2)|` when the recomputation was requested.
    pub delta_discrepancy: Vec<f64>,
    /// The series converges on `|z| < radius`.
    pub radius: f64,
}

impl MuntzExpansion {
    pub fn new(terms: Vec<(f64, Complex64)>) -> Result<Self> {
        if terms.windows(2).any(|w| w[1].0 <= w[0].0) || terms.iter().any(|t| !(t.0 > 0.0)) {
            return Err(MuntzError::InvalidParameter("expansion exponents must be positive and increasing".into()));
        }
        let n = terms.len();
        Ok(Self { terms, errors: vec![0.0; n], delta_discrepancy: Vec::new(), radius: 1.0 })
    }

    /// Partial sum at `z` and the propagated coefficient error `sum err_k |z^lambda_k|`.
    pub fn reconstruct(&self, z: Complex64) -> Result<(Complex64, f64)> {
        if z.norm() >= self.radius {
            return Err(MuntzError::DivergenceRisk(z.norm()));
        }
        if z.norm() == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let log_z = z.ln();
        let mut value = Complex64::new(0.0, 0.0);
        let mut bound = 0.0;
        for (i, &(lambda, a)) in self.terms.iter().enumerate() {
            let p = (lambda * log_z).exp();
            value += a * p;
            bound += self.errors.get(i).copied().unwrap_or(0.0) * p.norm();
        }
        Ok((value, bound))
    }
}

/// An `(exponent, coefficient)` pair.
type Term = (f64, Complex64);

fn recover_once(
    kernel: &NormalizedKernel<'_>,
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    terms: usize,
    delta: f64,
    alpha: f64,
    quad: &QuadratureSpec,
) -> Result<(Vec<Term>, Vec<f64>)> {
    let seq = kernel.product.sequence();
    let mut coefficients = Vec::with_capacity(terms);
    let mut errors = Vec::with_capacity(terms);
    for k in 1..=terms {
        let lambda = seq.nth(k).ok_or_else(|| MuntzError::InvalidParameter(format!("sequence has no exponent {k}")))?;
        let psi = PsiKernel { kernel: *kernel, k, damping: delta };
        let t = BoundaryFunctional::new(&psi, alpha, *quad)?.apply(f)?;
        let scale = psi.eval(Complex64::new(lambda, 0.0))?;
        if scale.norm() <= t.total_error() {
            return Err(MuntzError::IllConditioned { index: k, scale: scale.norm(), error: t.total_error() });
        }
        coefficients.push((lambda, t.value / scale));
        errors.push(t.total_error() / scale.norm());
    }
    Ok((coefficients, errors))
}

/// `a_k = e^(delta lambda_k) psi_k(lambda_k)^(-1) T_{k,delta}(f)` for `k = 1..=terms`,
/// recomputed at `delta / 2` when `verify` is set.
pub fn recover_coefficients(
    kernel: &NormalizedKernel<'_>,
    f: &(dyn Fn(Complex64) -> Complex64 + Sync),
    terms: usize,
    delta: f64,
    alpha: f64,
    quad: &QuadratureSpec,
    verify: bool,
) -> Result<MuntzExpansion> {
    if !(delta > 0.0) {
        return Err(MuntzError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let (coefficients, errors) = recover_once(kernel, f, terms, delta, alpha, quad)?;
    let mut expansion = MuntzExpansion::new(coefficients)?;
    expansion.errors = errors;
    if verify {
        let (half, _) = recover_once(kernel, f, terms, 0.5 * delta, alpha, quad)?;
        expansion.delta_discrepancy = expansion.terms.iter().zip(&half).map(|(a, b)| (a.1 - b.1).norm()).collect();
    }
    Ok(expansion)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub mu: f64,
    pub terms: usize,
    /// `|g(mu)|`
    pub g_mu: f64,
    pub norm_upper: f64,
    /// `|g(mu)| / norm_upper`: no element of the span is closer to `zeta^mu`.
    pub lower_bound: f64,
    /// Sup-norm residual of the least-squares fit on the boundary samples.
    pub ls_residual: f64,
    pub ls_rms: f64,
    pub consistent: bool,
}

/// Slack allowed when comparing the fit residual with the lower bound.
pub const WITNESS_SLACK: f64 = 1e-8;

/// Boundary samples: the arc and both radial edges with `s` down to `e^-12`.
pub fn boundary_samples(alpha: f64, per_piece: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(3 * per_piece);
    for j in 0..per_piece {
        let t = j as f64 / (per_piece - 1).max(1) as f64;
        pts.push(Complex64::from_polar(1.0, -alpha + 2.0 * alpha * t));
        let s = (-12.0 * t).exp();
        pts.push(Complex64::from_polar(s, alpha));
        pts.push(Complex64::from_polar(s, -alpha));
    }
    pts
}

/// Least-squares fit of `zeta^mu` by `zeta^lambda_1, ..., zeta^lambda_K` on
/// `samples`; returns the sup and root-mean-square residuals.
pub fn least_squares_residual(exponents: &[f64], mu: f64, samples: &[Complex64]) -> Result<(f64, f64)> {
    use nalgebra::{DMatrix, DVector};
    let n = samples.len();
    let a = DMatrix::from_fn(n, exponents.len(), |i, k| monomial(Complex64::new(exponents[k], 0.0))(samples[i]));
    let b = DVector::from_fn(n, |i, _| monomial(Complex64::new(mu, 0.0))(samples[i]));
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-15).map_err(|e| MuntzError::Precondition(e.to_string()))?;
    let r = &a * &c - &b;
    let sup = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let rms = (r.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    Ok((sup, rms))
}

/// Measures the distance from `zeta^mu` to the span of the first `terms`
/// monomials two ways: a rigorous-style lower bound from the functional and
/// the residual of an explicit least-squares fit.
pub fn incompleteness_witness(product: &TruncatedProduct, mu: f64, alpha: f64, quad: &QuadratureSpec, terms: usize) -> Result<WitnessReport> {
    let seq = product.sequence();
    if !(mu > 0.0) {
        return Err(MuntzError::Precondition(format!("mu must be positive, got {mu}")));
    }
    if let Some((k, lambda)) = seq.nearest(mu) {
        if (lambda - mu).abs() <= 1e-12 * mu.max(1.0) {
            return Err(MuntzError::Precondition(format!("mu = {mu} is the exponent with index {k}")));
        }
    }
    let kernel = sector_kernel(product, alpha)?;
    let functional = BoundaryFunctional::new(&kernel, alpha, *quad)?;
    let g_mu = kernel.eval(Complex64::new(mu, 0.0))?.norm();
    let norm_upper = functional.norm_upper();
    let lower_bound = g_mu / norm_upper;
    let exponents: Vec<f64> = (1..=terms).map(|k| seq.nth(k).ok_or(MuntzError::EmptySequence)).collect::<Result<_>>()?;
    let (ls_residual, ls_rms) = least_squares_residual(&exponents, mu, &boundary_samples(alpha, 200))?;
    Ok(WitnessReport {
        mu,
        terms,
        g_mu,
        norm_upper,
        lower_bound,
        ls_residual,
        ls_rms,
        consistent: lower_bound > 0.0 && ls_residual >= lower_bound - WITNESS_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{ExponentSequence, SequenceRule};
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn squares() -> TruncatedProduct {
        TruncatedProduct::new(ExponentSequence::generated(SequenceRule::Power { exponent: 2.0 }, 1000.0).unwrap()).unwrap()
    }

    #[test]
    fn transform_domains() {
        let p = squares();
        let g = sector_kernel(&p, FRAC_PI_4).unwrap();
        let quad = QuadratureSpec::default();
        assert!(matches!(half_line_transform(&g, 0, c(0.5, 0.0), &quad), Err(MuntzError::DomainViolation { line: 0, .. })));
        assert!(matches!(half_line_transform(&g, 1, c(0.0, 0.5), &quad), Err(MuntzError::DomainViolation { line: 1, .. })));
        assert!(matches!(half_line_transform(&g, 2, c(2.0, 0.0), &quad), Err(MuntzError::InvalidParameter(_))));
        let h = half_line_transform(&g, -1, c(0.0, 0.5), &quad).unwrap();
        assert!(h.value.norm().is_finite() && h.value.norm() > 0.0);
        let coarse = QuadratureSpec { panels_per_unit: 1, ..quad };
        let fine = QuadratureSpec { panels_per_unit: 4, ..quad };
        let a = half_line_transform(&g, -1, c(0.0, 0.5), &coarse).unwrap();
        let b = half_line_transform(&g, -1, c(0.0, 0.5), &fine).unwrap();
        assert!((a.value - b.value).norm() <= 1e-10 * a.value.norm().max(1e-300) + a.total_error() + b.total_error());
    }

    #[test]
    fn h0_of_real_argument_is_real() {
        let p = squares();
        let g = sector_kernel(&p, FRAC_PI_4).unwrap();
        let h = half_line_transform(&g, 0, c(2.0, 0.0), &QuadratureSpec::default()).unwrap();
        assert!(h.value.im.abs() <= 1e-14 * h.value.norm());
        assert!(h.value.re != 0.0);
    }

    #[test]
    fn sector_must_exceed_kernel_angle() {
        let p = squares();
        let g = SectorKernel { product: &p, alpha: FRAC_PI_4, shift: 5.0 };
        assert!(BoundaryFunctional::new(&g, FRAC_PI_4, QuadratureSpec::default()).is_err());
        assert!(BoundaryFunctional::new(&g, 4.0, QuadratureSpec::default()).is_err());
    }

    #[test]
    fn psi_functional_annihilates_other_exponents_and_is_linear() {
        let p = squares();
        let nk = NormalizedKernel::new(&p, 0.0, PI * PI / 6.0).unwrap();
        let psi = PsiKernel { kernel: nk, k: 2, damping: 0.05 };
        let t = BoundaryFunctional::new(&psi, FRAC_PI_4, QuadratureSpec::default()).unwrap();
        let off = t.apply(&monomial(c(1.0, 0.0))).unwrap();
        let on = t.apply(&monomial(c(4.0, 0.0))).unwrap();
        let expected = psi.eval(c(4.0, 0.0)).unwrap();
        assert!(off.value.norm() <= 1e-6 * expected.norm() + off.total_error());
        assert!((on.value - expected).norm() <= 1e-6 * expected.norm() + on.total_error());
        let double = t.apply(&|z: Complex64| 2.0 * monomial(c(4.0, 0.0))(z)).unwrap();
        assert!((double.value - 2.0 * on.value).norm() <= 1e-12 * on.value.norm());
    }

    #[test]
    fn reconstruct_examples() {
        let e = MuntzExpansion::new(vec![(1.0, c(1.0, 0.0))]).unwrap();
        assert!((e.reconstruct(c(0.5, 0.0)).unwrap().0 - c(0.5, 0.0)).norm() < 1e-15);
        let empty = MuntzExpansion::default();
        assert_eq!(MuntzExpansion { radius: 1.0, ..empty }.reconstruct(c(0.3, 0.2)).unwrap().0, c(0.0, 0.0));
        assert!(matches!(e.reconstruct(c(1.0, 0.0)), Err(MuntzError::DivergenceRisk(_))));
        assert!(MuntzExpansion::new(vec![(2.0, c(1.0, 0.0)), (1.0, c(1.0, 0.0))]).is_err());
        assert!(MuntzExpansion::new(vec![(0.0, c(1.0, 0.0))]).is_err());
        // outside the sector, principal branch
        let z = Complex64::from_polar(0.3, PI / 3.0);
        let two = MuntzExpansion::new(vec![(1.0, c(3.0, 0.0)), (4.0, c(-2.0, 0.0))]).unwrap();
        assert!((two.reconstruct(z).unwrap().0 - (3.0 * z - 2.0 * z.powu(4))).norm() < 1e-14);
    }

    #[test]
    fn least_squares_is_exact_inside_the_span() {
        let samples = boundary_samples(FRAC_PI_4, 50);
        assert_eq!(samples.len(), 150);
        let (sup, rms) = least_squares_residual(&[1.0, 4.0, 9.0], 4.0, &samples).unwrap();
        assert!(sup < 1e-10 && rms < 1e-10);
        let (sup, _) = least_squares_residual(&[1.0, 4.0, 9.0], 2.5, &samples).unwrap();
        assert!(sup > 1e-3);
    }

    #[test]
    fn witness_rejects_exponents_of_the_sequence() {
        let p = squares();
        let quad = QuadratureSpec::default();
        assert!(matches!(incompleteness_witness(&p, 9.0, FRAC_PI_4, &quad, 6), Err(MuntzError::Precondition(_))));
        assert!(matches!(incompleteness_witness(&p, -1.0, FRAC_PI_4, &quad, 6), Err(MuntzError::Precondition(_))));
    }

    #[test]
    fn recovery_rejects_bad_delta() {
        let p = squares();
        let nk = NormalizedKernel::new(&p, 0.0, PI * PI / 6.0).unwrap();
        let f = monomial(c(1.0, 0.0));
        assert!(recover_coefficients(&nk, &f, 2, 0.0, FRAC_PI_4, &QuadratureSpec::default(), false).is_err());
    }
}
