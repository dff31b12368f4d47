//! Declarative kernel specifications with pointwise evaluators.
//!
//! Besides two classical reference kernels (the Brownian-bridge Green's
//! function and heat kernels on (0, pi)), the module carries three
//! counterexample fixtures:
//!
//! * [`KernelSpec::PathologicalProduct`] - a nonsymmetric kernel built from
//!   shrinking bump blocks. The operator maps L2 into continuous functions,
//!   yet the product kernel of T T* jumps at the origin. Its bumps have
//!   widths down to 10^-n_max, invisible to any global quadrature rule, so
//!   every integral against it is evaluated block-locally.
//! * [`KernelSpec::LegendreDecay`] - a positive trace-class kernel whose
//!   diagonal is unbounded near the endpoints.
//! * [`KernelSpec::SlowTraceDecay`] - a trigonometric kernel with eigenvalues
//!   summable at power 1 but not at any power below 1.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::quadrature::{Interval, QuadratureRule};
use crate::semigroup::HeatSemigroupSpec;
use std::sync::OnceLock;

/// Smooth-enough cutoff: 1 on [-1/2, 1/2], exp(1 - 1/(1-(2|s|-1)^2)) on
/// 1/2 < |s| < 1, and 0 outside. Continuously differentiable, supported in
/// (-1, 1), with values in [0, 1].
pub fn bump(s: f64) -> f64 {
    let a = s.abs();
    if a <= 0.5 {
        1.0
    } else if a < 1.0 {
        let u = 2.0 * a - 1.0;
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Product bump on the square: tau(s, t) = bump(s) * bump(t).
pub fn bump2d(s: f64, t: f64) -> f64 {
    bump(s) * bump(t)
}

/// Integral of bump(u)^2 over (-1, 1). Computed once by piecewise
/// Gauss-Legendre split at the |u| = 1/2 junctions, then cached. This is
/// the n-independent value the pathological product kernel takes on its
/// positive diagonal sequence; it is always >= 1.
pub fn c_beta() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| {
        let half = Interval::new(0.5, 1.0).expect("constant interval");
        let rule = QuadratureRule::build(crate::quadrature::RuleKind::GaussLegendre, 200, half)
            .expect("fixed rule");
        let tail = rule.integrate(|s| bump(s) * bump(s)).expect("bump is finite");
        1.0 + 2.0 * tail
    })
}

/// n-th Legendre polynomial by the three-term recurrence
/// (n+1) P_{n+1}(x) = (2n+1) x P_n(x) - n P_{n-1}(x). Intended for |x| <= 1.
pub fn legendre_poly(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Eigenvalue sequence of the slow-trace fixture: 1 / (n ln^2(n+1)).
/// Summable, while the sequence raised to any power below one is not.
pub fn slow_trace_eigenvalue(n: usize) -> f64 {
    let nf = n as f64;
    1.0 / (nf * (nf + 1.0).ln().powi(2))
}

/// Partial sum of the slow-trace eigenvalues raised to `alpha`.
pub fn slow_trace_partial_sum(terms: usize, alpha: f64) -> f64 {
    (1..=terms).map(|n| slow_trace_eigenvalue(n).powf(alpha)).sum()
}

const PATHOLOGICAL_MAX_DEPTH: usize = 12;

// interval-endpoint membership, so boundary points like 0.26 = 2^-2 + 10^-2
// land inside their block under floating-point rounding
fn in_block(x: f64, center: f64, half_width: f64) -> bool {
    center - half_width <= x && x <= center + half_width
}

/// The unique block index n <= n_max with x in [2^-n - 10^-n, 2^-n + 10^-n],
/// if any. Block x-supports are pairwise disjoint, so at most one bump term
/// of the pathological kernel is alive at a given x.
pub fn pathological_block(x: f64, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|&n| in_block(x, 0.5f64.powi(n as i32), 10f64.powi(-(n as i32))))
}

/// The unique n <= n_max with x in [3^-n - 9^-n, 3^-n + 9^-n], if any:
/// membership in a z-support (also pairwise disjoint).
fn pathological_z_block(x: f64, n_max: usize) -> Option<usize> {
    (1..=n_max).find(|&n| in_block(x, 3f64.powi(-(n as i32)), 9f64.powi(-(n as i32))))
}

/// One support interval of a pathological row function, with the interior
/// points where the bump formula changes branch (|argument| = 1/2).
#[derive(Debug, Clone, Copy)]
struct SupportPiece {
    lo: f64,
    hi: f64,
    cut_lo: f64,
    cut_hi: f64,
}

impl SupportPiece {
    fn around(center: f64, half_width: f64) -> Self {
        SupportPiece {
            lo: center - half_width,
            hi: center + half_width,
            cut_lo: center - 0.5 * half_width,
            cut_hi: center + 0.5 * half_width,
        }
    }
}

fn z_support(n: usize) -> SupportPiece {
    SupportPiece::around(3f64.powi(-(n as i32)), 9f64.powi(-(n as i32)))
}

fn x_support(n: usize) -> SupportPiece {
    SupportPiece::around(0.5f64.powi(n as i32), 10f64.powi(-(n as i32)))
}

/// Support pieces of z -> K(x, z) (plus z -> K(z, x) when `symmetrized`).
fn row_supports(x: f64, n_max: usize, symmetrized: bool) -> Vec<SupportPiece> {
    let mut pieces = Vec::with_capacity(2);
    if let Some(n) = pathological_block(x, n_max) {
        pieces.push(z_support(n));
    }
    if symmetrized {
        if let Some(n) = pathological_z_block(x, n_max) {
            pieces.push(x_support(n));
        }
    }
    pieces
}

fn merge_pieces(mut pieces: Vec<SupportPiece>) -> Vec<(f64, f64)> {
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for p in pieces {
        match merged.last_mut() {
            Some(last) if p.lo <= last.1 => last.1 = last.1.max(p.hi),
            _ => merged.push((p.lo, p.hi)),
        }
    }
    merged
}

fn intersect_unions(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn reference_gauss() -> &'static QuadratureRule {
    static CACHE: OnceLock<QuadratureRule> = OnceLock::new();
    CACHE.get_or_init(|| {
        let iv = Interval::new(-1.0, 1.0).expect("constant interval");
        QuadratureRule::build(crate::quadrature::RuleKind::GaussLegendre, 80, iv).expect("fixed rule")
    })
}

/// Integral over (-1,1) of f_x(z) f_y(z) where f_x(z) = K(x, z) for the
/// pathological kernel (f_x(z) = K(x, z) + K(z, x) when `symmetrized`).
/// The integrand lives on at most a handful of bump blocks; each block
/// intersection is integrated by Gauss panels split at the bump branch
/// points, which is where the formula loses smoothness.
fn pathological_pair_integral(x: f64, y: f64, n_max: usize, symmetrized: bool) -> f64 {
    let sup_x = row_supports(x, n_max, symmetrized);
    let sup_y = row_supports(y, n_max, symmetrized);
    if sup_x.is_empty() || sup_y.is_empty() {
        return 0.0;
    }
    let mut cuts: Vec<f64> = sup_x
        .iter()
        .chain(sup_y.iter())
        .flat_map(|p| [p.cut_lo, p.cut_hi, p.lo, p.hi])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let ux = merge_pieces(sup_x);
    let uy = merge_pieces(sup_y);
    let region = intersect_unions(&ux, &uy);

    let gauss = reference_gauss();
    let fx = |z: f64| {
        let mut v = pathological_eval(x, z, n_max);
        if symmetrized {
            v += pathological_eval(z, x, n_max);
        }
        v
    };
    let fy = |z: f64| {
        let mut v = pathological_eval(y, z, n_max);
        if symmetrized {
            v += pathological_eval(z, y, n_max);
        }
        v
    };
    let mut total = 0.0;
    for (lo, hi) in region {
        let mut edges = vec![lo];
        edges.extend(cuts.iter().copied().filter(|c| *c > lo && *c < hi));
        edges.push(hi);
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            for (xi, wi) in gauss.nodes().iter().zip(gauss.weights()) {
                let z = mid + half * xi;
                total += half * wi * (fx(z) * fy(z));
            }
        }
    }
    total
}

/// Pointwise value of the pathological kernel
/// K(x, z) = sum_{n <= n_max} 3^n bump(10^n (x - 2^-n)) bump(9^n (z - 3^-n)).
fn pathological_eval(x: f64, z: f64, n_max: usize) -> f64 {
    match pathological_block(x, n_max) {
        None => 0.0,
        Some(n) => {
            let sz = 9f64.powi(n as i32) * (z - 3f64.powi(-(n as i32)));
            if sz.abs() >= 1.0 {
                0.0
            } else {
                let sx = 10f64.powi(n as i32) * (x - 0.5f64.powi(n as i32));
                3f64.powi(n as i32) * bump2d(sx, sz)
            }
        }
    }
}

/// A kernel sampled on its own quadrature rule; evaluation is only defined
/// at the rule nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    rule: QuadratureRule,
    samples: Mat,
    symmetric: bool,
}

const TABULATED_SYMMETRY_TOL: f64 = 1e-12;

impl TabulatedKernel {
    pub fn new(rule: QuadratureRule, samples: Mat) -> Result<Self> {
        if samples.rows() != rule.len() || samples.cols() != rule.len() {
            return Err(Error::invalid(format!(
                "tabulated matrix is {}x{}, rule has {} nodes",
                samples.rows(),
                samples.cols(),
                rule.len()
            )));
        }
        if !samples.is_finite() {
            return Err(Error::invalid("tabulated matrix has non-finite entries".to_string()));
        }
        let symmetric = samples.symmetry_residual() <= TABULATED_SYMMETRY_TOL * samples.max_abs();
        Ok(TabulatedKernel {
            rule,
            samples,
            symmetric,
        })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn samples(&self) -> &Mat {
        &self.samples
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    fn node_index(&self, x: f64) -> Result<usize> {
        let tol = 1e-9 * self.rule.interval().length();
        let nodes = self.rule.nodes();
        let i = nodes.partition_point(|&n| n < x);
        for cand in [i.saturating_sub(1), i, i + 1] {
            if let Some(&n) = nodes.get(cand) {
                if (n - x).abs() <= tol {
                    return Ok(cand);
                }
            }
        }
        Err(Error::invalid(format!("tabulated kernel has no node at {x}")))
    }
}

/// Declarative kernel description with a pointwise evaluator.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// K(x, y) = min(x, y) - xy on (0, 1); eigenpairs sin(k pi x), 1/(k pi)^2.
    BrownianBridge,
    /// Bump-block kernel on (-1, 1); see the module docs.
    PathologicalProduct { n_max: usize },
    /// K(x, y) = sum_{n<=terms} (2n+1)/(2 n^2) P_n(x) P_n(y) on (-1, 1).
    LegendreDecay { terms: usize },
    /// K(x, y) = (1/pi) sum_{n<=terms} lambda_n cos(n (x-y)) on (0, 2 pi),
    /// lambda_n = 1/(n ln^2(n+1)), each with multiplicity two.
    SlowTraceDecay { terms: usize },
    /// Heat kernel on (0, pi) at a fixed time.
    Heat(HeatSemigroupSpec),
    /// Explicit samples on a rule.
    Tabulated(TabulatedKernel),
}

impl KernelSpec {
    pub fn pathological(n_max: usize) -> Result<Self> {
        if n_max == 0 || n_max > PATHOLOGICAL_MAX_DEPTH {
            return Err(Error::invalid(format!(
                "pathological depth must be in 1..={PATHOLOGICAL_MAX_DEPTH}, got {n_max}"
            )));
        }
        Ok(KernelSpec::PathologicalProduct { n_max })
    }

    pub fn legendre_decay(terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::invalid("legendre kernel needs at least one term".to_string()));
        }
        Ok(KernelSpec::LegendreDecay { terms })
    }

    pub fn slow_trace_decay(terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::invalid("slow-trace kernel needs at least one term".to_string()));
        }
        Ok(KernelSpec::SlowTraceDecay { terms })
    }

    pub fn interval(&self) -> Interval {
        match self {
            KernelSpec::BrownianBridge => Interval::new(0.0, 1.0).expect("constant interval"),
            KernelSpec::PathologicalProduct { .. } | KernelSpec::LegendreDecay { .. } => {
                Interval::new(-1.0, 1.0).expect("constant interval")
            }
            KernelSpec::SlowTraceDecay { .. } => {
                Interval::new(0.0, 2.0 * std::f64::consts::PI).expect("constant interval")
            }
            KernelSpec::Heat(h) => h.interval(),
            KernelSpec::Tabulated(t) => t.rule().interval(),
        }
    }

    /// Whether K(x, y) = K(y, x). True for every variant except the
    /// pathological fixture (its bumps couple x and z asymmetrically) and
    /// tabulated data that fails the symmetry residual test.
    pub fn is_symmetric(&self) -> bool {
        match self {
            KernelSpec::PathologicalProduct { .. } => false,
            KernelSpec::Tabulated(t) => t.symmetric(),
            _ => true,
        }
    }

    /// The truncation parameter (series length), for variants that have one.
    pub fn truncation(&self) -> Option<usize> {
        match self {
            KernelSpec::PathologicalProduct { n_max } => Some(*n_max),
            KernelSpec::LegendreDecay { terms } | KernelSpec::SlowTraceDecay { terms } => Some(*terms),
            KernelSpec::Heat(h) => Some(h.modes()),
            _ => None,
        }
    }

    /// The same kernel with its series truncated at `terms`, when supported.
    pub fn with_truncation(&self, terms: usize) -> Option<KernelSpec> {
        if terms == 0 {
            return None;
        }
        match self {
            KernelSpec::LegendreDecay { .. } => Some(KernelSpec::LegendreDecay { terms }),
            KernelSpec::SlowTraceDecay { .. } => Some(KernelSpec::SlowTraceDecay { terms }),
            KernelSpec::Heat(h) => h.with_modes(terms).ok().map(KernelSpec::Heat),
            _ => None,
        }
    }

    /// K(x, y), for x and y in the closed interval. Symmetric variants
    /// return bit-identical values under argument exchange.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let iv = self.interval();
        if !iv.contains(x) || !iv.contains(y) {
            return Err(Error::invalid(format!(
                "point ({x}, {y}) outside [{}, {}]",
                iv.a(),
                iv.b()
            )));
        }
        match self {
            KernelSpec::BrownianBridge => Ok(x.min(y) - x * y),
            KernelSpec::PathologicalProduct { n_max } => Ok(pathological_eval(x, y, *n_max)),
            KernelSpec::LegendreDecay { terms } => {
                let (mut px_prev, mut px) = (1.0, x);
                let (mut py_prev, mut py) = (1.0, y);
                let mut acc = 1.5 * (px * py); // n = 1: (2n+1)/(2n^2) = 3/2
                for n in 1..*terms {
                    let nf = n as f64;
                    let px_next = ((2.0 * nf + 1.0) * x * px - nf * px_prev) / (nf + 1.0);
                    let py_next = ((2.0 * nf + 1.0) * y * py - nf * py_prev) / (nf + 1.0);
                    px_prev = px;
                    px = px_next;
                    py_prev = py;
                    py = py_next;
                    let m = nf + 1.0;
                    acc += (2.0 * m + 1.0) / (2.0 * m * m) * (px * py);
                }
                Ok(acc)
            }
            KernelSpec::SlowTraceDecay { terms } => {
                // cos(n d) by the Chebyshev recurrence; |x - y| keeps the
                // evaluation exactly symmetric.
                let d = (x - y).abs();
                let c1 = d.cos();
                let (mut c_prev, mut c) = (1.0, c1);
                let mut acc = slow_trace_eigenvalue(1) * c;
                for n in 2..=*terms {
                    let c_next = 2.0 * c1 * c - c_prev;
                    c_prev = c;
                    c = c_next;
                    acc += slow_trace_eigenvalue(n) * c;
                }
                Ok(acc / std::f64::consts::PI)
            }
            KernelSpec::Heat(h) => Ok(h.eval_unchecked(x, y)),
            KernelSpec::Tabulated(t) => {
                let i = t.node_index(x)?;
                let j = t.node_index(y)?;
                if t.symmetric() {
                    let (i, j) = (i.min(j), i.max(j));
                    Ok(t.samples()[(i, j)])
                } else {
                    Ok(t.samples()[(i, j)])
                }
            }
        }
    }
}

/// Quadrature value of the product kernel K2(x, y) = int K(x,z) K(y,z) dz.
///
/// For the pathological fixture the integration is exact-by-localization:
/// it runs over the bump blocks of x and y only, because any global rule
/// coarser than the finest bump (width 10^-n_max) cannot see them. All
/// other variants integrate with the given rule.
pub fn product_kernel_eval(spec: &KernelSpec, x: f64, y: f64, rule: &QuadratureRule) -> Result<f64> {
    let iv = spec.interval();
    if !iv.contains(x) || !iv.contains(y) {
        return Err(Error::invalid(format!("point ({x}, {y}) outside the kernel interval")));
    }
    if let KernelSpec::PathologicalProduct { n_max } = spec {
        return Ok(pathological_pair_integral(x, y, *n_max, false));
    }
    if !rule.interval().matches(iv) {
        return Err(Error::invalid("rule interval does not match the kernel interval".to_string()));
    }
    let mut acc = 0.0;
    for (z, w) in rule.nodes().iter().zip(rule.weights()) {
        acc += w * (spec.eval(x, *z)? * spec.eval(y, *z)?);
    }
    Ok(acc)
}

/// Like [`product_kernel_eval`] but for the symmetrized kernel K + K^T:
/// int (K(x,z) + K(z,x)) (K(y,z) + K(z,y)) dz.
pub fn symmetrized_product_eval(spec: &KernelSpec, x: f64, y: f64, rule: &QuadratureRule) -> Result<f64> {
    let iv = spec.interval();
    if !iv.contains(x) || !iv.contains(y) {
        return Err(Error::invalid(format!("point ({x}, {y}) outside the kernel interval")));
    }
    if let KernelSpec::PathologicalProduct { n_max } = spec {
        return Ok(pathological_pair_integral(x, y, *n_max, true));
    }
    if !rule.interval().matches(iv) {
        return Err(Error::invalid("rule interval does not match the kernel interval".to_string()));
    }
    let mut acc = 0.0;
    for (z, w) in rule.nodes().iter().zip(rule.weights()) {
        let fx = spec.eval(x, *z)? + spec.eval(*z, x)?;
        let fy = spec.eval(y, *z)? + spec.eval(*z, y)?;
        acc += w * (fx * fy);
    }
    Ok(acc)
}

/// L2 norm of the kernel row at x: sqrt(int |K(x, y)|^2 dy), the quantity
/// whose sup over compact sets decides whether T maps L2 into C. Endpoints
/// are allowed. Pathological rows integrate block-locally.
pub fn row_l2_norm(spec: &KernelSpec, x: f64, rule: &QuadratureRule) -> Result<f64> {
    let iv = spec.interval();
    if !iv.contains(x) {
        return Err(Error::invalid(format!("point {x} outside the kernel interval")));
    }
    if let KernelSpec::PathologicalProduct { n_max } = spec {
        return Ok(pathological_pair_integral(x, x, *n_max, false).max(0.0).sqrt());
    }
    if !rule.interval().matches(iv) {
        return Err(Error::invalid("rule interval does not match the kernel interval".to_string()));
    }
    let mut acc = 0.0;
    for (z, w) in rule.nodes().iter().zip(rule.weights()) {
        let v = spec.eval(x, *z)?;
        acc += w * (v * v);
    }
    Ok(acc.max(0.0).sqrt())
}
