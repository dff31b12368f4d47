//! Nystrom discretization and operator algebra.
//!
//! A [`DiscreteOperator`] is a kernel sampled on a quadrature rule together
//! with the rule itself; application, composition, adjoints, Hilbert-Schmidt
//! norms and diagonal traces are all weighted matrix operations with fixed
//! summation order, so results are reproducible bit for bit.

use crate::error::{Error, Result};
use crate::io;
use crate::kernels::{self, KernelSpec};
use crate::mat::Mat;
use crate::quadrature::QuadratureRule;

const SYMMETRY_TOL: f64 = 1e-12;

/// A kernel sampled on a rule: samples[i][j] = K(x_i, x_j).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    rule: QuadratureRule,
    samples: Mat,
    symmetric: bool,
    source: Option<KernelSpec>,
}

/// Samples a kernel spec on a rule. The rule interval must match the spec
/// interval. The pathological fixture is rejected outright: its bumps are
/// narrower than 10^-n_max, so any affordable global rule sees a zero
/// matrix; probes must go through the block-localized product evaluators.
pub fn discretize(spec: &KernelSpec, rule: &QuadratureRule) -> Result<DiscreteOperator> {
    if let KernelSpec::PathologicalProduct { n_max } = spec {
        let needed = 10usize.checked_pow(*n_max as u32);
        if needed.is_none_or(|n| rule.len() < n) {
            return Err(Error::invalid(format!(
                "pathological kernel must not be globally discretized with fewer than 10^{n_max} nodes; \
                 use the localized product evaluators instead"
            )));
        }
    }
    if !rule.interval().matches(spec.interval()) {
        return Err(Error::invalid("rule interval does not match the kernel interval".to_string()));
    }
    let n = rule.len();
    let nodes = rule.nodes();
    let mut samples = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            samples[(i, j)] = spec.eval(nodes[i], nodes[j])?;
        }
    }
    DiscreteOperator::new(rule.clone(), samples, spec.is_symmetric(), Some(spec.clone()))
}

impl DiscreteOperator {
    pub(crate) fn new(
        rule: QuadratureRule,
        samples: Mat,
        symmetric: bool,
        source: Option<KernelSpec>,
    ) -> Result<Self> {
        if samples.rows() != rule.len() || samples.cols() != rule.len() {
            return Err(Error::invalid("sample matrix dimension must equal the node count".to_string()));
        }
        if !samples.is_finite() {
            return Err(Error::numerical("sample matrix has non-finite entries".to_string()));
        }
        if symmetric && samples.symmetry_residual() > SYMMETRY_TOL * samples.max_abs() {
            return Err(Error::numerical("matrix flagged symmetric violates the symmetry residual bound".to_string()));
        }
        Ok(DiscreteOperator {
            rule,
            samples,
            symmetric,
            source,
        })
    }

    /// Builds an operator from explicit samples; symmetry is detected from
    /// the matrix.
    pub fn from_samples(rule: QuadratureRule, samples: Mat) -> Result<Self> {
        let symmetric = samples.symmetry_residual() <= SYMMETRY_TOL * samples.max_abs();
        Self::new(rule, samples, symmetric, None)
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

    pub fn source(&self) -> Option<&KernelSpec> {
        self.source.as_ref()
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    /// (T u)(x_i) = sum_j w_j K(x_i, x_j) u_j.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if u.len() != n {
            return Err(Error::invalid(format!("vector length {} does not match node count {n}", u.len())));
        }
        let w = self.rule.weights();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.samples.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                acc += w[j] * (row[j] * u[j]);
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Kernel transpose. The rule is unchanged; for real kernels this is
    /// the adjoint operator.
    pub fn adjoint(&self) -> DiscreteOperator {
        DiscreteOperator {
            rule: self.rule.clone(),
            samples: self.samples.transposed(),
            symmetric: self.symmetric,
            source: None,
        }
    }

    /// Operator scaled by a constant; symmetry is preserved.
    pub fn scaled(&self, c: f64) -> Result<DiscreteOperator> {
        let mut samples = self.samples.clone();
        samples.scale(c);
        DiscreteOperator::new(self.rule.clone(), samples, self.symmetric, None)
    }

    /// Discrete Hilbert-Schmidt norm: sqrt(sum_ij w_i w_j K(x_i,x_j)^2).
    pub fn hs_norm(&self) -> f64 {
        let w = self.rule.weights();
        let mut acc = 0.0;
        for i in 0..self.len() {
            let row = self.samples.row(i);
            let mut row_acc = 0.0;
            for j in 0..self.len() {
                row_acc += w[j] * (row[j] * row[j]);
            }
            acc += w[i] * row_acc;
        }
        acc.max(0.0).sqrt()
    }

    /// Quadrature of the kernel diagonal: sum_i w_i K(x_i, x_i). For
    /// continuous kernels of trace-class operators this is the trace.
    pub fn trace_diag(&self) -> f64 {
        let w = self.rule.weights();
        (0..self.len()).map(|i| w[i] * self.samples[(i, i)]).sum()
    }

    /// Tabulated-CSV serialization of the rule and samples.
    pub fn to_csv(&self) -> String {
        io::tabulated_csv(&self.rule, &self.samples)
    }

    /// Parses an operator from the tabulated CSV format.
    pub fn from_csv(text: &str) -> Result<Self> {
        let (rule, samples) = io::parse_tabulated_csv(text)?;
        Self::from_samples(rule, samples)
    }
}

/// Discrete composition: (T2 T1)(x_i, x_k) = sum_j w_j K2(x_i, z_j) K1(z_j, x_k),
/// the quadrature realization of kernel composition over the shared rule.
/// The result is flagged symmetric only when both operands are the same
/// symmetric operator. The inner product is evaluated as w * (a * b), which
/// makes the adjoint anti-homomorphism adjoint(AB) = adjoint(B) adjoint(A)
/// hold exactly, not just to rounding.
pub fn compose(op2: &DiscreteOperator, op1: &DiscreteOperator) -> Result<DiscreteOperator> {
    if !op2.rule.compatible_with(&op1.rule) {
        return Err(Error::invalid("composition requires identical rules".to_string()));
    }
    let n = op2.len();
    let w = op2.rule.weights();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        let row2 = op2.samples.row(i);
        for k in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += w[j] * (row2[j] * op1.samples[(j, k)]);
            }
            out[(i, k)] = acc;
        }
    }
    let symmetric = op2.symmetric && op1.symmetric && op2.samples == op1.samples;
    DiscreteOperator::new(op2.rule.clone(), out, symmetric, None)
}

/// Row L2 norm of a kernel at x, re-exported here as the operator-facing
/// criterion: finite sups over compact point sets are exactly the condition
/// for T to map L2 into continuous functions.
pub fn row_l2_norm(spec: &KernelSpec, x: f64, rule: &QuadratureRule) -> Result<f64> {
    kernels::row_l2_norm(spec, x, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{Interval, RuleKind};
    use crate::semigroup::{Boundary, HeatSemigroupSpec};
    use approx::assert_abs_diff_eq;

    fn gauss(n: usize, iv: Interval) -> QuadratureRule {
        QuadratureRule::build(RuleKind::GaussLegendre, n, iv).unwrap()
    }

    fn bb_op(n: usize) -> DiscreteOperator {
        let spec = KernelSpec::BrownianBridge;
        discretize(&spec, &gauss(n, spec.interval())).unwrap()
    }

    fn heat_op(t: f64, modes: usize, n: usize) -> DiscreteOperator {
        let spec = KernelSpec::Heat(HeatSemigroupSpec::new(Boundary::Dirichlet, t, modes).unwrap());
        discretize(&spec, &gauss(n, spec.interval())).unwrap()
    }

    #[test]
    fn discretize_checks_intervals_and_flags() {
        let spec = KernelSpec::BrownianBridge;
        let wrong = gauss(8, Interval::new(0.0, 2.0).unwrap());
        assert!(discretize(&spec, &wrong).is_err());
        let op = bb_op(16);
        assert!(op.symmetric());
        assert!(op.samples().symmetry_residual() <= 1e-12 * op.samples().max_abs());
        // first/last rows fade toward the boundary where K vanishes
        let first_node = op.rule().nodes()[0];
        assert!(op.samples()[(0, 5)].abs() <= first_node);
    }

    #[test]
    fn pathological_kernel_refuses_global_discretization() {
        let spec = KernelSpec::pathological(6).unwrap();
        let rule = gauss(500, spec.interval());
        assert!(matches!(discretize(&spec, &rule), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tabulated_round_trip_through_discretize() {
        let op = bb_op(12);
        let tab = kernels::TabulatedKernel::new(op.rule().clone(), op.samples().clone()).unwrap();
        let spec = KernelSpec::Tabulated(tab);
        let op2 = discretize(&spec, op.rule()).unwrap();
        assert_eq!(op2.samples(), op.samples());
        assert!(op2.symmetric());
    }

    #[test]
    fn apply_examples() {
        let op = bb_op(64);
        let zero = vec![0.0; 64];
        assert_eq!(op.apply(&zero).unwrap(), zero);
        assert!(op.apply(&[1.0; 5]).is_err());

        // heat kernel reproduces its first eigenpair to machine precision
        let hop = heat_op(0.7, 100, 200);
        let s: Vec<f64> = hop.rule().nodes().iter().map(|x| x.sin()).collect();
        let out = hop.apply(&s).unwrap();
        let lam = (-0.7f64).exp();
        for (o, si) in out.iter().zip(&s) {
            assert_abs_diff_eq!(*o, lam * si, epsilon = 1e-12);
        }

        // Brownian bridge: sin(pi x) / pi^2, limited by the diagonal kink
        // (global Gauss converges at O(n^-2) on this kernel).
        let op200 = bb_op(200);
        let s200: Vec<f64> = op200
            .rule()
            .nodes()
            .iter()
            .map(|x| (std::f64::consts::PI * x).sin())
            .collect();
        let out200 = op200.apply(&s200).unwrap();
        let lam_bb = 1.0 / (std::f64::consts::PI * std::f64::consts::PI);
        let err200 = out200
            .iter()
            .zip(&s200)
            .map(|(o, s)| (o - lam_bb * s).abs())
            .fold(0.0f64, f64::max);
        assert!(err200 < 1e-5, "err200 = {err200}");
        let op400 = bb_op(400);
        let s400: Vec<f64> = op400
            .rule()
            .nodes()
            .iter()
            .map(|x| (std::f64::consts::PI * x).sin())
            .collect();
        let out400 = op400.apply(&s400).unwrap();
        let err400 = out400
            .iter()
            .zip(&s400)
            .map(|(o, s)| (o - lam_bb * s).abs())
            .fold(0.0f64, f64::max);
        assert!(err400 < err200 / 3.0, "err400 = {err400} vs err200 = {err200}");
    }

    #[test]
    fn apply_is_linear() {
        let op = bb_op(32);
        let u: Vec<f64> = (0..32).map(|i| (i as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..32).map(|i| (i as f64 * 0.11).cos()).collect();
        let (alpha, beta) = (1.375, -0.625);
        let combo: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = op.apply(&combo).unwrap();
        let fu = op.apply(&u).unwrap();
        let fv = op.apply(&v).unwrap();
        for i in 0..32 {
            assert_abs_diff_eq!(lhs[i], alpha * fu[i] + beta * fv[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn adjoint_is_an_involution_and_fixes_symmetric_ops() {
        let op = bb_op(16);
        assert_eq!(op.adjoint().adjoint().samples(), op.samples());
        assert_eq!(op.adjoint().samples(), op.samples());

        let iv = Interval::new(0.0, 1.0).unwrap();
        let rule = QuadratureRule::build(RuleKind::Trapezoid, 2, iv).unwrap();
        let m = Mat::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let op = DiscreteOperator::from_samples(rule, m).unwrap();
        assert!(!op.symmetric());
        let adj = op.adjoint();
        assert_eq!(adj.samples()[(0, 1)], 0.0);
        assert_eq!(adj.samples()[(1, 0)], 1.0);
    }

    #[test]
    fn compose_zero_and_semigroup() {
        let op = heat_op(0.5, 100, 200);
        let zero = op.scaled(0.0).unwrap();
        let z = compose(&op, &zero).unwrap();
        assert_eq!(z.samples().max_abs(), 0.0);

        // K_t o K_t = K_2t within quadrature accuracy
        let squared = compose(&op, &op).unwrap();
        assert!(squared.symmetric());
        let doubled = heat_op(1.0, 100, 200);
        let mut sup = 0.0f64;
        for i in 0..200 {
            for j in 0..200 {
                sup = sup.max((squared.samples()[(i, j)] - doubled.samples()[(i, j)]).abs());
            }
        }
        assert!(sup <= 1e-8, "sup = {sup}");
    }

    #[test]
    fn compose_rejects_mismatched_rules() {
        let a = bb_op(16);
        let b = bb_op(17);
        assert!(compose(&a, &b).is_err());
    }

    #[test]
    fn triple_compose_is_associative() {
        let a = heat_op(0.3, 60, 60);
        let b = heat_op(0.5, 60, 60);
        let c = heat_op(0.9, 60, 60);
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        let mut sup = 0.0f64;
        for i in 0..60 {
            for j in 0..60 {
                sup = sup.max((left.samples()[(i, j)] - right.samples()[(i, j)]).abs());
            }
        }
        assert!(sup <= 1e-12, "sup = {sup}");
    }

    #[test]
    fn adjoint_anti_homomorphism_is_exact() {
        // nonsymmetric operands: perturb heat samples asymmetrically
        let base = heat_op(0.4, 40, 40);
        let mut ma = base.samples().clone();
        let mut mb = base.samples().clone();
        for i in 0..40 {
            for j in 0..40 {
                ma[(i, j)] += (i as f64 - 2.0 * j as f64) * 1e-3;
                mb[(i, j)] += ((i * j) as f64).sin() * 1e-3;
            }
        }
        let a = DiscreteOperator::from_samples(base.rule().clone(), ma).unwrap();
        let b = DiscreteOperator::from_samples(base.rule().clone(), mb).unwrap();
        let lhs = compose(&a, &b).unwrap().adjoint();
        let rhs = compose(&b.adjoint(), &a.adjoint()).unwrap();
        assert_eq!(lhs.samples(), rhs.samples(), "bitwise equality");
    }

    #[test]
    fn hs_norm_examples() {
        let zero = bb_op(32).scaled(0.0).unwrap();
        assert_eq!(zero.hs_norm(), 0.0);

        // sqrt(1/90) with the O(n^-2) kink error of the global rule
        let expected = (1.0f64 / 90.0).sqrt();
        let n200 = bb_op(200).hs_norm();
        let n400 = bb_op(400).hs_norm();
        assert_abs_diff_eq!(n200, expected, epsilon = 1e-4);
        assert!((n400 - expected).abs() < (n200 - expected).abs());

        let op = bb_op(64);
        let scaled = op.scaled(-2.5).unwrap();
        assert_abs_diff_eq!(scaled.hs_norm(), 2.5 * op.hs_norm(), epsilon = 1e-15);
    }

    #[test]
    fn trace_diag_examples() {
        // diagonal x - x^2 is a quadratic: Gauss with n >= 2 is exact
        assert_abs_diff_eq!(bb_op(8).trace_diag(), 1.0 / 6.0, epsilon = 1e-10);

        let heat = heat_op(1.0, 50, 200);
        let oracle: f64 = (1..=50).map(|n| (-((n * n) as f64)).exp()).sum();
        assert_abs_diff_eq!(heat.trace_diag(), oracle, epsilon = 1e-7);
        assert_abs_diff_eq!(heat.trace_diag(), 0.38631860, epsilon = 1e-7);

        let spec = KernelSpec::Heat(HeatSemigroupSpec::new(Boundary::Neumann, 1.0, 50).unwrap());
        let nop = discretize(&spec, &gauss(200, spec.interval())).unwrap();
        assert_abs_diff_eq!(nop.trace_diag(), 1.0 + oracle, epsilon = 1e-7);
        assert_abs_diff_eq!(nop.trace_diag(), 1.38631860, epsilon = 1e-7);
    }

    #[test]
    fn trace_of_t_t_star_equals_hs_norm_squared() {
        for op in [bb_op(48), heat_op(0.6, 60, 60)] {
            let prod = compose(&op, &op.adjoint()).unwrap();
            let tr = prod.trace_diag();
            let hs2 = op.hs_norm().powi(2);
            assert!((tr - hs2).abs() <= 1e-10 * hs2.max(1e-30), "tr={tr} hs2={hs2}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let op = bb_op(10);
        let text = op.to_csv();
        let back = DiscreteOperator::from_csv(&text).unwrap();
        assert_eq!(back.samples(), op.samples());
        assert_eq!(back.rule().nodes(), op.rule().nodes());
        assert_abs_diff_eq!(back.rule().interval().a(), op.rule().interval().a(), epsilon = 1e-13);
        assert_abs_diff_eq!(back.rule().interval().b(), op.rule().interval().b(), epsilon = 1e-13);
        assert!(back.symmetric());
    }

    #[test]
    fn row_l2_norm_brownian_bridge_endpoint() {
        let spec = KernelSpec::BrownianBridge;
        let rule = gauss(200, spec.interval());
        assert_eq!(row_l2_norm(&spec, 0.0, &rule).unwrap(), 0.0);
        assert_eq!(row_l2_norm(&spec, 1.0, &rule).unwrap(), 0.0);
    }
}
