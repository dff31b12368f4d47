//! Probes that make qualitative operator dichotomies observable: continuous
//! vs discontinuous product kernels, bounded vs unbounded diagonals, row-norm
//! criteria, and positive semidefiniteness of sampled Gram matrices.
//!
//! Every [`ProbeReport`] is self-certifying: the verdict can be recomputed
//! from the recorded points, limit and thresholds alone, and
//! [`ProbeReport::recompute_verdict`] does exactly that.

use crate::error::{Error, Result};
use crate::io;
use crate::kernels::{self, KernelSpec};
use crate::quadrature::{EvalGrid, QuadratureRule, RuleKind};
use crate::spectral::jacobi_eigh;
use crate::Mat;
use serde_json::{json, Value};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    JumpDetected,
    Bounded,
    UnboundedGrowth,
    Psd,
    Indefinite,
    CriterionSatisfied,
    CriterionViolated,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::JumpDetected => "jump-detected",
            Verdict::Bounded => "bounded",
            Verdict::UnboundedGrowth => "unbounded-growth",
            Verdict::Psd => "psd",
            Verdict::Indefinite => "indefinite",
            Verdict::CriterionSatisfied => "criterion-satisfied",
            Verdict::CriterionViolated => "criterion-violated",
        }
    }
}

/// Structured probe outcome: a point/value trace, an estimated limit, the
/// thresholds that were applied, and the verdict they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub probe: String,
    pub points: Vec<(f64, f64)>,
    pub limit: f64,
    pub verdict: Verdict,
    pub thresholds: BTreeMap<String, f64>,
}

const JUMP_THRESHOLD: f64 = 0.5;
const GROWTH_PER_DECADE: f64 = 0.5;
const STABILITY_BAND: f64 = 1.1;
const PSD_FLOOR_FACTOR: f64 = -1e-10;

impl ProbeReport {
    fn assemble(
        probe: &str,
        points: Vec<(f64, f64)>,
        limit: f64,
        thresholds: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if points.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) || !limit.is_finite() {
            return Err(Error::numerical(format!("probe `{probe}` recorded a non-finite value")));
        }
        let mut report = ProbeReport {
            probe: probe.to_string(),
            points,
            limit,
            verdict: Verdict::Bounded,
            thresholds,
        };
        report.verdict = report.recompute_verdict()?;
        Ok(report)
    }

    /// Re-derives the verdict from the recorded data; reports always satisfy
    /// `recompute_verdict() == Ok(verdict)`.
    pub fn recompute_verdict(&self) -> Result<Verdict> {
        match self.probe.as_str() {
            "continuity" | "continuity-symmetrized" => {
                let jump = self.threshold("jump")?;
                // sequence limits: the recorded value nearest the origin on
                // each side, compared with the centre value
                let pos = self
                    .points
                    .iter()
                    .filter(|(x, _)| *x > 0.0)
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, v)| *v);
                let neg = self
                    .points
                    .iter()
                    .filter(|(x, _)| *x < 0.0)
                    .max_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, v)| *v);
                let mut lo = self.limit;
                let mut hi = self.limit;
                for v in [pos, neg].into_iter().flatten() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Ok(if hi - lo > jump { Verdict::JumpDetected } else { Verdict::Bounded })
            }
            "diag-growth" => {
                let rate = self.threshold("growth_per_decade")?;
                if self.points.len() < 2 {
                    return Ok(Verdict::Bounded);
                }
                let growing = self.points.windows(2).all(|p| {
                    let decades = (p[1].0 / p[0].0).log10();
                    decades > 0.0 && (p[1].1 - p[0].1) / decades > rate
                });
                Ok(if growing { Verdict::UnboundedGrowth } else { Verdict::Bounded })
            }
            "c-criterion" => {
                let band = self.threshold("stability_band")?;
                let refined = self.threshold("refined_sup")?;
                let (lo, hi) = (self.limit.min(refined), self.limit.max(refined));
                let stable = if hi == 0.0 { true } else { lo > 0.0 && hi / lo <= band };
                Ok(if self.limit.is_finite() && refined.is_finite() && stable {
                    Verdict::CriterionSatisfied
                } else {
                    Verdict::CriterionViolated
                })
            }
            "psd" => {
                let floor = self.threshold("floor")?;
                Ok(if self.limit >= floor { Verdict::Psd } else { Verdict::Indefinite })
            }
            other => Err(Error::invalid(format!("unknown probe name `{other}`"))),
        }
    }

    fn threshold(&self, key: &str) -> Result<f64> {
        self.thresholds
            .get(key)
            .copied()
            .ok_or_else(|| Error::invalid(format!("probe `{}` is missing threshold `{key}`", self.probe)))
    }

    pub fn to_json_value(&self) -> Value {
        let points: Vec<Value> = self.points.iter().map(|(x, v)| json!([x, v])).collect();
        let thresholds: serde_json::Map<String, Value> = self
            .thresholds
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        json!({
            "probe": self.probe,
            "points": points,
            "limit": self.limit,
            "verdict": self.verdict.as_str(),
            "thresholds": thresholds,
        })
    }

    pub fn to_json(&self) -> String {
        io::canonical_json(&self.to_json_value())
    }
}

fn default_rule(spec: &KernelSpec) -> Result<QuadratureRule> {
    QuadratureRule::build(RuleKind::GaussLegendre, 200, spec.interval())
}

fn continuity_probe_impl(spec: &KernelSpec, depth: usize, symmetrized: bool) -> Result<ProbeReport> {
    if depth == 0 {
        return Err(Error::invalid("continuity probe needs depth >= 1".to_string()));
    }
    if let KernelSpec::PathologicalProduct { n_max } = spec {
        if depth > *n_max {
            return Err(Error::invalid(format!(
                "probe depth {depth} exceeds the kernel's block depth {n_max}"
            )));
        }
    }
    let iv = spec.interval();
    if !iv.contains(0.0) {
        return Err(Error::invalid("continuity probe targets the origin, which must lie in the interval".to_string()));
    }
    let rule = default_rule(spec)?;
    let product = |x: f64, y: f64| -> Result<f64> {
        if symmetrized {
            kernels::symmetrized_product_eval(spec, x, y, &rule)
        } else {
            kernels::product_kernel_eval(spec, x, y, &rule)
        }
    };
    let mut points = Vec::new();
    for n in 1..=depth {
        let x = 0.5f64.powi(n as i32);
        if iv.contains(x) {
            points.push((x, product(x, x)?));
        }
    }
    for n in 1..=depth {
        let x = -(0.5f64.powi(n as i32));
        if iv.contains(x) {
            points.push((x, product(x, x)?));
        }
    }
    if points.is_empty() {
        return Err(Error::invalid("no probe sequence points lie inside the interval".to_string()));
    }
    let limit = product(0.0, 0.0)?;
    let thresholds = BTreeMap::from([("jump".to_string(), JUMP_THRESHOLD)]);
    ProbeReport::assemble(
        if symmetrized { "continuity-symmetrized" } else { "continuity" },
        points,
        limit,
        thresholds,
    )
}

/// Evaluates the product kernel K2(x,y) = int K(x,z) K(y,z) dz along the
/// diagonal sequences (+-2^-n, +-2^-n), n = 1..depth, and at the origin;
/// flags a jump when the recorded limits disagree by more than 1/2. The
/// pathological fixture reports the n-independent block value on the
/// positive side and exact zeros on the negative side.
pub fn continuity_probe_product(spec: &KernelSpec, depth: usize) -> Result<ProbeReport> {
    continuity_probe_impl(spec, depth, false)
}

/// Same probe for the symmetrized kernel K + K^T (so the operator under
/// test is self-adjoint); the product diagonal dominates the plain one, so
/// the jump survives symmetrization.
pub fn continuity_probe_symmetrized(spec: &KernelSpec, depth: usize) -> Result<ProbeReport> {
    continuity_probe_impl(spec, depth, true)
}

/// Sup of the kernel diagonal over a fixed closure grid, one value per
/// truncation in `schedule`; growth above 1/2 per decade of N across every
/// consecutive pair reads as an unbounded diagonal. Specs without a
/// truncation parameter are evaluated as-is.
pub fn diagonal_growth_probe(spec: &KernelSpec, schedule: &[usize]) -> Result<ProbeReport> {
    if schedule.is_empty() {
        return Err(Error::invalid("growth probe needs a non-empty schedule".to_string()));
    }
    if schedule.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::invalid("growth schedule must be strictly increasing".to_string()));
    }
    if schedule[0] == 0 {
        return Err(Error::invalid("growth schedule entries must be positive".to_string()));
    }
    let grid = EvalGrid::uniform(spec.interval(), 101)?;
    let mut points = Vec::with_capacity(schedule.len());
    for &terms in schedule {
        let truncated = spec.with_truncation(terms).unwrap_or_else(|| spec.clone());
        let mut sup = f64::NEG_INFINITY;
        for &x in grid.points() {
            sup = sup.max(truncated.eval(x, x)?);
        }
        points.push((terms as f64, sup));
    }
    let limit = points.last().map(|(_, v)| *v).unwrap_or(0.0);
    let thresholds = BTreeMap::from([("growth_per_decade".to_string(), GROWTH_PER_DECADE)]);
    ProbeReport::assemble("diag-growth", points, limit, thresholds)
}

/// Row-norm criterion over a closure grid F: records ||K(x, .)||_L2 for
/// every x in F and checks the sup is finite and stable under doubling the
/// rule (ratio within 1.1). A stable finite sup is the discrete witness
/// that T maps L2 into continuous functions on F.
pub fn c_criterion_probe(spec: &KernelSpec, f_grid: &EvalGrid, rule: &QuadratureRule) -> Result<ProbeReport> {
    if !f_grid.interval().matches(spec.interval()) {
        return Err(Error::invalid("probe grid interval does not match the kernel interval".to_string()));
    }
    let mut points = Vec::with_capacity(f_grid.points().len());
    let mut sup = 0.0f64;
    for &x in f_grid.points() {
        let v = kernels::row_l2_norm(spec, x, rule)?;
        sup = sup.max(v);
        points.push((x, v));
    }
    let refined_rule = rule.refined(2)?;
    let mut refined = 0.0f64;
    for &x in f_grid.points() {
        refined = refined.max(kernels::row_l2_norm(spec, x, &refined_rule)?);
    }
    let thresholds = BTreeMap::from([
        ("stability_band".to_string(), STABILITY_BAND),
        ("refined_sup".to_string(), refined),
    ]);
    ProbeReport::assemble("c-criterion", points, sup, thresholds)
}

/// Minimum eigenvalue of the sampled Gram matrix K(x_k, x_l); nonnegative
/// (up to a rounding floor) exactly when the kernel is positive
/// semidefinite on the sample. Points must be pairwise distinct.
pub fn psd_probe(spec: &KernelSpec, points: &[f64]) -> Result<ProbeReport> {
    if points.is_empty() {
        return Err(Error::invalid("psd probe needs at least one point".to_string()));
    }
    let iv = spec.interval();
    for &x in points {
        if !iv.contains(x) {
            return Err(Error::invalid(format!("psd probe point {x} outside the interval")));
        }
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i] == points[j] {
                return Err(Error::invalid(format!("psd probe points must be distinct, {} repeats", points[i])));
            }
        }
    }
    let m = points.len();
    let mut gram = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = spec.eval(points[i], points[j])?;
        }
    }
    let floor = PSD_FLOOR_FACTOR * gram.max_abs();
    let (eigenvalues, _) = jacobi_eigh(&gram)?;
    let min = eigenvalues.last().copied().unwrap_or(0.0);
    let trace: Vec<(f64, f64)> = eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| ((k + 1) as f64, l))
        .collect();
    let thresholds = BTreeMap::from([("floor".to_string(), floor)]);
    ProbeReport::assemble("psd", trace, min, thresholds)
}
