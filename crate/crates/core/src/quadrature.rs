//! Intervals, quadrature rules, and evaluation grids.
//!
//! Every integral in the crate is a weighted sum over a [`QuadratureRule`].
//! Gauss-Legendre is the workhorse; trapezoid and midpoint exist for
//! cross-checks. An [`EvalGrid`] is a separate notion: a set of probe points
//! that includes the interval endpoints, so closure behaviour can be sampled
//! even though Gauss and midpoint nodes stay interior.

use crate::error::{Error, Result};

/// A bounded open interval (a, b); evaluation is allowed on the closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!("interval endpoints must be finite, got ({a}, {b})")));
        }
        if a >= b {
            return Err(Error::invalid(format!("interval requires a < b, got ({a}, {b})")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Membership in the closed interval [a, b].
    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Endpoint agreement up to rounding (1e-12 relative to the length);
    /// CSV-imported rules reconstruct their interval only to ulp accuracy.
    pub fn matches(&self, other: Interval) -> bool {
        let tol = 1e-12 * self.length().max(1.0);
        (self.a - other.a).abs() <= tol && (self.b - other.b).abs() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    GaussLegendre,
    Trapezoid,
    Midpoint,
}

impl std::str::FromStr for RuleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-legendre" | "gauss" => Ok(RuleKind::GaussLegendre),
            "trapezoid" => Ok(RuleKind::Trapezoid),
            "midpoint" => Ok(RuleKind::Midpoint),
            other => Err(Error::invalid(format!("unknown rule kind `{other}`"))),
        }
    }
}

impl RuleKind {
    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::GaussLegendre => "gauss-legendre",
            RuleKind::Trapezoid => "trapezoid",
            RuleKind::Midpoint => "midpoint",
        }
    }
}

/// Nodes and positive weights on an interval: the discrete measure used for
/// every integral. Nodes are strictly increasing and lie in [a, b]
/// (Gauss-Legendre and midpoint nodes are interior; the composite trapezoid
/// rule includes the endpoints). Weights sum to b - a.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    interval: Interval,
    /// `None` for rules assembled from explicit nodes (e.g. CSV imports).
    kind: Option<RuleKind>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl QuadratureRule {
    /// Builds an `n`-point rule of the given kind on `iv`; requires n >= 2.
    pub fn build(kind: RuleKind, n: usize, iv: Interval) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("rule needs at least 2 nodes, got {n}")));
        }
        let (a, b) = (iv.a(), iv.b());
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let (nodes, weights) = match kind {
            RuleKind::GaussLegendre => {
                let (xs, ws) = gauss_legendre_reference(n)?;
                let nodes = xs.iter().map(|x| mid + half * x).collect();
                let weights = ws.iter().map(|w| half * w).collect();
                (nodes, weights)
            }
            RuleKind::Trapezoid => {
                let h = (b - a) / (n - 1) as f64;
                let mut nodes: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
                nodes[n - 1] = b;
                let mut weights = vec![h; n];
                weights[0] = 0.5 * h;
                weights[n - 1] = 0.5 * h;
                (nodes, weights)
            }
            RuleKind::Midpoint => {
                let h = (b - a) / n as f64;
                let nodes = (0..n).map(|i| a + h * (i as f64 + 0.5)).collect();
                (nodes, vec![h; n])
            }
        };
        let mut rule = Self::from_parts(iv, nodes, weights)?;
        rule.kind = Some(kind);
        Ok(rule)
    }

    /// Validates and assembles a rule from explicit nodes and weights.
    pub fn from_parts(iv: Interval, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() < 2 {
            return Err(Error::invalid(format!(
                "rule needs matching node/weight lists of length >= 2, got {}/{}",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("rule nodes must be finite".to_string()));
        }
        if nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::invalid("rule nodes must be strictly increasing".to_string()));
        }
        if !iv.contains(nodes[0]) || !iv.contains(nodes[nodes.len() - 1]) {
            return Err(Error::invalid("rule nodes must lie in the closed interval".to_string()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("rule weights must be positive and finite".to_string()));
        }
        // compensated sum so the invariant check is not polluted by naive
        // accumulation error on large rules
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for &w in &weights {
            let y = w - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        if (sum - iv.length()).abs() > WEIGHT_SUM_TOL * iv.length() {
            return Err(Error::invalid(format!(
                "rule weights sum to {sum}, expected interval length {}",
                iv.length()
            )));
        }
        Ok(QuadratureRule {
            interval: iv,
            kind: None,
            nodes,
            weights,
        })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn kind(&self) -> Option<RuleKind> {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same discretization up to interval rounding: identical nodes and
    /// weights, endpoints within the interval match tolerance.
    pub fn compatible_with(&self, other: &QuadratureRule) -> bool {
        self.nodes == other.nodes
            && self.weights == other.weights
            && self.interval.matches(other.interval)
    }

    /// A rule of the same kind with `factor` times as many nodes. Fails on
    /// rules of unknown kind (explicit node lists cannot be refined).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let kind = self
            .kind
            .ok_or_else(|| Error::invalid("cannot refine a rule of unknown kind".to_string()))?;
        Self::build(kind, self.len() * factor.max(1), self.interval)
    }

    /// Weighted node sum of `f`; errors if `f` is non-finite at a node.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(*x);
            if !v.is_finite() {
                return Err(Error::numerical(format!("integrand is not finite at node {x}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Legendre polynomial value and derivative at `x` via the three-term
/// recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss-Legendre nodes/weights on [-1, 1]: Newton iteration from cosine
/// initial guesses, then mirrored so the rule is exactly symmetric.
fn gauss_legendre_reference(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // i indexes roots in decreasing order; compute the positive half.
    for i in 0..(n / 2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::numerical(format!(
                "Gauss-Legendre Newton iteration did not reach {NEWTON_TOL:e} in {NEWTON_MAX_ITER} steps (n = {n})"
            )));
        }
        // One polishing step after the tolerance is met.
        let (p, d) = legendre_pair(n, x);
        x -= p / d;
        let (_, d) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * d * d);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_pair(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    Ok((nodes, weights))
}

/// Probe points in [a, b], strictly increasing, always including both
/// endpoints (the closure points a quadrature rule never reaches).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    interval: Interval,
    points: Vec<f64>,
}

impl EvalGrid {
    /// `m` equally spaced points from a to b inclusive; requires m >= 2.
    pub fn uniform(iv: Interval, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {m}")));
        }
        let h = iv.length() / (m - 1) as f64;
        let mut points: Vec<f64> = (0..m).map(|i| iv.a() + h * i as f64).collect();
        points[0] = iv.a();
        points[m - 1] = iv.b();
        Self::from_points(iv, points)
    }

    /// Validates an explicit point list; endpoints must be present.
    pub fn from_points(iv: Interval, points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("grid needs at least 2 points".to_string()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid points must be finite".to_string()));
        }
        if points.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::invalid("grid points must be strictly increasing".to_string()));
        }
        if points[0] != iv.a() || points[points.len() - 1] != iv.b() {
            return Err(Error::invalid("grid must include both interval endpoints".to_string()));
        }
        Ok(EvalGrid { interval: iv, points })
    }

    /// Sorts the given points, drops duplicates, and adds the endpoints if
    /// missing; rejects points outside the closed interval.
    pub fn closure_of(iv: Interval, points: &[f64]) -> Result<Self> {
        if points.iter().any(|x| !iv.contains(*x) || !x.is_finite()) {
            return Err(Error::invalid("grid points must lie in the closed interval".to_string()));
        }
        let mut pts = points.to_vec();
        pts.push(iv.a());
        pts.push(iv.b());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Self::from_points(iv, pts)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}
