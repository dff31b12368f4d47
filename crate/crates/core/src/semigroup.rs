//! Heat semigroups on (0, pi) with explicit sine/cosine eigenbases.
//!
//! Dirichlet: K_t(x,y) = (2/pi) sum_{n>=1} e^{-n^2 t} sin(nx) sin(ny).
//! Neumann:   K_t(x,y) = 1/pi + (2/pi) sum_{n>=1} e^{-n^2 t} cos(nx) cos(ny).
//!
//! These realize the abstract diffusion-semigroup picture at desk scale:
//! the semigroup identity K_{2t} = K_t o K_t, the trace as an eigenvalue
//! series, and a machine-checkable Gaussian pointwise bound.

use crate::error::{Error, Result};
use crate::quadrature::{EvalGrid, Interval, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl Boundary {
    pub fn name(&self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            other => Err(Error::invalid(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Heat kernel at a fixed time, truncated to `modes` eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatSemigroupSpec {
    boundary: Boundary,
    t: f64,
    modes: usize,
}

/// Default truncation: keeps the dropped tail below e^{-64} for the
/// smallest supported times.
pub fn default_modes(t: f64) -> usize {
    100usize.max((8.0 / t.sqrt()).ceil() as usize)
}

/// The model interval (0, pi).
pub fn model_interval() -> Interval {
    Interval::new(0.0, std::f64::consts::PI).expect("constant interval")
}

impl HeatSemigroupSpec {
    pub fn new(boundary: Boundary, t: f64, modes: usize) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(format!("heat kernel time must be positive, got {t}")));
        }
        if modes == 0 {
            return Err(Error::invalid("heat kernel needs at least one mode".to_string()));
        }
        Ok(HeatSemigroupSpec { boundary, t, modes })
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn with_time(&self, t: f64) -> Result<Self> {
        Self::new(self.boundary, t, self.modes)
    }

    pub fn with_modes(&self, modes: usize) -> Result<Self> {
        Self::new(self.boundary, self.t, modes)
    }

    pub fn interval(&self) -> Interval {
        model_interval()
    }

    /// K_t(x, y) for x, y in the closed interval [0, pi].
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let iv = self.interval();
        if !iv.contains(x) || !iv.contains(y) {
            return Err(Error::invalid(format!(
                "heat kernel point ({x}, {y}) outside [0, {}]",
                iv.b()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Series evaluation without the domain check. Trig values sin(nx),
    /// cos(nx) and the factors e^{-n^2 t} all advance by recurrences, so a
    /// single evaluation costs O(modes) with two sin/cos calls total.
    pub(crate) fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        let inv_pi = 1.0 / std::f64::consts::PI;
        let two_cx = 2.0 * x.cos();
        let two_cy = 2.0 * y.cos();
        // e^{-n^2 t} = e^{-(n-1)^2 t} * q^{2n-1} with q = e^{-t}.
        let q = (-self.t).exp();
        let q2 = q * q;
        let mut decay = q; // n = 1
        let mut odd_pow = q; // q^{2n-1}
        match self.boundary {
            Boundary::Dirichlet => {
                let (mut sx_prev, mut sx) = (0.0, x.sin());
                let (mut sy_prev, mut sy) = (0.0, y.sin());
                let mut acc = decay * (sx * sy);
                for _ in 2..=self.modes {
                    let sx_next = two_cx * sx - sx_prev;
                    let sy_next = two_cy * sy - sy_prev;
                    sx_prev = sx;
                    sx = sx_next;
                    sy_prev = sy;
                    sy = sy_next;
                    odd_pow *= q2;
                    decay *= odd_pow;
                    acc += decay * (sx * sy);
                }
                2.0 * inv_pi * acc
            }
            Boundary::Neumann => {
                let (mut cx_prev, mut cx) = (1.0, x.cos());
                let (mut cy_prev, mut cy) = (1.0, y.cos());
                let mut acc = decay * (cx * cy);
                for _ in 2..=self.modes {
                    let cx_next = two_cx * cx - cx_prev;
                    let cy_next = two_cy * cy - cy_prev;
                    cx_prev = cx;
                    cx = cx_next;
                    cy_prev = cy;
                    cy = cy_next;
                    odd_pow *= q2;
                    decay *= odd_pow;
                    acc += decay * (cx * cy);
                }
                inv_pi + 2.0 * inv_pi * acc
            }
        }
    }

    /// Trace of the truncated semigroup: the eigenvalue partial sum
    /// sum_{n<=modes} e^{-n^2 t}, plus the constant mode for Neumann.
    pub fn trace(&self) -> f64 {
        let q = (-self.t).exp();
        let q2 = q * q;
        let mut decay = q;
        let mut odd_pow = q;
        let mut acc = decay;
        for _ in 2..=self.modes {
            odd_pow *= q2;
            decay *= odd_pow;
            acc += decay;
        }
        match self.boundary {
            Boundary::Dirichlet => acc,
            Boundary::Neumann => 1.0 + acc,
        }
    }
}

/// Sup over grid x grid of |K_{2t}(x,y) - sum_j w_j K_t(x,z_j) K_t(z_j,y)|:
/// the defect in the semigroup identity under the given rule.
pub fn semigroup_check(spec: &HeatSemigroupSpec, rule: &QuadratureRule, grid: &EvalGrid) -> Result<f64> {
    let iv = spec.interval();
    if !rule.interval().matches(iv) {
        return Err(Error::invalid("semigroup check needs a rule on (0, pi)".to_string()));
    }
    if !grid.interval().matches(iv) {
        return Err(Error::invalid("semigroup check needs a grid on (0, pi)".to_string()));
    }
    let doubled = spec.with_time(2.0 * spec.t)?;
    let g = grid.points();
    let nodes = rule.nodes();
    let weights = rule.weights();
    // kt[p][j] = K_t(g_p, z_j)
    let kt: Vec<Vec<f64>> = g
        .iter()
        .map(|&x| nodes.iter().map(|&z| spec.eval_unchecked(x, z)).collect())
        .collect();
    let mut sup = 0.0f64;
    for (p, &x) in g.iter().enumerate() {
        for (q, &y) in g.iter().enumerate() {
            let mut comp = 0.0;
            for j in 0..nodes.len() {
                comp += weights[j] * (kt[p][j] * kt[q][j]);
            }
            let residual = (doubled.eval_unchecked(x, y) - comp).abs();
            sup = sup.max(residual);
        }
    }
    Ok(sup)
}

/// Fitted constants of the pointwise bound
/// |K_t(x,y)| <= c t^{-1/2} e^{-b|x-y|^2/t} e^{omega t}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBoundParams {
    pub b: f64,
    pub omega: f64,
    pub c: f64,
}

/// Smallest `c` making the Gaussian bound hold over all grid pairs and the
/// listed times, for fixed `b > 0` and `omega >= 0`.
pub fn gaussian_bound_fit(
    boundary: Boundary,
    modes: usize,
    times: &[f64],
    b: f64,
    omega: f64,
    grid: &EvalGrid,
) -> Result<GaussianBoundParams> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::invalid(format!("gaussian bound needs b > 0, got {b}")));
    }
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::invalid(format!("gaussian bound needs omega >= 0, got {omega}")));
    }
    if times.is_empty() {
        return Err(Error::invalid("gaussian bound fit needs at least one time".to_string()));
    }
    let g = grid.points();
    let mut c = 0.0f64;
    for &t in times {
        let spec = HeatSemigroupSpec::new(boundary, t, modes)?;
        for &x in g {
            for &y in g {
                let k = spec.eval_unchecked(x, y).abs();
                let d = x - y;
                let needed = k * t.sqrt() * (b * d * d / t).exp() * (-omega * t).exp();
                c = c.max(needed);
            }
        }
    }
    if !c.is_finite() {
        return Err(Error::numerical("gaussian bound fit produced a non-finite constant".to_string()));
    }
    Ok(GaussianBoundParams { b, omega, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::RuleKind;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid(m: usize) -> EvalGrid {
        EvalGrid::uniform(model_interval(), m).unwrap()
    }

    fn rule(n: usize) -> QuadratureRule {
        QuadratureRule::build(RuleKind::GaussLegendre, n, model_interval()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(HeatSemigroupSpec::new(Boundary::Dirichlet, 0.0, 10).is_err());
        assert!(HeatSemigroupSpec::new(Boundary::Dirichlet, -1.0, 10).is_err());
        assert!(HeatSemigroupSpec::new(Boundary::Dirichlet, 1.0, 0).is_err());
        assert_eq!(default_modes(1.0), 100);
        assert_eq!(default_modes(0.001), 253);
    }

    #[test]
    fn dirichlet_vanishes_on_the_boundary() {
        let s = HeatSemigroupSpec::new(Boundary::Dirichlet, 0.7, 80).unwrap();
        for y in [0.0, 0.3, 1.7, PI] {
            assert_eq!(s.eval(0.0, y).unwrap(), 0.0);
            assert_abs_diff_eq!(s.eval(PI, y).unwrap(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn recurrence_evaluation_matches_direct_series() {
        let s = HeatSemigroupSpec::new(Boundary::Neumann, 0.3, 60).unwrap();
        let direct = |x: f64, y: f64| {
            let mut acc = 1.0 / PI;
            for n in 1..=60 {
                let nf = n as f64;
                acc += (2.0 / PI) * (-nf * nf * 0.3).exp() * (nf * x).cos() * (nf * y).cos();
            }
            acc
        };
        for (x, y) in [(0.1, 2.9), (1.0, 1.0), (PI, 0.0), (0.77, 1.33)] {
            assert_abs_diff_eq!(s.eval(x, y).unwrap(), direct(x, y), epsilon = 1e-13);
        }
        let sd = HeatSemigroupSpec::new(Boundary::Dirichlet, 0.3, 60).unwrap();
        let directd = |x: f64, y: f64| {
            let mut acc = 0.0;
            for n in 1..=60 {
                let nf = n as f64;
                acc += (2.0 / PI) * (-nf * nf * 0.3).exp() * (nf * x).sin() * (nf * y).sin();
            }
            acc
        };
        for (x, y) in [(0.1, 2.9), (1.0, 1.0), (0.77, 1.33)] {
            assert_abs_diff_eq!(sd.eval(x, y).unwrap(), directd(x, y), epsilon = 1e-13);
        }
    }

    #[test]
    fn eval_is_exactly_symmetric_and_domain_checked() {
        let s = HeatSemigroupSpec::new(Boundary::Dirichlet, 0.5, 100).unwrap();
        for (x, y) in [(0.2, 3.0), (1.5, 1.6), (0.0, PI)] {
            assert_eq!(s.eval(x, y).unwrap(), s.eval(y, x).unwrap());
        }
        assert!(s.eval(-0.1, 1.0).is_err());
        assert!(s.eval(0.1, PI + 0.1).is_err());
    }

    #[test]
    fn neumann_flattens_to_equilibrium_at_large_time() {
        let s = HeatSemigroupSpec::new(Boundary::Neumann, 20.0, 100).unwrap();
        let g = grid(31);
        let mut dev = 0.0f64;
        for &x in g.points() {
            for &y in g.points() {
                dev = dev.max((s.eval(x, y).unwrap() - 1.0 / PI).abs());
            }
        }
        assert!(dev <= 1e-8, "deviation {dev}");
    }

    #[test]
    fn dirichlet_mass_is_submarkovian() {
        let s = HeatSemigroupSpec::new(Boundary::Dirichlet, 0.5, 100).unwrap();
        let r = rule(200);
        for &x in grid(41).points() {
            let mass = r.integrate(|y| s.eval_unchecked(x, y)).unwrap();
            assert!(mass <= 1.0 + 1e-12, "mass {mass} at x={x}");
            assert!(mass >= -1e-12);
        }
    }

    #[test]
    fn semigroup_identity_residual_is_small() {
        let g = grid(41);
        let r = rule(200);
        for boundary in [Boundary::Dirichlet, Boundary::Neumann] {
            let s = HeatSemigroupSpec::new(boundary, 0.5, 100).unwrap();
            let res = semigroup_check(&s, &r, &g).unwrap();
            assert!(res <= 1e-8, "{boundary:?} residual {res}");
        }
    }

    #[test]
    fn single_mode_semigroup_is_exact() {
        let g = grid(21);
        let r = rule(120);
        for boundary in [Boundary::Dirichlet, Boundary::Neumann] {
            let s = HeatSemigroupSpec::new(boundary, 0.5, 1).unwrap();
            let res = semigroup_check(&s, &r, &g).unwrap();
            assert!(res <= 1e-12, "{boundary:?} residual {res}");
        }
    }

    #[test]
    fn residual_shrinks_with_rule_refinement() {
        // 12 nodes cannot resolve the active modes at t = 0.25, 200 can
        let g = grid(21);
        let s = HeatSemigroupSpec::new(Boundary::Dirichlet, 0.25, 100).unwrap();
        let coarse = semigroup_check(&s, &rule(12), &g).unwrap();
        let fine = semigroup_check(&s, &rule(200), &g).unwrap();
        assert!(fine < coarse, "coarse {coarse} fine {fine}");
        assert!(coarse > 1e-10, "coarse rule should show a visible defect");
    }

    #[test]
    fn trace_matches_partial_sum_oracle() {
        // sum_{n>=1} e^{-n^2} = 0.38631860241332584...
        let oracle: f64 = (1..=50).map(|n| (-((n * n) as f64)).exp()).sum();
        let d = HeatSemigroupSpec::new(Boundary::Dirichlet, 1.0, 50).unwrap();
        let n = HeatSemigroupSpec::new(Boundary::Neumann, 1.0, 50).unwrap();
        assert_abs_diff_eq!(d.trace(), oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(n.trace(), 1.0 + oracle, epsilon = 1e-14);
        assert_abs_diff_eq!(d.trace(), 0.38631860, epsilon = 1e-8);
        assert_abs_diff_eq!(n.trace(), 1.38631860, epsilon = 1e-8);
    }

    #[test]
    fn trace_decreases_in_time() {
        let mut prev = f64::INFINITY;
        for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let s = HeatSemigroupSpec::new(Boundary::Neumann, t, 100).unwrap();
            let tr = s.trace();
            assert!(tr < prev, "trace not decreasing at t={t}");
            prev = tr;
        }
    }

    #[test]
    fn gaussian_bound_constants() {
        let g = grid(101);
        let times = [0.1, 0.5, 1.0];
        // Fit-and-freeze regression values; c stays near (4 pi)^{-1/2} for
        // Dirichlet and twice that for Neumann (boundary reflection).
        let d = gaussian_bound_fit(Boundary::Dirichlet, 256, &times, 0.125, 0.0, &g).unwrap();
        assert_abs_diff_eq!(d.c, 0.282094791763023, epsilon = 1e-9);
        let n = gaussian_bound_fit(Boundary::Neumann, 256, &times, 0.125, 0.0, &g).unwrap();
        assert_abs_diff_eq!(n.c, 0.5642479469135245, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_bound_is_monotone_in_b() {
        let g = grid(51);
        let times = [0.5, 1.0];
        let c1 = gaussian_bound_fit(Boundary::Dirichlet, 100, &times, 0.125, 0.0, &g).unwrap().c;
        let c2 = gaussian_bound_fit(Boundary::Dirichlet, 100, &times, 0.25, 0.0, &g).unwrap().c;
        assert!(c2 >= c1);
    }

    #[test]
    fn gaussian_bound_dominates_diagonal() {
        let g = grid(51);
        let t = 0.5;
        let spec = HeatSemigroupSpec::new(Boundary::Dirichlet, t, 100).unwrap();
        let c = gaussian_bound_fit(Boundary::Dirichlet, 100, &[t], 0.125, 0.0, &g).unwrap().c;
        let sup_diag = g
            .points()
            .iter()
            .map(|&x| spec.eval_unchecked(x, x))
            .fold(0.0f64, f64::max);
        assert!(c >= sup_diag * t.sqrt() - 1e-15);
    }

    #[test]
    fn gaussian_bound_validates_parameters() {
        let g = grid(11);
        assert!(gaussian_bound_fit(Boundary::Dirichlet, 10, &[0.5], 0.0, 0.0, &g).is_err());
        assert!(gaussian_bound_fit(Boundary::Dirichlet, 10, &[0.5], 0.1, -1.0, &g).is_err());
        assert!(gaussian_bound_fit(Boundary::Dirichlet, 10, &[], 0.1, 0.0, &g).is_err());
        assert!(gaussian_bound_fit(Boundary::Dirichlet, 10, &[-0.5], 0.1, 0.0, &g).is_err());
    }
}
