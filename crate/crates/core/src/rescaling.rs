//! Dimensionless time.
//!
//! A time scale `φ(t, α)` (seconds, strictly positive) defines
//! `τ(t, α) = ∫₀ᵗ ds / φ(s, α)`. Since `dτ/dt = 1/φ`, replacing `d/dt` with
//! `(1/φ) D^α_τ` keeps the units of the classical equation while the
//! Caputo-Fabrizio operator itself stays dimensionless. A constant-coefficient
//! equation `x' + P x = Q` becomes `D^α x + Pφ x = Qφ` in τ.

use std::fmt;
use std::sync::Arc;

use crate::dims::{self, DimExpr};
use crate::error::{Error, Result};
use crate::kernel_ops::{FractionalOrder, UniformGrid};
use crate::linear_cf_solver::{solve_closed_form, Coefficient, LinearFDEProblem};
use crate::quadrature::{integrate, DEFAULT_REL_TOL};

pub type ScaleFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Upper limit of the geometric bracket search in [`TimeScale::t_of_tau`].
const MAX_BRACKET_T: f64 = 1e15;

/// An auxiliary time scale `φ(t, α)` with optional closed forms.
#[derive(Clone)]
pub struct TimeScale {
    name: String,
    phi: ScaleFn,
    dphi_dt: Option<ScaleFn>,
    tau: Option<ScaleFn>,
    inverse: Option<ScaleFn>,
}

impl TimeScale {
    /// A user-defined scale. `phi(t, alpha)` must be positive for t ≥ 0.
    pub fn new<F>(name: impl Into<String>, phi: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        TimeScale {
            name: name.into(),
            phi: Arc::new(phi),
            dphi_dt: None,
            tau: None,
            inverse: None,
        }
    }

    /// Attaches closed forms for `τ(t, α)` and its inverse `t(τ, α)`.
    pub fn with_closed_form<T, I>(mut self, tau: T, inverse: I) -> Self
    where
        T: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.tau = Some(Arc::new(tau));
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Attaches `∂φ/∂t`, used for analytic derivatives of rescaled coefficients.
    pub fn with_phi_derivative<D>(mut self, dphi: D) -> Self
    where
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.dphi_dt = Some(Arc::new(dphi));
        self
    }

    /// `φ = σ`: reproduces the constant-σ rule, `τ = t/σ`.
    pub fn constant(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain(format!("constant scale must be positive, got {sigma}")));
        }
        Ok(TimeScale::new("constant", move |_, _| sigma)
            .with_closed_form(move |t, _| t / sigma, move |tau, _| tau * sigma)
            .with_phi_derivative(|_, _| 0.0))
    }

    /// `φ = exp(-(1-α)Γt) / Γ`, so `τ = (exp((1-α)Γt) - 1) / (1-α)` and
    /// `τ = Γt` at α = 1.
    pub fn rc_exponential(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Domain(format!("rate Gamma must be positive, got {gamma}")));
        }
        let tau = move |t: f64, a: f64| {
            let beta = 1.0 - a;
            if beta == 0.0 {
                gamma * t
            } else {
                (beta * gamma * t).exp_m1() / beta
            }
        };
        let inverse = move |tau: f64, a: f64| {
            let beta = 1.0 - a;
            if beta == 0.0 {
                tau / gamma
            } else {
                (beta * tau).ln_1p() / (beta * gamma)
            }
        };
        Ok(
            TimeScale::new("rc-exponential", move |t, a| (-(1.0 - a) * gamma * t).exp() / gamma)
                .with_closed_form(tau, inverse)
                .with_phi_derivative(move |t, a| -(1.0 - a) * (-(1.0 - a) * gamma * t).exp()),
        )
    }

    /// φ tabulated against t (independent of α), interpolated by a
    /// monotone piecewise cubic and held constant outside the table.
    pub fn tabulated(ts: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if let Some(p) = phis.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Domain(format!("tabulated phi must be positive, found {p}")));
        }
        let interp = MonotoneCubic::new(ts, phis)?;
        let d = interp.clone();
        Ok(TimeScale::new("tabulated", move |t, _| interp.eval(t))
            .with_phi_derivative(move |t, _| d.derivative(t)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_closed_form(&self) -> bool {
        self.tau.is_some()
    }

    pub fn phi(&self, t: f64, order: FractionalOrder) -> f64 {
        (self.phi)(t, order.value())
    }

    pub fn dphi_dt(&self, t: f64, order: FractionalOrder) -> Option<f64> {
        self.dphi_dt.as_ref().map(|d| d(t, order.value()))
    }

    fn checked_phi(&self, t: f64, alpha: f64) -> Result<f64> {
        let p = (self.phi)(t, alpha);
        // +inf is allowed: τ simply stops growing
        if p > 0.0 {
            Ok(p)
        } else {
            Err(Error::Domain(format!(
                "time scale '{}' gives phi({t}, {alpha}) = {p}; phi must be positive",
                self.name
            )))
        }
    }

    fn integrate_tau(&self, lo: f64, hi: f64, alpha: f64) -> Result<f64> {
        let mut failure = None;
        let r = integrate(
            |s| match self.checked_phi(s, alpha) {
                Ok(p) => 1.0 / p,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            lo,
            hi,
            DEFAULT_REL_TOL,
            1e-300,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok(r.value),
        }
    }

    /// `τ(t, α) = ∫₀ᵗ ds / φ(s, α)`.
    pub fn tau_of_t(&self, t: f64, order: FractionalOrder) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match &self.tau {
            Some(tau) => Ok(tau(t, order.value())),
            None => self.integrate_tau(0.0, t, order.value()),
        }
    }

    /// Inverse of [`TimeScale::tau_of_t`].
    pub fn t_of_tau(&self, tau: f64, order: FractionalOrder) -> Result<f64> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::Domain(format!("tau must be finite and >= 0, got {tau}")));
        }
        if tau == 0.0 {
            return Ok(0.0);
        }
        if let Some(inv) = &self.inverse {
            let t = inv(tau, order.value());
            if t.is_finite() {
                return Ok(t);
            }
            let supremum = self.tau_of_t(MAX_BRACKET_T, order).unwrap_or(f64::NAN);
            return Err(Error::Range { tau, supremum });
        }
        let alpha = order.value();

        // grow [lo, hi] geometrically from [0, 1] until it brackets the root,
        // accumulating τ one doubling at a time
        let (mut lo, mut tau_lo) = (0.0, 0.0);
        let mut hi = 1.0;
        let mut tau_hi = self.integrate_tau(0.0, hi, alpha)?;
        while tau_hi < tau {
            let next = 2.0 * hi;
            if next > MAX_BRACKET_T {
                return Err(Error::Range { tau, supremum: tau_hi });
            }
            lo = hi;
            tau_lo = tau_hi;
            hi = next;
            tau_hi = tau_lo + self.integrate_tau(lo, hi, alpha)?;
        }
        if tau_hi == tau {
            return Ok(hi);
        }

        // secant steps guarded by bisection on g(t) = τ(t) - tau
        let base = (lo, tau_lo);
        let g = |t: f64| -> Result<f64> { Ok(base.1 + self.integrate_tau(base.0, t, alpha)? - tau) };
        let (mut g_lo, mut g_hi) = (tau_lo - tau, tau_hi - tau);
        let tol = 1e-12 * tau.max(1.0);
        // bisect whenever the same end of the bracket moved twice in a row
        let mut last_moved_lo: Option<bool> = None;
        let mut repeats = 0;
        for _ in 0..200 {
            let secant = hi - g_hi * (hi - lo) / (g_hi - g_lo);
            let candidate = if repeats < 2 && secant > lo && secant < hi {
                secant
            } else {
                repeats = 0;
                0.5 * (lo + hi)
            };
            let gc = g(candidate)?;
            if gc.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(candidate);
            }
            let moved_lo = gc < 0.0;
            if moved_lo {
                lo = candidate;
                g_lo = gc;
            } else {
                hi = candidate;
                g_hi = gc;
            }
            repeats = if last_moved_lo == Some(moved_lo) { repeats + 1 } else { 1 };
            last_moved_lo = Some(moved_lo);
        }
        Ok(0.5 * (lo + hi))
    }
}

impl fmt::Debug for TimeScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeScale")
            .field("name", &self.name)
            .field("closed_form", &self.tau.is_some())
            .finish()
    }
}

/// Fritsch-Carlson monotone cubic Hermite interpolant.
#[derive(Debug, Clone)]
struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Input(format!(
                "table needs at least two (t, value) pairs of equal length, got {} and {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::Input("table abscissae must be strictly increasing".into()));
        }
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (secants[i - 1], secants[i]);
            if d0 * d1 > 0.0 {
                // weighted harmonic mean keeps each piece monotone
                let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }
        Ok(MonotoneCubic { xs, ys, slopes })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k => (k - 1).min(self.xs.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] || x >= self.xs[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.ys[i] + d10 * self.slopes[i] + d01 * self.ys[i + 1] + d11 * self.slopes[i + 1]
    }
}

/// `x' + P x = Q`, `x(0) = x0`, with P in s⁻¹ and Q in s⁻¹ times the unit of x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalLinearODE {
    pub p: f64,
    pub q: f64,
    pub x0: f64,
}

impl ClassicalLinearODE {
    pub fn new(p: f64, q: f64, x0: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && x0.is_finite()) {
            return Err(Error::Domain(format!(
                "coefficients must be finite, got P = {p}, Q = {q}, x0 = {x0}"
            )));
        }
        Ok(ClassicalLinearODE { p, q, x0 })
    }

    /// `x(t) = x0 e^{-Pt} + (Q/P)(1 - e^{-Pt})`, or `x0 + Qt` when P = 0.
    pub fn solution(&self, t: f64) -> f64 {
        if self.p == 0.0 {
            return self.x0 + self.q * t;
        }
        let decay = (-self.p * t).exp();
        self.x0 * decay - self.q / self.p * (-self.p * t).exp_m1()
    }

    /// Time exponents of the three terms, x treated as dimensionless.
    pub fn term_dims(&self) -> [DimExpr; 3] {
        dims::classical_linear_terms(DimExpr::DIMENSIONLESS)
    }
}

/// Rewrites `x' + P x = Q` in dimensionless time as
/// `D^α x + P φ(t(τ), α) x = Q φ(t(τ), α)` on `[0, tau_max]`.
pub fn rescale_problem(
    ode: &ClassicalLinearODE,
    scale: &TimeScale,
    order: FractionalOrder,
    tau_max: f64,
) -> Result<LinearFDEProblem> {
    // fails with a range error when tau_max is unreachable; smaller τ then are reachable
    scale.t_of_tau(tau_max, order)?;
    let make = |k: f64| -> Coefficient {
        let s = scale.clone();
        let value = move |tau: f64| match s.t_of_tau(tau, order) {
            Ok(t) => k * s.phi(t, order),
            Err(_) => f64::NAN,
        };
        match scale.dphi_dt {
            // dP/dτ = k ∂φ/∂t · dt/dτ = k ∂φ/∂t · φ
            Some(_) => {
                let s = scale.clone();
                let deriv = move |tau: f64| match s.t_of_tau(tau, order) {
                    Ok(t) => k * s.dphi_dt(t, order).unwrap_or(f64::NAN) * s.phi(t, order),
                    Err(_) => f64::NAN,
                };
                Coefficient::with_derivative(value, deriv)
            }
            None => Coefficient::general(value),
        }
    };
    LinearFDEProblem::new(make(ode.p), make(ode.q), order, ode.x0, tau_max)
}

/// Time exponents of the rescaled equation's terms, x treated as dimensionless.
pub fn rescaled_term_dims() -> [DimExpr; 3] {
    dims::rescaled_cf_terms(DimExpr::DIMENSIONLESS)
}

/// Solves the rescaled problem at α = 1 and the classical equation on the
/// grid, returning the largest discrepancy after mapping τ back to t.
pub fn check_alpha_one_reduction(ode: &ClassicalLinearODE, scale: &TimeScale, t_grid: &UniformGrid) -> Result<f64> {
    let order = FractionalOrder::ONE;
    let taus = t_grid
        .nodes()
        .map(|t| scale.tau_of_t(t, order))
        .collect::<Result<Vec<_>>>()?;
    let tau_max = taus.last().copied().unwrap_or(0.0);
    if tau_max <= 0.0 {
        return Err(Error::Domain("grid does not extend past t = 0".into()));
    }
    let problem = rescale_problem(ode, scale, order, tau_max)?;
    let rescaled = solve_closed_form(&problem)?.evaluate_sorted(&taus)?;
    Ok(t_grid
        .nodes()
        .zip(rescaled)
        .map(|(t, x)| (x - ode.solution(t)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    fn without_closed_form(scale: &TimeScale) -> TimeScale {
        let s = scale.clone();
        TimeScale::new("quadrature", move |t, a| s.phi(t, FractionalOrder::new(a).unwrap()))
    }

    #[test]
    fn tau_at_origin_and_for_constant_scale() {
        let c = TimeScale::constant(2.5).unwrap();
        assert_eq!(c.tau_of_t(0.0, order(0.3)).unwrap(), 0.0);
        assert!((c.tau_of_t(7.5, order(0.3)).unwrap() - 3.0).abs() < 1e-15);
        let q = without_closed_form(&c);
        assert!((q.tau_of_t(7.5, order(0.3)).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(q.t_of_tau(0.0, order(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn rc_scale_closed_form_and_quadrature_agree() {
        let rc = TimeScale::rc_exponential(1.0).unwrap();
        let tau = rc.tau_of_t(1.0, order(0.5)).unwrap();
        assert!((tau - (0.5f64.exp() - 1.0) / 0.5).abs() < 1e-15);
        assert!((tau - 1.297_442_541_400_256).abs() < 1e-12);
        let q = without_closed_form(&rc);
        assert!((q.tau_of_t(1.0, order(0.5)).unwrap() - tau).abs() < 1e-12);
        assert!((rc.t_of_tau(tau, order(0.5)).unwrap() - 1.0).abs() < 1e-14);
        assert!((q.t_of_tau(tau, order(0.5)).unwrap() - 1.0).abs() < 1e-10);
        // α = 1 branch is linear
        assert_eq!(rc.tau_of_t(3.0, FractionalOrder::ONE).unwrap(), 3.0);
        assert_eq!(rc.phi(4.0, FractionalOrder::ONE), 1.0);
    }

    #[test]
    fn saturating_scale_reports_supremum() {
        // φ = e^t gives τ = 1 - e^{-t} < 1
        let s = TimeScale::new("saturating", |t: f64, _| t.exp());
        let t = s.t_of_tau(0.5, order(0.5)).unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-9);
        match s.t_of_tau(1.5, order(0.5)) {
            Err(Error::Range { supremum, .. }) => assert!((supremum - 1.0).abs() < 1e-6),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn nonpositive_phi_is_a_domain_error() {
        let s = TimeScale::new("bad", |t: f64, _| 1.0 - t);
        assert!(matches!(s.tau_of_t(2.0, order(0.5)), Err(Error::Domain(_))));
        assert!(TimeScale::constant(0.0).is_err());
        assert!(TimeScale::rc_exponential(-1.0).is_err());
    }

    #[test]
    fn rescaled_coefficients() {
        let ode = ClassicalLinearODE::new(4.0, 2.0, 0.0).unwrap();
        let prob = rescale_problem(&ode, &TimeScale::constant(0.25).unwrap(), order(0.4), 3.0).unwrap();
        assert!((prob.p().eval(1.3) - 1.0).abs() < 1e-15);
        assert!((prob.q().eval(1.3) - 0.5).abs() < 1e-15);

        let (gamma, alpha, q0) = (2.0, 0.7, 3.0);
        let ode = ClassicalLinearODE::new(gamma, gamma * q0, 0.0).unwrap();
        let rc = TimeScale::rc_exponential(gamma).unwrap();
        let prob = rescale_problem(&ode, &rc, order(alpha), 10.0).unwrap();
        for tau in [0.0, 0.5, 4.0, 10.0] {
            let d = 1.0 + (1.0 - alpha) * tau;
            assert!((prob.p().eval(tau) - 1.0 / d).abs() < 1e-14);
            assert!((prob.q().eval(tau) - q0 / d).abs() < 1e-13);
            let dp = -(1.0 - alpha) / (d * d);
            assert!((prob.p().derivative(tau) - dp).abs() < 1e-13);
        }
        assert!(crate::dims::check_homogeneity(&rescaled_term_dims()));
        assert!(rescaled_term_dims().iter().all(|d| d.is_dimensionless()));
    }

    #[test]
    fn alpha_one_reduction() {
        let ode = ClassicalLinearODE::new(1.0, 1.0, 0.0).unwrap();
        let grid = UniformGrid::from_span(5.0, 501).unwrap();
        let rc = TimeScale::rc_exponential(1.0).unwrap();
        assert!(check_alpha_one_reduction(&ode, &rc, &grid).unwrap() < 1e-8);
        let c = TimeScale::constant(1.0).unwrap();
        assert!(check_alpha_one_reduction(&ode, &c, &grid).unwrap() < 1e-8);
        // a scale with no closed form goes through quadrature and root finding
        let tab = TimeScale::tabulated(vec![0.0, 1.0, 2.0, 6.0], vec![0.5, 0.8, 0.6, 1.0]).unwrap();
        let ode = ClassicalLinearODE::new(0.7, -0.2, 1.5).unwrap();
        let coarse = UniformGrid::from_span(5.0, 21).unwrap();
        assert!(check_alpha_one_reduction(&ode, &tab, &coarse).unwrap() < 1e-8);
    }

    #[test]
    fn monotone_cubic_stays_within_data() {
        let m = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 3.0, 3.0, 0.5]).unwrap();
        for k in 0..=300 {
            let x = k as f64 / 100.0;
            let y = m.eval(x);
            assert!((0.5 - 1e-12..=3.0 + 1e-12).contains(&y), "x = {x}, y = {y}");
        }
        assert_eq!(m.eval(1.0), 3.0);
        assert_eq!(m.eval(-1.0), 1.0);
        assert_eq!(m.eval(10.0), 0.5);
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        let h = 1e-6;
        for x in [0.3, 1.5, 2.7] {
            let fd = (m.eval(x + h) - m.eval(x - h)) / (2.0 * h);
            assert!((m.derivative(x) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn classical_solution() {
        let ode = ClassicalLinearODE::new(2.0, 4.0, 1.0).unwrap();
        assert_eq!(ode.solution(0.0), 1.0);
        assert!((ode.solution(1.0) - (2.0 - (-2f64).exp())).abs() < 1e-15);
        let drift = ClassicalLinearODE::new(0.0, 3.0, 1.0).unwrap();
        assert_eq!(drift.solution(2.0), 7.0);
        assert!(crate::dims::check_homogeneity(&ode.term_dims()));
    }
}
