//! First-order linear Caputo-Fabrizio equations
//!
//! ```text
//! D^α x(τ) + P(τ) x(τ) = Q(τ),   x(0) = x0
//! ```
//!
//! Differentiating the integral form once gives the ordinary equation
//!
//! ```text
//! ((1-α)P + 1) x' + ((1-α)P' + αP) x - ((1-α)Q' + αQ) = 0
//! ```
//!
//! whose integrating factor is `μ(τ) = exp ∫₀^τ αP / (1 + (1-α)P)`. The
//! closed form is `x = Ξ (C + ∫₀^τ μ ((1-α)Q' + αQ))` with
//! `Ξ = 1 / (((1-α)P + 1) μ)` and `C = x0 ((1-α)P(0) + 1)`. Both integration
//! constants are anchored at τ = 0.
//!
//! The initial condition is imposed on the differentiated equation. The
//! undifferentiated equation would additionally force `P(0) x(0) = Q(0)`;
//! [`cf_residual`] reports how far a solution is from satisfying it.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use crate::dims::DimExpr;
use crate::error::{Error, Result};
use crate::kernel_ops::{cf_derivative, FractionalOrder, SampledFunction, UniformGrid};
use crate::quadrature::{integrate, simpson_uniform, DEFAULT_REL_TOL};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of samples used to scan `1 + (1-α)P` for sign changes.
const SINGULARITY_SCAN: usize = 2048;

/// Shape of a coefficient, when one is known, so that the integrating
/// factor can be written down instead of integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientForm {
    Constant(f64),
    /// `amplitude / (1 + slope·τ)`
    ReciprocalLinear { amplitude: f64, slope: f64 },
    General,
}

/// A coefficient function of τ with an optional analytic derivative.
#[derive(Clone)]
pub struct Coefficient {
    value: ScalarFn,
    derivative: Option<ScalarFn>,
    form: CoefficientForm,
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Coefficient {
            value: Arc::new(move |_| c),
            derivative: Some(Arc::new(|_| 0.0)),
            form: CoefficientForm::Constant(c),
        }
    }

    /// `amplitude / (1 + slope·τ)`.
    pub fn reciprocal_linear(amplitude: f64, slope: f64) -> Self {
        Coefficient {
            value: Arc::new(move |tau| amplitude / (1.0 + slope * tau)),
            derivative: Some(Arc::new(move |tau| {
                let d = 1.0 + slope * tau;
                -amplitude * slope / (d * d)
            })),
            form: CoefficientForm::ReciprocalLinear { amplitude, slope },
        }
    }

    /// Arbitrary coefficient; its derivative is taken by finite differences.
    pub fn general<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Coefficient {
            value: Arc::new(f),
            derivative: None,
            form: CoefficientForm::General,
        }
    }

    pub fn with_derivative<F, D>(f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Coefficient {
            value: Arc::new(f),
            derivative: Some(Arc::new(df)),
            form: CoefficientForm::General,
        }
    }

    pub fn form(&self) -> CoefficientForm {
        self.form
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn eval(&self, tau: f64) -> f64 {
        (self.value)(tau)
    }

    /// Analytic derivative when available, else a central difference with
    /// step `max(1e-6, 1e-6·|τ|)` (one-sided second order near τ = 0).
    pub fn derivative(&self, tau: f64) -> f64 {
        if let Some(d) = &self.derivative {
            return d(tau);
        }
        let h = 1e-6f64.max(1e-6 * tau.abs());
        if tau - h < 0.0 {
            (-3.0 * self.eval(tau) + 4.0 * self.eval(tau + h) - self.eval(tau + 2.0 * h)) / (2.0 * h)
        } else {
            (self.eval(tau + h) - self.eval(tau - h)) / (2.0 * h)
        }
    }

    /// Sum of two coefficients.
    pub fn add(&self, other: &Coefficient) -> Coefficient {
        let (f, g) = (self.value.clone(), other.value.clone());
        let value: ScalarFn = Arc::new(move |t| f(t) + g(t));
        let derivative: Option<ScalarFn> = match (&self.derivative, &other.derivative) {
            (Some(df), Some(dg)) => {
                let (df, dg) = (df.clone(), dg.clone());
                Some(Arc::new(move |t| df(t) + dg(t)))
            }
            _ => None,
        };
        let form = match (self.form, other.form) {
            (CoefficientForm::Constant(a), CoefficientForm::Constant(b)) => CoefficientForm::Constant(a + b),
            _ => CoefficientForm::General,
        };
        Coefficient { value, derivative, form }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("form", &self.form)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

/// `D^α x + P(τ) x = Q(τ)` on `[0, tau_max]` with `x(0) = x0`.
#[derive(Debug, Clone)]
pub struct LinearFDEProblem {
    p: Coefficient,
    q: Coefficient,
    order: FractionalOrder,
    x0: f64,
    tau_max: f64,
}

impl LinearFDEProblem {
    pub fn new(p: Coefficient, q: Coefficient, order: FractionalOrder, x0: f64, tau_max: f64) -> Result<Self> {
        if !(tau_max.is_finite() && tau_max > 0.0) {
            return Err(Error::Domain(format!("tau_max must be positive, got {tau_max}")));
        }
        if !x0.is_finite() {
            return Err(Error::Domain(format!("initial value must be finite, got {x0}")));
        }
        Ok(LinearFDEProblem {
            p,
            q,
            order,
            x0,
            tau_max,
        })
    }

    pub fn p(&self) -> &Coefficient {
        &self.p
    }

    pub fn q(&self) -> &Coefficient {
        &self.q
    }

    pub fn order(&self) -> FractionalOrder {
        self.order
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn with_order(&self, order: FractionalOrder) -> Self {
        LinearFDEProblem { order, ..self.clone() }
    }

    pub fn with_forcing(&self, q: Coefficient, x0: f64) -> Self {
        LinearFDEProblem { q, x0, ..self.clone() }
    }

    /// `1 + (1-α) P(τ)`, the coefficient of x' after reduction.
    fn lead(&self, tau: f64) -> f64 {
        1.0 + self.order.complement() * self.p.eval(tau)
    }

    /// Checks that P and Q are finite on the solve range and that the
    /// leading coefficient keeps one sign.
    fn scan(&self) -> Result<()> {
        let h = self.tau_max / SINGULARITY_SCAN as f64;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=SINGULARITY_SCAN {
            let tau = k as f64 * h;
            let (p, q) = (self.p.eval(tau), self.q.eval(tau));
            if !p.is_finite() || !q.is_finite() {
                return Err(Error::Domain(format!(
                    "coefficients are not finite at tau = {tau} (P = {p}, Q = {q})"
                )));
            }
            let a = self.lead(tau);
            if a == 0.0 {
                return Err(Error::Singularity { tau });
            }
            if let Some((t_prev, a_prev)) = prev {
                if a_prev.signum() != a.signum() {
                    return Err(Error::Singularity {
                        tau: self.locate_root(t_prev, tau),
                    });
                }
            }
            prev = Some((tau, a));
        }
        Ok(())
    }

    fn locate_root(&self, mut lo: f64, mut hi: f64) -> f64 {
        let s_lo = self.lead(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.lead(mid).signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// The reduced ordinary equation `a x' + b x - c = 0`.
#[derive(Debug, Clone)]
pub struct ReducedODE {
    problem: LinearFDEProblem,
}

impl ReducedODE {
    /// `(1-α) P + 1`
    pub fn a(&self, tau: f64) -> f64 {
        self.problem.lead(tau)
    }

    /// `(1-α) P' + α P`
    pub fn b(&self, tau: f64) -> f64 {
        let p = &self.problem.p;
        let o = self.problem.order;
        o.complement() * p.derivative(tau) + o.value() * p.eval(tau)
    }

    /// `(1-α) Q' + α Q`
    pub fn c(&self, tau: f64) -> f64 {
        let q = &self.problem.q;
        let o = self.problem.order;
        o.complement() * q.derivative(tau) + o.value() * q.eval(tau)
    }

    /// `x' = (c - b x) / a`
    pub fn rhs(&self, tau: f64, x: f64) -> f64 {
        (self.c(tau) - self.b(tau) * x) / self.a(tau)
    }

    pub fn problem(&self) -> &LinearFDEProblem {
        &self.problem
    }
}

/// Differentiates the integral equation into its ordinary form.
pub fn reduce_to_ode(problem: &LinearFDEProblem) -> Result<ReducedODE> {
    problem.scan()?;
    Ok(ReducedODE {
        problem: problem.clone(),
    })
}

/// Runs an adaptive quadrature over a fallible integrand, keeping the first
/// error raised inside it. Falls back to composite Simpson when the
/// adaptive rule runs out of subdivisions.
fn integrate_fallible<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let wrapped = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let r = integrate(wrapped, a, b, DEFAULT_REL_TOL, 1e-300);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if r.converged {
        return Ok(r.value);
    }
    const FALLBACK_NODES: usize = 1 << 14;
    let h = (b - a) / (FALLBACK_NODES - 1) as f64;
    let samples = (0..FALLBACK_NODES)
        .map(|k| f(a + k as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    Ok(simpson_uniform(&samples, h))
}

fn mu_integrand(problem: &LinearFDEProblem, u: f64) -> Result<f64> {
    let p = problem.p.eval(u);
    let denom = 1.0 + problem.order.complement() * p;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::Singularity { tau: u });
    }
    Ok(problem.order.value() * p / denom)
}

/// `ln μ(hi) - ln μ(lo)`.
fn log_mu_increment(problem: &LinearFDEProblem, lo: f64, hi: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    let alpha = problem.order.value();
    let beta = problem.order.complement();
    match problem.p.form {
        CoefficientForm::Constant(p) => {
            let denom = 1.0 + beta * p;
            if denom == 0.0 {
                return Err(Error::Singularity { tau: lo });
            }
            Ok(alpha * p / denom * (hi - lo))
        }
        CoefficientForm::ReciprocalLinear { amplitude, slope } if slope != 0.0 => {
            // αA / (1 + (1-α)A + slope·u) integrates to a logarithm
            let base = 1.0 + beta * amplitude;
            let (d_lo, d_hi) = (base + slope * lo, base + slope * hi);
            if d_lo == 0.0 || d_hi == 0.0 || d_lo.signum() != d_hi.signum() {
                return Err(Error::Singularity {
                    tau: (-base / slope).clamp(lo.min(hi), lo.max(hi)),
                });
            }
            Ok(alpha * amplitude / slope * (d_hi / d_lo).ln())
        }
        _ => integrate_fallible(|u| mu_integrand(problem, u), lo, hi),
    }
}

/// `μ(τ) = exp ∫₀^τ αP(u) / (1 + (1-α)P(u)) du`.
pub fn integrating_factor(problem: &LinearFDEProblem, tau: f64) -> Result<f64> {
    if !(0.0..=problem.tau_max).contains(&tau) {
        return Err(Error::Domain(format!(
            "tau = {tau} outside [0, {}]",
            problem.tau_max
        )));
    }
    Ok(log_mu_increment(problem, 0.0, tau)?.exp())
}

/// Closed-form solution built from the integrating factor.
#[derive(Debug, Clone)]
pub struct ClosedFormSolution {
    ode: ReducedODE,
    constant_c: f64,
}

impl ClosedFormSolution {
    pub fn constant_c(&self) -> f64 {
        self.constant_c
    }

    pub fn problem(&self) -> &LinearFDEProblem {
        &self.ode.problem
    }

    pub fn mu(&self, tau: f64) -> Result<f64> {
        integrating_factor(&self.ode.problem, tau)
    }

    /// `Ξ(τ) = 1 / (((1-α)P(τ) + 1) μ(τ))`
    pub fn xi(&self, tau: f64) -> Result<f64> {
        Ok(1.0 / (self.ode.a(tau) * self.mu(tau)?))
    }

    /// `∫_lo^hi μ(u) c(u) du` given `ln μ(lo)`.
    fn forcing_increment(&self, lo: f64, hi: f64, log_mu_lo: f64) -> Result<f64> {
        if lo == hi {
            return Ok(0.0);
        }
        let problem = &self.ode.problem;
        integrate_fallible(
            |u| {
                let log_mu = log_mu_lo + log_mu_increment(problem, lo, u)?;
                Ok(log_mu.exp() * self.ode.c(u))
            },
            lo,
            hi,
        )
    }

    fn assemble(&self, tau: f64, log_mu: f64, forcing: f64) -> f64 {
        (self.constant_c + forcing) / (self.ode.a(tau) * log_mu.exp())
    }

    /// `x(τ)`; returns `x0` exactly at τ = 0.
    pub fn evaluate(&self, tau: f64) -> Result<f64> {
        let problem = &self.ode.problem;
        if !(0.0..=problem.tau_max).contains(&tau) {
            return Err(Error::Domain(format!(
                "tau = {tau} outside [0, {}]",
                problem.tau_max
            )));
        }
        if tau == 0.0 {
            return Ok(problem.x0);
        }
        let log_mu = log_mu_increment(problem, 0.0, tau)?;
        let forcing = self.forcing_increment(0.0, tau, 0.0)?;
        Ok(self.assemble(tau, log_mu, forcing))
    }

    /// Evaluates at increasing abscissae, accumulating both integrals from
    /// one point to the next.
    pub fn evaluate_sorted(&self, taus: &[f64]) -> Result<Vec<f64>> {
        let problem = &self.ode.problem;
        let mut out = Vec::with_capacity(taus.len());
        let (mut prev, mut log_mu, mut forcing) = (0.0, 0.0, 0.0);
        for &tau in taus {
            if !(prev..=problem.tau_max).contains(&tau) {
                return Err(Error::Domain(format!(
                    "abscissae must increase within [0, {}], got {tau} after {prev}",
                    problem.tau_max
                )));
            }
            forcing += self.forcing_increment(prev, tau, log_mu)?;
            log_mu += log_mu_increment(problem, prev, tau)?;
            prev = tau;
            out.push(if tau == 0.0 {
                problem.x0
            } else {
                self.assemble(tau, log_mu, forcing)
            });
        }
        Ok(out)
    }

    /// Samples the solution on `steps + 1` uniform nodes over `[0, tau_max]`.
    pub fn sample(&self, steps: usize) -> Result<SampledFunction> {
        let grid = tau_grid(self.ode.problem.tau_max, steps)?;
        let taus: Vec<f64> = grid.nodes().collect();
        let values = self.evaluate_sorted(&taus)?;
        SampledFunction::new(grid, values, DimExpr::DIMENSIONLESS)
    }
}

fn tau_grid(tau_max: f64, steps: usize) -> Result<UniformGrid> {
    UniformGrid::from_span(tau_max, steps + 1)
}

/// Closed-form solution with `C = x0 ((1-α)P(0) + 1)`.
pub fn solve_closed_form(problem: &LinearFDEProblem) -> Result<ClosedFormSolution> {
    let ode = reduce_to_ode(problem)?;
    let constant_c = problem.x0 * ode.a(0.0);
    Ok(ClosedFormSolution { ode, constant_c })
}

/// Classical fourth-order Runge-Kutta on the reduced equation.
pub fn solve_numeric(problem: &LinearFDEProblem, steps: usize) -> Result<SampledFunction> {
    if steps < 16 {
        return Err(Error::Domain(format!("at least 16 steps required, got {steps}")));
    }
    let ode = reduce_to_ode(problem)?;
    let grid = tau_grid(problem.tau_max, steps)?;
    let h = grid.dt();
    let mut x = problem.x0;
    let mut values = Vec::with_capacity(steps + 1);
    values.push(x);
    for k in 0..steps {
        let tau = grid.node(k);
        let k1 = ode.rhs(tau, x);
        let k2 = ode.rhs(tau + 0.5 * h, x + 0.5 * h * k1);
        let k3 = ode.rhs(tau + 0.5 * h, x + 0.5 * h * k2);
        let k4 = ode.rhs(tau + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        values.push(x);
    }
    SampledFunction::new(grid, values, DimExpr::DIMENSIONLESS)
}

/// `r(τ) = D^α x + P x - Q` evaluated on the samples of `x`.
pub fn cf_residual(problem: &LinearFDEProblem, x: &SampledFunction) -> Result<SampledFunction> {
    let d = cf_derivative(x, problem.order)?;
    let values = d
        .iter()
        .zip(x.values())
        .map(|((tau, dx), xv)| dx + problem.p.eval(tau) * xv - problem.q.eval(tau))
        .collect();
    SampledFunction::new(*x.grid(), values, x.dim())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    fn constant_problem(p: f64, q: f64, alpha: f64, x0: f64, tau_max: f64) -> LinearFDEProblem {
        LinearFDEProblem::new(Coefficient::constant(p), Coefficient::constant(q), order(alpha), x0, tau_max).unwrap()
    }

    /// x = q/p + (x0 - q/p) exp(-α p τ / (1 + (1-α) p))
    fn constant_oracle(p: f64, q: f64, alpha: f64, x0: f64, tau: f64) -> f64 {
        let rate = alpha * p / (1.0 + (1.0 - alpha) * p);
        q / p + (x0 - q / p) * (-rate * tau).exp()
    }

    #[test]
    fn reduction_of_constant_coefficients() {
        let ode = reduce_to_ode(&constant_problem(2.0, 3.0, 0.4, 0.0, 1.0)).unwrap();
        assert!((ode.a(0.3) - (0.6 * 2.0 + 1.0)).abs() < 1e-15);
        assert!((ode.b(0.3) - 0.8).abs() < 1e-15);
        assert!((ode.c(0.3) - 1.2).abs() < 1e-15);
        let classical = reduce_to_ode(&constant_problem(2.0, 3.0, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!((classical.a(0.5), classical.b(0.5), classical.c(0.5)), (1.0, 2.0, 3.0));
    }

    #[test]
    fn reduction_of_rc_coefficient() {
        let alpha = 0.5;
        let beta = 1.0 - alpha;
        let p = LinearFDEProblem::new(
            Coefficient::reciprocal_linear(1.0, beta),
            Coefficient::reciprocal_linear(1.0, beta),
            order(alpha),
            0.0,
            5.0,
        )
        .unwrap();
        let ode = reduce_to_ode(&p).unwrap();
        for tau in [0.0, 0.7, 3.0] {
            let d = 1.0 + beta * tau;
            let expected = beta * (-beta / (d * d)) + alpha / d;
            assert!((ode.b(tau) - expected).abs() < 1e-15);
        }
        // the finite-difference route agrees with the analytic derivative
        let general = LinearFDEProblem::new(
            Coefficient::general(move |t| 1.0 / (1.0 + beta * t)),
            Coefficient::constant(0.0),
            order(alpha),
            0.0,
            5.0,
        )
        .unwrap();
        let fd = reduce_to_ode(&general).unwrap();
        for tau in [0.0, 0.7, 3.0] {
            assert!((fd.b(tau) - ode.b(tau)).abs() < 1e-8, "tau = {tau}");
        }
    }

    #[test]
    fn singular_leading_coefficient_is_located() {
        // 1 + 0.5 (-4 + τ) vanishes at τ = 2
        let p = LinearFDEProblem::new(
            Coefficient::general(|t| -4.0 + t),
            Coefficient::constant(1.0),
            order(0.5),
            0.0,
            5.0,
        )
        .unwrap();
        match reduce_to_ode(&p) {
            Err(Error::Singularity { tau }) => assert!((tau - 2.0).abs() < 1e-9),
            other => panic!("expected singularity, got {other:?}"),
        }
        assert!(solve_numeric(&p, 100).is_err());
        assert!(solve_closed_form(&p).is_err());
    }

    #[test]
    fn integrating_factor_closed_forms() {
        let p = constant_problem(2.0, 1.0, 0.3, 0.0, 4.0);
        assert_eq!(integrating_factor(&p, 0.0).unwrap(), 1.0);
        let expected = (0.3f64 * 2.0 * 1.5 / (1.0 + 0.7 * 2.0)).exp();
        assert!((integrating_factor(&p, 1.5).unwrap() - expected).abs() < 1e-14);

        let alpha = 0.6;
        let rc = LinearFDEProblem::new(
            Coefficient::reciprocal_linear(1.0, 1.0 - alpha),
            Coefficient::constant(0.0),
            order(alpha),
            0.0,
            10.0,
        )
        .unwrap();
        let general = LinearFDEProblem::new(
            Coefficient::general(move |t| 1.0 / (1.0 + (1.0 - alpha) * t)),
            Coefficient::constant(0.0),
            order(alpha),
            0.0,
            10.0,
        )
        .unwrap();
        for tau in [0.5, 2.0, 9.0] {
            let closed = ((2.0 - alpha + (1.0 - alpha) * tau) / (2.0 - alpha)).powf(alpha / (1.0 - alpha));
            let a = integrating_factor(&rc, tau).unwrap();
            let b = integrating_factor(&general, tau).unwrap();
            assert!((a - closed).abs() < 1e-13 * closed);
            assert!((b - closed).abs() < 1e-9 * closed);
        }
        assert!(integrating_factor(&rc, 11.0).is_err());
    }

    #[test]
    fn closed_form_matches_constant_oracle() {
        for &(alpha, x0) in &[(0.6, 0.0), (0.25, 2.0), (1.0, -1.0)] {
            let prob = constant_problem(1.5, 0.75, alpha, x0, 5.0);
            let sol = solve_closed_form(&prob).unwrap();
            assert_eq!(sol.evaluate(0.0).unwrap(), x0);
            assert_eq!(sol.constant_c(), x0 * (1.0 + (1.0 - alpha) * 1.5));
            for tau in [0.1, 1.0, 4.9] {
                let exact = constant_oracle(1.5, 0.75, alpha, x0, tau);
                assert!((sol.evaluate(tau).unwrap() - exact).abs() < 1e-10);
            }
            let sampled = sol.sample(50).unwrap();
            for (tau, v) in sampled.iter() {
                assert!((v - constant_oracle(1.5, 0.75, alpha, x0, tau)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn numeric_solver_converges_at_fourth_order() {
        let prob = constant_problem(1.0, 1.0, 0.6, 0.0, 5.0);
        let err = |steps: usize| {
            let s = solve_numeric(&prob, steps).unwrap();
            s.iter()
                .map(|(tau, v)| (v - constant_oracle(1.0, 1.0, 0.6, 0.0, tau)).abs())
                .fold(0.0, f64::max)
        };
        assert!(err(2000) < 1e-8);
        let ratio = err(20) / err(40);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
        assert!(solve_numeric(&prob, 15).is_err());
    }

    #[test]
    fn stationary_solution_has_zero_residual() {
        let prob = constant_problem(2.0, 3.0, 0.5, 1.5, 4.0);
        let x = solve_closed_form(&prob).unwrap().sample(400).unwrap();
        assert!(x.values().iter().all(|v| (v - 1.5).abs() < 1e-14));
        let r = cf_residual(&prob, &x).unwrap();
        assert!(r.values().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn residual_exposes_origin_mismatch() {
        let prob = constant_problem(1.0, 1.0, 0.5, 0.0, 20.0);
        let x = solve_closed_form(&prob).unwrap().sample(4000).unwrap();
        let r = cf_residual(&prob, &x).unwrap();
        assert_eq!(r.values()[0], -1.0);
        // r decays like exp(-λ τ) · r(0) for the exact solution
        let last = *r.values().last().unwrap();
        assert!(last.abs() < 1e-6, "{last}");
    }

    #[test]
    fn forcing_superposes() {
        let base = LinearFDEProblem::new(
            Coefficient::general(|t| 1.0 + 0.3 * t.sin()),
            Coefficient::constant(0.0),
            order(0.7),
            0.0,
            3.0,
        )
        .unwrap();
        let q1 = Coefficient::general(|t| (-t).exp());
        let q2 = Coefficient::with_derivative(|t| t * t, |t| 2.0 * t);
        let s1 = solve_closed_form(&base.with_forcing(q1.clone(), 0.0)).unwrap().sample(30).unwrap();
        let s2 = solve_closed_form(&base.with_forcing(q2.clone(), 0.0)).unwrap().sample(30).unwrap();
        let s12 = solve_closed_form(&base.with_forcing(q1.add(&q2), 0.0)).unwrap().sample(30).unwrap();
        let sum = s1.linear_combination(1.0, &s2, 1.0).unwrap();
        assert!(s12.max_abs_diff(&sum, 0) < 1e-8);
    }
}
