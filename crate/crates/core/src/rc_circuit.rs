//! Fractional RC charging circuit.
//!
//! A capacitor C charged through a resistor R from a battery V0 obeys
//! `q' + Γ q = Γ q0` with `Γ = 1/(RC)` and `q0 = V0 C`. With the time scale
//! `φ = exp(-(1-α)Γt)/Γ` the fractional version reads
//!
//! ```text
//! D^α q + q / (1 + (1-α)τ) = q0 / (1 + (1-α)τ)
//! ```
//!
//! and, with `q(0) = 0`,
//!
//! ```text
//! q(t, α) = q0 (1 - e^{(1-α)Γt} ((2-α) / ((1-α) + e^{(1-α)Γt}))^{1/(1-α)})
//! ```
//!
//! Powers with exponent `1/(1-α)` are evaluated through logarithms.

use crate::curve::Curve;
use crate::dims::{self, DimExpr};
use crate::error::{Error, Result};
use crate::kernel_ops::{FractionalOrder, SampledFunction, UniformGrid};
use crate::linear_cf_solver::{Coefficient, LinearFDEProblem};
use crate::rescaling::{ClassicalLinearODE, TimeScale};

/// Orders above `1 - ALPHA_ONE_THRESHOLD` use the classical solution.
pub const ALPHA_ONE_THRESHOLD: f64 = 1e-6;

fn near_classical(order: FractionalOrder) -> bool {
    order.value() > 1.0 - ALPHA_ONE_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RCParams {
    r: f64,
    c: f64,
    v0: f64,
}

impl RCParams {
    pub fn new(resistance: f64, capacitance: f64, v0: f64) -> Result<Self> {
        if !(resistance.is_finite() && resistance > 0.0) {
            return Err(Error::Domain(format!("resistance must be positive, got {resistance}")));
        }
        if !(capacitance.is_finite() && capacitance > 0.0) {
            return Err(Error::Domain(format!("capacitance must be positive, got {capacitance}")));
        }
        if !v0.is_finite() {
            return Err(Error::Domain(format!("battery voltage must be finite, got {v0}")));
        }
        Ok(RCParams {
            r: resistance,
            c: capacitance,
            v0,
        })
    }

    pub fn resistance(&self) -> f64 {
        self.r
    }

    pub fn capacitance(&self) -> f64 {
        self.c
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// `Γ = 1/(RC)` in s⁻¹.
    pub fn gamma(&self) -> f64 {
        1.0 / (self.r * self.c)
    }

    /// Asymptotic charge `q0 = V0 C`.
    pub fn q0(&self) -> f64 {
        self.v0 * self.c
    }

    /// The classical equation `q' + Γ q = Γ q0`, `q(0) = 0`.
    pub fn classical_ode(&self) -> ClassicalLinearODE {
        ClassicalLinearODE {
            p: self.gamma(),
            q: self.gamma() * self.q0(),
            x0: 0.0,
        }
    }
}

pub fn rc_time_scale(params: &RCParams) -> TimeScale {
    TimeScale::rc_exponential(params.gamma()).expect("RCParams guarantees a positive rate")
}

/// `C0 = -q0 (2-α)^{1/(1-α)}`, fixed by `q(0, α) = 0`.
pub fn initial_condition_constant(params: &RCParams, order: FractionalOrder) -> f64 {
    if near_classical(order) {
        return -params.q0() * std::f64::consts::E;
    }
    let a = order.value();
    -params.q0() * ((2.0 - a).ln() / (1.0 - a)).exp()
}

fn require_nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and >= 0, got {x}")))
    }
}

/// `q(τ, α) = q0 + C0 (1 + (1-α)τ) (2 - α + (1-α)τ)^{1/(α-1)}`.
pub fn charge_tau(params: &RCParams, tau: f64, order: FractionalOrder, c0: f64) -> Result<f64> {
    require_nonnegative("tau", tau)?;
    if near_classical(order) {
        return Ok(params.q0() + c0 * (-(1.0 + tau)).exp());
    }
    let a = order.value();
    let beta = 1.0 - a;
    let log_term = (beta * tau).ln_1p() - (2.0 - a + beta * tau).ln() / beta;
    Ok(params.q0() + c0 * log_term.exp())
}

/// `ln(1 - q/q0)` at `Γt`, accurate for small and large arguments.
fn log_uncharged(gamma_t: f64, order: FractionalOrder) -> f64 {
    if near_classical(order) {
        return -gamma_t;
    }
    let a = order.value();
    let beta = 1.0 - a;
    let x = beta * gamma_t;
    // ln[e^x ((2-α)/((1-α) + e^x))^{1/(1-α)}] = x - ln(1 + (e^x - 1)/(2-α)) / (1-α)
    x - (x.exp_m1() / (2.0 - a)).ln_1p() / beta
}

/// `q/q0` at `Γt`; exactly 0 at the origin.
fn charged_fraction(gamma_t: f64, order: FractionalOrder) -> f64 {
    if gamma_t == 0.0 {
        return 0.0;
    }
    -log_uncharged(gamma_t, order).exp_m1()
}

/// Charge on the capacitor at time t.
pub fn charge_t(params: &RCParams, t: f64, order: FractionalOrder) -> Result<f64> {
    require_nonnegative("t", t)?;
    Ok(params.q0() * charged_fraction(params.gamma() * t, order))
}

/// Voltage across the capacitor at time t.
pub fn capacitor_voltage(params: &RCParams, t: f64, order: FractionalOrder) -> Result<f64> {
    require_nonnegative("t", t)?;
    Ok(params.v0() * charged_fraction(params.gamma() * t, order))
}

/// `1 - q/q0`, useful for judging how close the charge is to saturation.
pub fn remaining_fraction(params: &RCParams, t: f64, order: FractionalOrder) -> Result<f64> {
    require_nonnegative("t", t)?;
    Ok(log_uncharged(params.gamma() * t, order).exp())
}

/// The rescaled charging problem with `q(0) = 0` on `[0, tau_max]`, with the
/// coefficients written in closed form.
pub fn rc_problem(params: &RCParams, order: FractionalOrder, tau_max: f64) -> Result<LinearFDEProblem> {
    let beta = order.complement();
    LinearFDEProblem::new(
        Coefficient::reciprocal_linear(1.0, beta),
        Coefficient::reciprocal_linear(params.q0(), beta),
        order,
        0.0,
        tau_max,
    )
}

/// [`charge_tau`] with `q(0) = 0`, sampled on a τ grid starting at 0.
pub fn charge_on_tau_grid(params: &RCParams, order: FractionalOrder, grid: UniformGrid) -> Result<SampledFunction> {
    let c0 = initial_condition_constant(params, order);
    let values = grid
        .nodes()
        .map(|tau| charge_tau(params, tau, order, c0))
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(grid, values, DimExpr::DIMENSIONLESS)
}

/// Time exponents of the three terms of the rescaled circuit equation.
/// Charge units are not tracked.
pub fn rc_equation_term_dims() -> [DimExpr; 3] {
    dims::rescaled_cf_terms(DimExpr::DIMENSIONLESS)
}

/// Capacitor voltage curves for each order, sampled on `t_grid`.
pub fn figure2_curves(params: &RCParams, alphas: &[FractionalOrder], t_grid: &UniformGrid) -> Result<Vec<Curve>> {
    rc_curves(params, alphas, t_grid, RcQuantity::Voltage, 1)
}

/// Which circuit quantity a curve carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcQuantity {
    Voltage,
    Charge,
}

impl RcQuantity {
    pub fn column_name(self) -> &'static str {
        match self {
            RcQuantity::Voltage => "V_C",
            RcQuantity::Charge => "q",
        }
    }
}

/// Curves of `quantity` for each order, spread over up to `workers` threads.
/// Output order follows `alphas` regardless of the worker count.
pub fn rc_curves(
    params: &RCParams,
    alphas: &[FractionalOrder],
    t_grid: &UniformGrid,
    quantity: RcQuantity,
    workers: usize,
) -> Result<Vec<Curve>> {
    if alphas.is_empty() {
        return Err(Error::Domain("at least one fractional order is required".into()));
    }
    if t_grid.t0() != 0.0 {
        return Err(Error::Domain(format!(
            "charging starts at t = 0 but the grid starts at {}",
            t_grid.t0()
        )));
    }
    let one = |order: &FractionalOrder| -> Result<Curve> {
        let rows = t_grid
            .nodes()
            .map(|t| {
                let v = match quantity {
                    RcQuantity::Voltage => capacitor_voltage(params, t, *order)?,
                    RcQuantity::Charge => charge_t(params, t, *order)?,
                };
                Ok((t, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Curve::new(
            format!("alpha={order}"),
            "t",
            quantity.column_name(),
            Some(order.value()),
            rows,
            DimExpr::DIMENSIONLESS,
        )
    };
    let workers = workers.clamp(1, alphas.len());
    if workers == 1 {
        return alphas.iter().map(one).collect();
    }
    let chunk = alphas.len().div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = alphas
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(one).collect::<Result<Vec<_>>>()))
            .collect();
        let mut curves = Vec::with_capacity(alphas.len());
        for h in handles {
            curves.extend(h.join().expect("curve worker panicked")?);
        }
        Ok(curves)
    })
}
