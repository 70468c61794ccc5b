//! The `verify` suite: operator properties, closed-form oracles, time-map
//! round trips, RC reproduction and dimensional checks, each reported as a
//! pass/fail line.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fracdim::dims::{self, check_homogeneity, dim_of_operator, DimExpr, OperatorKind};
use fracdim::io::write_curves_long;
use fracdim::kernel_ops::{
    cf_derivative_direct, cf_derivative_with, cf_laplace_residual_with, cf_limit_alpha_zero, discrete_derivative,
    linearity_scale, KernelNormalization,
};
use fracdim::linear_cf_solver::{cf_residual, solve_closed_form, solve_numeric};
use fracdim::rc_circuit::{self, charge_t, charge_tau, initial_condition_constant, rc_curves, rc_time_scale, RcQuantity};
use fracdim::rescaling::rescale_problem;
use fracdim::{Coefficient, FractionalOrder, LinearFDEProblem, RCParams, SampledFunction, TimeScale, UniformGrid};

use crate::config::{VerifyConfig, DEFAULT_RC_ALPHAS};
use crate::error::ExitStatus;
use crate::run::Report;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            passed: value < tol,
            detail: format!("{value:.3e} < {tol:e}"),
        }
    }

    fn from_result(name: impl Into<String>, r: fracdim::Result<Check>) -> Self {
        let name = name.into();
        match r {
            Ok(check) => Check { name, ..check },
            Err(e) => Check {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        }
    }

    pub fn line(&self) -> String {
        format!("{} {} ({})", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn tagged(name: &str, order: FractionalOrder) -> String {
    format!("{name}[alpha={order}]")
}

fn sample(t_max: f64, n: usize, f: impl Fn(f64) -> f64) -> fracdim::Result<SampledFunction> {
    SampledFunction::from_fn(UniformGrid::from_span(t_max, n)?, DimExpr::DIMENSIONLESS, f)
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Every check of the suite, in report order.
pub fn checks(config: &VerifyConfig) -> Vec<Check> {
    let norm = if config.inject_fault {
        KernelNormalization::scaled(1.01)
    } else {
        KernelNormalization::default()
    };
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    for &order in &config.orders {
        let fractional = !order.is_classical();
        out.push(Check::from_result(tagged("cf-oracle", order), cf_oracle(order, &norm)));
        out.push(Check::from_result(tagged("constant", order), constant(order, &norm, &mut rng)));
        out.push(Check::from_result(tagged("linearity", order), linearity(order, &norm, &mut rng)));
        out.push(Check::from_result(tagged("laplace", order), laplace(order, &norm)));
        if fractional {
            out.push(Check::from_result(tagged("recurrence-vs-direct", order), recurrence(order, &norm)));
        }
        out.push(Check::from_result(tagged("tau-round-trip", order), tau_round_trip(order)));
        out.push(Check::from_result(tagged("tau-derivative", order), tau_derivative(order)));
        out.push(Check::from_result(tagged("solver-oracle", order), solver_oracle(order)));
        out.push(Check::from_result(tagged("solver-convergence", order), solver_convergence(order)));
        out.push(Check::from_result(tagged("rc-origin", order), rc_origin(order)));
        out.push(Check::from_result(tagged("rc-pipeline", order), rc_pipeline(order)));
        if !fractional {
            out.push(Check::from_result(tagged("rc-classical", order), rc_classical()));
        }
    }
    out.push(Check::from_result("limit-alpha-to-0", limit_to_zero(&norm)));
    out.push(Check::from_result("limit-alpha-to-1", limit_to_one(&norm)));
    out.push(Check::from_result("rc-residual[alpha=0.5]", rc_residual()));
    out.extend(homogeneity());
    out.push(Check::from_result("rc-determinism", determinism()));
    out
}

pub fn run_verify(config: &VerifyConfig) -> Report {
    let results = checks(config);
    let failed = results.iter().filter(|c| !c.passed).count();
    let mut text = String::new();
    for c in &results {
        text.push_str(&c.line());
        text.push('\n');
    }
    text.push_str(&format!("{} passed, {} failed\n", results.len() - failed, failed));
    Report {
        outputs: vec![(config.output.clone(), text.into_bytes())],
        notes: Vec::new(),
        status: if failed == 0 {
            ExitStatus::Success
        } else {
            ExitStatus::VerificationFailed
        },
    }
}

/// f(t) = t on [0, 5]: D f = (1/α)(1 - e^{-λt}), and 1 at α = 1.
fn cf_oracle(order: FractionalOrder, norm: &KernelNormalization) -> fracdim::Result<Check> {
    let f = sample(5.0, 10_001, |t| t)?;
    let d = cf_derivative_with(&f, order, norm)?;
    let a = order.value();
    let err = d
        .iter()
        .map(|(t, v)| {
            let exact = if order.is_classical() {
                1.0
            } else {
                -(-order.decay_rate() * t).exp_m1() / a
            };
            (v - exact).abs()
        })
        .fold(0.0, f64::max);
    Ok(Check::below("", err, 1e-6))
}

fn random_smooth(rng: &mut StdRng) -> impl Fn(f64) -> f64 {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.1..4.0), rng.gen_range(0.0..6.3)))
        .collect();
    let quad = rng.gen_range(-0.5..0.5);
    move |t| quad * t * t + terms.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum::<f64>()
}

fn constant(order: FractionalOrder, norm: &KernelNormalization, rng: &mut StdRng) -> fracdim::Result<Check> {
    let c = rng.gen_range(-100.0..100.0);
    let d = cf_derivative_with(&sample(5.0, 2001, |_| c)?, order, norm)?;
    let nonzero = d.values().iter().filter(|v| **v != 0.0).count();
    Ok(Check {
        name: String::new(),
        passed: nonzero == 0,
        detail: format!("c = {c:.6}, {nonzero} nonzero samples"),
    })
}

fn linearity(order: FractionalOrder, norm: &KernelNormalization, rng: &mut StdRng) -> fracdim::Result<Check> {
    let f = sample(5.0, 2001, random_smooth(rng))?;
    let g = sample(5.0, 2001, random_smooth(rng))?;
    let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
    let lhs = cf_derivative_with(&f.linear_combination(a, &g, b)?, order, norm)?;
    let rhs = cf_derivative_with(&f, order, norm)?.linear_combination(a, &cf_derivative_with(&g, order, norm)?, b)?;
    let tol = 10.0 * f64::EPSILON * linearity_scale(&f, a, &g, b, order);
    let err = lhs.max_abs_diff(&rhs, 0);
    Ok(Check {
        name: String::new(),
        passed: err <= tol,
        detail: format!("{err:.3e} <= {tol:.3e}"),
    })
}

/// (t, s = 2, T = 30) and (e^{-t}, s = 1.5, T = 40). At α = 1 the derivative
/// is a backward difference, first order, so only the linear input applies.
fn laplace(order: FractionalOrder, norm: &KernelNormalization) -> fracdim::Result<Check> {
    let r1 = cf_laplace_residual_with(&sample(30.0, 60_001, |t| t)?, order, 2.0, norm)?;
    let r2 = if order.is_classical() {
        0.0
    } else {
        cf_laplace_residual_with(&sample(40.0, 80_001, |t| (-t).exp())?, order, 1.5, norm)?
    };
    Ok(Check::below("", r1.max(r2), 1e-6))
}

fn recurrence(order: FractionalOrder, norm: &KernelNormalization) -> fracdim::Result<Check> {
    let f = sample(10.0, 2000, |t| t.cos() * (-0.1 * t).exp() + t)?;
    let fast = cf_derivative_with(&f, order, norm)?;
    let slow = cf_derivative_direct(&f, order)?;
    Ok(Check::below("", fast.max_abs_diff(&slow, 0) / sup(slow.values()), 1e-12))
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
}

fn tau_round_trip(order: FractionalOrder) -> fracdim::Result<Check> {
    let gamma = 1.0;
    let closed = TimeScale::rc_exponential(gamma)?;
    let generic = TimeScale::new("rc-by-quadrature", move |t, a| (-(1.0 - a) * gamma * t).exp() / gamma);
    let mut err = 0.0f64;
    for t in log_spaced(1e-3 / gamma, 10.0 / gamma, 100) {
        for scale in [&closed, &generic] {
            let back = scale.t_of_tau(scale.tau_of_t(t, order)?, order)?;
            err = err.max((back - t).abs());
        }
    }
    Ok(Check::below("", err, 1e-9))
}

fn tau_derivative(order: FractionalOrder) -> fracdim::Result<Check> {
    let scale = TimeScale::rc_exponential(1.0)?;
    let mut err = 0.0f64;
    for t in log_spaced(1e-2, 10.0, 40) {
        let h = 1e-5 * t;
        let fd = (scale.tau_of_t(t + h, order)? - scale.tau_of_t(t - h, order)?) / (2.0 * h);
        let inv_phi = 1.0 / scale.phi(t, order);
        err = err.max((fd - inv_phi).abs() / inv_phi);
    }
    Ok(Check::below("", err, 1e-6))
}

fn constant_problem(order: FractionalOrder) -> fracdim::Result<LinearFDEProblem> {
    LinearFDEProblem::new(Coefficient::constant(1.0), Coefficient::constant(1.0), order, 0.0, 5.0)
}

/// x = 1 - exp(-α τ / (2 - α)) for P = Q = 1, x(0) = 0.
fn constant_oracle(order: FractionalOrder, tau: f64) -> f64 {
    let a = order.value();
    -(-a * tau / (2.0 - a)).exp_m1()
}

fn solver_oracle(order: FractionalOrder) -> fracdim::Result<Check> {
    let prob = constant_problem(order)?;
    let closed = solve_closed_form(&prob)?.sample(4000)?;
    let numeric = solve_numeric(&prob, 4000)?;
    let err = closed
        .iter()
        .zip(numeric.values())
        .map(|((tau, c), n)| (c - constant_oracle(order, tau)).abs().max((n - constant_oracle(order, tau)).abs()))
        .fold(0.0, f64::max);
    Ok(Check::below("", err, 1e-6))
}

fn solver_convergence(order: FractionalOrder) -> fracdim::Result<Check> {
    let prob = constant_problem(order)?;
    let err = |steps: usize| -> fracdim::Result<f64> {
        let x = solve_numeric(&prob, steps)?;
        Ok(x.iter().map(|(tau, v)| (v - constant_oracle(order, tau)).abs()).fold(0.0, f64::max))
    };
    let ratio = err(20)? / err(40)?;
    Ok(Check {
        name: String::new(),
        passed: (12.0..=20.0).contains(&ratio),
        detail: format!("error ratio {ratio:.3} in [12, 20]"),
    })
}

fn unit_rc() -> fracdim::Result<RCParams> {
    RCParams::new(1.0, 1.0, 1.0)
}

fn rc_origin(order: FractionalOrder) -> fracdim::Result<Check> {
    let q = charge_t(&unit_rc()?, 0.0, order)?;
    Ok(Check {
        name: String::new(),
        passed: q == 0.0,
        detail: format!("q(0) = {q:e}"),
    })
}

fn rc_classical() -> fracdim::Result<Check> {
    let params = unit_rc()?;
    let mut err = 0.0f64;
    for k in 0..=1000 {
        let t = 0.01 * k as f64;
        let exact = -params.q0() * (-params.gamma() * t).exp_m1();
        err = err.max((charge_t(&params, t, FractionalOrder::ONE)? - exact).abs());
    }
    Ok(Check::below("", err, 4.0 * f64::EPSILON))
}

/// charge_t against rescale → closed form → inverse time map (1e-8) and
/// against the numeric solution of the rescaled problem (1e-6).
fn rc_pipeline(order: FractionalOrder) -> fracdim::Result<Check> {
    let params = unit_rc()?;
    let scale = rc_time_scale(&params);
    let ts: Vec<f64> = (0..=100).map(|k| 0.05 * k as f64).collect();
    let taus = ts.iter().map(|&t| scale.tau_of_t(t, order)).collect::<fracdim::Result<Vec<_>>>()?;
    let tau_max = *taus.last().unwrap_or(&1.0);
    let prob = rescale_problem(&params.classical_ode(), &scale, order, tau_max)?;
    let xs = solve_closed_form(&prob)?.evaluate_sorted(&taus)?;
    let mut closed_err = 0.0f64;
    for (t, x) in ts.iter().zip(xs) {
        closed_err = closed_err.max((x - charge_t(&params, *t, order)?).abs());
    }
    let numeric = solve_numeric(&rc_circuit::rc_problem(&params, order, tau_max)?, 4000)?;
    let c0 = initial_condition_constant(&params, order);
    let mut numeric_err = 0.0f64;
    for (tau, x) in numeric.iter() {
        numeric_err = numeric_err.max((x - charge_tau(&params, tau, order, c0)?).abs());
    }
    Ok(Check {
        name: String::new(),
        passed: closed_err < 1e-8 && numeric_err < 1e-6,
        detail: format!("closed form {closed_err:.3e} < 1e-8, numeric {numeric_err:.3e} < 1e-6"),
    })
}

fn limit_to_zero(norm: &KernelNormalization) -> fracdim::Result<Check> {
    let f = sample(3.0, 3001, |t| (1.3 * t).sin() + 0.2 * t * t)?;
    let target = cf_limit_alpha_zero(&f);
    let d = [0.1, 0.01, 0.001]
        .iter()
        .map(|&a| Ok(cf_derivative_with(&f, FractionalOrder::new(a)?, norm)?.max_abs_diff(&target, 0)))
        .collect::<fracdim::Result<Vec<_>>>()?;
    Ok(monotone(&d))
}

/// The node t = 0 is left out: the fractional derivative vanishes there for
/// every α < 1 while the discrete derivative does not.
fn limit_to_one(norm: &KernelNormalization) -> fracdim::Result<Check> {
    let f = sample(3.0, 3001, |t| (1.3 * t).sin() + 0.2 * t * t)?;
    let target = SampledFunction::new(*f.grid(), discrete_derivative(&f), f.dim())?;
    let d = [0.9, 0.99, 0.999]
        .iter()
        .map(|&a| Ok(cf_derivative_with(&f, FractionalOrder::new(a)?, norm)?.max_abs_diff(&target, 1)))
        .collect::<fracdim::Result<Vec<_>>>()?;
    Ok(monotone(&d))
}

fn monotone(d: &[f64]) -> Check {
    Check {
        name: String::new(),
        passed: d.windows(2).all(|w| w[1] < w[0]),
        detail: format!(
            "distances {}",
            d.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" > ")
        ),
    }
}

/// Residual of the exact RC solution: -q0 at τ = 0, decaying afterwards.
fn rc_residual() -> fracdim::Result<Check> {
    let params = unit_rc()?;
    let order = FractionalOrder::new(0.5)?;
    let grid = UniformGrid::from_span(40.0, 8001)?;
    let x = rc_circuit::charge_on_tau_grid(&params, order, grid)?;
    let r = cf_residual(&rc_circuit::rc_problem(&params, order, 40.0)?, &x)?;
    let r0 = r.values()[0].abs();
    let tail = r.iter().filter(|(tau, _)| *tau >= 20.0).map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let q0 = params.q0();
    Ok(Check {
        name: String::new(),
        passed: (r0 - q0).abs() <= 1e-12 * q0 && tail < 1e-3 * q0,
        detail: format!("|r(0)| = {r0:.6e} (q0 = {q0}), max |r(tau >= 20)| = {tail:.3e} < 1e-3 q0"),
    })
}

fn homogeneity() -> Vec<Check> {
    let x = DimExpr::DIMENSIONLESS;
    let sigma_rule = dim_of_operator(OperatorKind::SigmaRescaledCaputo);
    let cf = dim_of_operator(OperatorKind::CaputoFabrizio);
    let rescaled = dims::rescaled_cf_terms(x);
    let naive = dims::naive_caputo_terms(x);
    vec![
        Check {
            name: "dims-sigma-rule".into(),
            passed: sigma_rule == DimExpr::seconds(-1),
            detail: format!("sigma^(alpha-1) D^alpha has dimension {sigma_rule}"),
        },
        Check {
            name: "dims-cf-operator".into(),
            passed: cf == DimExpr::DIMENSIONLESS,
            detail: format!("operator in dimensionless time has dimension {cf}"),
        },
        Check {
            name: "dims-rescaled-equation".into(),
            passed: check_homogeneity(&rescaled) && rescaled.iter().all(DimExpr::is_dimensionless),
            detail: format!(
                "terms {}",
                rescaled.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
            ),
        },
        Check {
            name: "dims-naive-caputo-rejected".into(),
            passed: !check_homogeneity(&naive),
            detail: format!(
                "terms {}",
                naive.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
            ),
        },
    ]
}

fn determinism() -> fracdim::Result<Check> {
    let params = unit_rc()?;
    let orders = DEFAULT_RC_ALPHAS
        .iter()
        .map(|&a| FractionalOrder::new(a))
        .collect::<fracdim::Result<Vec<_>>>()?;
    let grid = UniformGrid::from_span(8.0, 401)?;
    let render = |workers: usize| -> fracdim::Result<Vec<u8>> {
        let curves = rc_curves(&params, &orders, &grid, RcQuantity::Voltage, workers)?;
        let mut buf = Vec::new();
        write_curves_long(&mut buf, &curves, &[])?;
        Ok(buf)
    };
    let one = render(1)?;
    let again = render(1)?;
    let threaded = render(4)?;
    Ok(Check {
        name: String::new(),
        passed: one == again && one == threaded,
        detail: format!("{} bytes, identical across reruns and worker counts", one.len()),
    })
}
