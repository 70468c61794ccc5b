use std::fs::File;

use fracdim::dims::{self, DimExpr, DimensionedQuantity, OperatorKind};
use fracdim::io::{read_sampled, write_columns, write_curves_long, write_sampled};
use fracdim::kernel_ops::{caputo_derivative, cf_derivative, sigma_rescaled_caputo};
use fracdim::linear_cf_solver::{cf_residual, solve_closed_form, solve_numeric};
use fracdim::rc_circuit::rc_curves;
use fracdim::SampledFunction;

use crate::args::KernelKind;
use crate::config::{DerivativeConfig, OutputTarget, RcConfig, RunConfig, SolveConfig, Source};
use crate::error::{CliError, CliResult, ExitStatus};
use crate::problem;

/// What a subcommand produced: bytes per output target, human readable
/// notes for stderr, and the exit status.
#[derive(Debug)]
pub struct Report {
    pub outputs: Vec<(OutputTarget, Vec<u8>)>,
    pub notes: Vec<String>,
    pub status: ExitStatus,
}

pub fn run(config: &RunConfig) -> CliResult<Report> {
    let provenance = vec![config.provenance()];
    match config {
        RunConfig::Derivative(c) => run_derivative(c, provenance),
        RunConfig::Solve(c) => run_solve(c, provenance),
        RunConfig::Rc(c) => run_rc(c, provenance),
        RunConfig::Verify(c) => Ok(crate::verify::run_verify(c)),
    }
}

pub fn run_derivative(config: &DerivativeConfig, provenance: Vec<String>) -> CliResult<Report> {
    let input = match &config.source {
        Source::Builtin { function, grid } => {
            SampledFunction::from_fn(*grid, DimExpr::DIMENSIONLESS, |t| function.eval(t))?
        }
        Source::File(path) => {
            let file = File::open(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            read_sampled(file, DimExpr::DIMENSIONLESS).map_err(|e| {
                let mut err = CliError::from(e);
                err.message = format!("{}: {}", path.display(), err.message);
                err
            })?
        }
    };
    let (result, kind) = match config.kernel {
        KernelKind::Cf => (cf_derivative(&input, config.order)?, OperatorKind::CaputoFabrizio),
        KernelKind::Caputo => (caputo_derivative(&input, config.order)?, OperatorKind::Caputo),
        KernelKind::SigmaCaputo => {
            let sigma = config.sigma.ok_or_else(|| CliError::missing("sigma"))?;
            (
                sigma_rescaled_caputo(&input, config.order, DimensionedQuantity::seconds(sigma))?,
                OperatorKind::SigmaRescaledCaputo,
            )
        }
    };
    let mut output = Vec::new();
    write_sampled(&mut output, &result, &provenance)?;
    let notes = vec![format!(
        "dimension: input {} ; {} operator {} ; output {} (alpha = {})",
        input.dim(),
        kind.name(),
        dims::dim_of_operator(kind),
        result.dim(),
        config.order
    )];
    Ok(Report {
        outputs: vec![(config.output.clone(), output)],
        notes,
        status: ExitStatus::Success,
    })
}

pub fn run_solve(config: &SolveConfig, mut provenance: Vec<String>) -> CliResult<Report> {
    if config.steps < 16 {
        return Err(CliError::config(format!("steps must be at least 16, got {}", config.steps)));
    }
    let base_dir = config.problem_path.parent().unwrap_or(std::path::Path::new("."));
    let built = problem::build(&config.problem.equation, config.order, config.tau_max, base_dir)?;
    let closed = solve_closed_form(&built.problem)?.sample(config.steps)?;
    let numeric = solve_numeric(&built.problem, config.steps)?;
    let residual = cf_residual(&built.problem, &closed)?;
    let discrepancy = closed.max_abs_diff(&numeric, 0);

    let taus: Vec<f64> = closed.grid().nodes().collect();
    let mut headers = vec!["tau", "closed_form", "numeric", "cf_residual"];
    let mut columns: Vec<&[f64]> = vec![&taus, closed.values(), numeric.values(), residual.values()];
    let reference_values;
    let mut notes = Vec::new();
    if let Some(reference) = &built.reference {
        reference_values = taus.iter().map(|&t| reference(t)).collect::<CliResult<Vec<f64>>>()?;
        let err = reference_values
            .iter()
            .zip(closed.values())
            .map(|(r, x)| (r - x).abs())
            .fold(0.0, f64::max);
        notes.push(format!("max |closed_form - reference| = {err:.3e}"));
        headers.push("reference");
        columns.push(&reference_values);
    }
    let summary = format!(
        "max |closed_form - numeric| = {discrepancy:.6e} (tolerance {:e}); |cf_residual(0)| = {:.6e}",
        config.tolerance,
        residual.values()[0].abs()
    );
    provenance.push(summary.clone());
    notes.insert(0, summary);

    let mut output = Vec::new();
    write_columns(&mut output, &headers, &columns, &provenance)?;
    let status = if discrepancy <= config.tolerance {
        ExitStatus::Success
    } else {
        notes.push("discrepancy exceeds tolerance".into());
        ExitStatus::VerificationFailed
    };
    Ok(Report {
        outputs: vec![(config.output.clone(), output)],
        notes,
        status,
    })
}

pub fn run_rc(config: &RcConfig, provenance: Vec<String>) -> CliResult<Report> {
    let curves = rc_curves(&config.params, &config.orders, &config.grid, config.quantity, config.workers)?;
    let outputs = if config.split {
        let OutputTarget::File(path) = &config.output else {
            return Err(CliError::config("'split' needs a file output"));
        };
        let stem = path.file_stem().map_or_else(|| "rc".into(), |s| s.to_string_lossy().into_owned());
        curves
            .iter()
            .map(|c| {
                let alpha = c.alpha.unwrap_or(f64::NAN);
                let target = OutputTarget::File(path.with_file_name(format!("{stem}_alpha{alpha}.csv")));
                let (ts, vs): (Vec<f64>, Vec<f64>) = c.rows().iter().copied().unzip();
                let mut bytes = Vec::new();
                write_columns(&mut bytes, &[&c.abscissa_name, &c.value_name], &[&ts, &vs], &provenance)?;
                Ok((target, bytes))
            })
            .collect::<CliResult<Vec<_>>>()?
    } else {
        let mut bytes = Vec::new();
        write_curves_long(&mut bytes, &curves, &provenance)?;
        vec![(config.output.clone(), bytes)]
    };
    let notes = curves
        .iter()
        .filter_map(|c| {
            let (t, v) = c.last()?;
            Some(format!(
                "{}: {} = {v:.6e} at t = {t} ({} of asymptote)",
                c.label,
                c.value_name,
                match config.quantity {
                    fracdim::rc_circuit::RcQuantity::Voltage => format!("{:.6}", v / config.params.v0()),
                    fracdim::rc_circuit::RcQuantity::Charge => format!("{:.6}", v / config.params.q0()),
                }
            ))
        })
        .collect();
    Ok(Report {
        outputs,
        notes,
        status: ExitStatus::Success,
    })
}
