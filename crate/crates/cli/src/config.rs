//! Turns flags and the optional config file into a validated [`RunConfig`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fracdim::rc_circuit::RcQuantity;
use fracdim::{FractionalOrder, RCParams, UniformGrid};

use crate::args::{Cli, CommandArgs, ConfigFile, DerivativeArgs, KernelKind, QuantityKind, RcArgs, SolveArgs, VerifyArgs};
use crate::error::{CliError, CliResult};
use crate::functions::TestFunction;
use crate::problem::ProblemFile;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "FRACDIM_OUTPUT_DIR";

pub const DEFAULT_N: usize = 1001;
pub const DEFAULT_T_MAX: f64 = 5.0;
pub const DEFAULT_STEPS: usize = 4000;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_RC_ALPHAS: [f64; 4] = [0.5, 0.7, 0.9, 1.0];
/// Default end of the RC grid, in units of RC.
pub const DEFAULT_RC_SPAN: f64 = 8.0;
pub const DEFAULT_RC_N: usize = 801;
pub const DEFAULT_VERIFY_ALPHAS: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 1.0];
pub const DEFAULT_SEED: u64 = 20_160_301;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputTarget {
    Stdout,
    File(PathBuf),
}

impl OutputTarget {
    fn resolve(flag: Option<PathBuf>, dir: &Path, default_name: &str) -> Self {
        match flag {
            Some(p) if p.as_os_str() == "-" => OutputTarget::Stdout,
            Some(p) => OutputTarget::File(p),
            None => OutputTarget::File(dir.join(default_name)),
        }
    }

    pub fn write(&self, bytes: &[u8]) -> CliResult<()> {
        use std::io::Write;
        match self {
            OutputTarget::Stdout => {
                let mut out = std::io::stdout().lock();
                match out.write_all(bytes).and_then(|_| out.flush()) {
                    // a closed reader (e.g. `| head`) is not an error
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                    _ => {}
                }
            }
            OutputTarget::File(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| CliError::config(format!("{}: {e}", parent.display())))?;
                }
                std::fs::write(path, bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    Builtin { function: TestFunction, grid: UniformGrid },
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct DerivativeConfig {
    pub kernel: KernelKind,
    pub order: FractionalOrder,
    pub sigma: Option<f64>,
    pub source: Source,
    pub output: OutputTarget,
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub problem_path: PathBuf,
    pub problem: ProblemFile,
    pub order: FractionalOrder,
    pub tau_max: f64,
    pub steps: usize,
    pub tolerance: f64,
    pub output: OutputTarget,
}

#[derive(Debug, Clone)]
pub struct RcConfig {
    pub params: RCParams,
    pub orders: Vec<FractionalOrder>,
    pub grid: UniformGrid,
    pub quantity: RcQuantity,
    pub workers: usize,
    pub split: bool,
    pub output: OutputTarget,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub orders: Vec<FractionalOrder>,
    pub seed: u64,
    pub inject_fault: bool,
    pub output: OutputTarget,
}

#[derive(Debug, Clone)]
pub enum RunConfig {
    Derivative(DerivativeConfig),
    Solve(SolveConfig),
    Rc(RcConfig),
    Verify(VerifyConfig),
}

/// Resolves the final configuration. Precedence for every value is
/// flag, then config file, then built-in default; the output directory
/// additionally honours `env_output_dir` between the flag and the file.
pub fn resolve(cli: Cli, env_output_dir: Option<PathBuf>) -> CliResult<RunConfig> {
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    let dir = cli
        .output_dir
        .or(env_output_dir)
        .or(file.output_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(match cli.command {
        CommandArgs::Derivative(a) => RunConfig::Derivative(resolve_derivative(a.or(file.derivative), &dir)?),
        CommandArgs::Solve(a) => RunConfig::Solve(resolve_solve(a.or(file.solve), &dir)?),
        CommandArgs::Rc(a) => RunConfig::Rc(resolve_rc(a.or(file.rc), &dir)?),
        CommandArgs::Verify(a) => RunConfig::Verify(resolve_verify(a.or(file.verify))?),
    })
}

pub fn load_config(path: &Path) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn grid_from(t0: Option<f64>, dt: Option<f64>, t_max: Option<f64>, n: Option<usize>) -> CliResult<UniformGrid> {
    let t0 = t0.unwrap_or(0.0);
    let n = n.unwrap_or(DEFAULT_N);
    if n < 2 {
        return Err(CliError::config(format!("grid needs n >= 2, got {n}")));
    }
    let dt = match (dt, t_max) {
        (Some(_), Some(_)) => return Err(CliError::config("give either 'dt' or 't-max', not both")),
        (Some(dt), None) => dt,
        (None, t_max) => {
            let t_max = t_max.unwrap_or(DEFAULT_T_MAX);
            (t_max - t0) / (n - 1) as f64
        }
    };
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::config(format!("grid spacing must be positive, got {dt}")));
    }
    Ok(UniformGrid::new(t0, dt, n)?)
}

fn resolve_derivative(a: DerivativeArgs, dir: &Path) -> CliResult<DerivativeConfig> {
    let kernel = a.kernel.unwrap_or(KernelKind::Cf);
    let alpha = a.alpha.ok_or_else(|| CliError::missing("alpha"))?;
    let order = FractionalOrder::new(alpha)?;
    match (kernel, a.sigma) {
        (KernelKind::SigmaCaputo, None) => return Err(CliError::missing("sigma")),
        (KernelKind::Cf | KernelKind::Caputo, Some(_)) => {
            return Err(CliError::config(format!("'sigma' only applies to kernel sigma-caputo, not {}", kernel.name())))
        }
        _ => {}
    }
    let source = match (a.function, a.input) {
        (Some(_), Some(_)) => return Err(CliError::config("give either 'fn' or 'input', not both")),
        (None, None) => return Err(CliError::missing("fn' or 'input")),
        (Some(spec), None) => Source::Builtin {
            function: spec.parse()?,
            grid: grid_from(a.t0, a.dt, a.t_max, a.n)?,
        },
        (None, Some(path)) => {
            if a.t0.is_some() || a.dt.is_some() || a.t_max.is_some() || a.n.is_some() {
                return Err(CliError::config("grid flags do not apply to 'input'; the file defines the grid"));
            }
            Source::File(path)
        }
    };
    Ok(DerivativeConfig {
        kernel,
        order,
        sigma: a.sigma,
        source,
        output: OutputTarget::resolve(a.output, dir, "derivative.csv"),
    })
}

fn resolve_solve(a: SolveArgs, dir: &Path) -> CliResult<SolveConfig> {
    let problem_path = a.problem.ok_or_else(|| CliError::missing("problem"))?;
    let problem = ProblemFile::load(&problem_path)?;
    let alpha = a.alpha.or(problem.alpha).ok_or_else(|| CliError::missing("alpha"))?;
    let tau_max = a.tau_max.or(problem.tau_max).ok_or_else(|| CliError::missing("tau-max"))?;
    let steps = a.steps.or(problem.steps).unwrap_or(DEFAULT_STEPS);
    let tolerance = a.tolerance.or(problem.tolerance).unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::config(format!("tolerance must be positive, got {tolerance}")));
    }
    Ok(SolveConfig {
        order: FractionalOrder::new(alpha)?,
        problem_path,
        problem,
        tau_max,
        steps,
        tolerance,
        output: OutputTarget::resolve(a.output, dir, "solve.csv"),
    })
}

fn orders(alphas: &[f64]) -> CliResult<Vec<FractionalOrder>> {
    if alphas.is_empty() {
        return Err(CliError::missing("alpha"));
    }
    Ok(alphas.iter().map(|&a| FractionalOrder::new(a)).collect::<fracdim::Result<_>>()?)
}

fn resolve_rc(a: RcArgs, dir: &Path) -> CliResult<RcConfig> {
    let params = RCParams::new(a.r.unwrap_or(1.0), a.c.unwrap_or(1.0), a.v0.unwrap_or(1.0))?;
    let orders = orders(&a.alpha.unwrap_or_else(|| DEFAULT_RC_ALPHAS.to_vec()))?;
    let t_max = a.t_max.unwrap_or(DEFAULT_RC_SPAN / params.gamma());
    let grid = grid_from(None, None, Some(t_max), Some(a.n.unwrap_or(DEFAULT_RC_N)))?;
    let workers = a.workers.unwrap_or(1);
    if workers == 0 {
        return Err(CliError::config("workers must be at least 1"));
    }
    let output = OutputTarget::resolve(a.output, dir, "rc.csv");
    if a.split && output == OutputTarget::Stdout {
        return Err(CliError::config("'split' writes one file per order and cannot target stdout"));
    }
    Ok(RcConfig {
        params,
        orders,
        grid,
        quantity: match a.quantity.unwrap_or(QuantityKind::Voltage) {
            QuantityKind::Voltage => RcQuantity::Voltage,
            QuantityKind::Charge => RcQuantity::Charge,
        },
        workers,
        split: a.split,
        output,
    })
}

fn resolve_verify(a: VerifyArgs) -> CliResult<VerifyConfig> {
    Ok(VerifyConfig {
        orders: orders(&a.alpha.unwrap_or_else(|| DEFAULT_VERIFY_ALPHAS.to_vec()))?,
        seed: a.seed.unwrap_or(DEFAULT_SEED),
        inject_fault: a.inject_fault,
        output: match a.output {
            Some(p) if p.as_os_str() != "-" => OutputTarget::File(p),
            _ => OutputTarget::Stdout,
        },
    })
}

fn join_orders(orders: &[FractionalOrder]) -> String {
    orders.iter().map(|o| o.value().to_string()).collect::<Vec<_>>().join(";")
}

fn grid_text(g: &UniformGrid) -> String {
    format!("t0={} dt={} n={}", g.t0(), g.dt(), g.len())
}

impl RunConfig {
    /// The provenance line written at the top of every CSV: tool version,
    /// subcommand and the full resolved parameter set.
    pub fn provenance(&self) -> String {
        let mut s = format!("fracdim {} ", env!("CARGO_PKG_VERSION"));
        match self {
            RunConfig::Derivative(c) => {
                let _ = write!(s, "derivative kernel={} alpha={}", c.kernel.name(), c.order.value());
                if let Some(sigma) = c.sigma {
                    let _ = write!(s, " sigma={sigma}");
                }
                match &c.source {
                    Source::Builtin { function, grid } => {
                        let _ = write!(s, " fn={function} {}", grid_text(grid));
                    }
                    Source::File(p) => {
                        let _ = write!(s, " input={}", p.display());
                    }
                }
            }
            RunConfig::Solve(c) => {
                let _ = write!(
                    s,
                    "solve problem={} alpha={} tau-max={} steps={} tolerance={}",
                    c.problem_path.display(),
                    c.order.value(),
                    c.tau_max,
                    c.steps,
                    c.tolerance
                );
            }
            RunConfig::Rc(c) => {
                let _ = write!(
                    s,
                    "rc r={} c={} v0={} alpha={} {} quantity={}",
                    c.params.resistance(),
                    c.params.capacitance(),
                    c.params.v0(),
                    join_orders(&c.orders),
                    grid_text(&c.grid),
                    match c.quantity {
                        RcQuantity::Voltage => "voltage",
                        RcQuantity::Charge => "charge",
                    }
                );
                if c.split {
                    s.push_str(" split");
                }
            }
            RunConfig::Verify(c) => {
                let _ = write!(s, "verify alpha={} seed={}", join_orders(&c.orders), c.seed);
                if c.inject_fault {
                    s.push_str(" inject-fault");
                }
            }
        }
        s
    }
}
