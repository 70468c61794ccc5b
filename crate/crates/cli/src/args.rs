//! Command-line flags. Each flag may also be given in the `--config` TOML
//! file, under a table named after the subcommand; flags win.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "fracdim", version, about = "Fractional derivatives, rescaled linear equations and the fractional RC circuit")]
pub struct Cli {
    /// TOML file supplying values for any flag
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for outputs written under their default names
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Differentiate a built-in test function or a sampled CSV input
    Derivative(DerivativeArgs),
    /// Solve a linear fractional problem in closed form and numerically
    Solve(SolveArgs),
    /// Charging curves of the fractional RC circuit for a sweep of orders
    Rc(RcArgs),
    /// Run the property and oracle suite
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// Caputo-Fabrizio (exponential kernel)
    Cf,
    /// Caputo (power-law kernel, L1 scheme)
    Caputo,
    /// Caputo rescaled by sigma^(alpha-1)
    SigmaCaputo,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Cf => "cf",
            KernelKind::Caputo => "caputo",
            KernelKind::SigmaCaputo => "sigma-caputo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityKind {
    Voltage,
    Charge,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct DerivativeArgs {
    #[arg(long, value_enum)]
    pub kernel: Option<KernelKind>,
    /// Order in (0, 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Time constant in seconds, required by sigma-caputo
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Built-in function: const:C, t, t2, exp:K or sin:W
    #[arg(long = "fn", value_name = "SPEC")]
    #[serde(rename = "fn")]
    pub function: Option<String>,
    /// CSV with `t,value` rows on a uniform grid
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Output file, or `-` for stdout
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolveArgs {
    /// Problem description (TOML)
    #[arg(long, value_name = "FILE")]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Number of steps for the sampled solutions
    #[arg(long)]
    pub steps: Option<usize>,
    /// Largest accepted closed-form/numeric discrepancy
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RcArgs {
    /// Resistance in ohms
    #[arg(long)]
    pub r: Option<f64>,
    /// Capacitance in farads
    #[arg(long)]
    pub c: Option<f64>,
    /// Source voltage in volts
    #[arg(long)]
    pub v0: Option<f64>,
    /// Comma-separated orders
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// End of the time grid in seconds (default 8 RC)
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub quantity: Option<QuantityKind>,
    /// Threads used for the sweep over orders
    #[arg(long)]
    pub workers: Option<usize>,
    /// One `t,<quantity>` file per order instead of a single long-format file
    #[arg(long)]
    pub split: bool,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Restrict order-dependent checks to these orders
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Seed for the randomised checks
    #[arg(long)]
    pub seed: Option<u64>,
    /// Scale M(alpha) by 1.01 to confirm that the suite catches it
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    /// Report file, or `-` for stdout (the default)
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub output_dir: Option<PathBuf>,
    pub derivative: DerivativeArgs,
    pub solve: SolveArgs,
    pub rc: RcArgs,
    pub verify: VerifyArgs,
}

impl DerivativeArgs {
    pub fn or(self, base: Self) -> Self {
        DerivativeArgs {
            kernel: self.kernel.or(base.kernel),
            alpha: self.alpha.or(base.alpha),
            sigma: self.sigma.or(base.sigma),
            function: self.function.or(base.function),
            input: self.input.or(base.input),
            t0: self.t0.or(base.t0),
            dt: self.dt.or(base.dt),
            t_max: self.t_max.or(base.t_max),
            n: self.n.or(base.n),
            output: self.output.or(base.output),
        }
    }
}

impl SolveArgs {
    pub fn or(self, base: Self) -> Self {
        SolveArgs {
            problem: self.problem.or(base.problem),
            alpha: self.alpha.or(base.alpha),
            tau_max: self.tau_max.or(base.tau_max),
            steps: self.steps.or(base.steps),
            tolerance: self.tolerance.or(base.tolerance),
            output: self.output.or(base.output),
        }
    }
}

impl RcArgs {
    pub fn or(self, base: Self) -> Self {
        RcArgs {
            r: self.r.or(base.r),
            c: self.c.or(base.c),
            v0: self.v0.or(base.v0),
            alpha: self.alpha.or(base.alpha),
            t_max: self.t_max.or(base.t_max),
            n: self.n.or(base.n),
            quantity: self.quantity.or(base.quantity),
            workers: self.workers.or(base.workers),
            split: self.split || base.split,
            output: self.output.or(base.output),
        }
    }
}

impl VerifyArgs {
    pub fn or(self, base: Self) -> Self {
        VerifyArgs {
            alpha: self.alpha.or(base.alpha),
            seed: self.seed.or(base.seed),
            inject_fault: self.inject_fault || base.inject_fault,
            output: self.output.or(base.output),
        }
    }
}
