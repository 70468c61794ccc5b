//! Problem files for `solve`.
//!
//! ```toml
//! alpha = 0.6
//! tau-max = 5.0
//! steps = 4000
//!
//! [equation]
//! kind = "fractional"   # or "rescaled", "rc"
//! p = 1.0               # a number, or { amplitude = A, slope = S } for A/(1 + S tau)
//! q = 1.0
//! x0 = 0.0
//! ```
//!
//! A `rescaled` equation takes the classical constants `p`, `q`, `x0` and a
//! `[equation.scale]` table with `name = "constant"` (`sigma`),
//! `"rc-exponential"` (`gamma`) or `"tabulated"` (`path` to a `t,phi` CSV,
//! relative to the problem file). An `rc` equation takes `r`, `c`, `v0`.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use fracdim::rc_circuit::{self, initial_condition_constant};
use fracdim::rescaling::rescale_problem;
use fracdim::{ClassicalLinearODE, Coefficient, FractionalOrder, LinearFDEProblem, RCParams, TimeScale};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ProblemFile {
    pub alpha: Option<f64>,
    pub tau_max: Option<f64>,
    pub steps: Option<usize>,
    pub tolerance: Option<f64>,
    pub equation: EquationSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EquationSpec {
    Fractional {
        p: CoefficientSpec,
        q: CoefficientSpec,
        #[serde(default)]
        x0: f64,
    },
    Rescaled {
        p: f64,
        q: f64,
        #[serde(default)]
        x0: f64,
        scale: ScaleSpec,
    },
    Rc {
        #[serde(default = "one")]
        r: f64,
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "one")]
        v0: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    ReciprocalLinear { amplitude: f64, slope: f64 },
}

impl CoefficientSpec {
    fn build(&self) -> Coefficient {
        match *self {
            CoefficientSpec::Constant(c) => Coefficient::constant(c),
            CoefficientSpec::ReciprocalLinear { amplitude, slope } => Coefficient::reciprocal_linear(amplitude, slope),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ScaleSpec {
    Constant { sigma: f64 },
    RcExponential { gamma: f64 },
    Tabulated { path: PathBuf },
}

impl ScaleSpec {
    fn build(&self, base_dir: &Path) -> CliResult<TimeScale> {
        Ok(match self {
            ScaleSpec::Constant { sigma } => TimeScale::constant(*sigma)?,
            ScaleSpec::RcExponential { gamma } => TimeScale::rc_exponential(*gamma)?,
            ScaleSpec::Tabulated { path } => {
                let full = base_dir.join(path);
                let file = File::open(&full).map_err(|e| CliError::config(format!("{}: {e}", full.display())))?;
                let (ts, phis) = fracdim::io::read_pairs(file)?;
                TimeScale::tabulated(ts, phis)?
            }
        })
    }
}

impl ProblemFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

/// A problem ready to solve, with an exact reference when one is known.
pub struct BuiltProblem {
    pub problem: LinearFDEProblem,
    pub reference: Option<Box<dyn Fn(f64) -> CliResult<f64>>>,
}

pub fn build(spec: &EquationSpec, order: FractionalOrder, tau_max: f64, base_dir: &Path) -> CliResult<BuiltProblem> {
    match spec {
        EquationSpec::Fractional { p, q, x0 } => Ok(BuiltProblem {
            problem: LinearFDEProblem::new(p.build(), q.build(), order, *x0, tau_max)?,
            reference: None,
        }),
        EquationSpec::Rescaled { p, q, x0, scale } => {
            let ode = ClassicalLinearODE::new(*p, *q, *x0)?;
            let scale = scale.build(base_dir)?;
            Ok(BuiltProblem {
                problem: rescale_problem(&ode, &scale, order, tau_max)?,
                reference: None,
            })
        }
        EquationSpec::Rc { r, c, v0 } => {
            let params = RCParams::new(*r, *c, *v0)?;
            let c0 = initial_condition_constant(&params, order);
            Ok(BuiltProblem {
                problem: rc_circuit::rc_problem(&params, order, tau_max)?,
                reference: Some(Box::new(move |tau| Ok(rc_circuit::charge_tau(&params, tau, order, c0)?))),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_equation_kind() {
        let text = r#"
            alpha = 0.6
            tau-max = 5.0
            [equation]
            kind = "fractional"
            p = 1.0
            q = { amplitude = 2.0, slope = 0.5 }
        "#;
        let f: ProblemFile = toml::from_str(text).unwrap();
        assert!(matches!(
            f.equation,
            EquationSpec::Fractional { q: CoefficientSpec::ReciprocalLinear { .. }, x0, .. } if x0 == 0.0
        ));

        let text = r#"
            [equation]
            kind = "rescaled"
            p = 2.0
            q = 1.0
            scale = { name = "rc-exponential", gamma = 2.0 }
        "#;
        let f: ProblemFile = toml::from_str(text).unwrap();
        assert!(matches!(f.equation, EquationSpec::Rescaled { scale: ScaleSpec::RcExponential { .. }, .. }));

        let f: ProblemFile = toml::from_str("[equation]\nkind = \"rc\"\nc = 2.0\n").unwrap();
        assert!(matches!(f.equation, EquationSpec::Rc { r, c, v0 } if r == 1.0 && c == 2.0 && v0 == 1.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ProblemFile>("alpah = 0.5\n[equation]\nkind = \"rc\"\n").is_err());
        assert!(toml::from_str::<ProblemFile>("[equation]\nkind = \"bogus\"\n").is_err());
    }
}
