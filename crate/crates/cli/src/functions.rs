use std::fmt;
use std::str::FromStr;

use crate::error::CliError;

/// Elementary functions for `derivative --fn`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Const(f64),
    Linear,
    Square,
    Exp(f64),
    Sin(f64),
}

impl TestFunction {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            TestFunction::Const(c) => c,
            TestFunction::Linear => t,
            TestFunction::Square => t * t,
            TestFunction::Exp(k) => (k * t).exp(),
            TestFunction::Sin(w) => (w * t).sin(),
        }
    }
}

impl FromStr for TestFunction {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64, CliError> {
            let a = a.ok_or_else(|| CliError::config(format!("function '{name}' needs a parameter, e.g. {name}:1")))?;
            a.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::config(format!("bad parameter '{a}' for function '{name}'")))
        };
        match (name, arg) {
            ("const", a) => Ok(TestFunction::Const(number(a)?)),
            ("exp", a) => Ok(TestFunction::Exp(number(a)?)),
            ("sin", a) => Ok(TestFunction::Sin(number(a)?)),
            ("t", None) => Ok(TestFunction::Linear),
            ("t2", None) => Ok(TestFunction::Square),
            _ => Err(CliError::config(format!(
                "unknown function '{s}'; expected const:C, t, t2, exp:K or sin:W"
            ))),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Const(c) => write!(f, "const:{c}"),
            TestFunction::Linear => f.write_str("t"),
            TestFunction::Square => f.write_str("t2"),
            TestFunction::Exp(k) => write!(f, "exp:{k}"),
            TestFunction::Sin(w) => write!(f, "sin:{w}"),
        }
    }
}
