use crate::dims::DimExpr;
use crate::error::{Error, Result};

/// A labelled series of `(abscissa, value)` rows, strictly increasing in the
/// abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub abscissa_name: String,
    pub value_name: String,
    /// Fractional order the series was computed for, if any.
    pub alpha: Option<f64>,
    rows: Vec<(f64, f64)>,
    pub dim: DimExpr,
}

impl Curve {
    pub fn new(
        label: impl Into<String>,
        abscissa_name: impl Into<String>,
        value_name: impl Into<String>,
        alpha: Option<f64>,
        rows: Vec<(f64, f64)>,
        dim: DimExpr,
    ) -> Result<Self> {
        if rows.windows(2).any(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::Input("curve abscissae must be strictly increasing".into()));
        }
        Ok(Curve {
            label: label.into(),
            abscissa_name: abscissa_name.into(),
            value_name: value_name.into(),
            alpha,
            rows,
            dim,
        })
    }

    pub fn rows(&self) -> &[(f64, f64)] {
        &self.rows
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.1)
    }

    pub fn first(&self) -> Option<(f64, f64)> {
        self.rows.first().copied()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        self.rows.last().copied()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}
