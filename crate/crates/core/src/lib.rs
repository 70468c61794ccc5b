//! Fractional calculus with the non-singular Caputo-Fabrizio kernel.
//!
//! The crate evaluates Caputo and Caputo-Fabrizio derivatives on sampled
//! data, tracks the time dimension of every operator, rescales time so that
//! a fractional equation keeps the units of its classical counterpart, and
//! solves first-order linear Caputo-Fabrizio equations in closed form and
//! numerically. The fractional RC charging circuit is provided as a worked
//! model.

pub mod curve;
pub mod dims;
pub mod error;
pub mod io;
pub mod kernel_ops;
pub mod linear_cf_solver;
pub mod quadrature;
pub mod rc_circuit;
pub mod rescaling;

pub use dims::{check_homogeneity, dim_of_operator, DimExpr, DimensionedQuantity, OperatorKind, TimeExponent};
pub use error::{Error, Result};
pub use kernel_ops::{FractionalOrder, KernelNormalization, SampledFunction, UniformGrid};
pub use linear_cf_solver::{ClosedFormSolution, Coefficient, LinearFDEProblem, ReducedODE};
pub use rc_circuit::RCParams;
pub use rescaling::{ClassicalLinearODE, TimeScale};
