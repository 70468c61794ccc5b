//! Fractional derivatives of uniformly sampled functions.
//!
//! The Caputo-Fabrizio operator
//!
//! ```text
//! D^α f(t) = (2-α) M(α) / (2 (1-α)) ∫₀ᵗ f'(s) exp(-α (t-s) / (1-α)) ds
//! ```
//!
//! is evaluated with f' taken as the cell slope `(f[k+1] - f[k]) / dt` and the
//! exponential kernel integrated exactly over each cell. Because the kernel
//! is exponential the history sum obeys a one-term recurrence, so the whole
//! derivative costs O(n). The power-law Caputo operator uses the L1 scheme.

use std::fmt;
use std::sync::Arc;

use crate::dims::{DimExpr, DimensionedQuantity, Rational, TimeExponent};
use crate::error::{Error, Result};
use crate::quadrature::simpson_uniform;

/// Order of a fractional derivative, `0 < α ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const ONE: FractionalOrder = FractionalOrder(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
            Ok(FractionalOrder(alpha))
        } else {
            Err(Error::Domain(format!(
                "fractional order must satisfy 0 < alpha <= 1, got {alpha}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `1 - α`
    pub fn complement(self) -> f64 {
        1.0 - self.0
    }

    /// Kernel decay rate `α / (1 - α)`; infinite at α = 1.
    pub fn decay_rate(self) -> f64 {
        self.0 / (1.0 - self.0)
    }
}

impl fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Nodes `t0 + k·dt` for `k = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    t0: f64,
    dt: f64,
    n: usize,
}

impl UniformGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::Domain(format!("grid start must be finite and >= 0, got {t0}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("grid step must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 nodes, got {n}")));
        }
        Ok(UniformGrid { t0, dt, n })
    }

    /// `n` nodes spanning `[0, t_max]`.
    pub fn from_span(t_max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 nodes, got {n}")));
        }
        Self::new(0.0, t_max / (n - 1) as f64, n)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.node(self.n - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.node(k))
    }
}

/// A real function sampled on a uniform grid, tagged with its time dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: UniformGrid,
    values: Vec<f64>,
    dim: DimExpr,
}

impl SampledFunction {
    pub fn new(grid: UniformGrid, values: Vec<f64>, dim: DimExpr) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite sample {} at t = {}",
                values[k],
                grid.node(k)
            )));
        }
        Ok(SampledFunction { grid, values, dim })
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(grid: UniformGrid, dim: DimExpr, mut f: F) -> Result<Self> {
        let values = grid.nodes().map(&mut f).collect();
        Self::new(grid, values, dim)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> DimExpr {
        self.dim
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().zip(self.values.iter().copied())
    }

    /// Pointwise `a·self + b·other` on a shared grid.
    pub fn linear_combination(&self, a: f64, other: &SampledFunction, b: f64) -> Result<SampledFunction> {
        if self.grid != other.grid {
            return Err(Error::Input("linear combination of functions on different grids".into()));
        }
        if self.dim != other.dim {
            return Err(Error::Dimension {
                left: self.dim,
                right: other.dim,
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        SampledFunction::new(self.grid, values, self.dim)
    }

    /// Largest pointwise absolute difference, optionally skipping leading nodes.
    pub fn max_abs_diff(&self, other: &SampledFunction, skip: usize) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .skip(skip)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn require_origin(&self) -> Result<()> {
        if self.grid.t0 != 0.0 {
            return Err(Error::Domain(format!(
                "derivative lower limit is 0 but the grid starts at t = {}",
                self.grid.t0
            )));
        }
        Ok(())
    }

    fn with_values(&self, values: Vec<f64>, dim: DimExpr) -> Result<SampledFunction> {
        SampledFunction::new(self.grid, values, dim)
    }
}

/// The kernel normalisation `M(α)`.
#[derive(Clone)]
pub struct KernelNormalization {
    m: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl KernelNormalization {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(m: F) -> Self {
        KernelNormalization { m: Arc::new(m) }
    }

    /// `M(α)` scaled by a constant factor; used to check that verification
    /// notices a corrupted operator.
    pub fn scaled(factor: f64) -> Self {
        Self::new(move |a| factor * 2.0 / (2.0 - a))
    }

    pub fn m(&self, alpha: f64) -> f64 {
        (self.m)(alpha)
    }

    /// `(2-α) M(α) / (2 (1-α))`; equals `1/(1-α)` for the default M.
    pub fn prefactor(&self, order: FractionalOrder) -> f64 {
        let a = order.value();
        (2.0 - a) * self.m(a) / (2.0 * (1.0 - a))
    }

    /// `(2-α) M(α) / 2`, which is 1 for the default M.
    fn relative_scale(&self, order: FractionalOrder) -> f64 {
        let a = order.value();
        (2.0 - a) * self.m(a) / 2.0
    }
}

impl Default for KernelNormalization {
    fn default() -> Self {
        Self::new(|a| 2.0 / (2.0 - a))
    }
}

impl fmt::Debug for KernelNormalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelNormalization(M(0.5) = {})", self.m(0.5))
    }
}

/// Classical derivative on the grid: backward differences, with the forward
/// difference at the first node.
pub fn discrete_derivative(f: &SampledFunction) -> Vec<f64> {
    let v = f.values();
    let dt = f.grid().dt();
    let mut out = Vec::with_capacity(v.len());
    out.push((v[1] - v[0]) / dt);
    out.extend(v.windows(2).map(|w| (w[1] - w[0]) / dt));
    out
}

fn cell_slopes(f: &SampledFunction) -> impl Iterator<Item = f64> + '_ {
    let dt = f.grid().dt();
    f.values().windows(2).map(move |w| (w[1] - w[0]) / dt)
}

/// Caputo-Fabrizio derivative with the default normalisation `M(α) = 2/(2-α)`.
pub fn cf_derivative(f: &SampledFunction, order: FractionalOrder) -> Result<SampledFunction> {
    cf_derivative_with(f, order, &KernelNormalization::default())
}

/// Caputo-Fabrizio derivative by the O(n) exponential recurrence.
///
/// At α = 1 the kernel collapses to a point mass and the classical
/// [`discrete_derivative`] is returned (scaled by `(2-α)M(α)/2`).
pub fn cf_derivative_with(
    f: &SampledFunction,
    order: FractionalOrder,
    norm: &KernelNormalization,
) -> Result<SampledFunction> {
    f.require_origin()?;
    if order.is_classical() {
        let scale = norm.relative_scale(order);
        let d = discrete_derivative(f).into_iter().map(|x| scale * x).collect();
        return f.with_values(d, f.dim());
    }
    let dt = f.grid().dt();
    let lambda = order.decay_rate();
    let decay = (-lambda * dt).exp();
    // ∫ over one cell of exp(-λ (t_{k+1} - s)) ds
    let cell_weight = -(-lambda * dt).exp_m1() / lambda;
    let pref = norm.prefactor(order);

    let mut out = Vec::with_capacity(f.values().len());
    out.push(0.0);
    let mut acc = 0.0;
    for slope in cell_slopes(f) {
        acc = decay * acc + slope * cell_weight;
        out.push(pref * acc);
    }
    f.with_values(out, f.dim())
}

/// Caputo-Fabrizio derivative by direct summation over the whole history at
/// every node, O(n²). Same discretisation as [`cf_derivative`]; kept as an
/// independent evaluation route.
pub fn cf_derivative_direct(f: &SampledFunction, order: FractionalOrder) -> Result<SampledFunction> {
    f.require_origin()?;
    if order.is_classical() {
        return f.with_values(discrete_derivative(f), f.dim());
    }
    let grid = *f.grid();
    let dt = grid.dt();
    let lambda = order.decay_rate();
    let cell_weight = -(-lambda * dt).exp_m1() / lambda;
    let pref = 1.0 / order.complement();
    let slopes: Vec<f64> = cell_slopes(f).collect();
    let out = (0..grid.len())
        .map(|k| {
            let tk = grid.node(k);
            let sum: f64 = slopes[..k]
                .iter()
                .enumerate()
                .map(|(j, s)| s * (-lambda * (tk - grid.node(j + 1))).exp() * cell_weight)
                .sum();
            pref * sum
        })
        .collect();
    f.with_values(out, f.dim())
}

/// The α → 0⁺ limit of the Caputo-Fabrizio derivative, `f(t) - f(0)`.
pub fn cf_limit_alpha_zero(f: &SampledFunction) -> SampledFunction {
    let f0 = f.values()[0];
    let values = f.values().iter().map(|v| v - f0).collect();
    SampledFunction {
        grid: f.grid,
        values,
        dim: f.dim,
    }
}

fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Caputo derivative (power-law kernel) by the L1 scheme, lower limit 0.
///
/// Output dimension is `dim(f) - α`.
pub fn caputo_derivative(f: &SampledFunction, order: FractionalOrder) -> Result<SampledFunction> {
    f.require_origin()?;
    let dim = f.dim() + DimExpr::alpha(-1);
    if order.is_classical() {
        return f.with_values(discrete_derivative(f), dim);
    }
    let a = order.value();
    let one_minus = 1.0 - a;
    let n = f.grid().len();
    let dt = f.grid().dt();
    // b_m = (m+1)^{1-α} - m^{1-α}
    let weights: Vec<f64> = (0..n)
        .map(|m| (m as f64 + 1.0).powf(one_minus) - (m as f64).powf(one_minus))
        .collect();
    let increments: Vec<f64> = f.values().windows(2).map(|w| w[1] - w[0]).collect();
    let scale = dt.powf(-a) / gamma(2.0 - a);
    let out = (0..n)
        .map(|k| {
            let sum: f64 = increments[..k]
                .iter()
                .enumerate()
                .map(|(j, d)| weights[k - 1 - j] * d)
                .sum();
            scale * sum
        })
        .collect();
    f.with_values(out, dim)
}

/// `σ^(α-1) · Caputo D^α f`, which restores the dimension of d/dt.
pub fn sigma_rescaled_caputo(
    f: &SampledFunction,
    order: FractionalOrder,
    sigma: DimensionedQuantity,
) -> Result<SampledFunction> {
    if !(sigma.value.is_finite() && sigma.value > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {}", sigma.value)));
    }
    if sigma.dim != DimExpr::seconds(1) {
        return Err(Error::Dimension {
            left: sigma.dim,
            right: DimExpr::seconds(1),
        });
    }
    let caputo = caputo_derivative(f, order)?;
    let power = DimExpr::new(TimeExponent::integer(-1), Rational::from_integer(1));
    let factor = sigma.powf_symbolic(power, order.value())?;
    let dim = caputo.dim() + factor.dim;
    let values = caputo.values().iter().map(|v| v * factor.value).collect();
    caputo.with_values(values, dim)
}

/// Rounding scale of [`cf_derivative`] applied to `a·f + b·g`: sample
/// magnitudes are differenced over `dt` and the kernel weights sum to at most
/// `1/α`, so `(|a|‖f‖ + |b|‖g‖) / (α dt)` bounds how far floating-point error
/// can separate `D(a f + b g)` from `a D f + b D g`.
pub fn linearity_scale(f: &SampledFunction, a: f64, g: &SampledFunction, b: f64, order: FractionalOrder) -> f64 {
    let sup = |x: &SampledFunction| x.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (a.abs() * sup(f) + b.abs() * sup(g)) / (order.value() * f.grid().dt())
}

/// Laplace transform of a sampled function truncated to its grid, by
/// composite Simpson.
pub fn truncated_laplace(f: &SampledFunction, s: f64) -> f64 {
    let weighted: Vec<f64> = f.iter().map(|(t, v)| v * (-s * t).exp()).collect();
    simpson_uniform(&weighted, f.grid().dt())
}

/// Smallest horizon `T` with `exp(-s T) < 1e-12`.
pub fn default_laplace_horizon(s: f64) -> f64 {
    12.0 * std::f64::consts::LN_10 / s
}

/// Residual of the Laplace-transform identity for the Caputo-Fabrizio
/// derivative, `|L{D^α f}(s) - (sF(s) - f(0)) / ((1-α)(s + α/(1-α)))|`, with both
/// transforms truncated to the grid of `f`.
pub fn cf_laplace_residual(f: &SampledFunction, order: FractionalOrder, s: f64) -> Result<f64> {
    cf_laplace_residual_with(f, order, s, &KernelNormalization::default())
}

pub fn cf_laplace_residual_with(
    f: &SampledFunction,
    order: FractionalOrder,
    s: f64,
    norm: &KernelNormalization,
) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!("Laplace variable must be positive, got {s}")));
    }
    let derivative = cf_derivative_with(f, order, norm)?;
    let lhs = truncated_laplace(&derivative, s);
    let big_f = truncated_laplace(f, s);
    let f0 = f.values()[0];
    let rhs = if order.is_classical() {
        s * big_f - f0
    } else {
        (s * big_f - f0) / (order.complement() * (s + order.decay_rate()))
    };
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(t_max: f64, n: usize) -> UniformGrid {
        UniformGrid::from_span(t_max, n).unwrap()
    }

    fn sample(g: UniformGrid, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction::from_fn(g, DimExpr::DIMENSIONLESS, f).unwrap()
    }

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn order_bounds() {
        assert!(FractionalOrder::new(0.0).is_err());
        assert!(FractionalOrder::new(1.0 + 1e-12).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.0).unwrap().is_classical());
    }

    #[test]
    fn grid_and_sample_validation() {
        assert!(UniformGrid::new(0.0, 0.0, 5).is_err());
        assert!(UniformGrid::new(0.0, 0.1, 1).is_err());
        assert!(UniformGrid::new(-1.0, 0.1, 5).is_err());
        let g = grid(1.0, 3);
        assert!(matches!(
            SampledFunction::new(g, vec![0.0, f64::NAN, 1.0], DimExpr::DIMENSIONLESS),
            Err(Error::Input(_))
        ));
        assert!(SampledFunction::new(g, vec![0.0], DimExpr::DIMENSIONLESS).is_err());
    }

    #[test]
    fn default_normalization_gives_plain_prefactor() {
        let norm = KernelNormalization::default();
        for a in [0.1, 0.5, 0.9] {
            assert!((norm.m(a) * (2.0 - a) / 2.0 - 1.0).abs() < 1e-15);
            assert!((norm.prefactor(order(a)) - 1.0 / (1.0 - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_annihilated_exactly() {
        let f = sample(grid(5.0, 201), |_| 3.0);
        let d = cf_derivative(&f, order(0.7)).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
        let c = caputo_derivative(&f, order(0.4)).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cf_of_identity_matches_closed_form() {
        let f = sample(grid(5.0, 501), |t| t);
        let d = cf_derivative(&f, order(0.5)).unwrap();
        for (t, v) in d.iter() {
            let exact = 2.0 * (1.0 - (-t).exp());
            assert!((v - exact).abs() < 1e-12, "t = {t}");
        }
        // g(1) = 2(1 - 1/e)
        assert!((d.values()[100] - 1.264_241_117_657_115).abs() < 1e-12);
    }

    #[test]
    fn classical_branch_is_discrete_derivative() {
        let g = grid(2.0, 2001);
        let f = sample(g, |t| t * t);
        let d = cf_derivative(&f, FractionalOrder::ONE).unwrap();
        for (k, (t, v)) in d.iter().enumerate().skip(1) {
            assert!((v - (2.0 * t - g.dt())).abs() < 1e-9, "k = {k}");
        }
        let id = sample(g, |t| t);
        let c = caputo_derivative(&id, FractionalOrder::ONE).unwrap();
        assert!(c.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn alpha_zero_limit() {
        let g = grid(1.0, 11);
        let e = cf_limit_alpha_zero(&sample(g, f64::exp));
        for (t, v) in e.iter() {
            assert!((v - (t.exp() - 1.0)).abs() < 1e-15);
        }
        assert!(cf_limit_alpha_zero(&sample(g, |_| 4.0)).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn caputo_of_identity() {
        let f = sample(grid(4.0, 401), |t| t);
        let d = caputo_derivative(&f, order(0.5)).unwrap();
        assert_eq!(d.dim(), DimExpr::alpha(-1));
        for (t, v) in d.iter() {
            let exact = 2.0 * (t / std::f64::consts::PI).sqrt();
            assert!((v - exact).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn caputo_l1_converges_on_quadratic() {
        // D^α t² = 2 t^{2-α} / Γ(3-α)
        let a = 0.5;
        let err = |n: usize| {
            let f = sample(grid(1.0, n), |t| t * t);
            let d = caputo_derivative(&f, order(a)).unwrap();
            d.iter()
                .map(|(t, v)| (v - 2.0 * t.powf(2.0 - a) / libm::tgamma(3.0 - a)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(101), err(201));
        // O(dt^{2-α}) → ratio near 2^{1.5}
        let ratio = e1 / e2;
        assert!(ratio > 2.5 && ratio < 3.2, "ratio {ratio}");
    }

    #[test]
    fn sigma_rule() {
        let g = grid(3.0, 301);
        let f = sample(g, |t| t.sin());
        let caputo = caputo_derivative(&f, order(0.3)).unwrap();
        let unit = sigma_rescaled_caputo(&f, order(0.3), DimensionedQuantity::seconds(1.0)).unwrap();
        assert_eq!(caputo.values(), unit.values());
        let two = sigma_rescaled_caputo(&f, order(0.3), DimensionedQuantity::seconds(2.0)).unwrap();
        assert_eq!(two.dim(), DimExpr::seconds(-1));
        assert_eq!(caputo.dim(), DimExpr::alpha(-1));
        let factor = 2f64.powf(-0.7);
        for (a, b) in caputo.values().iter().zip(two.values()) {
            assert!((a * factor - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
        let classical = sigma_rescaled_caputo(&f, FractionalOrder::ONE, DimensionedQuantity::seconds(7.0)).unwrap();
        assert_eq!(classical.values(), discrete_derivative(&f).as_slice());
        assert!(sigma_rescaled_caputo(&f, order(0.3), DimensionedQuantity::seconds(0.0)).is_err());
        assert!(sigma_rescaled_caputo(&f, order(0.3), DimensionedQuantity::per_second(1.0)).is_err());
    }

    #[test]
    fn nonzero_origin_is_a_domain_error() {
        let g = UniformGrid::new(1.0, 0.1, 10).unwrap();
        let f = sample(g, |t| t);
        assert!(matches!(cf_derivative(&f, order(0.5)), Err(Error::Domain(_))));
        assert!(matches!(caputo_derivative(&f, order(0.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn laplace_residual_for_constant_vanishes() {
        let f = sample(grid(30.0, 30001), |_| 2.5);
        let r = cf_laplace_residual(&f, order(0.6), 1.3).unwrap();
        assert!(r < 1e-12, "{r}");
        assert!(cf_laplace_residual(&f, order(0.6), 0.0).is_err());
    }

    #[test]
    fn recurrence_matches_direct_sum() {
        let f = sample(grid(4.0, 800), |t| (2.0 * t).sin() + t * t / 3.0);
        let fast = cf_derivative(&f, order(0.35)).unwrap();
        let slow = cf_derivative_direct(&f, order(0.35)).unwrap();
        for (a, b) in fast.values().iter().zip(slow.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn linearity(
            coeffs in prop::collection::vec(-2.0f64..2.0, 6),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            alpha in 0.05f64..0.95,
        ) {
            let g = grid(3.0, 301);
            let f = sample(g, |t| coeffs[0] + coeffs[1] * t + coeffs[2] * (coeffs[3] * t).sin());
            let h = sample(g, |t| coeffs[4] * (-t).exp() + coeffs[5] * t * t);
            let o = order(alpha);
            let combined = cf_derivative(&f.linear_combination(a, &h, b).unwrap(), o).unwrap();
            let df = cf_derivative(&f, o).unwrap();
            let dh = cf_derivative(&h, o).unwrap();
            let separate = df.linear_combination(a, &dh, b).unwrap();
            let tol = 10.0 * f64::EPSILON * linearity_scale(&f, a, &h, b, o);
            prop_assert!(combined.max_abs_diff(&separate, 0) <= tol);
        }
    }
}
