//! Time-dimension bookkeeping.
//!
//! Every quantity carries the exponent of seconds in its unit. Fractional
//! operators contribute exponents that depend linearly on the order α, so an
//! exponent is stored as `rational + coefficient·α` with α kept symbolic.
//! Two exponents compare equal only when both parts match, which makes
//! "consistent for every α" a single equality check.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Reduced rational exponent of the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TimeExponent(Rational);

impl TimeExponent {
    pub const ZERO: TimeExponent = TimeExponent(Ratio::new_raw(0, 1));

    /// Builds `numerator / denominator`, reduced. Panics when `denominator == 0`.
    pub fn new(numerator: i64, denominator: i64) -> Self {
        TimeExponent(Ratio::new(numerator, denominator))
    }

    pub fn integer(n: i64) -> Self {
        TimeExponent(Ratio::from_integer(n))
    }

    pub fn numerator(&self) -> i64 {
        *self.0.numer()
    }

    /// Always positive; the sign lives on the numerator.
    pub fn denominator(&self) -> i64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Rational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl From<Rational> for TimeExponent {
    fn from(r: Rational) -> Self {
        TimeExponent(r)
    }
}

/// Symbolic time exponent `rational_part + alpha_coefficient·α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DimExpr {
    pub rational_part: TimeExponent,
    pub alpha_coefficient: Rational,
}

impl DimExpr {
    pub const DIMENSIONLESS: DimExpr = DimExpr {
        rational_part: TimeExponent::ZERO,
        alpha_coefficient: Ratio::new_raw(0, 1),
    };

    pub fn new(rational_part: TimeExponent, alpha_coefficient: Rational) -> Self {
        DimExpr {
            rational_part,
            alpha_coefficient,
        }
    }

    /// `s^n` for an integer `n`.
    pub fn seconds(n: i64) -> Self {
        DimExpr::new(TimeExponent::integer(n), Rational::from_integer(0))
    }

    /// `s^(c·α)`.
    pub fn alpha(c: i64) -> Self {
        DimExpr::new(TimeExponent::ZERO, Rational::from_integer(c))
    }

    pub fn is_dimensionless(&self) -> bool {
        *self == DimExpr::DIMENSIONLESS
    }

    pub fn depends_on_alpha(&self) -> bool {
        *self.alpha_coefficient.numer() != 0
    }

    /// Numeric exponent at a particular order.
    pub fn evaluate(&self, alpha: f64) -> f64 {
        self.rational_part.to_f64()
            + *self.alpha_coefficient.numer() as f64 / *self.alpha_coefficient.denom() as f64
                * alpha
    }

    /// Dimension of `quantity^power` where `power = p + k·α` is itself
    /// symbolic. Only defined when this exponent is free of α (otherwise
    /// the product would contain α²).
    pub fn raised_to(&self, power: DimExpr) -> Result<DimExpr> {
        if self.depends_on_alpha() && power.depends_on_alpha() {
            return Err(Error::Domain(format!(
                "cannot raise {self} to the alpha-dependent power {power}"
            )));
        }
        if self.depends_on_alpha() {
            let p = power.rational_part.ratio();
            return Ok(DimExpr::new(
                (self.rational_part.ratio() * p).into(),
                self.alpha_coefficient * p,
            ));
        }
        let base = self.rational_part.ratio();
        Ok(DimExpr::new(
            (base * power.rational_part.ratio()).into(),
            base * power.alpha_coefficient,
        ))
    }
}

impl Add for DimExpr {
    type Output = DimExpr;
    fn add(self, rhs: DimExpr) -> DimExpr {
        DimExpr::new(
            (self.rational_part.ratio() + rhs.rational_part.ratio()).into(),
            self.alpha_coefficient + rhs.alpha_coefficient,
        )
    }
}

impl Sub for DimExpr {
    type Output = DimExpr;
    fn sub(self, rhs: DimExpr) -> DimExpr {
        self + (-rhs)
    }
}

impl Neg for DimExpr {
    type Output = DimExpr;
    fn neg(self) -> DimExpr {
        DimExpr::new((-self.rational_part.ratio()).into(), -self.alpha_coefficient)
    }
}

impl fmt::Display for TimeExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for DimExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rational_part.ratio();
        let a = self.alpha_coefficient;
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        let alpha_term = if a == one {
            "α".to_string()
        } else if a == -one {
            "-α".to_string()
        } else {
            format!("{a}α")
        };
        match (r == zero, a == zero) {
            (true, true) => write!(f, "s^0"),
            (false, true) => write!(f, "s^({r})"),
            (true, false) => write!(f, "s^({alpha_term})"),
            (false, false) => {
                if a < zero {
                    write!(f, "s^({r} - {}α)", if -a == one { String::new() } else { (-a).to_string() })
                } else {
                    write!(f, "s^({r} + {}α)", if a == one { String::new() } else { a.to_string() })
                }
            }
        }
    }
}

/// A real value tagged with its time dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionedQuantity {
    pub value: f64,
    pub dim: DimExpr,
}

impl DimensionedQuantity {
    pub fn new(value: f64, dim: DimExpr) -> Self {
        DimensionedQuantity { value, dim }
    }

    pub fn seconds(value: f64) -> Self {
        DimensionedQuantity::new(value, DimExpr::seconds(1))
    }

    pub fn per_second(value: f64) -> Self {
        DimensionedQuantity::new(value, DimExpr::seconds(-1))
    }

    pub fn dimensionless(value: f64) -> Self {
        DimensionedQuantity::new(value, DimExpr::DIMENSIONLESS)
    }

    /// Sum of two quantities; refuses to add unlike dimensions.
    pub fn checked_add(self, rhs: DimensionedQuantity) -> Result<DimensionedQuantity> {
        if self.dim != rhs.dim {
            return Err(Error::Dimension {
                left: self.dim,
                right: rhs.dim,
            });
        }
        Ok(DimensionedQuantity::new(self.value + rhs.value, self.dim))
    }

    pub fn checked_sub(self, rhs: DimensionedQuantity) -> Result<DimensionedQuantity> {
        self.checked_add(DimensionedQuantity::new(-rhs.value, rhs.dim))
    }

    pub fn recip(self) -> DimensionedQuantity {
        DimensionedQuantity::new(1.0 / self.value, -self.dim)
    }

    /// `self^power` where the power is `p + k·α`, evaluated at `alpha`.
    pub fn powf_symbolic(self, power: DimExpr, alpha: f64) -> Result<DimensionedQuantity> {
        let dim = self.dim.raised_to(power)?;
        Ok(DimensionedQuantity::new(
            self.value.powf(power.evaluate(alpha)),
            dim,
        ))
    }
}

impl Mul for DimensionedQuantity {
    type Output = DimensionedQuantity;
    fn mul(self, rhs: DimensionedQuantity) -> DimensionedQuantity {
        DimensionedQuantity::new(self.value * rhs.value, self.dim + rhs.dim)
    }
}

/// Operators that replace d/dt when building a fractional equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    ClassicalDdt,
    Caputo,
    CaputoFabrizio,
    SigmaRescaledCaputo,
    PhiRescaledCf,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 5] = [
        OperatorKind::ClassicalDdt,
        OperatorKind::Caputo,
        OperatorKind::CaputoFabrizio,
        OperatorKind::SigmaRescaledCaputo,
        OperatorKind::PhiRescaledCf,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::ClassicalDdt => "d/dt",
            OperatorKind::Caputo => "Caputo",
            OperatorKind::CaputoFabrizio => "Caputo-Fabrizio",
            OperatorKind::SigmaRescaledCaputo => "sigma^(alpha-1) Caputo",
            OperatorKind::PhiRescaledCf => "(1/phi) Caputo-Fabrizio",
        }
    }
}

/// Time exponent contributed by applying `kind` to a quantity.
pub fn dim_of_operator(kind: OperatorKind) -> DimExpr {
    let sigma = DimExpr::seconds(1);
    match kind {
        OperatorKind::ClassicalDdt => DimExpr::seconds(-1),
        OperatorKind::Caputo => DimExpr::alpha(-1),
        OperatorKind::CaputoFabrizio => DimExpr::DIMENSIONLESS,
        OperatorKind::SigmaRescaledCaputo => {
            // σ^(α-1) · Caputo
            let power = DimExpr::new(TimeExponent::integer(-1), Rational::from_integer(1));
            sigma
                .raised_to(power)
                .expect("sigma carries no alpha dependence")
                + dim_of_operator(OperatorKind::Caputo)
        }
        OperatorKind::PhiRescaledCf => -sigma + dim_of_operator(OperatorKind::CaputoFabrizio),
    }
}

/// True iff every term carries the same symbolic exponent. An empty list is
/// vacuously homogeneous.
pub fn check_homogeneity(terms: &[DimExpr]) -> bool {
    match terms.split_first() {
        Some((first, rest)) => rest.iter().all(|d| d == first),
        None => true,
    }
}

/// Term dimensions of `dx/dt + P x = Q` with `x` carrying `x_dim`,
/// `P` in s⁻¹ and `Q` in s⁻¹ times the unit of `x`.
pub fn classical_linear_terms(x_dim: DimExpr) -> [DimExpr; 3] {
    let rate = DimExpr::seconds(-1);
    [
        dim_of_operator(OperatorKind::ClassicalDdt) + x_dim,
        rate + x_dim,
        rate + x_dim,
    ]
}

/// Term dimensions of the naive replacement `D^α x + P x = Q` with the
/// plain Caputo operator and unchanged coefficients.
pub fn naive_caputo_terms(x_dim: DimExpr) -> [DimExpr; 3] {
    let rate = DimExpr::seconds(-1);
    [
        dim_of_operator(OperatorKind::Caputo) + x_dim,
        rate + x_dim,
        rate + x_dim,
    ]
}

/// Term dimensions of the rescaled equation `CF D_τ x + P(τ) x = Q(τ)` with
/// `P(τ) = P φ` and `Q(τ) = Q φ`, where `φ` is in seconds.
pub fn rescaled_cf_terms(x_dim: DimExpr) -> [DimExpr; 3] {
    let rate = DimExpr::seconds(-1);
    let phi = DimExpr::seconds(1);
    [
        dim_of_operator(OperatorKind::CaputoFabrizio) + x_dim,
        rate + phi + x_dim,
        rate + phi + x_dim,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn operator_dimensions() {
        assert_eq!(dim_of_operator(OperatorKind::ClassicalDdt), DimExpr::seconds(-1));
        assert_eq!(dim_of_operator(OperatorKind::Caputo), DimExpr::alpha(-1));
        assert_eq!(dim_of_operator(OperatorKind::CaputoFabrizio), DimExpr::DIMENSIONLESS);
        assert_eq!(
            dim_of_operator(OperatorKind::SigmaRescaledCaputo),
            DimExpr::seconds(-1)
        );
        assert_eq!(dim_of_operator(OperatorKind::PhiRescaledCf), DimExpr::seconds(-1));
    }

    #[test]
    fn homogeneity_examples() {
        let m1 = DimExpr::seconds(-1);
        assert!(check_homogeneity(&[m1, m1, m1]));
        assert!(!check_homogeneity(&[m1, DimExpr::alpha(-1)]));
        assert!(check_homogeneity(&[DimExpr::DIMENSIONLESS, DimExpr::DIMENSIONLESS]));
        assert!(check_homogeneity(&classical_linear_terms(DimExpr::DIMENSIONLESS)));
        assert!(!check_homogeneity(&naive_caputo_terms(DimExpr::DIMENSIONLESS)));
        let terms = rescaled_cf_terms(DimExpr::DIMENSIONLESS);
        assert!(check_homogeneity(&terms));
        assert!(terms[0].is_dimensionless());
    }

    #[test]
    fn alpha_symbol_is_not_a_number() {
        // s^(-α) equals s^(-1) only at α = 1; symbolic equality must reject it.
        let caputo = DimExpr::alpha(-1);
        assert_eq!(caputo.evaluate(1.0), -1.0);
        assert_ne!(caputo, DimExpr::seconds(-1));
    }

    #[test]
    fn time_exponent_is_reduced() {
        let e = TimeExponent::new(4, -6);
        assert_eq!(e.numerator(), -2);
        assert_eq!(e.denominator(), 3);
    }

    #[test]
    fn quantity_addition_requires_matching_dims() {
        let a = DimensionedQuantity::seconds(2.0);
        let b = DimensionedQuantity::seconds(3.0);
        assert_eq!(a.checked_add(b).unwrap().value, 5.0);
        assert!(matches!(
            a.checked_add(DimensionedQuantity::per_second(1.0)),
            Err(Error::Dimension { .. })
        ));
        let rate = DimensionedQuantity::per_second(4.0);
        let prod = a * rate;
        assert!(prod.dim.is_dimensionless());
        assert_eq!(prod.value, 8.0);
    }

    #[test]
    fn sigma_power_carries_symbolic_dimension() {
        let sigma = DimensionedQuantity::seconds(2.0);
        let power = DimExpr::new(TimeExponent::integer(-1), Rational::from_integer(1));
        let scaled = sigma.powf_symbolic(power, 0.3).unwrap();
        assert!((scaled.value - 2f64.powf(-0.7)).abs() < 1e-15);
        assert_eq!(scaled.dim, power);
        assert!(DimExpr::alpha(1).raised_to(power).is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(DimExpr::seconds(-1).to_string(), "s^(-1)");
        assert_eq!(DimExpr::alpha(-1).to_string(), "s^(-α)");
        assert_eq!(DimExpr::DIMENSIONLESS.to_string(), "s^0");
        let mixed = DimExpr::seconds(1) + DimExpr::alpha(-1);
        assert_eq!(mixed.to_string(), "s^(1 - α)");
    }

    fn arb_dim() -> impl Strategy<Value = DimExpr> {
        (-4i64..4, 1i64..4, -3i64..3).prop_map(|(n, d, a)| {
            DimExpr::new(TimeExponent::new(n, d), Rational::from_integer(a))
        })
    }

    proptest! {
        #[test]
        fn homogeneity_is_permutation_invariant(mut terms in prop::collection::vec(arb_dim(), 1..6), rot in 0usize..6) {
            let before = check_homogeneity(&terms);
            let k = rot % terms.len();
            terms.rotate_left(k);
            prop_assert_eq!(before, check_homogeneity(&terms));
            terms.reverse();
            prop_assert_eq!(before, check_homogeneity(&terms));
        }

        #[test]
        fn homogeneity_is_reflexive(d in arb_dim(), n in 1usize..5) {
            prop_assert!(check_homogeneity(&vec![d; n]));
        }

        #[test]
        fn symbolic_homogeneity_implies_numeric(d in arb_dim(), alpha in 1e-6f64..=1.0) {
            let terms = [d, d + DimExpr::DIMENSIONLESS];
            prop_assert!(check_homogeneity(&terms));
            prop_assert_eq!(terms[0].evaluate(alpha), terms[1].evaluate(alpha));
        }
    }
}
