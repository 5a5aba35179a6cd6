//! Scalar abstraction shared by every metric.
//!
//! All formulas are written once against [`Scalar`]; `f64` is the working
//! precision, `f32` is supported for compact storage and [`Exact`] (arbitrary
//! precision rationals) is used wherever a comparison must be decided without
//! rounding, such as the treat-all / treat-none verdicts.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational. Every finite `f64` converts into it exactly.
pub type Exact = BigRational;

pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// Converts a finite real. Exact for `Exact` and `f64`, rounded for `f32`.
    fn from_real(value: f64) -> Option<Self>;

    fn from_count(count: u64) -> Self;

    fn to_real(&self) -> f64;

    /// The exact rational value of `self`.
    fn to_exact(&self) -> Exact;

    /// Absolute slack allowed when checking algebraic identities computed in this type.
    fn identity_tolerance() -> Self;

    fn ratio(num: u64, den: u64) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    /// Constant from an `f64` literal that is known to be finite.
    fn lit(value: f64) -> Self {
        Self::from_real(value).expect("finite literal")
    }
}

impl Scalar for f64 {
    fn from_real(value: f64) -> Option<Self> {
        value.is_finite().then_some(value)
    }

    fn from_count(count: u64) -> Self {
        count as f64
    }

    fn to_real(&self) -> f64 {
        *self
    }

    fn to_exact(&self) -> Exact {
        Exact::from_float(*self).expect("finite f64")
    }

    fn identity_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn from_real(value: f64) -> Option<Self> {
        let v = value as f32;
        (value.is_finite() && v.is_finite()).then_some(v)
    }

    fn from_count(count: u64) -> Self {
        count as f32
    }

    fn to_real(&self) -> f64 {
        *self as f64
    }

    fn to_exact(&self) -> Exact {
        Exact::from_float(*self).expect("finite f32")
    }

    fn identity_tolerance() -> Self {
        1e-4
    }
}

impl Scalar for Exact {
    fn from_real(value: f64) -> Option<Self> {
        Exact::from_float(value)
    }

    fn from_count(count: u64) -> Self {
        Exact::from_integer(BigInt::from(count))
    }

    fn to_real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Exact {
        self.clone()
    }

    fn identity_tolerance() -> Self {
        Exact::zero()
    }
}

/// `|a - b| <= tol`
pub(crate) fn within<S: Scalar>(a: &S, b: &S, tol: &S) -> bool {
    (a.clone() - b.clone()).abs() <= *tol
}
