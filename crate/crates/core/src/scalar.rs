//! Scalar abstraction shared by the cost, LP, Monge and barycenter code.
//!
//! Coordinates enter the library as `f64`. Every finite `f64` is a dyadic
//! rational, so [`Scalar::from_coordinate`] is lossless for [`Rational`] and the
//! exact pipeline certifies the floating-point input bit for bit.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational used by the exact pipeline.
pub type Rational = BigRational;

/// Arithmetic regime a computation ran in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveMode {
    Float32,
    Float64,
    ExactRational,
}

/// Field used throughout the solver.
///
/// Floating-point implementations carry the comparison tolerances the solver
/// needs; the rational implementation returns zero for all of them so every
/// comparison is exact.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + Send + Sync + 'static
{
    const MODE: SolveMode;

    /// Converts a finite `f64`. Exact for rationals.
    fn from_coordinate(value: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Smallest magnitude accepted as a pivot element.
    fn pivot_tol() -> Self;

    /// Tolerance on constraint residuals and basic values.
    fn feas_tol() -> Self;

    /// Reduced costs above `-opt_tol` count as nonnegative.
    fn opt_tol() -> Self;

    /// Two barycenter atoms closer than this in every coordinate are merged.
    fn merge_tol() -> Self;

    fn is_exact() -> bool {
        Self::MODE == SolveMode::ExactRational
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar")
    }

    /// `1 / n`.
    fn recip_count(n: usize) -> Self {
        Self::one() / Self::from_count(n)
    }

    /// `|a - b| <= tol`.
    fn near(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }

    /// Treats values within `tol` of zero as zero.
    fn is_negligible(&self, tol: &Self) -> bool {
        self.abs() <= *tol
    }
}

impl Scalar for f64 {
    const MODE: SolveMode = SolveMode::Float64;

    fn from_coordinate(value: f64) -> Self {
        value
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn pivot_tol() -> Self {
        1e-10
    }
    fn feas_tol() -> Self {
        1e-9
    }
    fn opt_tol() -> Self {
        1e-9
    }
    fn merge_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    const MODE: SolveMode = SolveMode::Float32;

    fn from_coordinate(value: f64) -> Self {
        value as f32
    }
    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
    fn pivot_tol() -> Self {
        1e-5
    }
    fn feas_tol() -> Self {
        1e-4
    }
    fn opt_tol() -> Self {
        1e-4
    }
    fn merge_tol() -> Self {
        1e-4
    }
}

impl Scalar for Rational {
    const MODE: SolveMode = SolveMode::ExactRational;

    fn from_coordinate(value: f64) -> Self {
        BigRational::from_float(value).expect("finite coordinate")
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn pivot_tol() -> Self {
        Self::zero()
    }
    fn feas_tol() -> Self {
        Self::zero()
    }
    fn opt_tol() -> Self {
        Self::zero()
    }
    fn merge_tol() -> Self {
        Self::zero()
    }
}

/// Renders a rational as `p/q` (or `p` when integral).
pub fn rational_string(value: &Rational) -> String {
    if value.denom() == &BigInt::from(1) {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}
