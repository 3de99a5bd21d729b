//! Scalar abstractions.
//!
//! Closed-form oracles only need field arithmetic, so they are generic over
//! [`Field`] and can be evaluated exactly with rationals. The numeric solvers
//! need ordering, roots and powers and are generic over [`Real`] (`f32`/`f64`).

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Ordered field with small-integer literals.
pub trait Field: Clone + PartialOrd + Debug + Num + Neg<Output = Self> + FromPrimitive {
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("integer literal representable in field")
    }
}

impl<T> Field for T where T: Clone + PartialOrd + Debug + Num + Neg<Output = Self> + FromPrimitive {}

/// Floating-point scalar used by the iterative solvers.
pub trait Real: Field + Float + FloatConst + Display + LowerExp + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// `max(value, factor * epsilon)`: a tolerance that is never tighter than
    /// the type can resolve.
    fn tol(value: f64, factor: f64) -> Self {
        Self::lit(value).max(Self::lit(factor) * Self::epsilon())
    }
}

impl<T> Real for T where T: Field + Float + FloatConst + Display + LowerExp + Default + Send + Sync + 'static {}
