//! Floating-point scalar abstraction.
//!
//! All numerical code in the crate is written against [`Scalar`] so the
//! same routines run in `f64` (the default everywhere) or `f32`.
//! Tolerances are stated in `f64` and widened to the precision of the
//! concrete type with [`Scalar::tol`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Smallest magnitude the simplex solver accepts as a pivot.
    const PIVOT_TOL: f64;

    /// Converts an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Lossy conversion back to `f64` for reporting and serialization.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// `tol` widened to at least 64 ulps of one in this precision.
    fn tol(tol: f64) -> Self {
        let floor = Self::epsilon() * Self::of(64.0);
        Self::of(tol).max(floor)
    }
}

impl Scalar for f64 {
    const PIVOT_TOL: f64 = 1e-11;
}

impl Scalar for f32 {
    const PIVOT_TOL: f64 = 1e-5;
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn sum<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_widened_for_single_precision() {
        assert_eq!(<f64 as Scalar>::tol(1e-9), 1e-9);
        assert!(<f32 as Scalar>::tol(1e-12) > 1e-6);
    }

    #[test]
    fn literal_round_trip() {
        assert_eq!(f64::of(0.7).as_f64(), 0.7);
        assert!((f32::of(0.7).as_f64() - 0.7).abs() < 1e-7);
    }
}
