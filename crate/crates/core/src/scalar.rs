//! Scalar abstraction: everything numeric in this crate is generic over [`Real`],
//! implemented for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the simulator.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Conversion from an `f64` literal (constants, defaults, tolerances).
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant not representable in scalar type")
    }

    /// Conversion from a count or index.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Elementary charge in coulombs.
pub fn elementary_charge<T: Real>() -> T {
    T::of(1.602_176_634e-19)
}
