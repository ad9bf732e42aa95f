//! Scalar abstraction shared by the model, environment and actuation code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the platform math is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + nalgebra::Scalar + Debug + Display + Send + Sync
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut a = angle - two_pi * (angle / two_pi).round();
    if a <= -pi {
        a += two_pi;
    } else if a > pi {
        a -= two_pi;
    }
    a
}

/// Returns the angle on the branch of `reference` that is equivalent to `angle`,
/// i.e. `reference + wrap(angle - reference)`.
pub fn unwrap_near<T: Real>(angle: T, reference: T) -> T {
    reference + wrap_angle(angle - reference)
}
