//! Scalar abstraction for the closed-form physics.
//!
//! Everything that is a formula (beam propagation, dipole potentials, Bloch
//! rotations, contrast fits, error budgets) is written against [`Real`] so it
//! runs in `f32` or `f64`. Monte-Carlo and I/O code is `f64` only.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or constant into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        // from_f64 never fails for f32/f64; it saturates to inf.
        Self::from_f64(x).expect("f64 converts to every Real")
    }

    /// Lossy conversion back to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
