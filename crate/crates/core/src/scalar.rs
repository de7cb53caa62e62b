//! Scalar abstraction shared by every numerical kernel.
//!
//! All physics and analysis routines are written against [`Real`], which is
//! implemented for `f32` and `f64`. Monte-Carlo orchestration runs in `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rustfft::FftNum;

/// Floating point type usable by the simulator: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + FftNum
    + Default
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in float")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }

    /// Reduces an angle into `[0, 2π)`.
    #[inline]
    fn wrap_phase(self) -> Self {
        let two_pi = Self::TAU();
        let r = self % two_pi;
        let r = if r < Self::zero() { r + two_pi } else { r };
        // `r + 2π` can round up to exactly 2π for tiny negative inputs.
        if r >= two_pi {
            Self::zero()
        } else {
            r
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}
