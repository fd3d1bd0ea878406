//! Real scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real floating-point type the simulator can run on (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Draws one standard normal variate.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `self > 0` and finite; false for NaN.
    #[inline]
    fn is_positive_finite(self) -> bool {
        self > Self::zero() && self.is_finite()
    }

    /// `self >= 0` and finite; false for NaN.
    #[inline]
    fn is_nonnegative_finite(self) -> bool {
        self >= Self::zero() && self.is_finite()
    }

    /// Relative tolerance used when deciding numerical rank.
    #[inline]
    fn rank_tolerance() -> Self {
        let floor = Self::lit(1e-8);
        let scaled = Self::default_epsilon() * Self::lit(64.0);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }
}

impl Real for f32 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

impl Real for f64 {
    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
}

/// Circularly-symmetric complex Gaussian with unit variance: real and
/// imaginary parts are independent N(0, 1/2).
#[inline]
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let re = T::standard_normal(rng) * s;
    let im = T::standard_normal(rng) * s;
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
