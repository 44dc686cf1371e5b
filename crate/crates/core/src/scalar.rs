//! Scalar abstraction.
//!
//! All numerical code is written against [`Real`], the real field underlying
//! the complex scalars. `f64` is the type used by the concrete aliases at the
//! crate root; `f32` works as well but only with correspondingly looser
//! tolerances.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;

/// Real scalar type backing the complex arithmetic.
pub trait Real: RealField + Copy {}

impl<T: RealField + Copy> Real for T {}

/// Complex column vector.
pub type CVector<T> = DVector<Complex<T>>;

/// Dense complex matrix (column-major).
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `T` into `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_subset().unwrap_or(f64::NAN)
}

/// `re + i·im` from `f64` parts.
#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `|z|^2` without the square root.
#[inline]
pub(crate) fn abs2<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub(crate) fn from_real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// True when every entry is finite.
pub fn all_finite<T: Real>(entries: &[Complex<T>]) -> bool {
    entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
