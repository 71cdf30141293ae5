//! Real and complex scalars behind one trait.

use core::fmt::Debug;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};
use num_complex::Complex64;

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + Neg<Output = Self>
    + Times<f64>
    + Times<Self>
{
    /// Number of `f64` words in the wire encoding.
    const WORDS: usize;
    const NAME: &'static str;

    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn scale(self, a: f64) -> Self;
    /// Squared modulus.
    fn abs2(self) -> f64;
    fn conj(self) -> Self;
    fn write_words(self, out: &mut [f64]);
    fn read_words(words: &[f64]) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const WORDS: usize = 1;
    const NAME: &'static str = "real";

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn scale(self, a: f64) -> Self {
        a * self
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    fn write_words(self, out: &mut [f64]) {
        out[0] = self;
    }
    fn read_words(words: &[f64]) -> Self {
        words[0]
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const WORDS: usize = 2;
    const NAME: &'static str = "complex";

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn scale(self, a: f64) -> Self {
        Complex64::new(a * self.re, a * self.im)
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::new(self.re, -self.im)
    }
    fn write_words(self, out: &mut [f64]) {
        out[0] = self.re;
        out[1] = self.im;
    }
    fn read_words(words: &[f64]) -> Self {
        Complex64::new(words[0], words[1])
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Multiplication by a matrix entry of type `E`.
pub trait Times<E>: Sized {
    fn times(self, e: E) -> Self;
}

impl Times<f64> for f64 {
    #[inline]
    fn times(self, e: f64) -> f64 {
        e * self
    }
}

impl Times<f64> for Complex64 {
    #[inline]
    fn times(self, e: f64) -> Complex64 {
        self.scale(e)
    }
}

impl Times<Complex64> for Complex64 {
    #[inline]
    fn times(self, e: Complex64) -> Complex64 {
        e * self
    }
}
