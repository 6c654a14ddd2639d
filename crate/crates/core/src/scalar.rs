//! Scalar fields supported by the dense kernels.
//!
//! Everything in the crate is generic over [`Scalar`], implemented for `f64`
//! and [`c64`]. The adjoint of a matrix is always the conjugate transpose, so
//! the real case is just the complex one with `conj` as the identity.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Double-precision complex scalar.
#[allow(non_camel_case_types)]
pub type c64 = Complex64;

/// Which scalar field a matrix lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Tag byte used by the binary matrix format.
    pub fn tag(self) -> u8 {
        match self {
            Field::Real => 0,
            Field::Complex => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Field> {
        match tag {
            0 => Some(Field::Real),
            1 => Some(Field::Complex),
            _ => None,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + 'static
{
    const FIELD: Field;
    /// Number of `f64` words per scalar in serialized form.
    const WORDS: usize;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// Build from real and imaginary parts. The imaginary part is dropped
    /// for real scalars.
    fn from_parts(re: f64, im: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn conj(self) -> Self;
    /// Squared modulus.
    fn abs_sq(self) -> f64;
    fn modulus(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;

    /// Unit-modulus scalar with the same argument, or one for zero.
    fn phase(self) -> Self {
        let r = self.modulus();
        if r == 0.0 {
            Self::one()
        } else {
            self.scale(1.0 / r)
        }
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;
    const WORDS: usize = 1;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self * self
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for c64 {
    const FIELD: Field = Field::Complex;
    const WORDS: usize = 2;

    #[inline]
    fn zero() -> Self {
        c64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        c64::new(1.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        c64::new(x, 0.0)
    }
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        c64::new(re, im)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn conj(self) -> Self {
        c64::new(self.re, -self.im)
    }
    #[inline]
    fn abs_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        c64::new(self.re * s, self.im * s)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Kahan-compensated accumulator. For complex scalars the compensation acts
/// on the real and imaginary parts independently, which is what the generic
/// arithmetic does anyway.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T: Scalar> {
    sum: T,
    carry: T,
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn new() -> Self {
        CompensatedSum { sum: T::zero(), carry: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum
    }
}

/// Compensated `sum_i conj(x_i) * y_i`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = CompensatedSum::new();
    for (&a, &b) in x.iter().zip(y) {
        acc.add(a.conj() * b);
    }
    acc.value()
}

/// Compensated `sum_i x_i * y_i`, no conjugation.
pub fn dot_unconj<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = CompensatedSum::new();
    for (&a, &b) in x.iter().zip(y) {
        acc.add(a * b);
    }
    acc.value()
}

/// Euclidean norm with compensated summation of the squares.
pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    let mut acc = CompensatedSum::<f64>::new();
    for &a in x {
        acc.add(a.abs_sq());
    }
    acc.value().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let naive = (0..10_000).fold(1.0, |s, _| s + 1e-16);
        assert_eq!(naive, 1.0);
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn complex_dot_conjugates_left() {
        let x = [c64::new(0.0, 1.0)];
        let y = [c64::new(0.0, 1.0)];
        assert_eq!(dot(&x, &y), c64::new(1.0, 0.0));
        assert_eq!(dot_unconj(&x, &y), c64::new(-1.0, 0.0));
    }

    #[test]
    fn phase_of_zero_is_one() {
        assert_eq!(c64::zero().phase(), c64::one());
        assert_eq!((-3.0f64).phase(), -1.0);
        let p = c64::new(3.0, 4.0).phase();
        assert!((p - c64::new(0.6, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn field_tags_round_trip() {
        for f in [Field::Real, Field::Complex] {
            assert_eq!(Field::from_tag(f.tag()), Some(f));
        }
        assert_eq!(Field::from_tag(7), None);
    }
}
