//! Second-order forward-mode dual numbers.
//!
//! A [`Dual2`] carries a value together with its first and second derivative
//! along a single seed direction. Arithmetic propagates both by the product
//! and chain rules, so a scalar expression evaluated on `Dual2` inputs yields
//! exact derivatives up to rounding.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Numeric type the network can be evaluated over.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn exp(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    /// `sign(z) * |z|^q`.
    fn signed_pow(self, q: f64) -> Self;
    /// `x / (1 + e^{-x})`.
    fn silu(self) -> Self;
    /// Derivative of [`Scalar::silu`].
    fn silu_prime(self) -> Self;

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

/// Numerically stable logistic function.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// silu and its first three derivatives at `x`.
#[inline]
fn silu_derivatives(x: f64) -> [f64; 4] {
    let s = sigmoid(x);
    let s1 = s * (1.0 - s);
    let s2 = s1 * (1.0 - 2.0 * s);
    let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
    [x * s, s + x * s1, 2.0 * s1 + x * s2, 3.0 * s2 + x * s3]
}

impl Scalar for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn signed_pow(self, q: f64) -> Self {
        if q == 1.0 {
            self
        } else {
            self.signum() * self.abs().powf(q)
        }
    }
    #[inline]
    fn silu(self) -> Self {
        self * sigmoid(self)
    }
    #[inline]
    fn silu_prime(self) -> Self {
        let s = sigmoid(self);
        s * (1.0 + self * (1.0 - s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    /// The independent variable: derivative one, curvature zero.
    pub const fn variable(value: f64) -> Self {
        Self { value, d1: 1.0, d2: 0.0 }
    }

    pub const fn constant(value: f64) -> Self {
        Self { value, d1: 0.0, d2: 0.0 }
    }

    /// Apply a scalar function given its value and first two derivatives at `self.value`.
    #[inline]
    pub fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Self { value: f, d1: df * self.d1, d2: ddf * self.d1 * self.d1 + df * self.d2 }
    }

    #[inline]
    pub fn recip(self) -> Self {
        let inv = 1.0 / self.value;
        self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
    }
}

impl Add for Dual2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Dual2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Dual2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Dual2 {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl Neg for Dual2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.d1, -self.d2)
    }
}

impl Add<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Self::new(self.value + o, self.d1, self.d2)
    }
}

impl Sub<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Self::new(self.value - o, self.d1, self.d2)
    }
}

impl Mul<f64> for Dual2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        Self::new(self.value * o, self.d1 * o, self.d2 * o)
    }
}

impl AddAssign for Dual2 {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.value += o.value;
        self.d1 += o.d1;
        self.d2 += o.d2;
    }
}

impl Scalar for Dual2 {
    #[inline]
    fn constant(v: f64) -> Self {
        Dual2::constant(v)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.value
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn signed_pow(self, q: f64) -> Self {
        if q == 1.0 {
            return self;
        }
        let a = self.value.abs();
        if a == 0.0 {
            return Dual2::constant(0.0);
        }
        let s = self.value.signum();
        let f = s * a.powf(q);
        let df = q * a.powf(q - 1.0);
        let ddf = s * q * (q - 1.0) * a.powf(q - 2.0);
        self.chain(f, df, ddf)
    }
    #[inline]
    fn silu(self) -> Self {
        let [f, df, ddf, _] = silu_derivatives(self.value);
        self.chain(f, df, ddf)
    }
    #[inline]
    fn silu_prime(self) -> Self {
        let [_, df, ddf, dddf] = silu_derivatives(self.value);
        self.chain(df, ddf, dddf)
    }
}
