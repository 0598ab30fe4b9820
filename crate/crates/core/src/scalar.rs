//! Scalar abstraction shared by every algorithm in the crate.
//!
//! [`Real`] extends [`num_traits::Num`] with the transcendental functions the
//! log-domain arithmetic needs. It is implemented for `f32`, `f64` and the
//! 256-bit [`f256`] type.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use f256::f256;
use num_traits::{Float, Num};

pub trait Real:
    Num + Neg<Output = Self> + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Number of significand bits including the implicit bit.
    const MANTISSA_BITS: u32;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn from_u64(n: u64) -> Self;
    /// Parse a decimal literal rounded once to this precision.
    fn parse_decimal(s: &str) -> Option<Self>;

    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, other: Self) -> Self;
    fn floor(self) -> Self;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn is_finite(self) -> bool;
    fn is_nan(self) -> bool;

    fn pi() -> Self;
    fn epsilon() -> Self;
    fn infinity() -> Self;
    fn neg_infinity() -> Self;

    /// `floor(self)` as an integer, or `None` when negative or beyond `u64`.
    fn floor_u64(self) -> Option<u64> {
        let f = self.floor();
        if !(f >= Self::zero()) || !f.is_finite() {
            return None;
        }
        let x = f.to_f64();
        if x >= 1.8e19 {
            return None;
        }
        // f64 cannot hold every integer below 2^64; walk the last few units.
        let mut k = x as u64;
        while k > 0 && Self::from_u64(k) > f {
            k -= 1;
        }
        while k < u64::MAX && Self::from_u64(k + 1) <= f {
            k += 1;
        }
        Some(k)
    }

    fn cos(self) -> Self {
        self.sin_cos().1
    }

    fn sin(self) -> Self {
        self.sin_cos().0
    }

    fn max(self, other: Self) -> Self {
        if other > self || self.is_nan() {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self || self.is_nan() {
            other
        } else {
            self
        }
    }

    fn ln2() -> Self {
        Self::from_u64(2).ln()
    }

    fn two_pi() -> Self {
        Self::pi() + Self::pi()
    }
}

macro_rules! impl_real_native {
    ($t:ty, $bits:expr) => {
        impl Real for $t {
            const MANTISSA_BITS: u32 = $bits;

            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
            fn from_u64(n: u64) -> Self {
                n as $t
            }
            fn parse_decimal(s: &str) -> Option<Self> {
                s.trim().parse().ok()
            }
            fn exp(self) -> Self {
                Float::exp(self)
            }
            fn exp_m1(self) -> Self {
                Float::exp_m1(self)
            }
            fn ln(self) -> Self {
                Float::ln(self)
            }
            fn ln_1p(self) -> Self {
                Float::ln_1p(self)
            }
            fn sin_cos(self) -> (Self, Self) {
                Float::sin_cos(self)
            }
            fn atan2(self, other: Self) -> Self {
                Float::atan2(self, other)
            }
            fn floor(self) -> Self {
                Float::floor(self)
            }
            fn abs(self) -> Self {
                Float::abs(self)
            }
            fn sqrt(self) -> Self {
                Float::sqrt(self)
            }
            fn is_finite(self) -> bool {
                Float::is_finite(self)
            }
            fn is_nan(self) -> bool {
                Float::is_nan(self)
            }
            fn pi() -> Self {
                <$t as num_traits::FloatConst>::PI()
            }
            fn epsilon() -> Self {
                <$t as Float>::epsilon()
            }
            fn infinity() -> Self {
                <$t as Float>::infinity()
            }
            fn neg_infinity() -> Self {
                <$t as Float>::neg_infinity()
            }
        }
    };
}

impl_real_native!(f32, 24);
impl_real_native!(f64, 53);

impl Real for f256 {
    const MANTISSA_BITS: u32 = 237;

    fn from_f64(x: f64) -> Self {
        f256::from(x)
    }
    fn to_f64(self) -> f64 {
        f256_to_f64(self)
    }
    fn from_u64(n: u64) -> Self {
        f256::from(n as u128)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn exp(self) -> Self {
        f256::exp(&self)
    }
    // The crate's own exp_m1 and ln_1p lose digits (ln_1p is NaN for
    // negative input), so both are rebuilt from exp and ln.
    fn exp_m1(self) -> Self {
        let u = f256::exp(&self);
        let one = f256::ONE;
        if u == one {
            return self;
        }
        let um1 = u - one;
        if um1 == -one || !u.is_finite() {
            return um1;
        }
        um1 * self / f256::ln(&u)
    }
    fn ln(self) -> Self {
        f256::ln(&self)
    }
    fn ln_1p(self) -> Self {
        let one = f256::ONE;
        let u = one + self;
        if u == one {
            return self;
        }
        if !u.is_finite() || u <= f256::ZERO {
            return f256::ln(&u);
        }
        f256::ln(&u) * self / (u - one)
    }
    fn sin_cos(self) -> (Self, Self) {
        f256::sin_cos(&self)
    }
    fn atan2(self, other: Self) -> Self {
        f256::atan2(&self, &other)
    }
    fn floor(self) -> Self {
        f256::floor(&self)
    }
    fn abs(self) -> Self {
        f256::abs(&self)
    }
    fn sqrt(self) -> Self {
        f256::sqrt(self)
    }
    fn is_finite(self) -> bool {
        f256::is_finite(self)
    }
    fn is_nan(self) -> bool {
        f256::is_nan(self)
    }
    fn pi() -> Self {
        ::f256::consts::PI
    }
    fn epsilon() -> Self {
        f256::EPSILON
    }
    fn infinity() -> Self {
        f256::INFINITY
    }
    fn neg_infinity() -> Self {
        f256::NEG_INFINITY
    }
}

/// Round an `f256` to the nearest `f64` by reading its bit pattern
/// (1 sign bit, 19 exponent bits, 236 fraction bits).
fn f256_to_f64(x: f256) -> f64 {
    const EXP_BITS: u32 = 19;
    const BIAS: i64 = (1 << (EXP_BITS - 1)) - 1;
    let bytes = x.to_be_bytes();
    let mut hi_bytes = [0u8; 16];
    hi_bytes.copy_from_slice(&bytes[..16]);
    let hi = u128::from_be_bytes(hi_bytes);
    let lo_nonzero = bytes[16..].iter().any(|&b| b != 0);

    let negative = hi >> 127 == 1;
    let biased = ((hi >> 108) & ((1 << EXP_BITS) - 1)) as i64;
    let frac_hi = hi & ((1u128 << 108) - 1);
    let sign = if negative { -1.0 } else { 1.0 };

    if biased == (1 << EXP_BITS) - 1 {
        return if frac_hi != 0 || lo_nonzero {
            f64::NAN
        } else {
            sign * f64::INFINITY
        };
    }
    if biased == 0 {
        return sign * 0.0;
    }
    let e = biased - BIAS;
    if e > 1023 {
        return sign * f64::INFINITY;
    }
    let mant = (frac_hi >> 56) as u64;
    let round = ((frac_hi >> 55) & 1) as u64;
    if e < -1022 {
        // Subnormal range: scale a rounded 53-bit value.
        let m = ((1u64 << 52) | mant) as f64 + round as f64;
        return sign * m * 2f64.powi(-600) * 2f64.powi((e - 52 + 600) as i32);
    }
    let bits = (((e + 1023) as u64) << 52 | mant) + round;
    let v = f64::from_bits(bits);
    if negative {
        -v
    } else {
        v
    }
}

/// `x` rounded to `T` from its shortest decimal form, so `0.003` means the
/// decimal 0.003 rather than the nearest double.
pub fn lift<T: Real>(x: f64) -> T {
    T::parse_decimal(&format!("{x}")).unwrap_or_else(|| T::from_f64(x))
}

/// `ln(e^a + e^b)` without overflow; `-inf` acts as the identity.
pub fn ln_add_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == T::neg_infinity() {
        return hi;
    }
    if !hi.is_finite() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + e^x)`.
pub fn ln_1p_exp<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(e^t + c)` for `c > 0`; `t = -inf` gives `ln c`.
pub fn ln_exp_plus<T: Real>(t: T, c: T) -> T {
    let lc = c.ln();
    ln_add_exp(t, lc)
}

/// `ln(e^a - e^b)` for `a > b`.
pub fn ln_sub_exp<T: Real>(a: T, b: T) -> T {
    if b == T::neg_infinity() {
        return a;
    }
    a + (-(b - a).exp_m1()).ln()
}

/// Logarithm of a sum of exponentials.
pub fn ln_sum_exp<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let xs: Vec<T> = xs.into_iter().collect();
    let mut hi = T::neg_infinity();
    for &x in &xs {
        hi = hi.max(x);
    }
    if !hi.is_finite() {
        return hi;
    }
    let mut s = T::zero();
    for &x in &xs {
        s = s + (x - hi).exp();
    }
    hi + s.ln()
}

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let tau = T::two_pi();
    let pi = T::pi();
    if x > -pi && x <= pi {
        return x;
    }
    let k = ((x + pi) / tau).floor();
    let mut y = x - k * tau;
    if y <= -pi {
        y = y + tau;
    } else if y > pi {
        y = y - tau;
    }
    y
}

/// `sum_{j=2}^{n} ln j`.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    let mut s = T::zero();
    for j in 2..=n {
        s = s + T::from_u64(j).ln();
    }
    s
}

/// Precision tiers reachable through [`Real`] implementations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Single,
    Double,
    Octuple,
}

impl Precision {
    /// Smallest tier holding at least `bits` significand bits.
    pub fn for_bits(bits: u32) -> Option<Self> {
        match bits {
            0 => None,
            1..=24 => Some(Precision::Single),
            25..=53 => Some(Precision::Double),
            54..=237 => Some(Precision::Octuple),
            _ => None,
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Precision::Single => f32::MANTISSA_BITS,
            Precision::Double => f64::MANTISSA_BITS,
            Precision::Octuple => f256::MANTISSA_BITS,
        }
    }
}
