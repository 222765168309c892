//! Exact scalar abstraction.
//!
//! Every probability in the crate is carried by a [`Scalar`]: an ordered,
//! exactly-comparable field element. The trait is implemented for
//! arbitrary-precision rationals ([`num_rational::BigRational`], the default
//! used by the crate-root aliases) and for fixed-width rationals
//! ([`num_rational::Rational64`], faster but able to overflow on large
//! denominators). Floating-point types are deliberately not scalars: the
//! feasibility verdicts below depend on exact equality.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Ord + Hash + Debug + Display + Num + Signed + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self;

    /// Parses an integer literal (optional sign, decimal digits).
    fn parse_integer(s: &str) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Numerator and denominator as decimal strings, lowest terms,
    /// positive denominator.
    fn fraction_parts(&self) -> (String, String);

    fn from_frac(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn from_usize(v: usize) -> Self {
        Self::from_int(i64::try_from(v).expect("count fits in i64"))
    }

    /// Exact parse of `"p/q"`, `"p"`, or a decimal literal such as `"0.35"`
    /// or `"1.5e-3"`.
    fn parse_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if let Some((num, den)) = s.split_once('/') {
            let num = Self::parse_exact(num)?;
            let den = Self::parse_exact(den)?;
            if den.is_zero() {
                return None;
            }
            return Some(num / den);
        }
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (negative, unsigned) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = unsigned.split_once('.').unwrap_or((unsigned, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let mut value = Self::parse_integer(if digits.is_empty() { "0" } else { &digits })?;
        let shift = exponent - i32::try_from(frac_part.len()).ok()?;
        let ten = Self::from_int(10);
        for _ in 0..shift.unsigned_abs() {
            if shift > 0 {
                value = value * ten.clone();
            } else {
                value = value / ten.clone();
            }
        }
        Some(if negative { -value } else { value })
    }

    /// Canonical text form: `"p/q"`, or `"p"` when the denominator is one.
    fn to_canonical_string(&self) -> String {
        let (num, den) = self.fraction_parts();
        if den == "1" {
            num
        } else {
            format!("{num}/{den}")
        }
    }

    /// Decimal rendering rounded half away from zero to `digits` places.
    fn to_decimal_string(&self, digits: usize) -> String {
        let (num, den) = self.fraction_parts();
        let num: BigInt = num.parse().expect("integer numerator");
        let den: BigInt = den.parse().expect("integer denominator");
        let negative = num.is_negative();
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = num.abs() * &scale;
        let mut q = &scaled / &den;
        let r = &scaled % &den;
        if r * 2 >= den {
            q += 1;
        }
        let int_part = &q / &scale;
        let frac_part = &q % &scale;
        let sign = if negative && !q.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = digits)
        }
    }

    fn is_integer_value(&self) -> bool {
        self.fraction_parts().1 == "1"
    }

    /// The value as a non-negative machine integer, when it is one.
    fn to_index(&self) -> Option<usize> {
        if self.is_integer_value() {
            self.fraction_parts().0.parse().ok()
        } else {
            None
        }
    }

    fn is_probability(&self) -> bool {
        !self.is_negative() && *self <= Self::one()
    }
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn parse_integer(s: &str) -> Option<Self> {
        s.parse::<BigInt>().ok().map(BigRational::from_integer)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn fraction_parts(&self) -> (String, String) {
        (self.numer().to_string(), self.denom().to_string())
    }
}

impl Scalar for Rational64 {
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }

    fn parse_integer(s: &str) -> Option<Self> {
        s.parse::<i64>().ok().map(Rational64::from_integer)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn fraction_parts(&self) -> (String, String) {
        (self.numer().to_string(), self.denom().to_string())
    }
}

/// Binomial coefficient `C(n, k)` computed exactly in `T`.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize(n - i) / T::from_usize(i + 1);
    }
    acc
}

/// `base^exp` for a non-negative integer exponent.
pub fn pow<T: Scalar>(base: &T, exp: usize) -> T {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}
