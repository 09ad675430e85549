//! Exact rational numbers.
//!
//! Values are kept in lowest terms with a positive denominator. Intermediate
//! products are formed in `i128`, so an operation only fails when the reduced
//! result does not fit back into `i64`; that case panics rather than wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    /// Builds `num / den` in lowest terms. Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "rational with zero denominator");
        Self::reduce(num as i128, den as i128)
    }

    pub const fn from_integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    fn reduce(mut num: i128, mut den: i128) -> Rational {
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        let num = i64::try_from(num).expect("rational numerator overflow");
        let den = i64::try_from(den).expect("rational denominator overflow");
        Rational { num, den }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn recip(&self) -> Rational {
        assert!(self.num != 0, "reciprocal of zero");
        Self::reduce(self.den as i128, self.num as i128)
    }

    pub fn pow(&self, exp: u32) -> Rational {
        let mut acc = Rational::ONE;
        for _ in 0..exp {
            acc = acc * *self;
        }
        acc
    }

    pub fn abs(&self) -> Rational {
        Rational { num: self.num.abs(), den: self.den }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Decimal rendering rounded to `places` digits, for human-readable tables.
    pub fn to_decimal(&self, places: usize) -> String {
        format!("{:.*}", places, self.to_f64())
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_integer(n as i64)
    }
}

impl From<u32> for Rational {
    fn from(n: u32) -> Self {
        Rational::from_integer(n as i64)
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::from_integer(i64::try_from(n).expect("integer too large for rational"))
    }
}

impl Add for Rational {
    type Output = Rational;

    fn add(self, rhs: Rational) -> Rational {
        if self.den == rhs.den {
            if self.den == 1 {
                let num = self.num.checked_add(rhs.num).expect("rational overflow");
                return Rational { num, den: 1 };
            }
            return Self::reduce(self.num as i128 + rhs.num as i128, self.den as i128);
        }
        let num = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        Self::reduce(num, self.den as i128 * rhs.den as i128)
    }
}

impl Sub for Rational {
    type Output = Rational;

    fn sub(self, rhs: Rational) -> Rational {
        self + (-rhs)
    }
}

impl Neg for Rational {
    type Output = Rational;

    fn neg(self) -> Rational {
        Rational { num: -self.num, den: self.den }
    }
}

impl Mul for Rational {
    type Output = Rational;

    fn mul(self, rhs: Rational) -> Rational {
        if self.den == 1 && rhs.den == 1 {
            let num = self.num.checked_mul(rhs.num).expect("rational overflow");
            return Rational { num, den: 1 };
        }
        Self::reduce(
            self.num as i128 * rhs.num as i128,
            self.den as i128 * rhs.den as i128,
        )
    }
}

impl Div for Rational {
    type Output = Rational;

    fn div(self, rhs: Rational) -> Rational {
        assert!(rhs.num != 0, "division by zero rational");
        Self::reduce(
            self.num as i128 * rhs.den as i128,
            self.den as i128 * rhs.num as i128,
        )
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = *self + rhs;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = *self - rhs;
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |a, b| a + *b)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: i64 = n.parse().map_err(|_| err())?;
        let d: i64 = d.parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        Ok(Rational::new(n, d))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl<'de> Visitor<'de> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\", \"p\", or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                i64::try_from(v)
                    .map(Rational::from_integer)
                    .map_err(|_| E::custom("integer out of range"))
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn lowest_terms_positive_denominator() {
        let x = r(6, -4);
        assert_eq!((x.numer(), x.denom()), (-3, 2));
        assert_eq!(r(0, -7), Rational::ZERO);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(r(1, 2) + r(1, 3), r(5, 6));
        assert_eq!(r(1, 2) - r(1, 3), r(1, 6));
        assert_eq!(r(2, 3) * r(3, 4), r(1, 2));
        assert_eq!(r(8, 3) / (Rational::ONE - r(1, 3)), r(4, 1));
        assert_eq!(r(1, 2).pow(3), r(1, 8));
        assert!(r(1, 3) < r(1, 2));
        assert!(r(-1, 2) < Rational::ZERO);
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(r(3, 1).to_string(), "3");
        assert_eq!(r(200, 106).to_string(), "100/53");
        assert_eq!("400/106".parse::<Rational>().unwrap(), r(200, 53));
        assert_eq!(" -7 ".parse::<Rational>().unwrap(), r(-7, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn serde_string_form() {
        let v: Vec<Rational> = serde_json::from_str(r#"["1/2", "3", 4]"#).unwrap();
        assert_eq!(v, vec![r(1, 2), r(3, 1), r(4, 1)]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"["1/2","3","4"]"#);
    }

    proptest! {
        #[test]
        fn field_laws(a in -50i64..50, b in 1i64..20, c in -50i64..50, d in 1i64..20) {
            let x = r(a, b);
            let y = r(c, d);
            prop_assert_eq!(x + y, y + x);
            prop_assert_eq!((x + y) - y, x);
            prop_assert_eq!(x * y, y * x);
            if !y.is_zero() {
                prop_assert_eq!((x / y) * y, x);
            }
            prop_assert_eq!(x < y, (a * d) < (c * b));
            prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x);
        }
    }
}
