//! Exact rational scalars.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational number, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rat(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_int(v: i64) -> Self {
        Rat(BigRational::from_integer(v.into()))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        Rat(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Exact square root when `self` is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Rat> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(Rat::from_big(rn, rd))
        } else {
            None
        }
    }

    /// Rational bounds `lo <= sqrt(self) <= hi` with `hi - lo <= 2^-bits`
    /// (relative to the denominator scale). Exact roots return `lo == hi`.
    pub fn sqrt_bounds(&self, bits: u32) -> (Rat, Rat) {
        assert!(!self.is_negative(), "sqrt of negative rational");
        if let Some(r) = self.sqrt_exact() {
            return (r.clone(), r);
        }
        // sqrt(n/d) = sqrt(n*d) / d; scale by 2^bits for precision.
        let n = self.numer();
        let d = self.denom();
        let scale = BigInt::one() << bits;
        let radicand = n * d * &scale * &scale;
        let floor = radicand.sqrt();
        let denom = d * &scale;
        let lo = Rat::from_big(floor.clone(), denom.clone());
        let hi = Rat::from_big(floor + 1, denom);
        (lo, hi)
    }

    /// The rational with the smallest denominator in `[lo, hi]`, for `0 <= lo <= hi`.
    pub fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
        assert!(!lo.is_negative() && lo <= hi, "need 0 <= lo <= hi");
        let fl = Rat::from_big(lo.floor(), BigInt::one());
        if &fl == lo {
            return fl;
        }
        let next = &fl + &Rat::one();
        if &next <= hi {
            return next;
        }
        // lo and hi share the integer part; recurse on the reciprocals of the fractional parts.
        let inner = Rat::simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
        &fl + &inner.recip()
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| ParseRatError::Malformed(s.to_string()))?;
        let d: BigInt = d.parse().map_err(|_| ParseRatError::Malformed(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseRatError::ZeroDenominator(s.to_string()));
        }
        Ok(Rat(BigRational::new(n, d)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat::from_int(v)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl<'a> Neg for &'a Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_sign() {
        let r = Rat::new(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn parse_rejects_zero_denominator() {
        assert!(matches!("1/0".parse::<Rat>(), Err(ParseRatError::ZeroDenominator(_))));
        assert!(matches!("x/2".parse::<Rat>(), Err(ParseRatError::Malformed(_))));
        assert_eq!("7".parse::<Rat>().unwrap(), Rat::from_int(7));
        assert_eq!(" -2/6 ".parse::<Rat>().unwrap(), Rat::new(-1, 3));
    }

    #[test]
    fn sqrt_exact_and_bounds() {
        assert_eq!(Rat::new(9, 4).sqrt_exact(), Some(Rat::new(3, 2)));
        assert_eq!(Rat::from_int(2).sqrt_exact(), None);
        let (lo, hi) = Rat::from_int(2).sqrt_bounds(64);
        assert!(&lo * &lo <= Rat::from_int(2));
        assert!(&hi * &hi >= Rat::from_int(2));
        assert!(&hi - &lo <= Rat::from_big(BigInt::one(), BigInt::one() << 64));
    }

    #[test]
    fn serde_string_form() {
        let r = Rat::new(5, 3);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"5/3\"");
        let back: Rat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
