//! Exact integer and rational arithmetic.
//!
//! Everything downstream works on [`BigInt`] and [`Rational`]; there is no
//! floating point anywhere in the crate. A few hot loops use fixed-width
//! integers where the bounds make overflow impossible.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number, always in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Self> {
        let den = denominator.into();
        if den.is_zero() {
            return Err(Error::invalid("rational with zero denominator"));
        }
        Ok(Rational(BigRational::new(numerator.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::invalid("reciprocal of zero"));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `"num/den"` or a bare integer.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::invalid(format!("not a rational: {s:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse(n)?, parse(d)?),
            None => Ok(Rational::from_integer(parse(s)?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division by zero panics, as with the underlying type. Use `recip` for a
// checked inverse.
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, r| acc + r)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, r| acc + r)
    }
}

/// Least integer ≥ a/b.
pub fn ceil_div(a: &BigInt, b: &BigInt) -> Result<BigInt> {
    if !b.is_positive() {
        return Err(Error::invalid(format!("ceil_div divisor must be positive, got {b}")));
    }
    Ok(Integer::div_ceil(a, b))
}

/// ⌈a/b⌉ for nonnegative machine integers; `b` must be nonzero.
#[inline]
pub(crate) fn ceil_div_u64(a: u64, b: u64) -> u64 {
    a / b + u64::from(!a.is_multiple_of(b))
}

/// Greatest integer ≤ n·r.
pub fn floor_scale(r: &Rational, n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::invalid("floor_scale needs n >= 1"));
    }
    let scaled = r.numer() * BigInt::from(n);
    Ok(Integer::div_floor(&scaled, r.denom()))
}

/// Least common multiple of a nonempty list of positive integers.
pub fn lcm_list(values: &[u64]) -> Result<BigUint> {
    if values.is_empty() {
        return Err(Error::invalid("lcm of an empty list"));
    }
    let mut acc = BigUint::one();
    for &v in values {
        if v == 0 {
            return Err(Error::invalid("lcm entries must be positive"));
        }
        acc = acc.lcm(&BigUint::from(v));
    }
    Ok(acc)
}

/// Product of a list of positive integers, exact.
pub fn product_list(values: &[u64]) -> BigUint {
    values.iter().fold(BigUint::one(), |acc, &v| acc * BigUint::from(v))
}

/// True when every pair of entries is coprime.
pub fn pairwise_coprime(values: &[u64]) -> bool {
    values.iter().enumerate().all(|(i, &x)| {
        values[i + 1..].iter().all(|&y| x.gcd(&y) == 1)
    })
}

/// Serde helpers that write big integers as JSON numbers when they fit in
/// 128 bits and as decimal strings otherwise.
pub(crate) mod ser {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn big_int<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        match n.to_i128() {
            Some(v) => s.serialize_i128(v),
            None => s.collect_str(n),
        }
    }

    pub fn big_uint<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        match n.to_u128() {
            Some(v) => s.serialize_u128(v),
            None => s.collect_str(n),
        }
    }

    pub fn opt_big_int<S: Serializer>(
        n: &Option<BigInt>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match n {
            Some(v) => big_int(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn opt_big_uint<S: Serializer>(
        n: &Option<BigUint>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match n {
            Some(v) => big_uint(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn big_int_seq<S: Serializer>(
        v: &[BigInt],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        struct Elem<'a>(&'a BigInt);
        impl Serialize for Elem<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                big_int(self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Elem(x))?;
        }
        seq.end()
    }

    pub fn big_uint_seq<S: Serializer>(
        v: &[BigUint],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        struct Elem<'a>(&'a BigUint);
        impl Serialize for Elem<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                big_uint(self.0, s)
            }
        }
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Elem(x))?;
        }
        seq.end()
    }
}
