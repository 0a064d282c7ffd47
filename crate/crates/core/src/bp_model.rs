//! Brieskorn–Pham data model: the exponent tuple of f = Σ xᵢ^aᵢ, lattice
//! weight vectors, and the two discrepancy functions a_p and h(d).

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{self, Rational};

/// Exponents (a₁,…,a_k) of a Brieskorn–Pham polynomial.
///
/// The input order is kept for labeling coordinates and hyperplanes; the
/// nondecreasing order is kept alongside it and is what search canonicalizes
/// to.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExponentTuple {
    exponents: Vec<u64>,
    sorted: Vec<u64>,
    reciprocal_sum: Rational,
}

impl ExponentTuple {
    pub fn new(exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 exponents, got {}",
                exponents.len()
            )));
        }
        if let Some(&bad) = exponents.iter().find(|&&a| a < 2) {
            return Err(Error::invalid(format!(
                "every exponent must be >= 2 (an exponent of {bad} is not a singular point)"
            )));
        }
        let mut sorted = exponents.clone();
        sorted.sort_unstable();
        let reciprocal_sum = exponents
            .iter()
            .map(|&a| Rational::new(1, a).expect("a >= 2"))
            .sum();
        Ok(ExponentTuple {
            exponents,
            sorted,
            reciprocal_sum,
        })
    }

    /// Exponents in input order.
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Exponents in nondecreasing order.
    pub fn sorted(&self) -> &[u64] {
        &self.sorted
    }

    /// The same singularity with coordinates in nondecreasing order.
    pub fn canonical(&self) -> ExponentTuple {
        ExponentTuple {
            exponents: self.sorted.clone(),
            sorted: self.sorted.clone(),
            reciprocal_sum: self.reciprocal_sum.clone(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.exponents == self.sorted
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Σ 1/aᵢ.
    pub fn reciprocal_sum(&self) -> &Rational {
        &self.reciprocal_sum
    }

    pub fn lcm(&self) -> BigUint {
        numerics::lcm_list(&self.exponents).expect("nonempty, positive")
    }

    pub fn product(&self) -> BigUint {
        numerics::product_list(&self.exponents)
    }

    pub fn is_pairwise_coprime(&self) -> bool {
        numerics::pairwise_coprime(&self.exponents)
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// Parses `"a1,a2,...,ak"`. Surrounding parentheses and spaces are tolerated.
impl FromStr for ExponentTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let exponents = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::invalid(format!("bad exponent {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ExponentTuple::new(exponents)
    }
}

impl Serialize for ExponentTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.exponents.serialize(s)
    }
}

/// A monomial valuation p = (p₁,…,p_k) with nonnegative entries, not all
/// zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    coords: Vec<BigUint>,
}

impl LatticeVector {
    pub fn new(coords: Vec<BigUint>) -> Result<Self> {
        if coords.iter().all(Zero::is_zero) {
            return Err(Error::invalid("lattice vector must have a nonzero coordinate"));
        }
        Ok(LatticeVector { coords })
    }

    pub fn from_u64s(coords: &[u64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| BigUint::from(c)).collect())
    }

    pub fn coords(&self) -> &[BigUint] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// All coordinates ≥ 1.
    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|c| !c.is_zero())
    }

    /// ⟨p, 1⟩.
    pub fn coordinate_sum(&self) -> BigUint {
        self.coords.iter().sum()
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        numerics::ser::big_uint_seq(&self.coords, s)
    }
}

fn check_len(p: &LatticeVector, a: &ExponentTuple) -> Result<()> {
    if p.len() != a.len() {
        return Err(Error::invalid(format!(
            "lattice vector has {} coordinates, tuple has {} exponents",
            p.len(),
            a.len()
        )));
    }
    Ok(())
}

/// p(f) = min over the monomials xᵢ^aᵢ of ⟨p, aᵢeᵢ⟩ = min pᵢaᵢ.
pub fn newton_value(p: &LatticeVector, a: &ExponentTuple) -> Result<BigUint> {
    check_len(p, a)?;
    Ok(p.coords
        .iter()
        .zip(a.exponents())
        .map(|(pi, &ai)| pi * ai)
        .min()
        .expect("k >= 3"))
}

/// a_p = ⟨p, 1⟩ − p(f) − 1.
pub fn discrepancy(p: &LatticeVector, a: &ExponentTuple) -> Result<BigInt> {
    let nv = newton_value(p, a)?;
    Ok(BigInt::from(p.coordinate_sum()) - BigInt::from(nv) - BigInt::one())
}

/// h(d) = Σ ⌈d/aᵢ⌉ − d − 1, a lower bound for a_p over interior p with
/// p(f) = d.
pub fn h(d: &BigInt, a: &ExponentTuple) -> Result<BigInt> {
    if *d < BigInt::one() {
        return Err(Error::invalid(format!("h(d) needs d >= 1, got {d}")));
    }
    let mut total = -d - BigInt::one();
    for &ai in a.exponents() {
        total += numerics::ceil_div(d, &BigInt::from(ai))?;
    }
    Ok(total)
}

#[cfg(test)]
/// Machine-integer h(d). Each ceiling is ≤ d < 2⁶⁴, so the sum of at most
/// 2⁶³ of them cannot overflow i128.
#[inline]
pub(crate) fn h_u64(d: u64, exponents: &[u64]) -> i128 {
    let s: i128 = exponents
        .iter()
        .map(|&ai| i128::from(numerics::ceil_div_u64(d, ai)))
        .sum();
    s - i128::from(d) - 1
}

/// The witness p with pᵢ = ⌈d/aᵢ⌉; p(f) ≥ d and a_p ≤ h(d).
pub fn ceiling_witness(d: &BigInt, a: &ExponentTuple) -> Result<LatticeVector> {
    if *d < BigInt::one() {
        return Err(Error::invalid(format!("witness needs d >= 1, got {d}")));
    }
    let coords = a
        .exponents()
        .iter()
        .map(|&ai| {
            numerics::ceil_div(d, &BigInt::from(ai)).map(|c| c.to_biguint().expect("d >= 1"))
        })
        .collect::<Result<Vec<_>>>()?;
    LatticeVector::new(coords)
}
