//! The weighted blow-up with weights ∝ (1/a₁,…,1/a_k) and the log Fano pair
//! it induces on the exceptional divisor: ℙ^{k−2} with k generic hyperplanes
//! carrying coefficients (aᵢ−1)/aᵢ.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bp_model::{self, ExponentTuple, LatticeVector};
use crate::error::{Error, Result};
use crate::numerics::{ser, Rational};

/// Primitive weights making f quasi-homogeneous: wᵢ·aᵢ = level for every i.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightVector {
    #[serde(serialize_with = "ser::big_uint_seq")]
    pub weights: Vec<BigUint>,
    #[serde(serialize_with = "ser::big_uint")]
    pub level: BigUint,
}

impl WeightVector {
    pub fn as_lattice_vector(&self) -> LatticeVector {
        LatticeVector::new(self.weights.clone()).expect("weights are positive")
    }
}

/// (ℙ^N, Σ cᵢHᵢ) with the Hᵢ in general position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogFanoPair {
    pub projective_dim: usize,
    pub coefficients: Vec<Rational>,
    pub anticanonical_degree: usize,
    pub labels: Vec<String>,
}

impl LogFanoPair {
    pub fn new(projective_dim: usize, coefficients: Vec<Rational>) -> Result<Self> {
        if projective_dim == 0 {
            return Err(Error::invalid("projective dimension must be >= 1"));
        }
        if coefficients.iter().any(Rational::is_negative) {
            return Err(Error::invalid("boundary coefficients must be >= 0"));
        }
        let labels = (1..=coefficients.len()).map(|i| format!("H{i}")).collect();
        Ok(LogFanoPair {
            projective_dim,
            coefficients,
            anticanonical_degree: projective_dim + 1,
            labels,
        })
    }

    pub fn coefficient_sum(&self) -> Rational {
        self.coefficients.iter().sum()
    }

    pub fn degree(&self) -> Rational {
        Rational::from_integer(self.anticanonical_degree as i64)
    }
}

pub fn blowup_weights(a: &ExponentTuple) -> WeightVector {
    let l = a.lcm();
    let raw: Vec<BigUint> = a.exponents().iter().map(|&ai| &l / ai).collect();
    let g = raw.iter().fold(BigUint::zero(), |g, w| g.gcd(w));
    let weights: Vec<BigUint> = raw.into_iter().map(|w| w / &g).collect();
    WeightVector {
        weights,
        level: l / g,
    }
}

/// a_w for the primitive blow-up weights w: Σwᵢ − min wᵢaᵢ − 1.
pub fn exceptional_discrepancy(a: &ExponentTuple) -> Rational {
    let w = blowup_weights(a).as_lattice_vector();
    Rational::from_integer(bp_model::discrepancy(&w, a).expect("same length"))
}

/// Same quantity at the unprimitivized weights L/aᵢ: ΣL/aᵢ − L − 1.
pub fn unprimitivized_discrepancy(a: &ExponentTuple) -> BigInt {
    let l = a.lcm();
    let sum: BigUint = a.exponents().iter().map(|&ai| &l / ai).sum();
    BigInt::from(sum) - BigInt::from(l) - BigInt::one()
}

pub fn diff_boundary(a: &ExponentTuple) -> LogFanoPair {
    let coefficients = a
        .exponents()
        .iter()
        .map(|&ai| Rational::new(ai - 1, ai).expect("a >= 2"))
        .collect();
    LogFanoPair::new(a.len() - 2, coefficients).expect("k >= 3 and coefficients in [0, 1)")
}

/// −(K + Σcᵢhᵢ) is ample on ℙ^N iff Σcᵢ < N + 1.
pub fn is_log_fano(pair: &LogFanoPair) -> bool {
    pair.coefficient_sum() < pair.degree()
}
