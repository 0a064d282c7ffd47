//! Log canonicity of generic hyperplane arrangements in ℙ^N, coefficient
//! bounds for ℚ-complements, and n-complements built by the rounding
//! cᵢ′ = ⌊(n+1)cᵢ⌋/n.
//!
//! For hyperplanes in general position a flat cut out by s ≤ N of them has
//! codimension s, and the pair is lc (klt) along it iff the sum of their
//! coefficients is ≤ s (< s). Only the s largest coefficients matter.

use std::fmt;
use std::num::NonZeroU64;

use num_bigint::BigInt;
use serde::Serialize;

use crate::blowup::LogFanoPair;
use crate::error::{Error, Result};
use crate::numerics::{floor_scale, ser, Rational};

/// Hyperplanes in general position in ℙ^N with nonnegative coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    projective_dim: usize,
    coefficients: Vec<Rational>,
}

impl Arrangement {
    pub fn new(projective_dim: usize, coefficients: Vec<Rational>) -> Result<Self> {
        if projective_dim == 0 {
            return Err(Error::invalid("arrangement needs projective dimension >= 1"));
        }
        if coefficients.iter().any(Rational::is_negative) {
            return Err(Error::invalid("arrangement coefficients must be >= 0"));
        }
        Ok(Arrangement {
            projective_dim,
            coefficients,
        })
    }

    pub fn projective_dim(&self) -> usize {
        self.projective_dim
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// t·D for a positive rational t.
    pub fn scaled(&self, t: &Rational) -> Result<Self> {
        if t.is_negative() || t.is_zero() {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(Arrangement {
            projective_dim: self.projective_dim,
            coefficients: self.coefficients.iter().map(|c| c * t).collect(),
        })
    }

    /// M_s for s = 1..=min(N, m): the largest sum of s coefficients.
    fn top_sums(&self) -> Vec<Rational> {
        let mut sorted = self.coefficients.clone();
        sorted.sort_unstable_by(|x, y| y.cmp(x));
        let mut acc = Rational::zero();
        sorted
            .into_iter()
            .take(self.projective_dim)
            .map(|c| {
                acc = &acc + &c;
                acc.clone()
            })
            .collect()
    }
}

impl From<&LogFanoPair> for Arrangement {
    fn from(pair: &LogFanoPair) -> Self {
        Arrangement {
            projective_dim: pair.projective_dim,
            coefficients: pair.coefficients.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LcStatus {
    #[serde(rename = "KLT")]
    Klt,
    #[serde(rename = "LC_NOT_KLT")]
    LcNotKlt,
    #[serde(rename = "NOT_LC")]
    NotLc,
}

impl fmt::Display for LcStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LcStatus::Klt => "KLT",
            LcStatus::LcNotKlt => "LC_NOT_KLT",
            LcStatus::NotLc => "NOT_LC",
        })
    }
}

/// The flat of codimension `subset_size` where M_s − s is largest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flat {
    pub subset_size: usize,
    pub coefficient_sum: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LcReport {
    pub status: LcStatus,
    /// None only for the empty arrangement.
    pub worst_flat: Option<Flat>,
}

pub fn lc_status(arr: &Arrangement) -> LcReport {
    let sums = arr.top_sums();
    let mut status = LcStatus::Klt;
    let mut worst: Option<(Rational, Flat)> = None;
    for (i, m) in sums.into_iter().enumerate() {
        let s = Rational::from_integer(i as i64 + 1);
        let excess = &m - &s;
        if m > s {
            status = LcStatus::NotLc;
        } else if m == s && status == LcStatus::Klt {
            status = LcStatus::LcNotKlt;
        }
        if worst.as_ref().is_none_or(|(e, _)| excess > *e) {
            worst = Some((
                excess,
                Flat {
                    subset_size: i + 1,
                    coefficient_sum: m,
                },
            ));
        }
    }
    LcReport {
        status,
        worst_flat: worst.map(|(_, f)| f),
    }
}

/// Log canonical threshold: min over s of s/M_s. None when every coefficient
/// is zero (the threshold is infinite).
pub fn lct(arr: &Arrangement) -> Option<Rational> {
    arr.top_sums()
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_zero())
        .map(|(i, m)| Rational::from_integer(i as i64 + 1) / m)
        .min()
}

/// Largest coefficients a ℚ-complement can put on each boundary hyperplane
/// and on any extra component of degree ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientBounds {
    pub d_max: Rational,
    pub h_max: Vec<Rational>,
    pub pass: bool,
    /// The pair was not log Fano, so the bounds say little.
    pub not_log_fano: bool,
}

pub fn complement_coefficient_bounds(pair: &LogFanoPair) -> CoefficientBounds {
    let total = pair.coefficient_sum();
    let degree = pair.degree();
    let d_max = &degree - &total;
    let h_max: Vec<Rational> = pair.coefficients.iter().map(|c| &d_max + c).collect();
    let one = Rational::one();
    let pass = d_max < one && h_max.iter().all(|h| *h < one);
    CoefficientBounds {
        d_max,
        h_max,
        pass,
        not_log_fano: !crate::blowup::is_log_fano(pair),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementDivisor {
    pub index: u64,
    /// ⌊(n+1)cᵢ⌋/n on the original hyperplanes.
    pub rounded_coefficients: Vec<Rational>,
    /// n·cᵢ′, i.e. the numerators over the common denominator n.
    #[serde(serialize_with = "ser::big_int_seq")]
    pub scaled_numerators: Vec<BigInt>,
    /// Coefficients of extra general hyperplanes needed to reach degree N+1.
    pub padding: Vec<Rational>,
    pub total_degree: Rational,
    pub lc: LcReport,
}

/// Why the rounding construction gave no n-complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason")]
pub enum ComplementFailure {
    /// Some cᵢ′ < cᵢ.
    #[serde(rename = "MONOTONICITY")]
    Monotonicity { hyperplane: usize },
    /// Σcᵢ′ > N + 1.
    #[serde(rename = "OVERFLOW")]
    Overflow { excess: Rational },
    #[serde(rename = "NOT_LC")]
    NotLc { worst_flat: Option<Flat> },
}

impl ComplementFailure {
    pub fn code(&self) -> &'static str {
        match self {
            ComplementFailure::Monotonicity { .. } => "MONOTONICITY",
            ComplementFailure::Overflow { .. } => "OVERFLOW",
            ComplementFailure::NotLc { .. } => "NOT_LC",
        }
    }
}

impl fmt::Display for ComplementFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplementFailure::Monotonicity { hyperplane } => {
                write!(f, "MONOTONICITY (rounding lowers H{})", hyperplane + 1)
            }
            ComplementFailure::Overflow { excess } => {
                write!(f, "OVERFLOW (degree exceeded by {excess})")
            }
            ComplementFailure::NotLc { .. } => f.write_str("NOT_LC"),
        }
    }
}

pub fn n_complement(
    pair: &LogFanoPair,
    n: NonZeroU64,
) -> std::result::Result<ComplementDivisor, ComplementFailure> {
    let n = n.get();
    let n_rat = Rational::from_integer(n as i64);
    let mut scaled_numerators = Vec::with_capacity(pair.coefficients.len());
    let mut rounded = Vec::with_capacity(pair.coefficients.len());
    for (i, c) in pair.coefficients.iter().enumerate() {
        let num = floor_scale(c, n + 1).expect("n + 1 >= 1");
        let r = Rational::from_integer(num.clone()) / n_rat.clone();
        if r < *c {
            return Err(ComplementFailure::Monotonicity { hyperplane: i });
        }
        scaled_numerators.push(num);
        rounded.push(r);
    }

    let degree = pair.degree();
    let mut deficit = &degree - &rounded.iter().sum::<Rational>();
    if deficit.is_negative() {
        return Err(ComplementFailure::Overflow { excess: -deficit });
    }

    let one = Rational::one();
    let mut padding = Vec::new();
    while !deficit.is_zero() {
        let piece = if deficit > one { one.clone() } else { deficit.clone() };
        deficit = &deficit - &piece;
        padding.push(piece);
    }

    let mut all = rounded.clone();
    all.extend(padding.iter().cloned());
    let total_degree: Rational = all.iter().sum();
    let arr = Arrangement::new(pair.projective_dim, all).expect("coefficients are >= 0");
    let lc = lc_status(&arr);
    if lc.status == LcStatus::NotLc {
        return Err(ComplementFailure::NotLc {
            worst_flat: lc.worst_flat,
        });
    }
    Ok(ComplementDivisor {
        index: n,
        rounded_coefficients: rounded,
        scaled_numerators,
        padding,
        total_degree,
        lc,
    })
}

/// Smallest n ≤ n_max for which the rounding construction succeeds.
pub fn minimal_complement_index(
    pair: &LogFanoPair,
    n_max: NonZeroU64,
) -> Option<(u64, ComplementDivisor)> {
    (1..=n_max.get()).find_map(|n| {
        let n = NonZeroU64::new(n).expect("n >= 1");
        n_complement(pair, n).ok().map(|d| (d.index, d))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::diff_boundary;
    use crate::bp_model::ExponentTuple;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn nz(n: u64) -> NonZeroU64 {
        NonZeroU64::new(n).unwrap()
    }

    fn pair_of(a: &[u64]) -> LogFanoPair {
        diff_boundary(&ExponentTuple::new(a.to_vec()).unwrap())
    }

    /// Independent oracle: every subset of size s ≤ N is a flat of
    /// codimension s; lc iff each subset sum ≤ s, klt iff < s.
    fn subset_oracle(n_dim: usize, c: &[Rational]) -> (LcStatus, Option<Rational>) {
        let m = c.len();
        let mut status = LcStatus::Klt;
        let mut threshold: Option<Rational> = None;
        for mask in 1u32..(1 << m) {
            let s = mask.count_ones() as usize;
            if s > n_dim {
                continue;
            }
            let sum: Rational = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| c[i].clone()).sum();
            let s_r = Rational::from_integer(s as i64);
            if sum > s_r {
                status = LcStatus::NotLc;
            } else if sum == s_r && status == LcStatus::Klt {
                status = LcStatus::LcNotKlt;
            }
            if !sum.is_zero() {
                let t = s_r / sum;
                if threshold.as_ref().is_none_or(|x| t < *x) {
                    threshold = Some(t);
                }
            }
        }
        (status, threshold)
    }

    #[test]
    fn lc_status_examples() {
        let arr = Arrangement::new(3, vec![r(11, 22), r(15, 22), r(20, 22), r(21, 22), r(21, 22)]).unwrap();
        assert_eq!(lc_status(&arr).status, LcStatus::Klt);

        let arr = Arrangement::new(3, vec![r(1, 1); 4]).unwrap();
        assert_eq!(lc_status(&arr).status, LcStatus::LcNotKlt);

        let arr = Arrangement::new(1, vec![r(3, 2)]).unwrap();
        let rep = lc_status(&arr);
        assert_eq!(rep.status, LcStatus::NotLc);
        assert_eq!(
            rep.worst_flat,
            Some(Flat {
                subset_size: 1,
                coefficient_sum: r(3, 2)
            })
        );
    }

    #[test]
    fn worst_flat_prefers_smallest_s_on_ties() {
        // M_1 − 1 = 1/2, M_2 − 2 = 1/2
        let arr = Arrangement::new(2, vec![r(3, 2), r(1, 1)]).unwrap();
        assert_eq!(lc_status(&arr).worst_flat.unwrap().subset_size, 1);
        // subsets larger than N are not flats
        let arr = Arrangement::new(1, vec![r(9, 10); 6]).unwrap();
        assert_eq!(lc_status(&arr).status, LcStatus::Klt);
    }

    #[test]
    fn empty_arrangement() {
        let arr = Arrangement::new(2, vec![]).unwrap();
        let rep = lc_status(&arr);
        assert_eq!(rep.status, LcStatus::Klt);
        assert_eq!(rep.worst_flat, None);
        assert_eq!(lct(&arr), None);
        assert_eq!(lct(&Arrangement::new(2, vec![r(0, 1); 3]).unwrap()), None);
    }

    #[test]
    fn arrangement_validation() {
        assert!(Arrangement::new(0, vec![]).is_err());
        assert!(Arrangement::new(1, vec![r(-1, 3)]).is_err());
    }

    #[test]
    fn lct_examples() {
        assert_eq!(lct(&Arrangement::new(3, vec![r(1, 1); 4]).unwrap()), Some(r(1, 1)));
        assert_eq!(lct(&Arrangement::new(1, vec![r(2, 1)]).unwrap()), Some(r(1, 2)));
        let arr = Arrangement::from(&pair_of(&[2, 3, 11, 17, 19]));
        let (_, oracle) = subset_oracle(3, arr.coefficients());
        // frozen from the subset oracle: the largest single coefficient 18/19 binds
        assert_eq!(oracle, Some(r(19, 18)));
        assert_eq!(lct(&arr), Some(r(19, 18)));
    }

    #[test]
    fn bounds_examples() {
        let b = complement_coefficient_bounds(&pair_of(&[2, 3, 11, 17, 19]));
        assert_eq!(b.d_max, r(761, 21318));
        assert_eq!(b.h_max[0], r(11420, 21318));
        assert!(b.pass);
        assert!(!b.not_log_fano);

        let b = complement_coefficient_bounds(&pair_of(&[2, 2, 3, 3, 3]));
        assert_eq!(b.h_max[0], r(3, 2));
        assert!(!b.pass);

        let zero = LogFanoPair::new(3, vec![r(0, 1); 5]).unwrap();
        let b = complement_coefficient_bounds(&zero);
        assert_eq!(b.d_max, r(4, 1));
        assert!(!b.pass);

        let fat = LogFanoPair::new(3, vec![r(1, 1); 5]).unwrap();
        assert!(complement_coefficient_bounds(&fat).not_log_fano);
    }

    #[test]
    fn twenty_two_complement() {
        let d = n_complement(&pair_of(&[2, 3, 11, 17, 19]), nz(22)).unwrap();
        assert_eq!(
            d.rounded_coefficients,
            vec![r(11, 22), r(15, 22), r(20, 22), r(21, 22), r(21, 22)]
        );
        let nums: Vec<BigInt> = [11, 15, 20, 21, 21].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(d.scaled_numerators, nums);
        assert!(d.padding.is_empty());
        assert_eq!(d.total_degree, r(4, 1));
        assert_eq!(d.lc.status, LcStatus::Klt);
    }

    #[test]
    fn overflow_failures() {
        let p = pair_of(&[2, 3, 11, 17, 19]);
        assert_eq!(n_complement(&p, nz(21)).unwrap_err().code(), "OVERFLOW");
        assert_eq!(
            n_complement(&p, nz(21)).unwrap_err(),
            ComplementFailure::Overflow { excess: r(1, 21) }
        );
        assert_eq!(n_complement(&p, nz(1)).unwrap_err().code(), "OVERFLOW");
    }

    #[test]
    fn monotonicity_failure() {
        // ⌊3·(3/5)⌋/2 = 1/2 < 3/5
        let p = LogFanoPair::new(2, vec![r(3, 5)]).unwrap();
        assert_eq!(
            n_complement(&p, nz(2)).unwrap_err(),
            ComplementFailure::Monotonicity { hyperplane: 0 }
        );
    }

    #[test]
    fn not_lc_failure() {
        // rounding keeps a coefficient above 1
        let p = LogFanoPair::new(3, vec![r(3, 2)]).unwrap();
        assert_eq!(n_complement(&p, nz(2)).unwrap_err().code(), "NOT_LC");
    }

    #[test]
    fn known_minimal_indices() {
        let cases: [(&[u64], u64); 6] = [
            (&[2, 3, 11, 17, 19], 22),
            (&[2, 3, 11, 17, 23], 24),
            (&[2, 3, 11, 17, 25], 34),
            (&[2, 3, 11, 17, 29], 34),
            (&[2, 5, 7, 9, 11], 22),
            (&[2, 5, 7, 9, 13], 28),
        ];
        for (a, expected) in cases {
            let pair = pair_of(a);
            let (n, d) = minimal_complement_index(&pair, nz(100)).unwrap();
            assert_eq!(n, expected, "{a:?}");
            assert_eq!(d.lc.status, LcStatus::Klt, "{a:?}");
            assert_eq!(d.total_degree, r(4, 1));
            let b = complement_coefficient_bounds(&pair);
            for (h, c) in b.h_max.iter().zip(&d.rounded_coefficients) {
                assert!(c <= h, "{a:?}: rounded {c} above bound {h}");
                assert!(*c < Rational::one());
            }
        }
    }

    #[test]
    fn zero_boundary_pads_with_unit_hyperplanes() {
        let p = LogFanoPair::new(3, vec![r(0, 1); 5]).unwrap();
        let (n, d) = minimal_complement_index(&p, nz(100)).unwrap();
        assert_eq!(n, 1);
        assert_eq!(d.padding, vec![r(1, 1); 4]);
        assert_eq!(d.lc.status, LcStatus::LcNotKlt);
        assert_eq!(d.total_degree, r(4, 1));
    }

    #[test]
    fn fractional_padding_remainder() {
        // ℙ¹ with a single 1/2: n=2 rounds to ⌊3/2⌋/2 = 1/2, deficit 3/2
        let p = LogFanoPair::new(1, vec![r(1, 2)]).unwrap();
        let d = n_complement(&p, nz(2)).unwrap();
        assert_eq!(d.padding, vec![r(1, 1), r(1, 2)]);
        assert_eq!(d.total_degree, r(2, 1));
    }

    #[test]
    fn exhausted_search_is_none() {
        assert!(minimal_complement_index(&pair_of(&[2, 3, 11, 17, 19]), nz(21)).is_none());
    }

    fn arb_arrangement() -> impl Strategy<Value = Arrangement> {
        (1usize..5, prop::collection::vec((0i64..40, 1i64..20), 0..7)).prop_map(|(n, cs)| {
            Arrangement::new(n, cs.into_iter().map(|(p, q)| r(p, q)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn lc_status_matches_subset_oracle(arr in arb_arrangement()) {
            let (status, threshold) = subset_oracle(arr.projective_dim(), arr.coefficients());
            prop_assert_eq!(lc_status(&arr).status, status);
            prop_assert_eq!(lct(&arr), threshold);
        }

        #[test]
        fn lct_scales_inversely(arr in arb_arrangement(), p in 1i64..30, q in 1i64..30) {
            let t = r(p, q);
            let scaled = lct(&arr.scaled(&t).unwrap());
            prop_assert_eq!(scaled, lct(&arr).map(|x| x / t));
        }

        #[test]
        fn lct_is_the_lc_boundary(arr in arb_arrangement()) {
            if let Some(t) = lct(&arr) {
                prop_assert_eq!(lc_status(&arr.scaled(&t).unwrap()).status, LcStatus::LcNotKlt);
                let beyond = &t * &r(101, 100);
                prop_assert_eq!(lc_status(&arr.scaled(&beyond).unwrap()).status, LcStatus::NotLc);
            }
        }

        #[test]
        fn rounding_sandwich_and_degree(
            exps in prop::collection::vec(2u64..40, 3..7),
            n in 1u64..120,
        ) {
            let pair = pair_of(&exps);
            if let Ok(d) = n_complement(&pair, nz(n)) {
                prop_assert_eq!(&d.total_degree, &pair.degree());
                let n_r = Rational::from_integer(n as i64);
                for ((c, cp), &a) in pair.coefficients.iter().zip(&d.rounded_coefficients).zip(&exps) {
                    prop_assert!(c <= cp);
                    let a_r = Rational::from_integer(a as i64);
                    let slack = Rational::one() / n_r.clone() + Rational::one() / (&n_r * &a_r);
                    prop_assert!((cp - c) < slack);
                    prop_assert!((cp * &n_r).is_integer());
                }
                for pad in &d.padding {
                    prop_assert!((pad * &n_r).is_integer());
                    prop_assert!(*pad <= Rational::one());
                }
            }
        }
    }
}
