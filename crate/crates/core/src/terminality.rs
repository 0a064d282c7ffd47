//! Terminality of a Brieskorn–Pham singularity via the h(d) scan, and the
//! brute-force lattice oracle that cross-checks it.
//!
//! When Σ1/aᵢ > 1 the function h grows by ΣL/aᵢ − L ≥ 1 every period L, so
//! scanning d = 1..=L decides h ≥ 1 everywhere. Any d with h(d) ≤ 0 yields an
//! interior witness pᵢ = ⌈d/aᵢ⌉ with a_p ≤ h(d).

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::bp_model::{self, ExponentTuple, LatticeVector};
use crate::error::{Error, Result};
use crate::numerics::{self, ser, Rational};

/// Default cap on the number of vectors the oracle will enumerate.
pub const DEFAULT_ORACLE_LIMIT: u64 = 10_000_000;

/// Scan chunk length. Fixed so that chunk boundaries, and with them every
/// reported value, do not depend on the worker count.
const CHUNK: u64 = 1 << 15;
/// Chunks handed to the pool per wave before checking for an early exit.
const WAVE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    #[default]
    Lcm,
    Product,
}

impl FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lcm" => Ok(BoundMode::Lcm),
            "product" => Ok(BoundMode::Product),
            other => Err(Error::invalid(format!(
                "bound mode must be lcm or product, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Lcm => "lcm",
            BoundMode::Product => "product",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalityStatus {
    Terminal,
    NotTerminal,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScanOptions {
    pub mode: BoundMode,
    /// Keep scanning past the first failure to report the global minimum of h.
    pub full_scan: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminalityVerdict {
    pub status: TerminalityStatus,
    /// Minimum of h over the scanned range. Absent when no scan ran.
    #[serde(serialize_with = "ser::opt_big_int")]
    pub min_scanned_h: Option<BigInt>,
    pub witness: Option<LatticeVector>,
    #[serde(serialize_with = "ser::opt_big_int")]
    pub witness_discrepancy: Option<BigInt>,
    /// Smallest d with h(d) ≤ 0, when the scan found one.
    #[serde(serialize_with = "ser::opt_big_uint")]
    pub first_failing_d: Option<BigUint>,
    #[serde(serialize_with = "ser::big_uint")]
    pub scan_bound_used: BigUint,
    #[serde(serialize_with = "ser::big_uint")]
    pub scanned_up_to: BigUint,
    pub bound_mode: BoundMode,
    pub full_scan: bool,
    /// Σ1/aᵢ ≤ 1: decided without a scan.
    pub reciprocal_shortcut: bool,
}

impl TerminalityVerdict {
    pub fn is_terminal(&self) -> bool {
        self.status == TerminalityStatus::Terminal
    }
}

pub fn scan_bound(a: &ExponentTuple, mode: BoundMode) -> BigUint {
    match mode {
        BoundMode::Lcm => a.lcm(),
        BoundMode::Product => a.product(),
    }
}

pub fn is_terminal(a: &ExponentTuple, mode: BoundMode) -> TerminalityVerdict {
    is_terminal_with(
        a,
        ScanOptions {
            mode,
            full_scan: false,
        },
    )
}

pub fn is_terminal_with(a: &ExponentTuple, opts: ScanOptions) -> TerminalityVerdict {
    let bound = scan_bound(a, opts.mode);

    if *a.reciprocal_sum() <= Rational::one() {
        let l = a.lcm();
        let coords = a.exponents().iter().map(|&ai| &l / ai).collect();
        let witness = LatticeVector::new(coords).expect("L/aᵢ >= 1");
        let disc = bp_model::discrepancy(&witness, a).expect("same length");
        return TerminalityVerdict {
            status: TerminalityStatus::NotTerminal,
            min_scanned_h: None,
            witness: Some(witness),
            witness_discrepancy: Some(disc),
            first_failing_d: None,
            scan_bound_used: bound,
            scanned_up_to: BigUint::from(0u32),
            bound_mode: opts.mode,
            full_scan: opts.full_scan,
            reciprocal_shortcut: true,
        };
    }

    let outcome = match bound.to_u64() {
        Some(b) => scan_u64(a.exponents(), b, opts.full_scan),
        None => scan_big(a, &bound, opts.full_scan),
    };

    let (status, witness, witness_discrepancy) = match &outcome.first_fail {
        None => (TerminalityStatus::Terminal, None, None),
        Some(d) => {
            let w = bp_model::ceiling_witness(&BigInt::from(d.clone()), a).expect("d >= 1");
            let disc = bp_model::discrepancy(&w, a).expect("same length");
            (TerminalityStatus::NotTerminal, Some(w), Some(disc))
        }
    };
    TerminalityVerdict {
        status,
        min_scanned_h: Some(outcome.min_h),
        witness,
        witness_discrepancy,
        first_failing_d: outcome.first_fail,
        scan_bound_used: bound,
        scanned_up_to: outcome.scanned_up_to,
        bound_mode: opts.mode,
        full_scan: opts.full_scan,
        reciprocal_shortcut: false,
    }
}

struct ScanOutcome {
    min_h: BigInt,
    first_fail: Option<BigUint>,
    scanned_up_to: BigUint,
}

#[derive(Clone, Copy)]
struct ChunkResult {
    min_h: i128,
    first_fail: Option<u64>,
    last: u64,
}

/// Scans d in [start, end]. Without `full_scan` the chunk stops at its first
/// failure and `min_h` covers only the prefix up to it.
fn scan_chunk(exponents: &[u64], start: u64, end: u64, full_scan: bool) -> ChunkResult {
    // running Σ⌈d/aᵢ⌉ with remainders d mod aᵢ, stepped without division
    let mut rem: Vec<u64> = exponents.iter().map(|&ai| start % ai).collect();
    let mut ceil_sum: i128 = exponents
        .iter()
        .map(|&ai| i128::from(numerics::ceil_div_u64(start, ai)))
        .sum();
    let mut min_h = i128::MAX;
    let mut first_fail = None;
    let mut d = start;
    loop {
        let hd = ceil_sum - i128::from(d) - 1;
        min_h = min_h.min(hd);
        if hd <= 0 && first_fail.is_none() {
            first_fail = Some(d);
            if !full_scan {
                break;
            }
        }
        if d == end {
            break;
        }
        // ⌈(d+1)/a⌉ = ⌈d/a⌉ + 1 exactly when a | d
        for (r, &ai) in rem.iter_mut().zip(exponents) {
            if *r == 0 {
                ceil_sum += 1;
            }
            *r += 1;
            if *r == ai {
                *r = 0;
            }
        }
        d += 1;
    }
    ChunkResult {
        min_h,
        first_fail,
        last: d,
    }
}

fn scan_u64(exponents: &[u64], bound: u64, full_scan: bool) -> ScanOutcome {
    let chunk_count = bound.div_ceil(CHUNK);
    let mut min_h = i128::MAX;
    let mut first_fail = None;
    let mut scanned_up_to = 0u64;
    let mut next = 0u64;
    'waves: while next < chunk_count {
        let wave_end = (next + WAVE as u64).min(chunk_count);
        let results: Vec<ChunkResult> = (next..wave_end)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK + 1;
                let end = start.saturating_add(CHUNK - 1).min(bound);
                scan_chunk(exponents, start, end, full_scan)
            })
            .collect();
        for r in results {
            min_h = min_h.min(r.min_h);
            scanned_up_to = r.last;
            if first_fail.is_none() {
                first_fail = r.first_fail;
                if first_fail.is_some() && !full_scan {
                    break 'waves;
                }
            }
        }
        next = wave_end;
    }
    ScanOutcome {
        min_h: BigInt::from(min_h),
        first_fail: first_fail.map(BigUint::from),
        scanned_up_to: BigUint::from(scanned_up_to),
    }
}

/// Arbitrary-precision scan for bounds beyond 64 bits.
fn scan_big(a: &ExponentTuple, bound: &BigUint, full_scan: bool) -> ScanOutcome {
    let mut d = BigInt::one();
    let bound = BigInt::from(bound.clone());
    let mut min_h: Option<BigInt> = None;
    let mut first_fail = None;
    while d <= bound {
        let hd = bp_model::h(&d, a).expect("d >= 1");
        let failed = hd <= BigInt::from(0);
        if min_h.as_ref().is_none_or(|m| hd < *m) {
            min_h = Some(hd);
        }
        if failed && first_fail.is_none() {
            first_fail = Some(d.to_biguint().expect("positive"));
            if !full_scan {
                break;
            }
        }
        d += 1;
    }
    let scanned_up_to = d.min(bound).to_biguint().expect("positive");
    ScanOutcome {
        min_h: min_h.expect("bound >= 1"),
        first_fail,
        scanned_up_to,
    }
}

/// Exhaustive minimum of a_p over the box 1 ≤ pᵢ ≤ `box_side`, with the
/// lexicographically smallest minimizer.
///
/// Refuses to run when box_side^k exceeds `limit`.
pub fn brute_force_min_discrepancy(
    a: &ExponentTuple,
    box_side: u64,
    limit: u64,
) -> Result<(BigInt, LatticeVector)> {
    if box_side == 0 {
        return Err(Error::invalid("oracle box must be >= 1"));
    }
    let k = a.len();
    let size = BigUint::from(box_side).pow(k as u32);
    if size > BigUint::from(limit) {
        return Err(Error::SizeLimit {
            what: "oracle enumeration",
            requested: size.to_string(),
            limit: limit.to_string(),
        });
    }
    let max_a = *a.sorted().last().expect("k >= 3");
    let fits = u128::from(box_side) * u128::from(max_a) <= 1 << 62
        && u128::from(box_side) * k as u128 <= 1 << 62;
    if fits {
        let (v, p) = oracle_i64(a.exponents(), box_side as i64);
        let p: Vec<u64> = p.into_iter().map(|x| x as u64).collect();
        Ok((BigInt::from(v), LatticeVector::from_u64s(&p)?))
    } else {
        oracle_big(a, box_side)
    }
}

fn oracle_i64(exponents: &[u64], side: i64) -> (i64, Vec<i64>) {
    let k = exponents.len();
    let a: Vec<i64> = exponents.iter().map(|&x| x as i64).collect();
    let a_last = a[k - 1];
    let mut prefix = vec![1i64; k - 1];
    let mut best = i64::MAX;
    let mut best_p = Vec::new();
    loop {
        let rest_sum: i64 = prefix.iter().sum();
        let rest_min = prefix.iter().zip(&a).map(|(p, ai)| p * ai).min().expect("k >= 3");
        let eval = |q: i64| rest_sum + q - rest_min.min(q * a_last) - 1;
        let chunk_min = (1..=side).map(eval).min().expect("side >= 1");
        if chunk_min < best {
            best = chunk_min;
            let q = (1..=side).find(|&q| eval(q) == chunk_min).expect("attained");
            best_p = prefix.clone();
            best_p.push(q);
        }
        // odometer over the first k-1 coordinates, lexicographic
        let mut i = k - 1;
        loop {
            if i == 0 {
                return (best, best_p);
            }
            i -= 1;
            if prefix[i] < side {
                prefix[i] += 1;
                for x in &mut prefix[i + 1..] {
                    *x = 1;
                }
                break;
            }
        }
    }
}

fn oracle_big(a: &ExponentTuple, side: u64) -> Result<(BigInt, LatticeVector)> {
    let k = a.len();
    let mut p = vec![1u64; k];
    let mut best: Option<(BigInt, LatticeVector)> = None;
    loop {
        let v = LatticeVector::from_u64s(&p)?;
        let disc = bp_model::discrepancy(&v, a)?;
        if best.as_ref().is_none_or(|(b, _)| disc < *b) {
            best = Some((disc, v));
        }
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(best.expect("box nonempty"));
            }
            i -= 1;
            if p[i] < side {
                p[i] += 1;
                for x in &mut p[i + 1..] {
                    *x = 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(a: &[u64]) -> ExponentTuple {
        ExponentTuple::new(a.to_vec()).unwrap()
    }

    fn coords(v: &LatticeVector) -> Vec<u64> {
        v.coords().iter().map(|c| c.to_u64().unwrap()).collect()
    }

    #[test]
    fn scan_bound_examples() {
        let a = tuple(&[2, 3, 11, 17, 19]);
        assert_eq!(scan_bound(&a, BoundMode::Product), BigUint::from(21318u32));
        assert_eq!(scan_bound(&a, BoundMode::Lcm), BigUint::from(21318u32));
        assert_eq!(scan_bound(&tuple(&[2, 2, 2]), BoundMode::Lcm), BigUint::from(2u32));
        assert_eq!(scan_bound(&tuple(&[2, 2, 2]), BoundMode::Product), BigUint::from(8u32));
    }

    #[test]
    fn exceptional_tuple_is_terminal() {
        let v = is_terminal(&tuple(&[2, 3, 11, 17, 19]), BoundMode::Lcm);
        assert!(v.is_terminal());
        assert!(v.min_scanned_h.unwrap() >= BigInt::one());
        assert_eq!(v.scanned_up_to, BigUint::from(21318u32));
        assert!(v.witness.is_none());
    }

    #[test]
    fn a1_surface_is_not_terminal() {
        let v = is_terminal(&tuple(&[2, 2, 2]), BoundMode::Lcm);
        assert_eq!(v.status, TerminalityStatus::NotTerminal);
        assert_eq!(coords(v.witness.as_ref().unwrap()), vec![1, 1, 1]);
        assert_eq!(v.witness_discrepancy, Some(BigInt::from(0)));
        assert_eq!(v.first_failing_d, Some(BigUint::from(2u32)));
    }

    #[test]
    fn four_variable_failure() {
        let a = tuple(&[2, 3, 7, 41]);
        let v = is_terminal(&a, BoundMode::Lcm);
        assert_eq!(v.status, TerminalityStatus::NotTerminal);
        // h(6) = 3+2+1+1−7 = 0 is the first failure
        assert_eq!(v.first_failing_d, Some(BigUint::from(6u32)));
        assert_eq!(coords(v.witness.as_ref().unwrap()), vec![3, 2, 1, 1]);
        assert_eq!(v.witness_discrepancy, Some(BigInt::from(0)));
        // d = 42 fails as well
        assert_eq!(bp_model::h(&BigInt::from(42), &a).unwrap(), BigInt::from(0));
        let w42 = bp_model::ceiling_witness(&BigInt::from(42), &a).unwrap();
        assert_eq!(coords(&w42), vec![21, 14, 6, 2]);
        assert_eq!(bp_model::discrepancy(&w42, &a).unwrap(), BigInt::from(0));
    }

    #[test]
    fn e8_is_canonical_not_terminal() {
        let v = is_terminal(&tuple(&[2, 3, 5]), BoundMode::Lcm);
        assert_eq!(v.status, TerminalityStatus::NotTerminal);
        assert_eq!(coords(v.witness.as_ref().unwrap()), vec![1, 1, 1]);
        assert_eq!(v.witness_discrepancy, Some(BigInt::from(0)));

        let full = is_terminal_with(
            &tuple(&[2, 3, 5]),
            ScanOptions {
                mode: BoundMode::Lcm,
                full_scan: true,
            },
        );
        assert_eq!(full.min_scanned_h, Some(BigInt::from(0)));
        assert_eq!(full.scanned_up_to, BigUint::from(30u32));
        assert_eq!(full.witness, v.witness);
    }

    #[test]
    fn reciprocal_sum_at_most_one_short_circuits() {
        let v = is_terminal(&tuple(&[3, 3, 3]), BoundMode::Lcm);
        assert!(v.reciprocal_shortcut);
        assert_eq!(coords(v.witness.as_ref().unwrap()), vec![1, 1, 1]);
        assert_eq!(v.witness_discrepancy, Some(BigInt::from(-1)));

        let v = is_terminal(&tuple(&[2, 3, 7]), BoundMode::Lcm);
        assert_eq!(coords(v.witness.as_ref().unwrap()), vec![21, 14, 6]);
        assert_eq!(v.witness_discrepancy, Some(BigInt::from(-2)));
    }

    #[test]
    fn multi_chunk_scan_matches_serial_h() {
        // lcm 2·3·11·17·29 = 32538 spans two chunks
        let a = tuple(&[2, 3, 11, 17, 29]);
        let v = is_terminal_with(
            &a,
            ScanOptions {
                mode: BoundMode::Lcm,
                full_scan: true,
            },
        );
        let serial_min = (1..=32538u64)
            .map(|d| bp_model::h(&BigInt::from(d), &a).unwrap())
            .min()
            .unwrap();
        assert_eq!(v.min_scanned_h, Some(serial_min));
        assert!(v.is_terminal());
    }

    #[test]
    fn chunk_scan_agrees_with_h() {
        let a = [2u64, 5, 7, 9, 13];
        for (start, end) in [(1, 50), (17, 300), (8190, 8190), (100, 9000)] {
            let r = scan_chunk(&a, start, end, true);
            let direct = (start..=end).map(|d| bp_model::h_u64(d, &a)).min().unwrap();
            assert_eq!(r.min_h, direct);
            assert_eq!(r.last, end);
        }
    }

    #[test]
    fn big_scan_path_agrees() {
        let a = tuple(&[2, 3, 7, 41]);
        let small = scan_u64(a.exponents(), 1722, true);
        let big = scan_big(&a, &BigUint::from(1722u32), true);
        assert_eq!(small.min_h, big.min_h);
        assert_eq!(small.first_fail, big.first_fail);
        assert_eq!(small.scanned_up_to, big.scanned_up_to);
    }

    #[test]
    fn modes_agree_on_verdicts() {
        for t in [&[2u64, 2, 2][..], &[2, 3, 5], &[2, 3, 7, 41], &[2, 4, 6], &[3, 3, 4, 4]] {
            let a = tuple(t);
            let l = is_terminal(&a, BoundMode::Lcm);
            let p = is_terminal(&a, BoundMode::Product);
            assert_eq!(l.status, p.status);
            assert_eq!(l.witness, p.witness);
            assert_eq!(l.min_scanned_h, p.min_scanned_h);
        }
    }

    #[test]
    fn oracle_examples() {
        let (v, p) = brute_force_min_discrepancy(&tuple(&[2, 2, 2]), 2, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!((v, coords(&p)), (BigInt::from(0), vec![1, 1, 1]));

        let (v, p) =
            brute_force_min_discrepancy(&tuple(&[2, 3, 11, 17, 19]), 1, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!((v, coords(&p)), (BigInt::from(2), vec![1, 1, 1, 1, 1]));

        let (v, p) = brute_force_min_discrepancy(&tuple(&[2, 3, 5]), 30, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!((v, coords(&p)), (BigInt::from(0), vec![1, 1, 1]));
    }

    #[test]
    fn oracle_refuses_oversized_boxes() {
        let err = brute_force_min_discrepancy(&tuple(&[2, 3, 5]), 1000, 1000).unwrap_err();
        assert!(matches!(err, Error::SizeLimit { .. }));
        assert!(brute_force_min_discrepancy(&tuple(&[2, 3, 5]), 0, 1000).is_err());
    }

    #[test]
    fn oracle_paths_agree() {
        for t in [&[2u64, 3, 7][..], &[3, 4, 5], &[2, 2, 9, 10]] {
            let a = tuple(t);
            let fast = brute_force_min_discrepancy(&a, 9, DEFAULT_ORACLE_LIMIT).unwrap();
            let slow = oracle_big(&a, 9).unwrap();
            assert_eq!(fast, slow);
        }
    }
}
