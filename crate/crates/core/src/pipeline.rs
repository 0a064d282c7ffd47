//! Per-tuple analysis: terminality, blow-up model, bounds and minimal
//! complement, assembled into a single report.

use std::num::NonZeroU64;
use std::time::Instant;

use serde::Serialize;

use crate::blowup::{self, WeightVector};
use crate::bp_model::ExponentTuple;
use crate::complements::{self, CoefficientBounds, ComplementDivisor, Flat, LcStatus};
use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::terminality::{self, ScanOptions, TerminalityVerdict};

pub const DEFAULT_N_MAX: u64 = 100;

/// What `minimal_index` means in every report.
pub const MINIMALITY_SCOPE: &str =
    "smallest n <= n_max for which floor((n+1)c)/n plus unit-greedy generic padding is an lc n-complement; \
     not certified minimal over all Q-complements";

#[derive(Clone, Copy, Debug)]
pub struct AnalysisConfig {
    pub scan: ScanOptions,
    pub n_max: NonZeroU64,
    pub record_timings: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            scan: ScanOptions::default(),
            n_max: NonZeroU64::new(DEFAULT_N_MAX).expect("nonzero"),
            record_timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Timings {
    pub terminality_ms: u128,
    pub blowup_ms: u128,
    pub bounds_ms: u128,
    pub complement_ms: u128,
    pub total_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub tuple: ExponentTuple,
    pub coprimality: bool,
    pub reciprocal_sum: Rational,
    pub terminality: TerminalityVerdict,
    #[serde(flatten)]
    pub weights: WeightVector,
    pub exceptional_discrepancy: Rational,
    pub diff_coefficients: Vec<Rational>,
    pub log_fano: bool,
    pub bounds: CoefficientBounds,
    pub n_max: u64,
    pub minimal_index: Option<u64>,
    pub complement: Option<ComplementDivisor>,
    pub exceptional_candidate: bool,
    pub minimality_scope: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Report {
    /// The report with timings removed; two runs on the same input agree on
    /// this exactly.
    pub fn without_timings(&self) -> Report {
        Report {
            timings: None,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

pub fn analyze(a: &ExponentTuple, config: &AnalysisConfig) -> Report {
    let t0 = Instant::now();
    let terminality = terminality::is_terminal_with(a, config.scan);
    let t1 = Instant::now();

    let weights = blowup::blowup_weights(a);
    let exceptional_discrepancy = blowup::exceptional_discrepancy(a);
    let pair = blowup::diff_boundary(a);
    let log_fano = blowup::is_log_fano(&pair);
    let t2 = Instant::now();

    let bounds = complements::complement_coefficient_bounds(&pair);
    let t3 = Instant::now();

    let found = if log_fano {
        complements::minimal_complement_index(&pair, config.n_max)
    } else {
        None
    };
    let t4 = Instant::now();

    let exceptional_candidate = terminality.is_terminal() && log_fano && bounds.pass;
    let (minimal_index, complement) = match found {
        Some((n, d)) => (Some(n), Some(d)),
        None => (None, None),
    };
    let timings = config.record_timings.then(|| Timings {
        terminality_ms: (t1 - t0).as_millis(),
        blowup_ms: (t2 - t1).as_millis(),
        bounds_ms: (t3 - t2).as_millis(),
        complement_ms: (t4 - t3).as_millis(),
        total_ms: (t4 - t0).as_millis(),
    });

    Report {
        tuple: a.clone(),
        coprimality: a.is_pairwise_coprime(),
        reciprocal_sum: a.reciprocal_sum().clone(),
        terminality,
        weights,
        exceptional_discrepancy,
        diff_coefficients: pair.coefficients,
        log_fano,
        bounds,
        n_max: config.n_max.get(),
        minimal_index,
        complement,
        exceptional_candidate,
        minimality_scope: MINIMALITY_SCOPE,
        timings,
    }
}

/// Output of the `complement` command: the complement side of the pipeline
/// without the terminality scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementReport {
    pub tuple: ExponentTuple,
    pub coprimality: bool,
    pub diff_coefficients: Vec<Rational>,
    pub log_fano: bool,
    pub n_max: u64,
    pub minimal_index: Option<u64>,
    pub rounded_coefficients: Option<Vec<Rational>>,
    pub padding: Option<Vec<Rational>>,
    pub total_degree: Option<Rational>,
    pub lc_status: Option<LcStatus>,
    pub worst_flat: Option<Flat>,
    pub bounds: CoefficientBounds,
    pub minimality_scope: &'static str,
}

pub fn complement_report(a: &ExponentTuple, n_max: NonZeroU64) -> ComplementReport {
    let pair = blowup::diff_boundary(a);
    let log_fano = blowup::is_log_fano(&pair);
    let bounds = complements::complement_coefficient_bounds(&pair);
    let found = complements::minimal_complement_index(&pair, n_max);
    let (minimal_index, divisor) = match found {
        Some((n, d)) => (Some(n), Some(d)),
        None => (None, None),
    };
    ComplementReport {
        tuple: a.clone(),
        coprimality: a.is_pairwise_coprime(),
        diff_coefficients: pair.coefficients,
        log_fano,
        n_max: n_max.get(),
        minimal_index,
        rounded_coefficients: divisor.as_ref().map(|d| d.rounded_coefficients.clone()),
        padding: divisor.as_ref().map(|d| d.padding.clone()),
        total_degree: divisor.as_ref().map(|d| d.total_degree.clone()),
        lc_status: divisor.as_ref().map(|d| d.lc.status),
        worst_flat: divisor.and_then(|d| d.lc.worst_flat),
        bounds,
        minimality_scope: MINIMALITY_SCOPE,
    }
}

/// Runs `f` on a dedicated pool of `jobs` workers.
pub fn with_workers<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Err(Error::invalid("worker count must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(f))
}
