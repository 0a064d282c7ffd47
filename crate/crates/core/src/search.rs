//! Bulk search over nondecreasing exponent tuples with resumable output.
//!
//! Reports are appended to `<out>.partial` in fixed-size batches. After each
//! batch is flushed its tuples are appended to the checkpoint. On restart only
//! partial lines whose tuple is in the checkpoint survive, so a crash between
//! the two writes costs at most one batch of recomputation. The final file is
//! the partial lines sorted by tuple.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::num::NonZeroU64;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bp_model::ExponentTuple;
use crate::error::{Error, Result};
use crate::numerics::Rational;
use crate::pipeline::{self, AnalysisConfig, DEFAULT_N_MAX};
use crate::terminality::{BoundMode, ScanOptions};

/// Enumerations larger than this need `force`.
pub const ENUMERATION_GUARD: u64 = 100_000_000;
/// Tuples analysed between checkpoint writes.
const BATCH: usize = 256;
const CHECKPOINT_HEADER: &str = "# bpsing search checkpoint v1";
const COMPLETE_MARKER: &str = "complete";

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub k: usize,
    pub max_exp: u64,
    pub bound_mode: BoundMode,
    pub n_max: NonZeroU64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub require_coprime: bool,
    pub force: bool,
    /// Stop (as if killed) once this many reports have been written in this
    /// run. Used to exercise resumption.
    pub stop_after: Option<usize>,
}

impl SearchConfig {
    pub fn new(k: usize, max_exp: u64) -> Self {
        SearchConfig {
            k,
            max_exp,
            bound_mode: BoundMode::Lcm,
            n_max: NonZeroU64::new(DEFAULT_N_MAX).expect("nonzero"),
            jobs: 1,
            out: None,
            checkpoint: None,
            csv: None,
            require_coprime: false,
            force: false,
            stop_after: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::invalid("search needs k >= 3"));
        }
        if self.max_exp < 2 {
            return Err(Error::invalid("search needs max_exp >= 2"));
        }
        if self.jobs == 0 {
            return Err(Error::invalid("search needs at least one worker"));
        }
        if self.checkpoint.is_some() && self.out.is_none() {
            return Err(Error::invalid("a checkpoint needs an output file (--out)"));
        }
        let count = enumeration_count(self.k, self.max_exp);
        if !self.force && count > BigUint::from(ENUMERATION_GUARD) {
            return Err(Error::SizeLimit {
                what: "search enumeration",
                requested: count.to_string(),
                limit: ENUMERATION_GUARD.to_string(),
            });
        }
        Ok(())
    }

    /// Hash of every setting that changes report content. Worker count and
    /// file paths are excluded.
    pub fn config_hash(&self) -> String {
        let desc = format!(
            "k={};max_exp={};bound={};n_max={};require_coprime={};format=1",
            self.k, self.max_exp, self.bound_mode, self.n_max, self.require_coprime
        );
        hex::encode(Sha256::digest(desc.as_bytes()))
    }

    fn analysis(&self) -> AnalysisConfig {
        AnalysisConfig {
            scan: ScanOptions {
                mode: self.bound_mode,
                full_scan: false,
            },
            n_max: self.n_max,
            record_timings: false,
        }
    }
}

/// Number of nondecreasing k-tuples with entries in [2, max_exp]:
/// C(m + k − 1, k) with m = max_exp − 1.
pub fn enumeration_count(k: usize, max_exp: u64) -> BigUint {
    if max_exp < 2 {
        return BigUint::from(0u32);
    }
    let m = BigUint::from(max_exp - 1);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= &m + BigUint::from(i);
        den *= BigUint::from(i + 1);
    }
    num / den
}

/// Nondecreasing tuples 2 ≤ a₁ ≤ … ≤ a_k ≤ max_exp in lexicographic order.
pub struct NondecreasingTuples {
    max_exp: u64,
    next: Option<Vec<u64>>,
}

impl NondecreasingTuples {
    pub fn new(k: usize, max_exp: u64) -> Self {
        let next = (k > 0 && max_exp >= 2).then(|| vec![2; k]);
        NondecreasingTuples { max_exp, next }
    }
}

impl Iterator for NondecreasingTuples {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        while i > 0 {
            i -= 1;
            if succ[i] < self.max_exp {
                let v = succ[i] + 1;
                for x in &mut succ[i..] {
                    *x = v;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchSummary {
    pub enumerated: u64,
    /// Σ1/aᵢ ≤ 1: no report.
    pub skipped_reciprocal: u64,
    pub filtered_out: u64,
    pub reported: u64,
    /// Reports carried over from an earlier interrupted run.
    pub resumed: u64,
    pub candidates: u64,
}

/// Runs the search and returns the summary plus the final sorted lines.
/// When `config.out` is set the lines are also written there.
pub fn run_search(config: &SearchConfig) -> Result<(SearchSummary, Vec<String>)> {
    config.validate()?;
    pipeline::with_workers(config.jobs, || run_in_pool(config))?
}

fn run_in_pool(config: &SearchConfig) -> Result<(SearchSummary, Vec<String>)> {
    let hash = config.config_hash();
    let partial_path = config.out.as_ref().map(|p| partial_path_for(p));

    let mut state = ResumeState::default();
    if let Some(cp) = &config.checkpoint {
        state = load_checkpoint(cp, &hash, partial_path.as_deref(), config.out.as_deref())?;
    }
    if state.complete {
        let out = config.out.as_ref().expect("complete checkpoints imply an output file");
        let lines: Vec<String> = fs::read_to_string(out)?.lines().map(str::to_owned).collect();
        let mut summary = count_enumeration(config);
        summary.resumed = lines.len() as u64;
        summary.reported = lines.len() as u64;
        summary.candidates = count_candidates(&lines)?;
        return Ok((summary, lines));
    }

    let mut sink = Sink::open(partial_path.as_deref(), config.checkpoint.as_deref(), &hash, &state)?;
    let mut summary = SearchSummary {
        resumed: state.lines.len() as u64,
        ..SearchSummary::default()
    };
    let analysis = config.analysis();
    let mut written_this_run = 0usize;
    let mut batch: Vec<ExponentTuple> = Vec::with_capacity(BATCH);

    let flush = |batch: &mut Vec<ExponentTuple>, sink: &mut Sink| -> Result<usize> {
        if batch.is_empty() {
            return Ok(0);
        }
        let lines = batch
            .par_iter()
            .map(|a| pipeline::analyze(a, &analysis).to_json())
            .collect::<Result<Vec<String>>>()?;
        sink.append(batch, lines)?;
        let n = batch.len();
        batch.clear();
        Ok(n)
    };

    for exps in NondecreasingTuples::new(config.k, config.max_exp) {
        summary.enumerated += 1;
        let tuple = ExponentTuple::new(exps)?;
        if *tuple.reciprocal_sum() <= Rational::one() {
            summary.skipped_reciprocal += 1;
            continue;
        }
        if config.require_coprime && !tuple.is_pairwise_coprime() {
            summary.filtered_out += 1;
            continue;
        }
        if state.completed.contains(&tuple.to_string()) {
            continue;
        }
        batch.push(tuple);
        if batch.len() == BATCH {
            written_this_run += flush(&mut batch, &mut sink)?;
            if let Some(limit) = config.stop_after {
                if written_this_run >= limit {
                    return Err(Error::Interrupted {
                        completed: sink.total_lines(),
                    });
                }
            }
        }
    }
    flush(&mut batch, &mut sink)?;

    let lines = sink.finalize(config.out.as_deref())?;
    summary.reported = lines.len() as u64;
    summary.candidates = count_candidates(&lines)?;
    if let Some(csv_path) = &config.csv {
        write_csv(csv_path, &lines)?;
    }
    Ok((summary, lines))
}

fn count_enumeration(config: &SearchConfig) -> SearchSummary {
    let mut s = SearchSummary::default();
    for exps in NondecreasingTuples::new(config.k, config.max_exp) {
        s.enumerated += 1;
        let t = ExponentTuple::new(exps).expect("entries >= 2, k >= 3");
        if *t.reciprocal_sum() <= Rational::one() {
            s.skipped_reciprocal += 1;
        } else if config.require_coprime && !t.is_pairwise_coprime() {
            s.filtered_out += 1;
        }
    }
    s
}

fn count_candidates(lines: &[String]) -> Result<u64> {
    let mut n = 0;
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l)?;
        if v["exceptional_candidate"] == serde_json::Value::Bool(true) {
            n += 1;
        }
    }
    Ok(n)
}

pub fn partial_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Complete (newline-terminated) lines of a file; a torn final line is
/// dropped.
fn complete_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    // the segment after the last '\n' is either empty or torn
    lines.pop();
    lines
}

fn tuple_key_of_line(line: &str) -> Option<(Vec<u64>, String)> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    let exps: Vec<u64> = v
        .get("tuple")?
        .as_array()?
        .iter()
        .map(|x| x.as_u64())
        .collect::<Option<_>>()?;
    let key = exps.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    Some((exps, key))
}

#[derive(Default)]
struct ResumeState {
    completed: HashSet<String>,
    /// Surviving partial lines, in file order.
    lines: Vec<String>,
    complete: bool,
}

fn load_checkpoint(
    path: &Path,
    hash: &str,
    partial: Option<&Path>,
    out: Option<&Path>,
) -> Result<ResumeState> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(ResumeState::default()),
        Err(e) => return Err(e.into()),
    };
    let lines = complete_lines(&text);
    let malformed = |reason: &str| Error::Checkpoint {
        path: path.display().to_string(),
        reason: reason.to_owned(),
    };
    if lines.first() != Some(&CHECKPOINT_HEADER) {
        if text.is_empty() || lines.is_empty() {
            // crashed before the header was written
            return Ok(ResumeState::default());
        }
        return Err(malformed("missing header"));
    }
    let found = lines
        .get(1)
        .and_then(|l| l.strip_prefix("config "))
        .ok_or_else(|| malformed("missing config line"))?;
    if found != hash {
        return Err(Error::ConfigMismatch {
            path: path.display().to_string(),
            found: found.to_owned(),
            expected: hash.to_owned(),
        });
    }
    let mut completed = HashSet::new();
    let mut complete = false;
    for l in &lines[2..] {
        if *l == COMPLETE_MARKER {
            complete = true;
        } else {
            completed.insert((*l).to_owned());
        }
    }
    if complete && out.is_some_and(Path::exists) {
        return Ok(ResumeState {
            completed,
            lines: Vec::new(),
            complete: true,
        });
    }
    if complete {
        // final output went missing: start over
        return Ok(ResumeState::default());
    }

    let mut kept = Vec::new();
    let mut seen = HashSet::new();
    if let Some(p) = partial {
        if let Ok(text) = fs::read_to_string(p) {
            for l in complete_lines(&text) {
                if let Some((_, key)) = tuple_key_of_line(l) {
                    if completed.contains(&key) && seen.insert(key) {
                        kept.push(l.to_owned());
                    }
                }
            }
        }
    }
    // anything checkpointed without a surviving report gets recomputed
    Ok(ResumeState {
        completed: seen,
        lines: kept,
        complete: false,
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn join_lines<S: AsRef<str>>(lines: &[S]) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(l.as_ref());
        s.push('\n');
    }
    s
}

/// The single writer: owns the partial file and the checkpoint.
struct Sink {
    partial: Option<(PathBuf, File)>,
    checkpoint: Option<(PathBuf, File)>,
    /// Kept in memory only when there is no partial file.
    memory: Vec<String>,
    total: usize,
}

impl Sink {
    fn open(
        partial: Option<&Path>,
        checkpoint: Option<&Path>,
        hash: &str,
        state: &ResumeState,
    ) -> Result<Self> {
        let partial = match partial {
            Some(p) => {
                write_atomic(p, &join_lines(&state.lines))?;
                let f = OpenOptions::new().append(true).open(p)?;
                Some((p.to_owned(), f))
            }
            None => None,
        };
        let checkpoint = match checkpoint {
            Some(c) => {
                let mut body = format!("{CHECKPOINT_HEADER}\nconfig {hash}\n");
                for l in &state.lines {
                    let (_, key) = tuple_key_of_line(l).expect("kept lines parse");
                    body.push_str(&key);
                    body.push('\n');
                }
                write_atomic(c, &body)?;
                let f = OpenOptions::new().append(true).open(c)?;
                Some((c.to_owned(), f))
            }
            None => None,
        };
        let memory = if partial.is_none() {
            state.lines.clone()
        } else {
            Vec::new()
        };
        Ok(Sink {
            partial,
            checkpoint,
            memory,
            total: state.lines.len(),
        })
    }

    fn total_lines(&self) -> usize {
        self.total
    }

    fn append(&mut self, tuples: &[ExponentTuple], lines: Vec<String>) -> Result<()> {
        match &mut self.partial {
            Some((_, f)) => {
                f.write_all(join_lines(&lines).as_bytes())?;
                f.flush()?;
                f.sync_data()?;
            }
            None => self.memory.extend(lines.iter().cloned()),
        }
        if let Some((_, f)) = &mut self.checkpoint {
            let keys: Vec<String> = tuples.iter().map(ExponentTuple::to_string).collect();
            f.write_all(join_lines(&keys).as_bytes())?;
            f.flush()?;
            f.sync_data()?;
        }
        self.total += lines.len();
        Ok(())
    }

    fn finalize(self, out: Option<&Path>) -> Result<Vec<String>> {
        let mut lines = match &self.partial {
            Some((p, _)) => complete_lines(&fs::read_to_string(p)?)
                .into_iter()
                .map(str::to_owned)
                .collect(),
            None => self.memory,
        };
        let mut keyed: Vec<(Vec<u64>, String)> = lines
            .drain(..)
            .map(|l| {
                let (k, _) = tuple_key_of_line(&l).ok_or_else(|| Error::Checkpoint {
                    path: "partial output".to_owned(),
                    reason: "unparseable report line".to_owned(),
                })?;
                Ok((k, l))
            })
            .collect::<Result<_>>()?;
        keyed.sort();
        let lines: Vec<String> = keyed.into_iter().map(|(_, l)| l).collect();
        if let Some(out) = out {
            write_atomic(out, &join_lines(&lines))?;
        }
        if let Some((_, mut f)) = self.checkpoint {
            f.write_all(format!("{COMPLETE_MARKER}\n").as_bytes())?;
            f.flush()?;
        }
        if let Some((p, f)) = self.partial {
            drop(f);
            fs::remove_file(p)?;
        }
        Ok(lines)
    }
}

#[derive(Serialize)]
struct CsvRow {
    tuple: String,
    terminal: bool,
    min_h: String,
    log_fano: bool,
    bounds_pass: bool,
    minimal_index: String,
    candidate: bool,
}

fn write_csv(path: &Path, lines: &[String]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for l in lines {
        let v: serde_json::Value = serde_json::from_str(l)?;
        let (_, tuple) = tuple_key_of_line(l).expect("final lines parse");
        let text = |x: &serde_json::Value| match x {
            serde_json::Value::Null => String::new(),
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        w.serialize(CsvRow {
            tuple,
            terminal: v["terminality"]["status"] == "terminal",
            min_h: text(&v["terminality"]["min_scanned_h"]),
            log_fano: v["log_fano"] == true,
            bounds_pass: v["bounds"]["pass"] == true,
            minimal_index: text(&v["minimal_index"]),
            candidate: v["exceptional_candidate"] == true,
        })?;
    }
    w.flush()?;
    Ok(())
}
