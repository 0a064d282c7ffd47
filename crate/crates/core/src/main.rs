use std::num::NonZeroU64;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use bp_singularity::complements::{self, Arrangement};
use bp_singularity::pipeline::{self, AnalysisConfig, Report};
use bp_singularity::search::{self, SearchConfig};
use bp_singularity::terminality::{self, BoundMode, ScanOptions, DEFAULT_ORACLE_LIMIT};
use bp_singularity::{Error, ExponentTuple, Rational};

#[derive(Parser)]
#[command(name = "bpsing", version, about = "Brieskorn-Pham singularity toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis of one tuple: terminality, blow-up model, bounds, complement.
    Check {
        tuple: ExponentTuple,
        #[arg(long, default_value = "lcm")]
        bound: BoundMode,
        #[arg(long)]
        full_scan: bool,
        #[arg(long, default_value_t = pipeline::DEFAULT_N_MAX)]
        max_n: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
    },
    /// Minimal complement index of the induced log Fano pair.
    Complement {
        tuple: ExponentTuple,
        #[arg(long, default_value_t = pipeline::DEFAULT_N_MAX)]
        max_n: u64,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive minimum of the discrepancy over a box of interior vectors.
    Oracle {
        tuple: ExponentTuple,
        #[arg(long = "box")]
        box_side: u64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        limit: u64,
    },
    /// lc status and threshold of a generic hyperplane arrangement.
    Lct {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',')]
        coeffs: Vec<Rational>,
    },
    /// Analyse every nondecreasing tuple with entries in [2, max-exp].
    Search {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        max_exp: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = pipeline::DEFAULT_N_MAX)]
        max_n: u64,
        #[arg(long, default_value = "lcm")]
        bound: BoundMode,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        require_coprime: bool,
        #[arg(long)]
        force: bool,
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
    },
}

fn nonzero(n: u64) -> Result<NonZeroU64, Error> {
    NonZeroU64::new(n).ok_or_else(|| Error::InvalidArgument("--max-n must be >= 1".into()))
}

fn print_check(r: &Report) {
    let t = &r.terminality;
    println!("tuple                  ({})", r.tuple);
    println!("reciprocal sum         {}", r.reciprocal_sum);
    match &t.witness {
        None => println!(
            "terminality            terminal (min h = {}, scanned d <= {}, {} bound)",
            t.min_scanned_h.as_ref().map_or("-".into(), ToString::to_string),
            t.scanned_up_to,
            t.bound_mode
        ),
        Some(w) => println!(
            "terminality            not terminal, witness {} with discrepancy {}",
            w,
            t.witness_discrepancy.as_ref().expect("set with witness")
        ),
    }
    let w: Vec<String> = r.weights.weights.iter().map(ToString::to_string).collect();
    println!("blow-up weights        ({})", w.join(","));
    println!("exceptional discrep.   {}", r.exceptional_discrepancy);
    let c: Vec<String> = r.diff_coefficients.iter().map(ToString::to_string).collect();
    println!("boundary               ({})", c.join(", "));
    println!("log Fano               {}", r.log_fano);
    println!(
        "bounds                 d_max = {}, pass = {}",
        r.bounds.d_max, r.bounds.pass
    );
    match &r.complement {
        Some(d) => {
            let c: Vec<String> = d.rounded_coefficients.iter().map(ToString::to_string).collect();
            println!(
                "minimal complement     n = {} ({}) padding {} lc {}",
                d.index,
                c.join(", "),
                d.padding.len(),
                d.lc.status
            );
        }
        None => println!("minimal complement     none for n <= {}", r.n_max),
    }
    if !r.coprimality {
        println!("caveat                 exponents not pairwise coprime");
    }
    println!("exceptional candidate  {}", r.exceptional_candidate);
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Check {
            tuple,
            bound,
            full_scan,
            max_n,
            jobs,
            json,
        } => {
            let cfg = AnalysisConfig {
                scan: ScanOptions {
                    mode: bound,
                    full_scan,
                },
                n_max: nonzero(max_n)?,
                record_timings: true,
            };
            let report = pipeline::with_workers(jobs, || pipeline::analyze(&tuple, &cfg))?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print_check(&report);
            }
        }
        Command::Complement { tuple, max_n, json } => {
            let rep = pipeline::complement_report(&tuple, nonzero(max_n)?);
            if json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                match (&rep.minimal_index, &rep.rounded_coefficients) {
                    (Some(n), Some(c)) => {
                        let c: Vec<String> = c.iter().map(ToString::to_string).collect();
                        println!("minimal index {n}: ({})", c.join(", "));
                        println!("lc status     {}", rep.lc_status.expect("set with index"));
                    }
                    _ => println!("no complement for n <= {}", rep.n_max),
                }
                println!("bounds pass   {} (d_max = {})", rep.bounds.pass, rep.bounds.d_max);
            }
        }
        Command::Oracle {
            tuple,
            box_side,
            limit,
        } => {
            let (min, argmin) = terminality::brute_force_min_discrepancy(&tuple, box_side, limit)?;
            println!("{}", serde_json::json!({
                "tuple": tuple,
                "box": box_side,
                "min_discrepancy": min.to_string(),
                "argmin": argmin,
            }));
        }
        Command::Lct { dim, coeffs } => {
            let arr = Arrangement::new(dim, coeffs)?;
            let rep = complements::lc_status(&arr);
            let threshold = complements::lct(&arr)
                .map_or_else(|| "infinity".to_owned(), |t| t.to_string());
            println!("{}", serde_json::json!({
                "dim": dim,
                "coefficients": arr.coefficients(),
                "lc_status": rep.status,
                "worst_flat": rep.worst_flat,
                "lct": threshold,
            }));
        }
        Command::Search {
            k,
            max_exp,
            jobs,
            max_n,
            bound,
            out,
            checkpoint,
            csv,
            require_coprime,
            force,
            stop_after,
        } => {
            let cfg = SearchConfig {
                k,
                max_exp,
                bound_mode: bound,
                n_max: nonzero(max_n)?,
                jobs,
                out: out.clone(),
                checkpoint,
                csv,
                require_coprime,
                force,
                stop_after,
            };
            let (summary, lines) = search::run_search(&cfg)?;
            if out.is_none() {
                for l in &lines {
                    println!("{l}");
                }
            }
            eprintln!(
                "{}",
                serde_json::to_string(&summary).context("summary serialization")?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(2, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
