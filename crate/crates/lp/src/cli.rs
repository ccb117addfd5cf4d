//! Command-line surface. Each command writes its report to `out` and returns
//! the process exit status.

use std::io::Write;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lp_core::bmfm::{count, enumerate, MarginalInstance};
use lp_core::cyclic::CyclicVector;
use lp_core::oracle::{oracle_bmfm, oracle_feasible_subsets, oracle_lp, oracle_orbit};
use lp_core::pairgen::CompressionParams;
use lp_core::search::{correlation_energy, SearchConfig};
use lp_core::spectral::{divisor_psd_check, divisor_psd_sums, first_failing_lag};
use serde::Serialize;

use crate::archive::{line_json, ResultArchive};
use crate::error::{LpError, LpResult};
use crate::parallel::{default_threads, pairs_parallel, plan_parallel, run_tasks, RunOptions};
use crate::seqfile::SequenceFile;
use crate::stats::{energy_histogram, histogram_csv, mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "lp", version, about = "Legendre pair search by modular compression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a sequence file holds a {0,1} Legendre pair.
    Verify { file: PathBuf },
    /// Compressed complementary pairs for one modulus, as JSON lines.
    Pairs(PairsArgs),
    /// Count or list binary matrices with fixed row and column sums.
    Bmfm(BmfmArgs),
    /// Run (or plan) a full search.
    Search(SearchArgs),
    /// Correlation-energy histogram of an archive, as CSV.
    Stats {
        archive: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force references.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub delta: usize,
    /// Emit the decimation-expanded list instead of the inequivalent pairs.
    #[arg(long)]
    pub expand: bool,
    #[arg(long, env = "LP_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BmfmArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rows: Vec<i32>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cols: Vec<i32>,
    #[arg(long, conflicts_with = "list")]
    pub count: bool,
    #[arg(long)]
    pub list: bool,
    /// Stop listing after this many matrices.
    #[arg(long)]
    pub limit: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub length: usize,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub factors: Vec<usize>,
    #[arg(long, env = "LP_THREADS")]
    pub threads: Option<usize>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub resume: bool,
    /// Half-width of the PSD probe window.
    #[arg(long, default_value_t = lp_core::spectral::PSD_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 6)]
    pub bucket_precision: u32,
    /// Bytes the materialized side of a matching may use before splitting.
    #[arg(long, default_value_t = 1 << 30)]
    pub max_bucket_memory: usize,
    /// Process at most this many tasks, then stop (resumable).
    #[arg(long)]
    pub stop_after: Option<usize>,
    /// Print the stage sizes and exit without enumerating.
    #[arg(long)]
    pub plan_only: bool,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exhaustive Legendre pair search (ℓ ≤ 21).
    Lp {
        #[arg(long)]
        length: usize,
    },
    /// Exhaustive fixed-marginal matrix count (at most 20 cells).
    Bmfm {
        #[arg(long, value_delimiter = ',')]
        rows: Vec<i32>,
        #[arg(long, value_delimiter = ',')]
        cols: Vec<i32>,
    },
    /// Subset-criterion feasibility (rows + cols ≤ 24).
    Feasible {
        #[arg(long, value_delimiter = ',')]
        rows: Vec<i32>,
        #[arg(long, value_delimiter = ',')]
        cols: Vec<i32>,
    },
    /// Decimation class of a vector (ℓ ≤ 35) with its compressions.
    Orbit {
        #[arg(long, value_delimiter = ',')]
        vector: Vec<i32>,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> LpResult<i32> {
    match cli.command {
        Command::Verify { file } => cmd_verify(&file, out),
        Command::Pairs(a) => cmd_pairs(&a, out),
        Command::Bmfm(a) => cmd_bmfm(&a, out),
        Command::Search(a) => cmd_search(&a, out),
        Command::Stats { archive, out: csv } => cmd_stats(&archive, csv.as_deref(), out),
        Command::Oracle(o) => cmd_oracle(o, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> LpResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| LpError::io("<output>", e))
}

pub fn cmd_verify(file: &std::path::Path, out: &mut dyn Write) -> LpResult<i32> {
    let seq = SequenceFile::read_binary(file)?;
    if seq.sequences.len() != 2 {
        return Err(LpError::parse(
            file,
            1,
            format!("expected exactly two sequences, found {}", seq.sequences.len()),
        ));
    }
    let (u, v) = (&seq.sequences[0], &seq.sequences[1]);
    let n = seq.length;
    let kappa = (n as i64 + 1) / 2;
    let mut report = format!("length {n}\nkappa {kappa} (densities {} {})\nlambda {kappa}\n", u.density(), v.density());
    let mut is_lp = u.density() == kappa && v.density() == kappa;
    match first_failing_lag(u, v, kappa) {
        None => report += &format!("paf ok: PAF(u,g)+PAF(v,g) = {kappa} at all {} nonzero lags\n", n - 1),
        Some((g, s)) => {
            is_lp = false;
            report += &format!("paf FAIL: first failing lag {g}, sum {s}, expected {kappa}\n");
        }
    }
    for (d, s) in divisor_psd_sums(u, v)? {
        report += &format!("psd index {d}: {s:.6}\n");
    }
    if u.density() == kappa && v.density() == kappa {
        let ok = divisor_psd_check(u, v, kappa as f64)?;
        report += &format!("divisor psd check: {}\n", if ok { "ok" } else { "FAIL" });
    }
    report += &format!("rho_u {}\nrho_v {}\n", correlation_energy(u)?, correlation_energy(v)?);
    report += if is_lp { "result: LP\n" } else { "result: not an LP\n" };
    emit(out, &report)?;
    Ok(if is_lp { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum PairsLine {
    Pair {
        delta: usize,
        q: Vec<i32>,
        p: Vec<i32>,
        classes: [usize; 2],
        expansion: Vec<usize>,
        applied: usize,
    },
    Summary {
        length: usize,
        delta: usize,
        candidates: usize,
        pairs: usize,
        expanded: usize,
    },
}

pub fn cmd_pairs(a: &PairsArgs, out: &mut dyn Write) -> LpResult<i32> {
    let params = CompressionParams::legendre(a.length, a.delta)?;
    let threads = a.threads.unwrap_or_else(default_threads);
    let (candidates, base, expanded) = pairs_parallel(&params, threads);
    let chosen = if a.expand { &expanded } else { &base };
    let mut text = String::new();
    for p in chosen {
        text += &line_json(&PairsLine::Pair {
            delta: a.delta,
            q: p.q.entries().to_vec(),
            p: p.p.entries().to_vec(),
            classes: [p.classes.0, p.classes.1],
            expansion: p.expansion.clone(),
            applied: p.applied,
        });
        text.push('\n');
    }
    text += &line_json(&PairsLine::Summary {
        length: a.length,
        delta: a.delta,
        candidates: candidates.len(),
        pairs: base.len(),
        expanded: expanded.len(),
    });
    text.push('\n');
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(|e| LpError::io(path, e))?,
        None => emit(out, &text)?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_bmfm(a: &BmfmArgs, out: &mut dyn Write) -> LpResult<i32> {
    if a.rows.is_empty() || a.cols.is_empty() {
        return Err(LpError::Usage("--rows and --cols must be non-empty".into()));
    }
    let inst = MarginalInstance::new(a.rows.clone(), a.cols.clone());
    if a.list {
        let cols = a.cols.len();
        let mut buf = String::new();
        let mut seen = 0u64;
        enumerate(&inst, |m| {
            let rows: Vec<String> = m
                .entries()
                .chunks(cols)
                .map(|r| r.iter().map(|b| char::from(b'0' + b)).collect())
                .collect();
            buf += &rows.join("/");
            buf.push('\n');
            seen += 1;
            if a.limit.is_some_and(|l| seen >= l) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        emit(out, &buf)?;
    } else {
        emit(out, &format!("{}\n", count(&inst)))?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_search(a: &SearchArgs, out: &mut dyn Write) -> LpResult<i32> {
    let [d1, d2] = a.factors[..] else {
        return Err(LpError::Usage("--factors takes exactly two values, e.g. 3,5".into()));
    };
    let threads = a.threads.unwrap_or_else(default_threads).max(1);
    let setup = plan_parallel(a.length, d1, d2, threads)?;
    let plan = &setup.plan;
    let plan_text = format!(
        "length {} factors {}x{}\ncandidates {} {}\npairs {} {}\nexpanded {} {}\ntasks {}\ninstances {}\n",
        plan.length,
        d1,
        d2,
        plan.candidates.0,
        plan.candidates.1,
        plan.base_pairs.0,
        plan.base_pairs.1,
        plan.expanded_pairs.0,
        plan.expanded_pairs.1,
        plan.tasks,
        plan.instances
    );
    if a.plan_only {
        emit(out, &plan_text)?;
        return Ok(EXIT_OK);
    }
    eprint!("{plan_text}");
    let config = SearchConfig {
        bucket_precision: a.bucket_precision,
        max_bucket_memory: a.max_bucket_memory,
        tolerance: a.tolerance,
        exhaustive: false,
    };
    let opts = RunOptions {
        threads,
        checkpoint: a.checkpoint.clone(),
        resume: a.resume,
        stop_after: a.stop_after,
    };
    let report = run_tasks(&setup, &config, &opts)?;
    if !report.finished() {
        eprintln!("stopped after {} of {} tasks", report.completed, report.total);
        return Ok(EXIT_OK);
    }
    let archive = ResultArchive::new(report.records, Some(plan));
    match &a.out {
        Some(path) => archive.write(path)?,
        None => emit(out, &archive.render())?,
    }
    eprintln!("{} inequivalent pairs", archive.records.len());
    Ok(EXIT_OK)
}

pub fn cmd_stats(archive: &std::path::Path, csv: Option<&std::path::Path>, out: &mut dyn Write) -> LpResult<i32> {
    let archive = ResultArchive::read(archive)?;
    let h = energy_histogram(&archive.records);
    let text = histogram_csv(&h);
    match csv {
        Some(path) => std::fs::write(path, text).map_err(|e| LpError::io(path, e))?,
        None => emit(out, &text)?,
    }
    if let (Some(lo), Some(hi)) = (h.keys().next(), h.keys().next_back()) {
        eprintln!("energy range [{lo}, {hi}], mode {}", mode(&h).unwrap_or(*lo));
    }
    Ok(EXIT_OK)
}

/// What an oracle computed and how long it took.
#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub instance: String,
    pub result: serde_json::Value,
    pub seconds: f64,
}

pub fn cmd_oracle(cmd: OracleCommand, out: &mut dyn Write) -> LpResult<i32> {
    let start = Instant::now();
    let (instance, result) = match cmd {
        OracleCommand::Lp { length } => {
            let keys = oracle_lp(length)?;
            let list: Vec<String> = keys
                .iter()
                .map(|(a, b)| {
                    let s = |v: &Vec<i32>| v.iter().map(|x| x.to_string()).collect::<String>();
                    format!("{}:{}", s(a), s(b))
                })
                .collect();
            (format!("lp length={length}"), serde_json::json!({ "count": keys.len(), "keys": list }))
        }
        OracleCommand::Bmfm { rows, cols } => {
            let (n, _) = oracle_bmfm(&rows, &cols)?;
            (format!("bmfm rows={rows:?} cols={cols:?}"), serde_json::json!({ "count": n }))
        }
        OracleCommand::Feasible { rows, cols } => {
            let ok = oracle_feasible_subsets(&rows, &cols)?;
            (format!("feasible rows={rows:?} cols={cols:?}"), serde_json::json!({ "feasible": ok }))
        }
        OracleCommand::Orbit { vector } => {
            let orbit = oracle_orbit(&vector)?;
            let members: Vec<serde_json::Value> = orbit
                .iter()
                .map(|m| serde_json::json!({ "vector": m.vector, "compressions": m.compressions }))
                .collect();
            CyclicVector::new(vector.clone())?;
            (
                format!("orbit vector={vector:?}"),
                serde_json::json!({ "size": orbit.len(), "members": members }),
            )
        }
    };
    let report = OracleReport {
        instance,
        result,
        seconds: start.elapsed().as_secs_f64(),
    };
    emit(out, &format!("{}\n", line_json(&report)))?;
    Ok(EXIT_OK)
}
