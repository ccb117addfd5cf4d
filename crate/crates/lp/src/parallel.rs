//! Multi-threaded drivers for candidate enumeration and task execution.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use lp_core::compress::CrtContext;
use lp_core::pairgen::{
    candidate_prefixes, enum_candidates_with_prefix, expand_pairs, match_pairs, CompressedCandidate, CompressedPair,
    CompressionParams,
};
use lp_core::search::{
    merge_records, run_task, task_by_id, task_count, validate_factors, LegendrePairRecord, SearchConfig, SearchPlan,
    SearchSetup,
};

use crate::checkpoint::{fingerprint, Checkpoint, Progress};
use crate::error::{LpError, LpResult};

/// Thread count from `LP_THREADS`, else the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("LP_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `work` on each item with `threads` workers; results come back in item order.
fn map_parallel<T: Sync, R: Send>(items: &[T], threads: usize, work: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let (tx, rx) = mpsc::channel();
    thread::scope(|s| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            let tx = tx.clone();
            let (next, work) = (&next, &work);
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                if tx.send((i, work(item))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            slots[i] = Some(r);
        }
    });
    slots.into_iter().flatten().collect()
}

/// Candidate enumeration split by first entry across workers.
pub fn candidates_parallel(params: &CompressionParams, threads: usize) -> Vec<CompressedCandidate> {
    let prefixes = candidate_prefixes(params);
    let mut all: Vec<CompressedCandidate> = map_parallel(&prefixes, threads, |&f| enum_candidates_with_prefix(params, f))
        .into_iter()
        .flatten()
        .collect();
    all.sort_by(|a, b| a.vector.cmp(&b.vector));
    all
}

/// Candidates, base pairs and expanded pairs.
pub fn pairs_parallel(
    params: &CompressionParams,
    threads: usize,
) -> (Vec<CompressedCandidate>, Vec<CompressedPair>, Vec<CompressedPair>) {
    let candidates = candidates_parallel(params, threads);
    let base = match_pairs(&candidates, params);
    let expanded = expand_pairs(&base);
    (candidates, base, expanded)
}

pub fn plan_parallel(length: usize, d1: usize, d2: usize, threads: usize) -> LpResult<SearchSetup> {
    validate_factors(length, d1, d2)?;
    let (c1, b1, e1) = pairs_parallel(&CompressionParams::legendre(length, d1)?, threads);
    let (c2, b2, e2) = pairs_parallel(&CompressionParams::legendre(length, d2)?, threads);
    let tasks = task_count(&e1, &e2);
    Ok(SearchSetup {
        plan: SearchPlan {
            length,
            factors: (d1, d2),
            candidates: (c1.len(), c2.len()),
            base_pairs: (b1.len(), b2.len()),
            expanded_pairs: (e1.len(), e2.len()),
            tasks,
            instances: 4 * tasks,
        },
        pairs1: e1,
        pairs2: e2,
        ctx: CrtContext::new(d1, d2)?,
    })
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub threads: usize,
    pub checkpoint: Option<std::path::PathBuf>,
    pub resume: bool,
    /// Process at most this many pending tasks, then stop as if interrupted.
    pub stop_after: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    /// Merged records of every completed task, including resumed ones.
    pub records: Vec<LegendrePairRecord>,
    pub completed: usize,
    pub total: usize,
}

impl RunReport {
    pub fn finished(&self) -> bool {
        self.completed == self.total
    }
}

pub fn run_tasks(setup: &SearchSetup, config: &SearchConfig, opts: &RunOptions) -> LpResult<RunReport> {
    let total = setup.plan.tasks;
    let print = fingerprint(setup, config);
    let (mut progress, mut records) = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => {
            let (p, r) = Progress::resume(path, &print, total)?;
            (Some(p), r)
        }
        (Some(path), false) => (Some(Progress::create(path, Checkpoint::fresh(print, total))?), Vec::new()),
        (None, true) => return Err(LpError::Usage("--resume needs --checkpoint".into())),
        (None, false) => (None, Vec::new()),
    };
    let mut pending: Vec<usize> = (0..total)
        .filter(|&id| progress.as_ref().map_or(true, |p| !p.state.is_done(id)))
        .collect();
    if let Some(k) = opts.stop_after {
        pending.truncate(k);
    }
    let mut completed = progress.as_ref().map_or(0, |p| p.state.done_count());

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, lp_core::Result<Vec<LegendrePairRecord>>)>();
    let mut failure: Option<LpError> = None;
    thread::scope(|s| {
        for _ in 0..opts.threads.clamp(1, pending.len().max(1)) {
            let tx = tx.clone();
            let (next, abort, pending) = (&next, &abort, &pending);
            s.spawn(move || {
                while !abort.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&id) = pending.get(i) else { break };
                    let result = match task_by_id(&setup.pairs1, &setup.pairs2, id) {
                        Some(task) => run_task(&task, &setup.ctx, config),
                        None => Err(lp_core::Error::Invariant("task id out of range")),
                    };
                    if tx.send((id, result)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        for (id, result) in rx {
            if failure.is_some() {
                continue;
            }
            let outcome = result.map_err(LpError::from).and_then(|found| {
                if let Some(p) = progress.as_mut() {
                    p.commit(id, &found)?;
                }
                records.extend(found);
                Ok(())
            });
            match outcome {
                Ok(()) => completed += 1,
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    failure = Some(e);
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunReport {
        records: merge_records(records),
        completed,
        total,
    })
}
