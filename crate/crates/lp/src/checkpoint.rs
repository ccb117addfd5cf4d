//! Resumable progress: a JSON checkpoint plus an append-only partial results file.
//!
//! The checkpoint records which tasks are done and how many bytes of the
//! partial file belong to them. Anything past that offset was written by an
//! unfinished run and is discarded on resume.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use lp_core::search::{LegendrePairRecord, SearchConfig, SearchSetup};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::archive::{line_json, write_atomic, PairLine};
use crate::error::{LpError, LpResult};

/// Hash of everything that determines the result set of a run.
pub fn fingerprint(setup: &SearchSetup, config: &SearchConfig) -> String {
    let mut h = Sha256::new();
    let plan = &setup.plan;
    h.update(format!(
        "lp-search v1;{};{};{};{};{:e};{}\n",
        plan.length, plan.factors.0, plan.factors.1, config.bucket_precision, config.tolerance, config.exhaustive
    ));
    for (tag, pairs) in [("1", &setup.pairs1), ("2", &setup.pairs2)] {
        for p in pairs {
            h.update(format!("{tag};{:?};{:?}\n", p.q.entries(), p.p.entries()));
        }
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub fingerprint: String,
    pub tasks: usize,
    /// Completed-task bitmap, hex encoded, bit `i % 8` of byte `i / 8`.
    pub completed: String,
    pub partial_offset: u64,
}

impl Checkpoint {
    pub fn fresh(fingerprint: String, tasks: usize) -> Self {
        Self {
            fingerprint,
            tasks,
            completed: hex::encode(vec![0u8; tasks.div_ceil(8)]),
            partial_offset: 0,
        }
    }

    fn bitmap(&self) -> LpResult<Vec<u8>> {
        let bytes = hex::decode(&self.completed).map_err(|e| LpError::Invariant(format!("checkpoint bitmap: {e}")))?;
        if bytes.len() != self.tasks.div_ceil(8) {
            return Err(LpError::Invariant("checkpoint bitmap has the wrong size".into()));
        }
        Ok(bytes)
    }

    pub fn is_done(&self, id: usize) -> bool {
        self.bitmap().map_or(false, |b| b.get(id / 8).map_or(false, |x| x >> (id % 8) & 1 == 1))
    }

    pub fn mark_done(&mut self, id: usize) -> LpResult<()> {
        let mut b = self.bitmap()?;
        let slot = b
            .get_mut(id / 8)
            .ok_or_else(|| LpError::Invariant(format!("task {id} outside checkpoint range")))?;
        *slot |= 1 << (id % 8);
        self.completed = hex::encode(b);
        Ok(())
    }

    pub fn done_count(&self) -> usize {
        self.bitmap().map_or(0, |b| b.iter().map(|x| x.count_ones() as usize).sum())
    }

    pub fn read(path: &Path) -> LpResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LpError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LpError::parse(path, e.line(), e.to_string()))
    }

    pub fn write(&self, path: &Path) -> LpResult<()> {
        write_atomic(path, format!("{}\n", line_json(self)).as_bytes())
    }
}

pub fn partial_path(checkpoint: &Path) -> PathBuf {
    let mut p = checkpoint.as_os_str().to_owned();
    p.push(".partial");
    PathBuf::from(p)
}

/// Checkpoint file, partial results file and in-memory state.
pub struct Progress {
    path: PathBuf,
    partial: File,
    pub state: Checkpoint,
}

impl Progress {
    /// Starts over, truncating any previous files.
    pub fn create(path: &Path, state: Checkpoint) -> LpResult<Self> {
        let partial_path = partial_path(path);
        let partial = File::create(&partial_path).map_err(|e| LpError::io(&partial_path, e))?;
        state.write(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            partial,
            state,
        })
    }

    /// Reopens a run, refusing a different configuration. Returns the records
    /// already committed.
    pub fn resume(path: &Path, expected: &str, tasks: usize) -> LpResult<(Self, Vec<LegendrePairRecord>)> {
        let state = Checkpoint::read(path)?;
        if state.fingerprint != expected {
            return Err(LpError::FingerprintMismatch {
                expected: expected.to_string(),
                found: state.fingerprint,
            });
        }
        if state.tasks != tasks {
            return Err(LpError::Invariant("checkpoint task count differs from the plan".into()));
        }
        let partial_path = partial_path(path);
        let text = fs::read(&partial_path).map_err(|e| LpError::io(&partial_path, e))?;
        let committed = usize::try_from(state.partial_offset).unwrap_or(usize::MAX);
        if text.len() < committed {
            return Err(LpError::Invariant("partial results file is shorter than the checkpoint".into()));
        }
        let body = std::str::from_utf8(&text[..committed]).map_err(|e| LpError::parse(&partial_path, 1, e.to_string()))?;
        let mut records = Vec::new();
        for (i, line) in body.lines().enumerate() {
            let p: PairLine = serde_json::from_str(line).map_err(|e| LpError::parse(&partial_path, i + 1, e.to_string()))?;
            records.push(p.to_record().map_err(|e| LpError::parse(&partial_path, i + 1, e))?);
        }
        let partial = OpenOptions::new()
            .write(true)
            .open(&partial_path)
            .map_err(|e| LpError::io(&partial_path, e))?;
        partial.set_len(state.partial_offset).map_err(|e| LpError::io(&partial_path, e))?;
        let mut progress = Self {
            path: path.to_path_buf(),
            partial,
            state,
        };
        progress.seek_end()?;
        Ok((progress, records))
    }

    fn seek_end(&mut self) -> LpResult<()> {
        use std::io::{Seek, SeekFrom};
        self.partial
            .seek(SeekFrom::End(0))
            .map(|_| ())
            .map_err(|e| LpError::io(partial_path(&self.path), e))
    }

    /// Appends a finished task's records, then commits the checkpoint.
    pub fn commit(&mut self, task: usize, records: &[LegendrePairRecord]) -> LpResult<()> {
        let mut chunk = String::new();
        for r in records {
            chunk.push_str(&line_json(&PairLine::from(r)));
            chunk.push('\n');
        }
        let pp = partial_path(&self.path);
        self.partial.write_all(chunk.as_bytes()).map_err(|e| LpError::io(&pp, e))?;
        self.partial.sync_data().map_err(|e| LpError::io(&pp, e))?;
        self.state.partial_offset += chunk.len() as u64;
        self.state.mark_done(task)?;
        self.state.write(&self.path)
    }
}
