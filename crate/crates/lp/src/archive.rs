//! Line-delimited JSON archives of search results.
//!
//! Every line is an object tagged by `type`: one `pair` line per record,
//! sorted by key, and a final `summary` line.

use std::fs;
use std::path::Path;

use lp_core::cyclic::CyclicVector;
use lp_core::search::{canonicalize_lp, LegendrePairRecord, Provenance, SearchPlan};
use serde::{Deserialize, Serialize};

use crate::error::{LpError, LpResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLine {
    pub u: String,
    pub v: String,
    pub key: String,
    pub lambda: i64,
    pub gamma: i64,
    pub rho_u: i64,
    pub rho_v: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<[u8; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub length: usize,
    pub factors: Option<[usize; 2]>,
    pub records: usize,
    pub tasks: Option<usize>,
    pub instances: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArchiveLine {
    Pair(PairLine),
    Summary(Summary),
}

fn bits(v: &CyclicVector) -> String {
    v.entries().iter().map(|&x| if x == 1 { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> Option<CyclicVector> {
    let entries = s
        .chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect::<Option<Vec<i32>>>()?;
    CyclicVector::new(entries).ok()
}

impl From<&LegendrePairRecord> for PairLine {
    fn from(r: &LegendrePairRecord) -> Self {
        Self {
            u: bits(&r.u),
            v: bits(&r.v),
            key: r.key.to_string(),
            lambda: r.lambda,
            gamma: r.gamma,
            rho_u: r.rho_u,
            rho_v: r.rho_v,
            task: r.provenance.map(|p| p.task),
            instances: r.provenance.map(|p| [p.instances.0, p.instances.1]),
        }
    }
}

impl PairLine {
    /// Rebuilds the record, re-verifying the pair and every stored derived field.
    pub fn to_record(&self) -> Result<LegendrePairRecord, String> {
        let u = parse_bits(&self.u).ok_or("u is not a 0/1 string")?;
        let v = parse_bits(&self.v).ok_or("v is not a 0/1 string")?;
        let mut record = canonicalize_lp(&u, &v).map_err(|e| e.to_string())?;
        if record.key.to_string() != self.key {
            return Err("stored key does not match the pair".into());
        }
        if (record.lambda, record.gamma, record.rho_u, record.rho_v) != (self.lambda, self.gamma, self.rho_u, self.rho_v) {
            return Err("stored lambda, gamma or energies do not match the pair".into());
        }
        record.provenance = match (self.task, self.instances) {
            (Some(task), Some([a, b])) => Some(Provenance {
                task,
                instances: (a, b),
            }),
            (None, None) => None,
            _ => return Err("task and instances must appear together".into()),
        };
        Ok(record)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultArchive {
    pub records: Vec<LegendrePairRecord>,
    pub summary: Summary,
}

impl ResultArchive {
    /// Records are expected merged (sorted by key, one per key).
    pub fn new(records: Vec<LegendrePairRecord>, plan: Option<&SearchPlan>) -> Self {
        let length = records.first().map_or_else(|| plan.map_or(0, |p| p.length), |r| r.u.len());
        let summary = Summary {
            length,
            factors: plan.map(|p| [p.factors.0, p.factors.1]),
            records: records.len(),
            tasks: plan.map(|p| p.tasks),
            instances: plan.map(|p| p.instances),
        };
        Self { records, summary }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&line_json(&ArchiveLine::Pair(r.into())));
            out.push('\n');
        }
        out.push_str(&line_json(&ArchiveLine::Summary(self.summary.clone())));
        out.push('\n');
        out
    }

    pub fn parse(text: &str, origin: &Path) -> LpResult<Self> {
        let mut records: Vec<LegendrePairRecord> = Vec::new();
        let mut summary = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if summary.is_some() {
                return Err(LpError::parse(origin, n, "content after the summary line"));
            }
            let parsed: ArchiveLine = serde_json::from_str(line).map_err(|e| LpError::parse(origin, n, e.to_string()))?;
            match parsed {
                ArchiveLine::Pair(p) => {
                    let r = p.to_record().map_err(|e| LpError::parse(origin, n, e))?;
                    if let Some(prev) = records.last() {
                        if prev.key >= r.key {
                            return Err(LpError::parse(origin, n, "records are not strictly sorted by key"));
                        }
                    }
                    records.push(r);
                }
                ArchiveLine::Summary(s) => {
                    if s.records != records.len() {
                        return Err(LpError::parse(
                            origin,
                            n,
                            format!("summary counts {} records, found {}", s.records, records.len()),
                        ));
                    }
                    summary = Some(s);
                }
            }
        }
        let summary = summary.ok_or_else(|| LpError::parse(origin, text.lines().count().max(1), "missing summary line"))?;
        Ok(Self { records, summary })
    }

    pub fn read(path: &Path) -> LpResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LpError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Writes through a temporary sibling and renames, so readers never see a partial archive.
    pub fn write(&self, path: &Path) -> LpResult<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

pub(crate) fn line_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap_or_default()
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> LpResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| LpError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| LpError::io(path, e))
}
