//! `lp-seq` text files: a header `# lp-seq v1 length=<ℓ>` followed by one
//! comma-separated sequence per line. Blank lines and further `#` lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lp_core::cyclic::CyclicVector;

use crate::error::{LpError, LpResult};

const MAGIC: &str = "# lp-seq v1 length=";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceFile {
    pub length: usize,
    pub sequences: Vec<CyclicVector>,
}

impl SequenceFile {
    pub fn new(length: usize, sequences: Vec<CyclicVector>) -> LpResult<Self> {
        for (i, s) in sequences.iter().enumerate() {
            if s.len() != length {
                return Err(LpError::Usage(format!(
                    "sequence {} has length {}, expected {length}",
                    i + 1,
                    s.len()
                )));
            }
        }
        Ok(Self { length, sequences })
    }

    /// Parses file contents; `origin` only labels error messages.
    pub fn parse(text: &str, origin: &Path) -> LpResult<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| LpError::parse(origin, 1, "empty file"))?;
        let length: usize = header
            .trim()
            .strip_prefix(MAGIC)
            .and_then(|n| n.trim().parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| LpError::parse(origin, 1, format!("expected header `{MAGIC}<n>`")))?;
        let mut sequences = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let entries = line
                .split(',')
                .map(|t| t.trim().parse::<i32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| LpError::parse(origin, i + 1, format!("bad entry: {e}")))?;
            if entries.len() != length {
                return Err(LpError::parse(
                    origin,
                    i + 1,
                    format!("{} entries, header declares {length}", entries.len()),
                ));
            }
            let v = CyclicVector::new(entries).map_err(|e| LpError::parse(origin, i + 1, e.to_string()))?;
            sequences.push(v);
        }
        Ok(Self { length, sequences })
    }

    pub fn read(path: &Path) -> LpResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LpError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Like [`SequenceFile::read`] but every entry must be 0 or 1.
    pub fn read_binary(path: &Path) -> LpResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LpError::io(path, e))?;
        let file = Self::parse(&text, path)?;
        let data_lines = text
            .lines()
            .enumerate()
            .skip(1)
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim().starts_with('#'))
            .map(|(i, _)| i + 1);
        for (seq, line) in file.sequences.iter().zip(data_lines) {
            if !seq.is_binary() {
                return Err(LpError::parse(path, line, "entries must be 0 or 1"));
            }
        }
        Ok(file)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{MAGIC}{}\n", self.length);
        for s in &self.sequences {
            let row: Vec<String> = s.entries().iter().map(i32::to_string).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> LpResult<()> {
        fs::write(path, self.render()).map_err(|e| LpError::io(path, e))
    }
}
