//! Experiment pipeline behind the `confine` CLI.
//!
//! Instances and run records travel as JSON lines. Every stage buffers its
//! output and sorts it before anything is written, so worker count and
//! scheduling never change a byte of the result.

mod pipeline;
mod records;
mod report;

use std::fs;
use std::path::Path;

use serde::Serialize;

pub use pipeline::{generate, parse_algorithms, parse_gen_specs, run_instances, RunOptions};
pub use records::{records_csv, InstanceRecord, RunRecord, CSV_COLUMNS};
pub use report::{
    summarize, verify, AlgorithmSummary, Mismatch, SectorNote, SectorNoteRow, SummaryReport,
    Verification, Violation, BOUND_SLACK, RECOMPUTE_TOLERANCE,
};

/// Failures of a pipeline stage, each mapped to a CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] crate::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } => 3,
            _ => 2,
        }
    }

    fn parse(source_name: &str, line: usize, msg: impl Into<String>) -> Self {
        HarnessError::Parse {
            source_name: source_name.to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

pub fn read_text(path: &Path) -> HarnessResult<String> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, contents: &str) -> HarnessResult<()> {
    fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One compact JSON document per line, newline-terminated.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Non-blank lines with their 1-based line numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses an instance file; ids must be unique.
pub fn parse_instances(text: &str, source_name: &str) -> HarnessResult<Vec<InstanceRecord>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (line, content) in numbered_lines(text) {
        let rec = InstanceRecord::parse_line(content).map_err(|m| HarnessError::parse(source_name, line, m))?;
        if !seen.insert(rec.id.clone()) {
            return Err(HarnessError::parse(source_name, line, format!("duplicate instance id {:?}", rec.id)));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_records(text: &str, source_name: &str) -> HarnessResult<Vec<RunRecord>> {
    numbered_lines(text)
        .map(|(line, content)| {
            serde_json::from_str(content).map_err(|e| HarnessError::parse(source_name, line, e.to_string()))
        })
        .collect()
}
