//! Output files: per-round logs (CSV or JSONL), the run summary and the
//! decomposition trace.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing a file
//! back yields exactly the in-memory values.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::protocol::{RoundLog, RoundTrace};

use super::runner::{RunOutput, Summary};

pub const CSV_HEADER: &str =
    "run_seed,round,action,loss,pv_loss,pseudo_regret,bonus_mean,bonus_max,entropy";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    /// `.jsonl` selects JSONL, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => OutputFormat::Jsonl,
            _ => OutputFormat::Csv,
        }
    }
}

/// `<path>.summary.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".summary.json");
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| BanditError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| BanditError::io(path, e))?;
    Ok(BufWriter::new(file))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_row(log: &RoundLog) -> String {
    let mut s = String::new();
    write!(
        s,
        "{},{},{},{},{},{},{},{},{}",
        log.run_seed,
        log.round,
        log.action,
        log.loss,
        log.pv_loss,
        opt(log.pseudo_regret),
        opt(log.bonus_mean),
        opt(log.bonus_max),
        log.entropy
    )
    .expect("writing to a String");
    s
}

/// Writes the logs of every run, in run order.
pub fn emit(runs: &[RunOutput], format: OutputFormat, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| BanditError::io(path, e);
    if format == OutputFormat::Csv {
        writeln!(out, "{CSV_HEADER}").map_err(io)?;
    }
    for log in runs.iter().flat_map(|r| &r.logs) {
        let line = match format {
            OutputFormat::Csv => csv_row(log),
            OutputFormat::Jsonl => serde_json::to_string(log).expect("round logs serialize"),
        };
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| BanditError::io(path, e);
    serde_json::to_writer_pretty(&mut out, summary).map_err(|e| io(e.into()))?;
    writeln!(out).map_err(io)?;
    out.flush().map_err(io)
}

pub fn write_trace(runs: &[RunOutput], path: &Path) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| BanditError::io(path, e);
    for row in runs.iter().filter_map(|r| r.trace.as_ref()).flatten() {
        let line = serde_json::to_string(row).expect("traces serialize");
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_trace(path: &Path) -> Result<Vec<RoundTrace>> {
    read_jsonl(path)
}

/// Reads a JSONL log file.
pub fn read_jsonl_logs(path: &Path) -> Result<Vec<RoundLog>> {
    read_jsonl(path)
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| BanditError::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BanditError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| BanditError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Parses a CSV log file written by [`emit`].
pub fn read_csv_logs(path: &Path) -> Result<Vec<RoundLog>> {
    let text = std::fs::read_to_string(path).map_err(|e| BanditError::io(path, e))?;
    let perr = |line: usize, message: String| BanditError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(perr(1, "missing or unexpected header".into())),
    }
    let mut logs = Vec::new();
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(perr(i + 1, format!("expected 9 fields, found {}", f.len())));
        }
        let num = |j: usize| -> Result<f64> {
            f[j].parse()
                .map_err(|_| perr(i + 1, format!("field {j}: bad number {:?}", f[j])))
        };
        let opt_num = |j: usize| -> Result<Option<f64>> {
            if f[j].is_empty() {
                Ok(None)
            } else {
                num(j).map(Some)
            }
        };
        let int = |j: usize| -> Result<u64> {
            f[j].parse()
                .map_err(|_| perr(i + 1, format!("field {j}: bad integer {:?}", f[j])))
        };
        logs.push(RoundLog {
            run_seed: int(0)?,
            round: int(1)? as usize,
            context_id: None,
            action: int(2)? as usize,
            loss: num(3)?,
            pv_loss: num(4)?,
            pseudo_regret: opt_num(5)?,
            bonus_mean: opt_num(6)?,
            bonus_max: opt_num(7)?,
            entropy: num(8)?,
        });
    }
    Ok(logs)
}
