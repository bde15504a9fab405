// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::SweepResult;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format `{s}`"))),
        }
    }
}

fn table<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_csv(result: &SweepResult) -> Result<String> {
    table(&result.rows)
}

pub fn visibility_csv(result: &SweepResult) -> Result<String> {
    table(&result.visibility)
}

pub fn spread_csv(result: &SweepResult) -> Result<String> {
    table(&result.spread)
}

pub fn to_json(result: &SweepResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(result)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<SweepResult> {
    Ok(serde_json::from_str(text)?)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_{suffix}{ext}"))
}

/// Write `result` to `path`. CSV puts the visibility and spread tables
/// next to it as `<stem>_visibility.csv` and `<stem>_spread.csv`; JSON
/// keeps all three in one file. Returns every path written.
pub fn export(result: &SweepResult, format: Format, path: &Path) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::InvalidParameter("nothing to export".into()));
    }
    let files = match format {
        Format::Json => vec![(path.to_path_buf(), to_json(result)?)],
        Format::Csv => vec![
            (path.to_path_buf(), rows_csv(result)?),
            (sibling(path, "visibility"), visibility_csv(result)?),
            (sibling(path, "spread"), spread_csv(result)?),
        ],
    };
    for (p, text) in &files {
        std::fs::write(p, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
