//! Writing reports as JSON or flattened CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use isomono::{CMatrix, LatticePoint};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// The explicit choice, else `csv` for a `.csv` output path, else `json`.
    pub fn pick(explicit: Option<Format>, out: Option<&Path>) -> Format {
        explicit.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}

/// A real number with 17 significant digits, enough to round-trip a double.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `k1,…,kn,block,row,col,re,im`.
pub fn matrix_header(n: usize) -> String {
    let mut h: Vec<String> = (1..=n).map(|i| format!("k{i}")).collect();
    h.extend(["block", "row", "col", "re", "im"].map(String::from));
    h.join(",")
}

/// One CSV row per entry of each matrix; blocks and indices are 1-based.
pub fn push_matrix_rows(out: &mut String, k: Option<&LatticePoint>, blocks: &[CMatrix], first_block: usize) {
    let prefix: String = k.map(|k| k.iter().map(|v| format!("{v},")).collect()).unwrap_or_default();
    for (b, m) in blocks.iter().enumerate() {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                let _ = writeln!(out, "{prefix}{},{},{},{},{}", b + first_block, i + 1, j + 1, num(z.re), num(z.im));
            }
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
