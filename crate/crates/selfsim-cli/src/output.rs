//! Output files: a header block with the resolved config, then the payload.
//! Everything is rendered in memory, written to a temporary file next to the
//! target and renamed, so a failed run never leaves a partial file behind.

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const PROGRAM: &str = concat!("selfsim ", env!("CARGO_PKG_VERSION"));

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Collects files for one command and writes them only on `commit`.
pub struct Outputs<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl<'a> Outputs<'a> {
    pub fn new(cfg: &'a RunConfig, command: &'static str) -> Self {
        Self { cfg, command, files: Vec::new() }
    }

    fn header(&self) -> String {
        let mut h = format!("# {PROGRAM}\n# command = {}\n", self.command);
        for line in self.cfg.to_text().lines() {
            h.push_str("# ");
            h.push_str(line);
            h.push('\n');
        }
        h
    }

    /// CSV with `#` header lines, a column row, then `rows`.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
        let mut text = self.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.files.push((self.cfg.out_dir.join(name), text.into_bytes()));
    }

    /// JSON object `{program, command, config, result}`.
    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> CliResult<()> {
        let doc = json!({
            "program": PROGRAM,
            "command": self.command,
            "config": self.cfg,
            "result": serde_json::to_value(result).map_err(|e| CliError::Config(format!("serialising {name}: {e}")))?,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialise");
        text.push('\n');
        self.files.push((self.cfg.out_dir.join(name), text.into_bytes()));
        Ok(())
    }

    pub fn commit(self) -> CliResult<Vec<PathBuf>> {
        let dir = &self.cfg.out_dir;
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut written = Vec::new();
        for (path, bytes) in self.files {
            write_atomic(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Shortest round-trip representation; NaN for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:e}")
    }
}

pub fn value_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
