//! CSV and JSON writers. Every file starts with the effective config so a
//! run can be reproduced from its output alone; floats are printed with 17
//! significant digits so values round-trip exactly.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub use crate::config::fmt_f64;

/// `# key=value` header lines, one CSV header row, then data rows.
pub fn write_csv(
    path: &str,
    config: &RunConfig,
    columns: &str,
    rows: impl Iterator<Item = String>,
) -> Result<(), CliError> {
    let mut text = String::new();
    for line in config.header_lines() {
        text.push_str("# ");
        text.push_str(&line);
        text.push('\n');
    }
    text.push_str(columns);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    write_atomic(path, &text)
}

/// Pretty JSON of `{ "config": ..., "payload fields"... }`.
pub fn write_json<T: Serialize>(path: &str, payload: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(payload)
        .map_err(|e| CliError::Io(format!("cannot serialize output: {e}")))?;
    write_atomic(path, &text)
}

fn write_atomic(path: &str, text: &str) -> Result<(), CliError> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            return Err(CliError::Io(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))
}

/// Sibling path with an extra suffix before the extension:
/// `sweep.csv` -> `sweep.fit.json`.
pub fn sibling(path: &str, suffix: &str) -> String {
    let p = Path::new(path);
    match p.file_stem() {
        Some(stem) => {
            let mut out = p.to_path_buf();
            out.set_file_name(format!("{}.{suffix}", stem.to_string_lossy()));
            out.to_string_lossy().into_owned()
        }
        None => format!("{path}.{suffix}"),
    }
}
