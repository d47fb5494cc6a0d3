//! Deterministic CSV and JSON writers.
//!
//! Every CSV opens with one `# {json}` line holding the resolved config.
//! Numbers carry 17 significant digits so they round-trip exactly.

use crate::config::LoadedConfig;
use crate::CliError;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub(crate) fn header(cfg: &LoadedConfig, extra: Value) -> String {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let (Value::Object(map), Value::Object(extra)) = (&mut v, extra) {
        map.extend(extra);
    }
    serde_json::to_string(&v).expect("header serializes")
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn write_csv<I>(
    dir: &Path,
    name: &str,
    header: &str,
    columns: &[&str],
    rows: I,
) -> Result<PathBuf, CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut text = format!("# {header}\n{}\n", columns.join(","));
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(number).collect();
        writeln!(text, "{}", cells.join(",")).expect("writing to a String");
    }
    write(dir, name, &text)
}

pub(crate) fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}
