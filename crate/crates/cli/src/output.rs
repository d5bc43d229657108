//! CSV and JSON writers. Every file starts with metadata: tool version,
//! command, resolved configuration and a timestamp. The timestamp is the only
//! field that changes between identical runs.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::CliError;

pub struct Meta {
    pub command: &'static str,
    pub config: Value,
}

impl Meta {
    fn to_json(&self) -> Value {
        json!({
            "tool": "imexstab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "timestamp": timestamp(),
        })
    }
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// 17 significant digits; empty for a missing value.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines after the metadata.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub fn render_csv(meta: &Meta, table: &Table) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let m = meta.to_json();
    writeln!(buf, "# tool: imexstab {}", m["version"].as_str().unwrap_or_default())?;
    writeln!(buf, "# command: {}", meta.command)?;
    writeln!(buf, "# config: {}", meta.config)?;
    writeln!(buf, "# timestamp: {}", m["timestamp"])?;
    for (k, v) in &table.notes {
        writeln!(buf, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn render_json(meta: &Meta, result: Value) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(&json!({ "meta": meta.to_json(), "result": result }))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Write to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_metadata_then_header() {
        let meta = Meta {
            command: "test",
            config: json!({"r": 2}),
        };
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![num(0.1), "a,b".into()]);
        let text = String::from_utf8(render_csv(&meta, &t).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool: imexstab"));
        assert_eq!(lines[2], "# config: {\"r\":2}");
        assert_eq!(lines[4], "x,label");
        assert_eq!(lines[5], "1.0000000000000001e-1,\"a,b\"");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
