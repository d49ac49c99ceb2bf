//! Machine-readable command reports.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// sha256 of the command line and the configuration text.
    pub inputs_digest: String,
    pub results: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    /// None for commands without a verdict.
    pub pass: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// 12 significant digits, so reports do not depend on the last ulps.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

fn text_number(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-4 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

impl Report {
    pub fn new(command: &str, seed: u64, inputs_digest: String) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            inputs_digest,
            results: BTreeMap::new(),
            flags: BTreeMap::new(),
            table: None,
            pass: None,
        }
    }

    pub fn value(&mut self, key: &str, v: f64) -> &mut Self {
        self.results.insert(key.into(), round12(v));
        self
    }

    pub fn flag(&mut self, key: &str, v: bool) -> &mut Self {
        self.flags.insert(key.into(), v);
        self
    }

    pub fn set_table(&mut self, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.table = Some(Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: rows.into_iter().map(|r| r.into_iter().map(round12).collect()).collect(),
        });
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Json => self.write_json(out),
            Format::Csv => self.write_csv(out),
            Format::Text => self.write_text(out),
        }
    }

    fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    /// The table when there is one, otherwise key,value rows of the results
    /// and flags (flags as 0/1).
    fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns)?;
                for r in &t.rows {
                    w.write_record(r.iter().map(|v| v.to_string()))?;
                }
            }
            None => {
                w.write_record(["key", "value"])?;
                for (k, v) in &self.results {
                    w.write_record([k.clone(), v.to_string()])?;
                }
                for (k, v) in &self.flags {
                    w.write_record([k.clone(), (*v as u8).to_string()])?;
                }
                if let Some(p) = self.pass {
                    w.write_record(["pass".to_string(), (p as u8).to_string()])?;
                }
            }
        }
        w.flush()
    }

    fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} (seed {})", self.command, self.seed)?;
        for (k, v) in &self.results {
            writeln!(out, "  {k:<24} {}", text_number(*v))?;
        }
        for (k, v) in &self.flags {
            writeln!(out, "  {k:<24} {v}")?;
        }
        if let Some(t) = &self.table {
            writeln!(out, "  {}", t.columns.join("\t"))?;
            for r in &t.rows {
                let cells: Vec<String> = r.iter().map(|v| text_number(*v)).collect();
                writeln!(out, "  {}", cells.join("\t"))?;
            }
        }
        if let Some(p) = self.pass {
            writeln!(out, "{}", if p { "PASS" } else { "FAIL" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(2.0 * std::f64::consts::SQRT_2), 2.82842712475);
        assert_eq!(round12(-1.0e-300), -1.0e-300);
        assert!(round12(f64::NAN).is_nan());
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("chsh", 3, digest(&["a", "b"]));
        r.value("s", 2.5).flag("two_qubit", true);
        r.set_table(&["x", "y"], vec![vec![1.0, 2.0]]);
        r.pass = Some(true);
        let mut buf = Vec::new();
        r.write(&mut buf, Format::Json).unwrap();
        let back: Report = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn digest_separates_fields() {
        assert_ne!(digest(&["ab", "c"]), digest(&["a", "bc"]));
        assert_eq!(digest(&["x"]).len(), 64);
    }
}
