use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use convex_energy::InequalityReport;
use serde::Serialize;

use crate::Format;

/// Where and how a subcommand writes its result.
#[derive(Debug, Clone)]
pub struct Sink {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A table that can be rendered either as CSV (header row always present)
/// or as a JSON document.
pub struct Table<J: Serialize> {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: J,
}

impl Sink {
    fn open(&self) -> Result<Box<dyn Write>, String> {
        Ok(match &self.path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| format!("cannot write {}: {e}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    pub fn emit<J: Serialize>(&self, table: &Table<J>) -> Result<(), String> {
        let mut out = self.open()?;
        match self.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &table.json).map_err(|e| e.to_string())?;
                writeln!(out).map_err(|e| e.to_string())?;
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
                w.write_record(&table.header).map_err(|e| e.to_string())?;
                for row in &table.rows {
                    w.write_record(row).map_err(|e| e.to_string())?;
                }
                w.flush().map_err(|e| e.to_string())?;
            }
        }
        out.flush().map_err(|e| e.to_string())
    }
}

/// Shortest round-trip representation, with an exponent for tiny values.
pub fn num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub const REPORT_HEADER: [&str; 12] = [
    "n",
    "vol",
    "mean_abs",
    "inf",
    "ratio",
    "lower",
    "upper",
    "lower_margin",
    "upper_margin",
    "shift",
    "tol",
    "method",
];

pub fn report_fields(r: &InequalityReport) -> Vec<String> {
    vec![
        r.n.to_string(),
        num(r.vol),
        num(r.mean_abs),
        num(r.inf),
        r.ratio.value().map(num).unwrap_or_else(|| "constant".into()),
        num(r.lower),
        num(r.upper),
        opt(r.lower_margin),
        opt(r.upper_margin),
        num(r.shift),
        num(r.tol),
        r.method.clone(),
    ]
}
