//! CSV and JSON rendering of command results.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Header of every JSON document and of the `#` comment block in CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub command: String,
    pub parameters: Value,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rng: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normal_method: Option<String>,
}

impl Metadata {
    pub fn new(command: &str, parameters: Value) -> Self {
        Metadata {
            command: command.to_string(),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            rng: None,
            normal_method: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub metadata: Metadata,
    pub payload: T,
}

/// A plain table for the CSV form; the JSON form serializes the payload directly.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# key: value` lines written after the rows.
    pub footer: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }
}

/// Formats with 9 significant digits, like C's `%.9g`.
pub fn g9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv(out: &mut impl Write, meta: &Metadata, table: &Table) -> io::Result<()> {
    writeln!(out, "# command: {}", meta.command)?;
    writeln!(out, "# version: {}", meta.version)?;
    writeln!(out, "# parameters: {}", meta.parameters)?;
    if let Some(seed) = meta.seed {
        writeln!(out, "# seed: {seed}")?;
    }
    if let Some(rng) = &meta.rng {
        writeln!(out, "# rng: {rng}")?;
    }
    if let Some(nm) = &meta.normal_method {
        writeln!(out, "# normal_method: {nm}")?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    out.write_all(&w.into_inner().map_err(|e| e.into_error())?)?;
    for (k, v) in &table.footer {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(out: &mut impl Write, meta: Metadata, payload: T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, &Envelope { metadata: meta, payload })?;
    writeln!(out)
}
