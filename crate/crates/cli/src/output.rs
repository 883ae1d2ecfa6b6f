//! Text output: CSV or JSON tables and pretty JSON documents.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use qng_core::tables::FigureTable;
use serde::Serialize;

/// 17 significant digits, enough to round-trip any double.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn table(t: &FigureTable, json: bool) -> anyhow::Result<String> {
    t.validate()?;
    if json {
        return self::json(t);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(t.columns.iter().map(|c| c.name.as_str()))?;
    for i in 0..t.len() {
        w.write_record(t.row(i).into_iter().map(number))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}
