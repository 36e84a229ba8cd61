use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 12 significant digits, scientific notation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "nan".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), num)
}

/// Comment lines (version and units first), one header row, data rows.
pub struct Csv {
    comments: Vec<String>,
    header: String,
    rows: Vec<String>,
}

impl Csv {
    pub fn new(units: &str, header: &[&str]) -> Self {
        Self { comments: vec![format!("# cpcavity {VERSION}; units: {units}")], header: header.join(","), rows: Vec::new() }
    }

    pub fn comment(&mut self, text: &str) {
        self.comments.push(format!("# {text}"));
    }

    pub fn row(&mut self, fields: Vec<String>) {
        self.rows.push(fields.join(","));
    }

    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        let mut text = String::new();
        for line in self.comments.iter().chain(std::iter::once(&self.header)).chain(&self.rows) {
            text.push_str(line);
            text.push('\n');
        }
        match out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Writes pretty JSON next to `out`, or nowhere when output goes to stdout.
pub fn write_sidecar<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    if let Some(p) = out {
        let path = sidecar_path(p);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
