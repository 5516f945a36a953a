use serde::Serialize;

use crate::commands::Failure;

/// Bumped whenever a JSON field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

/// A fully rendered command result.
#[derive(Debug)]
pub struct Output {
    /// Written to stdout or `--out`.
    pub body: String,
    /// Written to stderr after the body, for machine-readable formats.
    pub note: Option<String>,
    /// Exit with the verification-failure code.
    pub failed: bool,
}

impl Output {
    pub fn ok(body: String) -> Self {
        Output {
            body,
            note: None,
            failed: false,
        }
    }
}

#[derive(Serialize)]
struct Versioned<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    inner: &'a T,
}

/// JSON array of `items`, each tagged with the schema version.
pub fn json_array<T: Serialize>(items: &[T]) -> Result<String, Failure> {
    let tagged: Vec<_> = items
        .iter()
        .map(|inner| Versioned {
            schema_version: SCHEMA_VERSION,
            inner,
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&tagged).map_err(internal)?;
    out.push('\n');
    Ok(out)
}

/// CSV with a header taken from the field names of `T`.
pub fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(internal)?;
    }
    let bytes = writer.into_inner().map_err(internal)?;
    String::from_utf8(bytes).map_err(internal)
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(format!("cannot render output: {e}"))
}
