//! Minimal reader for the tab-separated formats used by the data files.
//!
//! All files share the same conventions: UTF-8, a fixed header as the first
//! non-comment line, `#` comment lines, blank lines ignored, no escaping.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedRow {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for MalformedRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

impl std::error::Error for MalformedRow {}

#[derive(Debug)]
pub(crate) struct Row<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

/// Splits `src` into data rows, checking the header and the field count.
pub(crate) fn read_rows<'a>(src: &'a str, header: &[&str]) -> Result<Vec<Row<'a>>, MalformedRow> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.strip_suffix('\r').unwrap_or(raw);
        let text = if line == 1 {
            text.trim_start_matches('\u{feff}')
        } else {
            text
        };
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if !seen_header {
            if fields != header {
                return Err(MalformedRow {
                    line,
                    reason: format!("expected header `{}`", header.join("\\t")),
                });
            }
            seen_header = true;
            continue;
        }
        if fields.len() != header.len() {
            return Err(MalformedRow {
                line,
                reason: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        rows.push(Row { line, fields });
    }
    if !seen_header {
        return Err(MalformedRow {
            line: 0,
            reason: format!("missing header `{}`", header.join("\\t")),
        });
    }
    Ok(rows)
}
