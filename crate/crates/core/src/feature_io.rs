//! Reading and writing bulk_extractor style feature files.
//!
//! Record lines are `<forensic-path>\t<feature>\t<context>\n`; the context
//! column is optional on input. Lines starting with `#` are comments. Context
//! bytes are written with non-printables (and `\`) escaped as `\xNN`.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::extractor::FeatureRecord;
use crate::forensic_path::ForensicPath;

/// Grammar revision written into the banner.
pub const GRAMMAR_VERSION: &str = "email-v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum FeatureFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: not valid UTF-8")]
    Encoding { line: usize },
    #[error("no parseable records; {} line(s) failed, first at line {}", .errors.len(), .errors[0].line)]
    NoRecords { errors: Vec<LineError> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureFile {
    pub header_comments: Vec<String>,
    /// Sorted by path, then address.
    pub records: Vec<FeatureRecord>,
    /// Lines that were skipped.
    pub warnings: Vec<LineError>,
}

pub fn banner() -> String {
    format!(
        "# emailnet {} feature-recorder: email grammar: {GRAMMAR_VERSION}",
        env!("CARGO_PKG_VERSION")
    )
}

pub fn escape_context(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len());
    for &b in bytes {
        if (0x20..0x7f).contains(&b) && b != b'\\' {
            s.push(b as char);
        } else {
            s.push_str(&format!("\\x{b:02X}"));
        }
    }
    s
}

/// Inverse of [`escape_context`]. Unrecognised escapes are kept literally.
pub fn unescape_context(s: &str) -> Vec<u8> {
    let b = s.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'\\' && i + 3 < b.len() && b[i + 1] == b'x' {
            let hex = std::str::from_utf8(&b[i + 2..i + 4]).ok();
            if let Some(v) = hex.and_then(|h| u8::from_str_radix(h, 16).ok()) {
                out.push(v);
                i += 4;
                continue;
            }
        }
        out.push(b[i]);
        i += 1;
    }
    out
}

fn parse_line(line: &str) -> Result<FeatureRecord, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if !(2..=3).contains(&fields.len()) {
        return Err(format!("expected 2 or 3 tab-separated fields, found {}", fields.len()));
    }
    let path = ForensicPath::parse(fields[0]).map_err(|e| e.to_string())?;
    let address = fields[1];
    if address.matches('@').count() != 1
        || address.starts_with('@')
        || address.ends_with('@')
        || address.contains(char::is_whitespace)
    {
        return Err(format!("not an email address: {address:?}"));
    }
    let context = fields.get(2).map(|c| unescape_context(c)).unwrap_or_default();
    Ok(FeatureRecord::new(path, address.to_lowercase(), context))
}

pub fn read_feature_file<R: BufRead>(mut input: R) -> Result<FeatureFile, FeatureFileError> {
    let mut file = FeatureFile::default();
    let mut attempted = 0usize;
    let mut raw = Vec::new();
    let mut line_no = 0usize;
    loop {
        raw.clear();
        if input.read_until(b'\n', &mut raw)? == 0 {
            break;
        }
        line_no += 1;
        let mut text = std::str::from_utf8(&raw)
            .map_err(|_| FeatureFileError::Encoding { line: line_no })?;
        if line_no == 1 {
            text = text.trim_start_matches('\u{feff}');
        }
        let text = text.trim_end_matches('\n').trim_end_matches('\r');
        if text.starts_with('#') {
            file.header_comments.push(text.to_owned());
            continue;
        }
        if text.is_empty() {
            continue;
        }
        attempted += 1;
        match parse_line(text) {
            Ok(rec) => file.records.push(rec),
            Err(message) => file.warnings.push(LineError {
                line: line_no,
                message,
            }),
        }
    }
    if attempted > 0 && file.records.is_empty() {
        return Err(FeatureFileError::NoRecords {
            errors: file.warnings,
        });
    }
    file.records.sort();
    Ok(file)
}

/// Writes a banner and one line per record.
pub fn write_feature_file<W: Write>(records: &[FeatureRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", banner())?;
    for r in records {
        writeln!(out, "{}\t{}\t{}", r.path, r.address, escape_context(&r.context))?;
    }
    out.flush()
}
