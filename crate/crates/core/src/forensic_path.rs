//! Forensic paths: the hyphen-delimited location strings used by feature files.
//!
//! A path such as `1048576-GZIP-512` splits into a *base* (`1048576-GZIP`) and a
//! final *offset* (`512`). Plain media offsets have an empty base. Distances are
//! only defined between paths that share a base; everything else is
//! [`Distance::Infinite`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("empty forensic path")]
    Empty,
    #[error("malformed forensic path {raw:?}: {reason}")]
    Malformed { raw: String, reason: &'static str },
}

/// Location of a feature on media, possibly inside decoded streams.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ForensicPath {
    base: String,
    offset: u64,
}

impl ForensicPath {
    /// A plain media offset with an empty base.
    pub fn at(offset: u64) -> Self {
        ForensicPath {
            base: String::new(),
            offset,
        }
    }

    /// Builds a path from an already split base and offset.
    ///
    /// The base must not end with a hyphen; the joining hyphen belongs to
    /// neither part.
    pub fn new(base: impl Into<String>, offset: u64) -> Result<Self, PathError> {
        let base = base.into();
        if base.ends_with('-') || base.starts_with('-') {
            return Err(PathError::Malformed {
                raw: format!("{base}-{offset}"),
                reason: "base has a dangling hyphen",
            });
        }
        Ok(ForensicPath { base, offset })
    }

    pub fn parse(raw: &str) -> Result<Self, PathError> {
        if raw.is_empty() {
            return Err(PathError::Empty);
        }
        let (base, last) = match raw.rfind('-') {
            Some(idx) => (&raw[..idx], &raw[idx + 1..]),
            None => ("", raw),
        };
        if raw.contains('-') && base.is_empty() {
            return Err(PathError::Malformed {
                raw: raw.to_owned(),
                reason: "leading hyphen",
            });
        }
        if base.ends_with('-') {
            return Err(PathError::Malformed {
                raw: raw.to_owned(),
                reason: "empty path component",
            });
        }
        let offset = parse_decimal(last).ok_or_else(|| PathError::Malformed {
            raw: raw.to_owned(),
            reason: "final component is not a decimal u64",
        })?;
        Ok(ForensicPath {
            base: base.to_owned(),
            offset,
        })
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Base for features found inside a stream decoded at this location,
    /// e.g. `4096` + `GZIP` gives `4096-GZIP`.
    pub fn child_base(&self, transform: &str) -> String {
        format!("{self}-{transform}")
    }

    pub fn distance(&self, other: &ForensicPath) -> Distance {
        distance(self, other)
    }
}

/// Only ASCII digits; no sign, no whitespace, no overflow.
fn parse_decimal(s: &str) -> Option<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub fn parse_forensic_path(raw: &str) -> Result<ForensicPath, PathError> {
    ForensicPath::parse(raw)
}

impl fmt::Display for ForensicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.base.is_empty() {
            write!(f, "{}", self.offset)
        } else {
            write!(f, "{}-{}", self.base, self.offset)
        }
    }
}

impl FromStr for ForensicPath {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ForensicPath::parse(s)
    }
}

impl TryFrom<String> for ForensicPath {
    type Error = PathError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        ForensicPath::parse(&s)
    }
}

impl From<ForensicPath> for String {
    fn from(p: ForensicPath) -> String {
        p.to_string()
    }
}

/// Orders by base (bytewise) and then numerically by offset.
impl Ord for ForensicPath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.base
            .cmp(&other.base)
            .then(self.offset.cmp(&other.offset))
    }
}

impl PartialOrd for ForensicPath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Byte distance between two features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    Finite(u64),
    Infinite,
}

impl Distance {
    /// True when the distance is finite and strictly below `window`.
    pub fn within(self, window: u64) -> bool {
        matches!(self, Distance::Finite(d) if d < window)
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

pub fn distance(a: &ForensicPath, b: &ForensicPath) -> Distance {
    if a.base == b.base {
        Distance::Finite(a.offset.abs_diff(b.offset))
    } else {
        Distance::Infinite
    }
}
