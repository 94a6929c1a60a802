//! Ground-truth inventory of planted addresses, stored as TSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::extractor::Encoding;
use crate::forensic_path::ForensicPath;

const HEADER: &str = "# path\taddress\tkind\tgroup\towner\tencoding";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Conversation,
    Software,
    Coauthor,
    Logon,
}

impl RegionKind {
    /// Whether an analyst would want to see this kind of component.
    pub fn is_useful(self) -> bool {
        matches!(self, RegionKind::Conversation | RegionKind::Logon)
    }

    fn as_str(self) -> &'static str {
        match self {
            RegionKind::Conversation => "conversation",
            RegionKind::Software => "software",
            RegionKind::Coauthor => "coauthor",
            RegionKind::Logon => "logon",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "conversation" => RegionKind::Conversation,
            "software" => RegionKind::Software,
            "coauthor" => RegionKind::Coauthor,
            "logon" => RegionKind::Logon,
            _ => return Err(format!("unknown kind {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlantedOccurrence {
    pub path: ForensicPath,
    /// Lowercased, as the scanner reports it.
    pub address: String,
    pub kind: RegionKind,
    /// Index of the planted region group (clusters first, then artifacts,
    /// then logon caches).
    pub group: usize,
    pub owner: bool,
    pub encoding: Encoding,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    /// Sorted by path, then address.
    pub occurrences: Vec<PlantedOccurrence>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    /// `(path, address)` pairs in scanner order.
    pub fn expected_records(&self) -> Vec<(ForensicPath, String)> {
        self.occurrences
            .iter()
            .map(|o| (o.path.clone(), o.address.clone()))
            .collect()
    }

    /// Home group of each address: the group it was planted in most often,
    /// ties to the lower index.
    pub fn membership(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<&str, BTreeMap<usize, usize>> = BTreeMap::new();
        for o in &self.occurrences {
            *counts.entry(&o.address).or_default().entry(o.group).or_insert(0) += 1;
        }
        counts
            .into_iter()
            .map(|(a, groups)| {
                let best = groups
                    .iter()
                    .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
                    .map(|(&g, _)| g)
                    .unwrap();
                (a.to_owned(), best)
            })
            .collect()
    }

    pub fn kind_of_group(&self) -> BTreeMap<usize, RegionKind> {
        self.occurrences.iter().map(|o| (o.group, o.kind)).collect()
    }

    pub fn owners(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .occurrences
            .iter()
            .filter(|o| o.owner)
            .map(|o| o.address.clone())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{HEADER}")?;
        for o in &self.occurrences {
            let enc = match o.encoding {
                Encoding::Ascii => "ascii",
                Encoding::Utf16Le => "utf16le",
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                o.path,
                o.address,
                o.kind,
                o.group,
                u8::from(o.owner),
                enc
            )?;
        }
        out.flush()
    }

    pub fn read_tsv<R: BufRead>(input: R) -> io::Result<Self> {
        let bad = |n: usize, why: String| io::Error::new(io::ErrorKind::InvalidData, format!("line {n}: {why}"));
        let mut occurrences = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(bad(i + 1, format!("expected 6 fields, got {}", f.len())));
            }
            occurrences.push(PlantedOccurrence {
                path: f[0].parse().map_err(|e| bad(i + 1, format!("{e}")))?,
                address: f[1].to_owned(),
                kind: f[2].parse().map_err(|e| bad(i + 1, e))?,
                group: f[3].parse().map_err(|e| bad(i + 1, format!("{e}")))?,
                owner: f[4] == "1",
                encoding: match f[5] {
                    "ascii" => Encoding::Ascii,
                    "utf16le" => Encoding::Utf16Le,
                    other => return Err(bad(i + 1, format!("unknown encoding {other:?}"))),
                },
            });
        }
        occurrences.sort();
        Ok(Manifest { occurrences })
    }
}
