//! Word lists and address generation.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;

pub(crate) const FIRST: &[&str] = &[
    "alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy", "karl",
    "laura", "mike", "nina", "oscar", "peggy", "quinn", "rupert", "sybil", "trent", "ursula",
    "victor", "wendy", "xavier", "yolanda", "zack", "pat", "terry", "jo", "sam",
];

pub(crate) const LAST: &[&str] = &[
    "smith", "jones", "taylor", "brown", "wilson", "evans", "thomas", "johnson", "roberts",
    "walker", "wright", "robinson", "thompson", "white", "hughes", "edwards", "green", "hall",
    "wood", "harris", "lewis", "martin", "jackson", "clarke", "clark", "turner", "hill", "scott",
    "cooper", "morris",
];

pub(crate) const MAIL_DOMAINS: &[&str] = &[
    "gmail.com", "yahoo.com", "hotmail.com", "outlook.com", "aol.com", "comcast.net",
    "verizon.net", "fastmail.fm", "proton.me", "gmx.de", "acme-corp.com", "northwind.biz",
    "contoso.net", "initech.io", "globex.org", "umbrella.co", "hooli.xyz",
];

pub(crate) const PROJECT_DOMAINS: &[&str] = &[
    "gnu.org", "kernel.org", "freedesktop.org", "python.org", "apache.org", "gnome.org",
    "kde.org", "xiph.org",
];

pub(crate) const WORDS: &[&str] = &[
    "the", "meeting", "budget", "report", "draft", "please", "review", "attached", "thanks",
    "schedule", "tomorrow", "project", "update", "lunch", "call", "notes", "quarter", "team",
    "plan", "deadline", "invoice", "shipment", "question", "friday", "agenda", "minutes",
    "proposal", "numbers", "final", "version", "client", "office",
];

pub(crate) const WEEKDAYS: &[&str] = &["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

/// Hands out addresses that are unique within one scenario.
#[derive(Debug, Default)]
pub(crate) struct AddressBook {
    used: BTreeSet<String>,
}

impl AddressBook {
    /// Reserves an explicit address; false if it was already taken.
    pub fn claim(&mut self, address: &str) -> bool {
        self.used.insert(address.to_ascii_lowercase())
    }

    pub fn person<R: Rng>(&mut self, rng: &mut R, domains: &[&str]) -> String {
        loop {
            let first = FIRST.choose(rng).unwrap();
            let last = LAST.choose(rng).unwrap();
            let domain = domains.choose(rng).unwrap();
            let local = match rng.random_range(0..4) {
                0 => format!("{first}.{last}"),
                1 => format!("{}{last}", &first[..1]),
                2 => format!("{first}{}", rng.random_range(1..100)),
                _ => format!("{first}_{last}"),
            };
            let address = format!("{local}@{domain}");
            if self.claim(&address) {
                return address;
            }
        }
    }

    /// Aliases of one person: small edits of a single handle.
    pub fn aliases<R: Rng>(&mut self, rng: &mut R, count: usize) -> Vec<String> {
        loop {
            let first = FIRST.choose(rng).unwrap();
            let last = LAST.choose(rng).unwrap();
            let i = &first[..1];
            let d = rng.random_range(10..100);
            let locals = [
                format!("{i}{last}"),
                format!("{i}.{last}"),
                format!("{i}{last}{d}"),
                format!("{i}_{last}"),
                format!("{last}{i}"),
                format!("{i}{last}{}", d % 10),
                format!("{first}.{last}"),
                format!("{i}-{last}"),
            ];
            let offset = rng.random_range(0..MAIL_DOMAINS.len());
            let out: Vec<String> = locals
                .iter()
                .take(count)
                .enumerate()
                .map(|(k, l)| format!("{l}@{}", MAIL_DOMAINS[(offset + k) % MAIL_DOMAINS.len()]))
                .collect();
            if out.iter().all(|a| !self.used.contains(a)) {
                for a in &out {
                    self.claim(a);
                }
                return out;
            }
        }
    }

    pub fn at_domain<R: Rng>(&mut self, rng: &mut R, domain: &str) -> String {
        loop {
            let first = FIRST.choose(rng).unwrap();
            let last = LAST.choose(rng).unwrap();
            let local = match rng.random_range(0..3) {
                0 => first.to_string(),
                1 => format!("{first}.{last}"),
                _ => format!("{}{last}", &first[..1]),
            };
            let address = format!("{local}@{domain}");
            if self.claim(&address) {
                return address;
            }
        }
    }
}

pub(crate) fn display_name(address: &str) -> String {
    let local = address.split('@').next().unwrap_or(address);
    local
        .split(['.', '_', '-'])
        .filter(|p| !p.is_empty())
        .map(|p| {
            let mut c = p.chars();
            match c.next() {
                Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Roughly `len` bytes of prose with no address-like content.
pub(crate) fn prose<R: Rng>(rng: &mut R, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 16);
    let mut col = 0;
    while out.len() < len {
        let w = WORDS.choose(rng).unwrap();
        out.extend_from_slice(w.as_bytes());
        col += w.len() + 1;
        if col > 70 {
            out.push(b'\n');
            col = 0;
        } else {
            out.push(b' ');
        }
    }
    out.truncate(len);
    out
}
