//! Email address grammar over raw bytes, in ASCII and UTF-16LE.
//!
//! Grammar: local part `[A-Za-z0-9._%+-]+`, `@`, two or more labels
//! `[A-Za-z0-9-]+` joined by `.`, the final label alphabetic with length 2..=63.
//! Runs are taken maximally on the left; on the right the longest valid domain
//! prefix that ends on a label boundary wins (so a sentence-ending dot is not
//! part of the match). Whole matches are capped at [`MAX_ADDRESS_LEN`] chars.
//!
//! Candidates are anchored at `@` bytes. When the local part of a candidate
//! starts right after another `@` whose own candidate is valid, the two would
//! overlap (`a@b.co@c.co`) and the later one is dropped. This keeps every
//! decision local to a bounded neighbourhood of the `@`, which the chunked
//! scanner relies on.

use memchr::memchr_iter;

/// Longest address we recognise, in characters.
pub const MAX_ADDRESS_LEN: usize = 254;

/// Shortest possible domain is `x.yy`.
const MIN_DOMAIN_LEN: usize = 4;
const MAX_LOCAL_LEN: usize = MAX_ADDRESS_LEN - 1 - MIN_DOMAIN_LEN;
const MAX_TLD_LEN: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Encoding {
    Ascii,
    Utf16Le,
}

impl Encoding {
    fn unit(self) -> usize {
        match self {
            Encoding::Ascii => 1,
            Encoding::Utf16Le => 2,
        }
    }
}

/// One match inside a buffer. `start..end` is the byte span on media.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmailMatch {
    pub start: usize,
    pub end: usize,
    pub encoding: Encoding,
    /// Address as it appears (case preserved), decoded to ASCII.
    pub address: String,
}

#[inline]
pub(crate) fn is_local_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'%' | b'+' | b'-')
}

#[inline]
fn is_label_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'-'
}

/// Character at unit index `i` counted from byte `origin`, or None when the
/// position is out of range or is not a plausible ASCII code unit.
#[inline]
fn unit_at(buf: &[u8], origin: usize, i: usize, enc: Encoding) -> Option<u8> {
    match enc {
        Encoding::Ascii => buf.get(origin + i).copied(),
        Encoding::Utf16Le => {
            let p = origin + 2 * i;
            match (buf.get(p), buf.get(p + 1)) {
                (Some(&lo), Some(&0)) if lo != 0 => Some(lo),
                _ => None,
            }
        }
    }
}

/// Candidate anchored at the `@` byte `at`, ignoring overlap with earlier
/// candidates. Returns the byte span.
fn candidate(buf: &[u8], at: usize, enc: Encoding) -> Option<(usize, usize)> {
    let w = enc.unit();
    if enc == Encoding::Utf16Le && buf.get(at + 1) != Some(&0) {
        return None;
    }

    let mut local = 0usize;
    while let Some(pos) = at.checked_sub(w * (local + 1)) {
        match unit_at(buf, pos, 0, enc) {
            Some(c) if is_local_char(c) => {
                local += 1;
                if local > MAX_LOCAL_LEN {
                    return None;
                }
            }
            _ => break,
        }
    }
    if local == 0 {
        return None;
    }

    let origin = at + w;
    let cap = MAX_ADDRESS_LEN - local - 1;
    let domain = domain_len(buf, origin, cap, enc)?;
    Some((at - w * local, origin + w * domain))
}

/// Length in units of the longest valid domain starting at `origin`,
/// at most `cap` units long.
fn domain_len(buf: &[u8], origin: usize, cap: usize, enc: Encoding) -> Option<usize> {
    let mut best = None;
    let mut labels = 0usize;
    let mut label_len = 0usize;
    let mut label_alpha = true;
    let mut i = 0usize;
    while i <= cap {
        match unit_at(buf, origin, i, enc) {
            Some(c) if is_label_char(c) => {
                label_len += 1;
                label_alpha &= c.is_ascii_alphabetic();
            }
            next => {
                if label_len == 0 {
                    break;
                }
                labels += 1;
                if labels >= 2 && label_alpha && (2..=MAX_TLD_LEN).contains(&label_len) {
                    best = Some(i);
                }
                if next != Some(b'.') {
                    break;
                }
                label_len = 0;
                label_alpha = true;
            }
        }
        i += 1;
    }
    best
}

fn accept(buf: &[u8], at: usize, enc: Encoding) -> Option<EmailMatch> {
    let (start, end) = candidate(buf, at, enc)?;
    let w = enc.unit();
    // Overlap with a valid candidate anchored at the preceding '@'.
    if start >= w {
        let prev = start - w;
        let prev_is_at = match enc {
            Encoding::Ascii => buf[prev] == b'@',
            Encoding::Utf16Le => buf[prev] == b'@' && buf[prev + 1] == 0,
        };
        if prev_is_at && candidate(buf, prev, enc).is_some() {
            return None;
        }
    }
    let address = buf[start..end].iter().step_by(w).map(|&b| b as char).collect();
    Some(EmailMatch {
        start,
        end,
        encoding: enc,
        address,
    })
}

/// All matches in `buf`, ordered by start, pairwise non-overlapping. Buffer
/// edges count as boundaries.
pub fn find_matches(buf: &[u8], utf16: bool) -> Vec<EmailMatch> {
    let mut out: Vec<EmailMatch> = Vec::new();
    for at in memchr_iter(b'@', buf) {
        let found = if buf.get(at + 1) == Some(&0) {
            if utf16 {
                accept(buf, at, Encoding::Utf16Le)
            } else {
                None
            }
        } else {
            accept(buf, at, Encoding::Ascii)
        };
        if let Some(m) = found {
            out.push(m);
        }
    }
    out.sort_by_key(|m| m.start);
    // An ASCII and a UTF-16 match can share one byte at their seam.
    let mut last_end = 0usize;
    out.retain(|m| {
        let keep = m.start >= last_end;
        if keep {
            last_end = m.end;
        }
        keep
    });
    out
}

/// ASCII matches of the grammar in `window` as `(start, address)` pairs.
pub fn match_email(window: &[u8]) -> Vec<(usize, String)> {
    find_matches(window, false)
        .into_iter()
        .map(|m| (m.start, m.address))
        .collect()
}

/// True when `s` is, in its entirety, one address of the grammar.
pub fn is_valid_address(s: &str) -> bool {
    let found = match_email(s.as_bytes());
    found.len() == 1 && found[0].0 == 0 && found[0].1.len() == s.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Vec<(usize, String)> {
        match_email(s.as_bytes())
    }

    fn utf16(s: &str) -> Vec<u8> {
        s.bytes().flat_map(|b| [b, 0]).collect()
    }

    #[test]
    fn trailing_dot_excluded() {
        assert_eq!(m("see pat@m57.biz."), vec![(4, "pat@m57.biz".to_string())]);
    }

    #[test]
    fn grammar_boundaries() {
        assert!(m("not-an-email@").is_empty());
        assert!(m("a@b.c").is_empty());
        assert!(m("a@b").is_empty());
        assert!(m("@example.com").is_empty());
        assert!(m("a@example.c0m").is_empty());
        assert!(m("a@.com").is_empty());
        assert_eq!(m("a@b.co"), vec![(0, "a@b.co".to_string())]);
        assert_eq!(
            m("x <First.Last+tag@Mail.Example.ORG>"),
            vec![(3, "First.Last+tag@Mail.Example.ORG".to_string())]
        );
    }

    #[test]
    fn longest_valid_domain_prefix() {
        // "x" is too short for a final label, fall back to "b.com"
        assert_eq!(m("a@b.com.x"), vec![(0, "a@b.com".to_string())]);
        // "c0m" is not alphabetic; "b.co" is not a label boundary inside "b.co-x"
        assert!(m("a@b.co-x").is_empty());
        assert_eq!(m("a@b.com..org"), vec![(0, "a@b.com".to_string())]);
    }

    #[test]
    fn tld_length_limits() {
        let tld63 = "a".repeat(63);
        let tld64 = "a".repeat(64);
        assert_eq!(m(&format!("u@d.{tld63}")).len(), 1);
        assert!(m(&format!("u@d.{tld64}")).is_empty());
    }

    #[test]
    fn maximal_munch_on_local_part() {
        assert_eq!(m("xx;bob.smith@x.org"), vec![(3, "bob.smith@x.org".to_string())]);
    }

    #[test]
    fn length_cap() {
        let local = "a".repeat(MAX_LOCAL_LEN);
        let ok = format!("{local}@b.co");
        assert_eq!(ok.len(), MAX_ADDRESS_LEN);
        assert_eq!(m(&ok).len(), 1);
        let too_long = format!("a{ok}");
        assert!(m(&too_long).is_empty());
        // domain side
        let long_domain = format!("a@{}.com", "b".repeat(MAX_ADDRESS_LEN));
        assert!(m(&long_domain).is_empty());
    }

    #[test]
    fn overlapping_chain_keeps_first() {
        assert_eq!(m("a@b.co@c.co"), vec![(0, "a@b.co".to_string())]);
        assert_eq!(m("a@b.co@c.co@d.co"), vec![(0, "a@b.co".to_string())]);
        // an invalid predecessor does not suppress
        assert_eq!(m("@@b.co"), vec![]);
        assert_eq!(m("x@1@b.co"), vec![(2, "1@b.co".to_string())]);
    }

    #[test]
    fn multiple_matches() {
        let s = "From: pat@m57.biz To: jo@m57.biz, terry@m57.biz";
        let got = m(s);
        assert_eq!(got.len(), 3);
        for (start, addr) in got {
            assert_eq!(&s[start..start + addr.len()], addr);
        }
    }

    #[test]
    fn utf16_detection() {
        let mut buf = b"xx".to_vec();
        buf.extend(utf16(" alice@example.com "));
        let got = find_matches(&buf, true);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].encoding, Encoding::Utf16Le);
        assert_eq!(got[0].start, 4);
        assert_eq!(got[0].end, 4 + 2 * "alice@example.com".len());
        assert_eq!(got[0].address, "alice@example.com");
        assert!(find_matches(&buf, false).is_empty());
    }

    #[test]
    fn utf16_boundaries() {
        // Preceding ASCII byte without a zero high byte ends the local part.
        let mut buf = b"Q".to_vec();
        buf.extend(utf16("bob@x.org"));
        let got = find_matches(&buf, true);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].start, 1);
        // trailing dot
        let got = find_matches(&utf16("pat@m57.biz."), true);
        assert_eq!(got[0].address, "pat@m57.biz");
    }
}
