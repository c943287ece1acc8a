use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Inclusive, 1-based token range within a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenRange {
    pub start: usize,
    pub end: usize,
}

impl TokenRange {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Set of token ranges in DISRPT span syntax (`5-7,9`).
///
/// Ranges are kept sorted and merged, so two ranges only coexist when a gap
/// separates them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenSpanSet {
    ranges: Vec<TokenRange>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid token span '{0}'")]
pub struct SpanParseError(pub String);

impl TokenSpanSet {
    /// Builds a canonical set. Returns `None` for an empty input or a range
    /// with `start > end` or a zero index.
    pub fn from_ranges(ranges: impl IntoIterator<Item = (usize, usize)>) -> Option<Self> {
        let mut rs: Vec<TokenRange> = Vec::new();
        for (start, end) in ranges {
            if start == 0 || start > end {
                return None;
            }
            rs.push(TokenRange { start, end });
        }
        if rs.is_empty() {
            return None;
        }
        rs.sort();
        let mut merged: Vec<TokenRange> = Vec::with_capacity(rs.len());
        for r in rs {
            match merged.last_mut() {
                Some(last) if r.start <= last.end + 1 => last.end = last.end.max(r.end),
                _ => merged.push(r),
            }
        }
        Some(TokenSpanSet { ranges: merged })
    }

    pub fn contiguous(start: usize, end: usize) -> Option<Self> {
        Self::from_ranges([(start, end)])
    }

    pub fn ranges(&self) -> &[TokenRange] {
        &self.ranges
    }

    pub fn discontinuous(&self) -> bool {
        self.ranges.len() > 1
    }

    pub fn first(&self) -> usize {
        self.ranges[0].start
    }

    pub fn last(&self) -> usize {
        self.ranges[self.ranges.len() - 1].end
    }

    pub fn token_count(&self) -> usize {
        self.ranges.iter().map(TokenRange::len).sum()
    }

    pub fn contains(&self, token: usize) -> bool {
        self.ranges.iter().any(|r| r.start <= token && token <= r.end)
    }

    pub fn overlaps(&self, other: &TokenSpanSet) -> bool {
        self.ranges.iter().any(|a| {
            other
                .ranges
                .iter()
                .any(|b| a.start <= b.end && b.start <= a.end)
        })
    }
}

impl fmt::Display for TokenSpanSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.ranges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            if r.start == r.end {
                write!(f, "{}", r.start)?;
            } else {
                write!(f, "{}-{}", r.start, r.end)?;
            }
        }
        Ok(())
    }
}

impl FromStr for TokenSpanSet {
    type Err = SpanParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SpanParseError(s.to_string());
        let mut ranges = Vec::new();
        for piece in s.trim().split(',') {
            let piece = piece.trim();
            let (a, b) = match piece.split_once('-') {
                Some((a, b)) => (a, b),
                None => (piece, piece),
            };
            let a: usize = a.trim().parse().map_err(|_| err())?;
            let b: usize = b.trim().parse().map_err(|_| err())?;
            ranges.push((a, b));
        }
        TokenSpanSet::from_ranges(ranges).ok_or_else(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn discontinuous_span_syntax() {
        let s: TokenSpanSet = "5-7,9".parse().unwrap();
        assert_eq!(
            s.ranges(),
            &[TokenRange { start: 5, end: 7 }, TokenRange { start: 9, end: 9 }]
        );
        assert!(s.discontinuous());
        assert_eq!(s.token_count(), 4);
        assert_eq!(s.to_string(), "5-7,9");
    }

    #[test]
    fn contiguous_span() {
        let s: TokenSpanSet = "5-9".parse().unwrap();
        assert!(!s.discontinuous());
        assert_eq!((s.first(), s.last()), (5, 9));
    }

    #[test]
    fn adjacent_ranges_merge() {
        let s: TokenSpanSet = "8-9,5-7".parse().unwrap();
        assert_eq!(s.to_string(), "5-9");
        assert!(!s.discontinuous());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "_", "7-5", "0", "a-b", "3,"] {
            assert!(bad.parse::<TokenSpanSet>().is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn render_is_canonical(ranges in prop::collection::vec((1usize..200, 0usize..6), 1..6)) {
            let text: Vec<String> = ranges
                .iter()
                .map(|(a, w)| if *w == 0 { a.to_string() } else { format!("{}-{}", a, a + w) })
                .collect();
            let parsed: TokenSpanSet = text.join(",").parse().unwrap();
            let rendered = parsed.to_string();
            let reparsed: TokenSpanSet = rendered.parse().unwrap();
            prop_assert_eq!(&reparsed, &parsed);
            prop_assert_eq!(reparsed.to_string(), rendered);
            for w in parsed.ranges().windows(2) {
                prop_assert!(w[0].end + 1 < w[1].start);
            }
            for (a, w) in &ranges {
                for t in *a..=a + w {
                    prop_assert!(parsed.contains(t));
                }
            }
        }
    }
}
