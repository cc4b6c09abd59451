//! Text normalization for stored and queried attributes.
//!
//! Titles, words, author/affiliation/field/journal/venue names are stored in a
//! folded form: compatibility-decomposed, combining marks removed, lowercased,
//! every non-alphanumeric code point replaced by a space, runs of spaces
//! collapsed and the ends trimmed. Display names and descriptions are kept raw.

use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Text in normalized form.
///
/// Holds only alphanumeric characters and single interior spaces. Basic-Latin
/// output is `[a-z0-9 ]`; letters from scripts without a Latin decomposition
/// (CJK, Cyrillic, ...) are kept and reported by [`normalize_with_report`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whitespace-separated tokens.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.0.split(' ').filter(|t| !t.is_empty())
    }

    /// True when every character is in `[a-z0-9 ]`.
    pub fn is_basic_latin(&self) -> bool {
        self.0
            .bytes()
            .all(|b| b == b' ' || b.is_ascii_lowercase() || b.is_ascii_digit())
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Outcome of a normalization that kept characters outside basic Latin.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizationReport {
    /// Distinct kept characters outside `[a-z0-9 ]`, in first-seen order.
    pub non_basic_latin: Vec<char>,
}

impl NormalizationReport {
    pub fn is_clean(&self) -> bool {
        self.non_basic_latin.is_empty()
    }
}

pub fn normalize_text(input: &str) -> NormalizedText {
    normalize_with_report(input).0
}

pub fn normalize_with_report(input: &str) -> (NormalizedText, NormalizationReport) {
    let mut out = String::with_capacity(input.len());
    let mut report = NormalizationReport::default();
    let mut pending_space = false;

    for c in input.chars() {
        for folded in fold_char(c).chars() {
            if folded.is_alphanumeric() {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(folded);
                if !(folded.is_ascii_lowercase() || folded.is_ascii_digit())
                    && !report.non_basic_latin.contains(&folded)
                {
                    report.non_basic_latin.push(folded);
                }
            } else {
                pending_space = true;
            }
        }
    }

    (NormalizedText(out), report)
}

/// Decompose, strip marks and lowercase one code point until stable.
///
/// Lowercasing can reintroduce marks or decomposable letters (`İ` lowercases
/// to `i` + U+0307), so the steps repeat until a fixed point is reached. The
/// loop is per character, which keeps the whole function idempotent.
fn fold_char(c: char) -> String {
    if c.is_ascii() {
        return c.to_ascii_lowercase().to_string();
    }
    let mut current = c.to_string();
    for _ in 0..4 {
        let next: String = current
            .nfkd()
            .filter(|ch| !is_combining_mark(*ch))
            .flat_map(char::to_lowercase)
            .collect();
        if next == current {
            break;
        }
        current = next;
    }
    current
}
