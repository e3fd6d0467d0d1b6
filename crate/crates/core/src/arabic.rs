//! Arabic orthographic normalization and cue detection.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Strip diacritics and tatweel, fold alef variants and final alef maqsura.
    #[default]
    Standard,
    /// Standard plus ة→ه, ؤ→و, ئ→ي and whitespace collapsing.
    Dedup,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedText {
    pub text: String,
    pub mode: NormMode,
}

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// How negation cues are matched against text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueMatch {
    /// Whole tokens, after stripping one leading و/ف.
    #[default]
    Token,
    /// Any occurrence inside the standard-normalized text. Over-fires on
    /// words such as لمياء; kept for comparison runs.
    Substring,
}

pub const NEGATION_CUES: [&str; 6] = ["لا", "ليس", "لم", "لن", "غير", "بدون"];

pub const TATWEEL: char = '\u{0640}';

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NegationReport {
    pub found: bool,
    /// (cue, byte offset of the cue in the source text)
    pub cues: Vec<(String, usize)>,
}

fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}')
}

fn is_arabic_letter(c: char) -> bool {
    c.is_alphabetic() && !is_diacritic(c)
}

pub fn normalize_orthography(text: &str, mode: NormMode) -> NormalizedText {
    let stripped: Vec<char> = text
        .chars()
        .filter(|c| !is_diacritic(*c) && *c != TATWEEL)
        .collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in stripped.iter().enumerate() {
        let word_final = stripped.get(i + 1).is_none_or(|n| !is_arabic_letter(*n));
        let folded = match c {
            'أ' | 'إ' | 'آ' => 'ا',
            'ى' if word_final => 'ي',
            'ة' if mode == NormMode::Dedup => 'ه',
            'ؤ' if mode == NormMode::Dedup => 'و',
            'ئ' if mode == NormMode::Dedup => 'ي',
            c => c,
        };
        out.push(folded);
    }
    if mode == NormMode::Dedup {
        out = out.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    NormalizedText { text: out, mode }
}

/// Shorthand for standard-mode normalization to a plain string.
pub fn norm(text: &str) -> String {
    normalize_orthography(text, NormMode::Standard).text
}

/// Word tokens with their byte offsets; everything that is not a letter or
/// a combining mark separates tokens.
pub fn tokens(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        let inside = c.is_alphanumeric() || is_diacritic(c) || c == TATWEEL;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, &text[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &text[s..]));
    }
    out
}

/// Match `wanted` against a token, allowing one leading و or ف conjunction.
/// Returns the byte offset of the match within the token.
fn match_token(token: &str, wanted: &[&str]) -> Option<(usize, String)> {
    let n = norm(token);
    if wanted.contains(&n.as_str()) {
        return Some((0, n));
    }
    let mut chars = token.char_indices();
    if let Some((_, first)) = chars.next() {
        if first == 'و' || first == 'ف' {
            let rest_at = first.len_utf8();
            let rest = norm(&token[rest_at..]);
            if wanted.contains(&rest.as_str()) {
                return Some((rest_at, rest));
            }
        }
    }
    None
}

pub fn detect_negation(text: &str) -> NegationReport {
    detect_negation_with(text, CueMatch::Token)
}

/// Cue offsets refer to the source text for `Token` and to the normalized
/// text for `Substring`.
pub fn detect_negation_with(text: &str, matching: CueMatch) -> NegationReport {
    let cues: Vec<(String, usize)> = match matching {
        CueMatch::Token => tokens(text)
            .into_iter()
            .filter_map(|(off, tok)| {
                match_token(tok, &NEGATION_CUES).map(|(d, cue)| (cue, off + d))
            })
            .collect(),
        CueMatch::Substring => {
            let n = norm(text);
            let mut found: Vec<(String, usize)> = NEGATION_CUES
                .iter()
                .flat_map(|cue| n.match_indices(cue).map(|(at, c)| (c.to_string(), at)))
                .collect();
            found.sort_by_key(|(_, at)| *at);
            found
        }
    };
    NegationReport {
        found: !cues.is_empty(),
        cues,
    }
}

pub fn is_blocked_answer(option_text: &str) -> bool {
    tokens(option_text)
        .into_iter()
        .any(|(_, t)| match_token(t, &["محجوب"]).is_some())
}

/// Groups of option letters whose texts coincide under dedup normalization.
/// Singletons are omitted; groups are ordered by their first letter.
pub fn near_duplicate_groups(options: &BTreeMap<char, String>) -> Vec<BTreeSet<char>> {
    near_duplicate_groups_with(options, NormMode::Dedup)
}

pub fn near_duplicate_groups_with(
    options: &BTreeMap<char, String>,
    mode: NormMode,
) -> Vec<BTreeSet<char>> {
    let mut by_text: BTreeMap<String, BTreeSet<char>> = BTreeMap::new();
    for (letter, text) in options {
        by_text
            .entry(normalize_orthography(text, mode).text)
            .or_default()
            .insert(*letter);
    }
    let mut groups: Vec<BTreeSet<char>> = by_text.into_values().filter(|g| g.len() >= 2).collect();
    groups.sort_by_key(|g| *g.first().expect("non-empty group"));
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_final_ya_and_alef() {
        assert_eq!(norm("باقى"), "باقي");
        assert_eq!(norm("باقي"), "باقي");
        assert_eq!(norm("أخت لأب"), "اخت لاب");
        assert_eq!(norm("زوجـة"), "زوجة");
        assert_eq!(norm(""), "");
        // non-final alef maqsura is left alone
        assert_eq!(norm("ىب"), "ىب");
    }

    #[test]
    fn dedup_folds_more() {
        let d = normalize_orthography("زوجة  مسؤول", NormMode::Dedup);
        assert_eq!(d.text, "زوجه مسوول");
        assert_eq!(norm("زوجة مسؤول"), "زوجة مسؤول");
    }

    #[test]
    fn negation_tokens() {
        let r = detect_negation("إذا لم يكن هناك");
        assert!(r.found);
        assert_eq!(r.cues, vec![("لم".to_string(), "إذا ".len())]);
        let r = detect_negation("ولا يرث");
        assert_eq!(r.cues, vec![("لا".to_string(), "و".len())]);
        assert!(!detect_negation("مات وترك ابنا").found);
        // substrings of longer words do not count
        assert!(!detect_negation("الأكثر ليست").found);
    }

    #[test]
    fn blocked_marker() {
        assert!(is_blocked_answer("نصيبه هو محجوب، والدليل: ..."));
        assert!(!is_blocked_answer("نصيبه هو لا شيء"));
        assert!(!is_blocked_answer(""));
    }
}
