//! Rule-based syllable counting for Norwegian orthography.
//!
//! Every maximal run of vowels is scanned left to right. A configured
//! diphthong at the scan position is one nucleus; any other vowel is a
//! nucleus on its own. Anything that is not a vowel ends the run, so
//! `"ut-over"` counts as `"ut"` plus `"over"`.

use std::collections::HashSet;
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyllableError {
    #[error("diphthong '{0}' contains a non-vowel")]
    InvalidDiphthong(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Lowercase mapping that never changes the number of characters.
fn lower(c: char) -> char {
    let mut it = c.to_lowercase();
    match (it.next(), it.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyllableRuleSet {
    vowels: HashSet<char>,
    diphthongs: HashSet<(char, char)>,
}

impl Default for SyllableRuleSet {
    fn default() -> Self {
        SyllableRuleSet::new("aeiouyæøå".chars(), ["ei", "au", "øy", "ai", "oi", "ou"])
            .expect("default diphthongs are vowel pairs")
    }
}

impl SyllableRuleSet {
    /// Builds a rule set. Vowels and diphthongs are matched case-insensitively.
    pub fn new<V, D, S>(vowels: V, diphthongs: D) -> Result<Self, SyllableError>
    where
        V: IntoIterator<Item = char>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let vowels: HashSet<char> = vowels.into_iter().map(lower).collect();
        let mut set = HashSet::new();
        for d in diphthongs {
            let d = d.as_ref();
            let chars: Vec<char> = d.chars().map(lower).collect();
            match chars.as_slice() {
                [a, b] if vowels.contains(a) && vowels.contains(b) => {
                    set.insert((*a, *b));
                }
                _ => return Err(SyllableError::InvalidDiphthong(d.to_string())),
            }
        }
        Ok(SyllableRuleSet { vowels, diphthongs: set })
    }

    pub fn is_vowel(&self, c: char) -> bool {
        self.vowels.contains(&lower(c))
    }

    pub fn count(&self, word: &str) -> usize {
        let chars: Vec<char> = word.chars().map(lower).collect();
        let mut count = 0;
        let mut i = 0;
        while i < chars.len() {
            if !self.vowels.contains(&chars[i]) {
                i += 1;
                continue;
            }
            count += 1;
            let next = chars.get(i + 1).copied();
            match next {
                Some(n) if self.diphthongs.contains(&(chars[i], n)) => i += 2,
                _ => i += 1,
            }
        }
        count
    }
}

pub fn count_syllables(word: &str, rules: &SyllableRuleSet) -> usize {
    rules.count(word)
}

/// Share of lexicon entries whose gold count equals the rule output.
pub fn evaluate_counter(lexicon: &[(String, usize)], rules: &SyllableRuleSet) -> f64 {
    if lexicon.is_empty() {
        return 0.0;
    }
    let hits = lexicon.iter().filter(|(w, gold)| rules.count(w) == *gold).count();
    hits as f64 / lexicon.len() as f64
}

/// Reads a `word<TAB>count` lexicon. Blank lines and `#` comments are skipped.
pub fn read_lexicon<R: BufRead>(reader: R) -> Result<Vec<(String, usize)>, SyllableError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| SyllableError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, count) = line.split_once('\t').ok_or_else(|| SyllableError::Parse {
            line: line_no,
            message: "expected word<TAB>count".into(),
        })?;
        let count = count.trim().parse().map_err(|e| SyllableError::Parse {
            line: line_no,
            message: format!("invalid count: {e}"),
        })?;
        out.push((word.to_string(), count));
    }
    Ok(out)
}

/// Hand-syllabified Bokmål words shipped with the crate.
pub const BOKMAL_FIXTURE: &str = include_str!("../data/bokmal_syllables.tsv");

pub fn bokmal_fixture() -> Vec<(String, usize)> {
    read_lexicon(BOKMAL_FIXTURE.as_bytes()).expect("bundled fixture is well-formed")
}
