//! Document-level readability scores.
//!
//! LIX weights sentence length against the share of long words (more than six
//! letters). Coleman-Liau uses letters and sentences per 100 words. Both work
//! on plain counts, so they can be computed from [`DocumentStats`] without the
//! original text.
//!
//! [`DocumentStats`]: crate::corpus::DocumentStats

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Words with more letters than this count as long words for LIX.
pub const LONG_WORD_LETTERS: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
}

/// LIX score: `A/B + 100·C/A` for `A` tokens, `B` sentences and `C` long words.
pub fn lix(tokens: usize, sentences: usize, long_words: usize) -> Result<f64, MetricsError> {
    if tokens == 0 || sentences == 0 || long_words > tokens {
        return Err(MetricsError::InvalidCounts(format!(
            "lix requires A >= 1, B >= 1, 0 <= C <= A (got A={tokens}, B={sentences}, C={long_words})"
        )));
    }
    let a = tokens as f64;
    Ok(a / sentences as f64 + (long_words as f64 * 100.0) / a)
}

/// Coleman-Liau index from letters per 100 words and sentences per 100 words.
pub fn coleman_liau(letters_per_100: f64, sentences_per_100: f64) -> Result<f64, MetricsError> {
    if sentences_per_100.is_nan() || sentences_per_100 <= 0.0 || letters_per_100.is_nan() || letters_per_100 < 0.0 {
        return Err(MetricsError::InvalidCounts(format!(
            "coleman-liau requires L >= 0 and S > 0 (got L={letters_per_100}, S={sentences_per_100})"
        )));
    }
    Ok(0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8)
}

/// Inputs to the Coleman-Liau formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliInputs {
    /// Average letters per 100 words.
    pub letters_per_100: f64,
    /// Average sentences per 100 words.
    pub sentences_per_100: f64,
}

impl CliInputs {
    pub fn from_counts(tokens: usize, sentences: usize, letters: usize) -> Result<Self, MetricsError> {
        if tokens == 0 {
            return Err(MetricsError::InvalidCounts(
                "coleman-liau inputs require at least one token".into(),
            ));
        }
        let a = tokens as f64;
        Ok(CliInputs {
            letters_per_100: 100.0 * letters as f64 / a,
            sentences_per_100: 100.0 * sentences as f64 / a,
        })
    }

    pub fn score(&self) -> Result<f64, MetricsError> {
        coleman_liau(self.letters_per_100, self.sentences_per_100)
    }
}

/// Five-step interpretation of LIX scores.
///
/// Each band is centred on its reference value; boundaries sit halfway between
/// neighbouring references (25, 35, 45, 55).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LixBand {
    VeryEasy,
    Easy,
    Medium,
    Difficult,
    VeryDifficult,
}

impl LixBand {
    pub const ALL: [LixBand; 5] = [
        LixBand::VeryEasy,
        LixBand::Easy,
        LixBand::Medium,
        LixBand::Difficult,
        LixBand::VeryDifficult,
    ];

    pub fn from_score(score: f64) -> LixBand {
        if score < 25.0 {
            LixBand::VeryEasy
        } else if score < 35.0 {
            LixBand::Easy
        } else if score < 45.0 {
            LixBand::Medium
        } else if score < 55.0 {
            LixBand::Difficult
        } else {
            LixBand::VeryDifficult
        }
    }

    /// Reference LIX value the band is centred on.
    pub fn reference(self) -> f64 {
        match self {
            LixBand::VeryEasy => 20.0,
            LixBand::Easy => 30.0,
            LixBand::Medium => 40.0,
            LixBand::Difficult => 50.0,
            LixBand::VeryDifficult => 60.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LixBand::VeryEasy => "VeryEasy",
            LixBand::Easy => "Easy",
            LixBand::Medium => "Medium",
            LixBand::Difficult => "Difficult",
            LixBand::VeryDifficult => "VeryDifficult",
        }
    }
}

impl fmt::Display for LixBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn lix_band(score: f64) -> LixBand {
    LixBand::from_score(score)
}

/// Which document score a pipeline step operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Metric {
    #[default]
    Lix,
    ColemanLiau,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Lix => "lix",
            Metric::ColemanLiau => "cli",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lix" => Ok(Metric::Lix),
            "cli" | "coleman-liau" | "coleman_liau" => Ok(Metric::ColemanLiau),
            other => Err(format!("unknown metric '{other}' (expected lix or cli)")),
        }
    }
}
