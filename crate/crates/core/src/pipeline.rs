//! Corpus-level steps shared by the command line and the acceptance suite:
//! per-corpus outlier filtering, descriptive reports, pairwise KS tests and
//! the score/frequency/length analyses over an index.

use serde::{Deserialize, Serialize};

use crate::corpus::{letter_count, Document};
use crate::lexindex::{LemmaEntry, LexIndex};
use crate::metrics::Metric;
use crate::stats::{self, describe, ks_two_sample, spearman, DescriptiveStats, KsResult, Sample, SpearmanResult, StatsError};
use crate::syllables::SyllableRuleSet;

/// Significance level used when flagging KS results.
pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub metric: Metric,
    pub sigma_k: f64,
    pub hard_max: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            metric: Metric::Lix,
            sigma_k: 4.0,
            hard_max: 100.0,
        }
    }
}

/// Corpus labels in order of first appearance.
pub fn corpus_labels(docs: &[Document]) -> Vec<String> {
    let mut labels: Vec<String> = Vec::new();
    for d in docs {
        if !labels.contains(&d.corpus_label) {
            labels.push(d.corpus_label.clone());
        }
    }
    labels
}

fn scores<'a>(docs: impl Iterator<Item = &'a Document>, metric: Metric) -> Vec<f64> {
    docs.map(|d| d.stats.score(metric)).collect()
}

/// Removes outlier documents corpus by corpus. The mean and deviation come
/// from each corpus's own scores. Document order is preserved.
pub fn filter_documents(docs: Vec<Document>, config: &FilterConfig) -> Vec<Document> {
    let labels = corpus_labels(&docs);
    let bounds: Vec<(String, stats::OutlierBounds)> = labels
        .into_iter()
        .filter_map(|label| {
            let values = scores(docs.iter().filter(|d| d.corpus_label == label), config.metric);
            let sample = Sample::new(values).ok()?;
            Some((label, stats::OutlierBounds::from_sample(&sample, config.sigma_k, config.hard_max)))
        })
        .collect();
    let before = docs.len();
    let kept: Vec<Document> = docs
        .into_iter()
        .filter(|d| {
            bounds
                .iter()
                .find(|(l, _)| *l == d.corpus_label)
                .is_some_and(|(_, b)| b.keeps(d.stats.score(config.metric)))
        })
        .collect();
    if kept.len() < before {
        log::info!("outlier filtering removed {} of {before} documents", before - kept.len());
    }
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub label: String,
    pub stats: DescriptiveStats,
}

pub fn corpus_reports(docs: &[Document], metric: Metric) -> Vec<CorpusReport> {
    corpus_labels(docs)
        .into_iter()
        .filter_map(|label| {
            let values = scores(docs.iter().filter(|d| d.corpus_label == label), metric);
            let sample = Sample::new(values).ok()?;
            Some(CorpusReport {
                label,
                stats: describe(&sample),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub first: String,
    pub second: String,
    pub ks: KsResult,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("need at least two corpora, found {0}")]
    TooFewCorpora(usize),
    #[error("corpus '{0}' has fewer than two documents")]
    TooFewDocuments(String),
}

/// Two-sample KS test for every unordered pair of corpora, in label order.
pub fn pairwise_ks(docs: &[Document], metric: Metric) -> Result<Vec<PairTest>, ValidationError> {
    let labels = corpus_labels(docs);
    if labels.len() < 2 {
        return Err(ValidationError::TooFewCorpora(labels.len()));
    }
    let mut samples = Vec::with_capacity(labels.len());
    for label in &labels {
        let values = scores(docs.iter().filter(|d| &d.corpus_label == label), metric);
        if values.len() < 2 {
            return Err(ValidationError::TooFewDocuments(label.clone()));
        }
        samples.push(Sample::new(values).map_err(|_| ValidationError::TooFewDocuments(label.clone()))?);
    }
    let mut out = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let ks = ks_two_sample(&samples[i], &samples[j]);
            out.push(PairTest {
                first: labels[i].clone(),
                second: labels[j].clone(),
                significant: ks.p_value < SIGNIFICANCE,
                ks,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub name: &'static str,
    pub n: usize,
    pub result: Result<SpearmanResult, StatsError>,
}

fn spearman_over<F, G>(entries: &[&LemmaEntry], x: F, y: G) -> Result<SpearmanResult, StatsError>
where
    F: Fn(&LemmaEntry) -> f64,
    G: Fn(&LemmaEntry) -> f64,
{
    if entries.len() < 3 {
        return Err(StatsError::TooFew {
            needed: 3,
            got: entries.len(),
        });
    }
    let xs = Sample::new(entries.iter().map(|e| x(e)).collect())?;
    let ys = Sample::new(entries.iter().map(|e| y(e)).collect())?;
    spearman(&xs, &ys)
}

/// Spearman correlations of complexity score against document frequency
/// (separately above and below `threshold`), word length and syllable count.
pub fn analyze(index: &LexIndex, threshold: f64, rules: &SyllableRuleSet) -> Vec<AnalysisRow> {
    let m = index.m();
    let (high, low) = index.frequency_partition(threshold);
    let all: Vec<&LemmaEntry> = index.entries().iter().collect();
    let freq = |e: &LemmaEntry| e.frequency(m);
    let cs = |e: &LemmaEntry| e.cs;
    vec![
        AnalysisRow {
            name: "cs_vs_frequency_high",
            n: high.len(),
            result: spearman_over(&high, cs, freq),
        },
        AnalysisRow {
            name: "cs_vs_frequency_low",
            n: low.len(),
            result: spearman_over(&low, cs, freq),
        },
        AnalysisRow {
            name: "cs_vs_word_length",
            n: all.len(),
            result: spearman_over(&all, cs, |e| letter_count(&e.lemma) as f64),
        },
        AnalysisRow {
            name: "cs_vs_syllables",
            n: all.len(),
            result: spearman_over(&all, cs, |e| rules.count(&e.lemma) as f64),
        },
    ]
}
