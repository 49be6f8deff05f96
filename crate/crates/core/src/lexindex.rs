//! Inverted lemma index and per-lemma complexity scores.
//!
//! Each content-word lemma (keyed together with its part of speech) maps to
//! the set of documents it occurs in. Within-document frequency is ignored.
//! The score of a lemma is the median LIX of those documents discounted by
//! the share of all documents it occurs in:
//!
//! ```text
//! cs = median_lix · (1 − n/m)
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{fold_case, Document, Pos};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("no content words found in the indexed documents")]
    EmptyIndex,
    #[error("duplicate document id '{0}'")]
    DuplicateDocument(String),
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parts of speech that receive a complexity score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ContentPos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl ContentPos {
    pub const ALL: [ContentPos; 4] = [ContentPos::Noun, ContentPos::Verb, ContentPos::Adj, ContentPos::Adv];

    pub fn as_str(self) -> &'static str {
        Pos::from(self).as_str()
    }
}

impl From<ContentPos> for Pos {
    fn from(p: ContentPos) -> Pos {
        match p {
            ContentPos::Noun => Pos::Noun,
            ContentPos::Verb => Pos::Verb,
            ContentPos::Adj => Pos::Adj,
            ContentPos::Adv => Pos::Adv,
        }
    }
}

impl TryFrom<Pos> for ContentPos {
    type Error = Pos;

    fn try_from(p: Pos) -> Result<Self, Pos> {
        match p {
            Pos::Noun => Ok(ContentPos::Noun),
            Pos::Verb => Ok(ContentPos::Verb),
            Pos::Adj => Ok(ContentPos::Adj),
            Pos::Adv => Ok(ContentPos::Adv),
            Pos::Other => Err(p),
        }
    }
}

impl fmt::Display for ContentPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContentPos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pos: Pos = s.parse()?;
        ContentPos::try_from(pos).map_err(|_| format!("'{s}' is not a content part of speech"))
    }
}

/// Median with the even-length convention of averaging the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// `median_lix · (1 − n/m)`.
pub fn complexity_score(median_lix: f64, n: usize, m: usize) -> Result<f64, IndexError> {
    if n == 0 || n > m {
        return Err(IndexError::InvalidCounts(format!("require 1 <= n <= m (got n={n}, m={m})")));
    }
    if !median_lix.is_finite() || median_lix < 0.0 {
        return Err(IndexError::InvalidCounts(format!(
            "median must be finite and non-negative (got {median_lix})"
        )));
    }
    Ok(median_lix * (1.0 - n as f64 / m as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub lemma: String,
    pub pos: ContentPos,
    /// Number of distinct documents containing the lemma.
    pub n: usize,
    pub median_lix: f64,
    pub cs: f64,
}

impl LemmaEntry {
    pub fn frequency(&self, m: usize) -> f64 {
        self.n as f64 / m as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Postings {
    /// Sorted document ids.
    doc_ids: Vec<String>,
    doc_lix: Vec<f64>,
    /// One sorted list of positions into `doc_ids` per entry.
    lists: Vec<Vec<u32>>,
}

/// Built or imported lemma index. Entries are sorted by (lemma, pos).
///
/// Indexes built from documents keep their postings; indexes imported from
/// an aggregate file only carry the per-entry statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LexIndex {
    m: usize,
    corpus_labels: Vec<String>,
    entries: Vec<LemmaEntry>,
    postings: Option<Postings>,
}

type Key = (String, ContentPos);

impl LexIndex {
    /// Builds the index over documents that have already passed outlier
    /// filtering. The result does not depend on the order of `docs`.
    pub fn build(docs: &[Document]) -> Result<LexIndex, IndexError> {
        if docs.is_empty() {
            return Err(IndexError::EmptyIndex);
        }
        let mut order: Vec<&Document> = docs.iter().collect();
        order.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = order.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(IndexError::DuplicateDocument(w[0].id.clone()));
        }

        let merged: HashMap<Key, Vec<u32>> = order
            .par_iter()
            .enumerate()
            .fold(HashMap::new, |mut acc: HashMap<Key, Vec<u32>>, (pos, doc)| {
                let mut seen: HashSet<(&str, ContentPos)> = HashSet::new();
                for token in doc.tokens() {
                    let Ok(cpos) = ContentPos::try_from(token.pos) else { continue };
                    if token.lemma.is_empty() || !seen.insert((token.lemma.as_str(), cpos)) {
                        continue;
                    }
                    acc.entry((token.lemma.clone(), cpos)).or_default().push(pos as u32);
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, mut v) in b {
                    a.entry(k).or_default().append(&mut v);
                }
                a
            });
        if merged.is_empty() {
            return Err(IndexError::EmptyIndex);
        }

        let m = order.len();
        let doc_lix: Vec<f64> = order.iter().map(|d| d.stats.lix).collect();
        let mut keyed: Vec<(Key, Vec<u32>)> = merged.into_iter().collect();
        keyed.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));

        let mut entries = Vec::with_capacity(keyed.len());
        let mut lists = Vec::with_capacity(keyed.len());
        for ((lemma, pos), mut list) in keyed {
            list.sort_unstable();
            let values: Vec<f64> = list.iter().map(|&i| doc_lix[i as usize]).collect();
            let median_lix = median(&values).expect("posting lists are non-empty");
            let n = list.len();
            let cs = complexity_score(median_lix, n, m)?;
            entries.push(LemmaEntry {
                lemma,
                pos,
                n,
                median_lix,
                cs,
            });
            lists.push(list);
        }

        let corpus_labels: BTreeSet<&str> = order.iter().map(|d| d.corpus_label.as_str()).collect();
        Ok(LexIndex {
            m,
            corpus_labels: corpus_labels.into_iter().map(String::from).collect(),
            entries,
            postings: Some(Postings {
                doc_ids: order.iter().map(|d| d.id.clone()).collect(),
                doc_lix,
                lists,
            }),
        })
    }

    /// Assembles an aggregate-only index, checking every entry invariant.
    pub fn from_entries(
        m: usize,
        corpus_labels: Vec<String>,
        mut entries: Vec<LemmaEntry>,
    ) -> Result<LexIndex, IndexError> {
        if m == 0 {
            return Err(IndexError::InvariantViolation("m must be at least 1".into()));
        }
        entries.sort_by(|a, b| (a.lemma.as_str(), a.pos).cmp(&(b.lemma.as_str(), b.pos)));
        for w in entries.windows(2) {
            if w[0].lemma == w[1].lemma && w[0].pos == w[1].pos {
                return Err(IndexError::InvariantViolation(format!(
                    "duplicate entry {}/{}",
                    w[0].lemma, w[0].pos
                )));
            }
        }
        for e in &entries {
            check_entry(e, m)?;
        }
        Ok(LexIndex {
            m,
            corpus_labels,
            entries,
            postings: None,
        })
    }

    /// Total number of indexed documents.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn corpus_labels(&self) -> &[String] {
        &self.corpus_labels
    }

    pub fn entries(&self) -> &[LemmaEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_postings(&self) -> bool {
        self.postings.is_some()
    }

    fn position(&self, lemma: &str, pos: ContentPos) -> Option<usize> {
        self.entries
            .binary_search_by(|e| (e.lemma.as_str(), e.pos).cmp(&(lemma, pos)))
            .ok()
    }

    pub fn get(&self, lemma: &str, pos: ContentPos) -> Option<&LemmaEntry> {
        self.position(&fold_case(lemma), pos).map(|i| &self.entries[i])
    }

    /// All entries for the case-folded lemma, optionally restricted to one
    /// part of speech.
    pub fn lookup(&self, lemma: &str, pos: Option<ContentPos>) -> Vec<&LemmaEntry> {
        let key = fold_case(lemma);
        let start = self.entries.partition_point(|e| e.lemma.as_str() < key.as_str());
        self.entries[start..]
            .iter()
            .take_while(|e| e.lemma == key)
            .filter(|e| pos.is_none_or(|p| e.pos == p))
            .collect()
    }

    /// The entry to use when a lemma is looked up without a part of speech:
    /// the one occurring in most documents, ties going to the earlier tag.
    pub fn primary_entry(&self, lemma: &str) -> Option<&LemmaEntry> {
        self.lookup(lemma, None)
            .into_iter()
            .min_by(|a, b| b.n.cmp(&a.n).then(a.pos.cmp(&b.pos)))
    }

    /// Ids of the documents containing the entry, when postings are present.
    pub fn doc_ids(&self, lemma: &str, pos: ContentPos) -> Option<Vec<&str>> {
        let postings = self.postings.as_ref()?;
        let i = self.position(&fold_case(lemma), pos)?;
        Some(postings.lists[i].iter().map(|&d| postings.doc_ids[d as usize].as_str()).collect())
    }

    /// LIX values of the documents containing the entry.
    pub fn doc_lix_values(&self, lemma: &str, pos: ContentPos) -> Option<Vec<f64>> {
        let postings = self.postings.as_ref()?;
        let i = self.position(&fold_case(lemma), pos)?;
        Some(postings.lists[i].iter().map(|&d| postings.doc_lix[d as usize]).collect())
    }

    /// Splits entries into those occurring in more than `threshold` of all
    /// documents and the rest.
    pub fn frequency_partition(&self, threshold: f64) -> (Vec<&LemmaEntry>, Vec<&LemmaEntry>) {
        self.entries.iter().partition(|e| e.frequency(self.m) > threshold)
    }

    /// Writes the aggregate statistics: a `#m=..\tcorpora=..` header, then
    /// `lemma\tpos\tn\tmedian_lix\tcs` per entry, reals in shortest
    /// round-trip form.
    pub fn write_aggregates<W: Write>(&self, mut w: W) -> Result<(), IndexError> {
        writeln!(w, "#m={}\tcorpora={}", self.m, self.corpus_labels.join(","))?;
        for e in &self.entries {
            writeln!(w, "{}\t{}\t{}\t{}\t{}", e.lemma, e.pos, e.n, e.median_lix, e.cs)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn export_aggregates(&self, path: &Path) -> Result<(), IndexError> {
        let file = File::create(path)?;
        self.write_aggregates(BufWriter::new(file))
    }

    pub fn read_aggregates<R: BufRead>(reader: R) -> Result<LexIndex, IndexError> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(IndexError::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        };
        let (m, corpus_labels) = parse_header(header.trim_end_matches('\r'))?;
        let mut entries: Vec<LemmaEntry> = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let entry = parse_record(line, line_no)?;
            check_entry(&entry, m).map_err(|e| match e {
                IndexError::InvariantViolation(msg) => IndexError::InvariantViolation(format!("line {line_no}: {msg}")),
                other => other,
            })?;
            if let Some(prev) = entries.last() {
                if (prev.lemma.as_str(), prev.pos) >= (entry.lemma.as_str(), entry.pos) {
                    return Err(IndexError::InvariantViolation(format!(
                        "line {line_no}: records are not strictly sorted by (lemma, pos)"
                    )));
                }
            }
            entries.push(entry);
        }
        Ok(LexIndex {
            m,
            corpus_labels,
            entries,
            postings: None,
        })
    }

    pub fn import_aggregates(path: &Path) -> Result<LexIndex, IndexError> {
        let file = File::open(path)?;
        Self::read_aggregates(BufReader::new(file))
    }
}

fn check_entry(e: &LemmaEntry, m: usize) -> Result<(), IndexError> {
    if e.lemma.is_empty() || e.lemma.contains(['\t', '\n']) {
        return Err(IndexError::InvariantViolation(format!("invalid lemma '{}'", e.lemma)));
    }
    if e.n == 0 || e.n > m {
        return Err(IndexError::InvariantViolation(format!(
            "{}/{}: document frequency n={} outside 1..={m}",
            e.lemma, e.pos, e.n
        )));
    }
    let expected = complexity_score(e.median_lix, e.n, m)
        .map_err(|err| IndexError::InvariantViolation(format!("{}/{}: {err}", e.lemma, e.pos)))?;
    if expected.to_bits() != e.cs.to_bits() {
        return Err(IndexError::InvariantViolation(format!(
            "{}/{}: cs {} does not match median {} and n/m {}/{m}",
            e.lemma, e.pos, e.cs, e.median_lix, e.n
        )));
    }
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, Vec<String>), IndexError> {
    let bad = |message: String| IndexError::Parse { line: 1, message };
    let mut fields = line.split('\t');
    let m_field = fields.next().unwrap_or_default();
    let m = m_field
        .strip_prefix("#m=")
        .ok_or_else(|| bad(format!("expected '#m=<int>', found '{m_field}'")))?
        .parse::<usize>()
        .map_err(|e| bad(format!("invalid m: {e}")))?;
    if m == 0 {
        return Err(IndexError::InvariantViolation("m must be at least 1".into()));
    }
    let c_field = fields.next().unwrap_or_default();
    let labels = c_field
        .strip_prefix("corpora=")
        .ok_or_else(|| bad(format!("expected 'corpora=<list>', found '{c_field}'")))?;
    if fields.next().is_some() {
        return Err(bad("unexpected extra header fields".into()));
    }
    let labels = if labels.is_empty() {
        Vec::new()
    } else {
        labels.split(',').map(String::from).collect()
    };
    Ok((m, labels))
}

fn parse_record(line: &str, line_no: usize) -> Result<LemmaEntry, IndexError> {
    let bad = |message: String| IndexError::Parse { line: line_no, message };
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 5 {
        return Err(bad(format!("expected 5 columns, found {}", cols.len())));
    }
    Ok(LemmaEntry {
        lemma: cols[0].to_string(),
        pos: cols[1].parse().map_err(bad)?,
        n: cols[2].parse().map_err(|e| bad(format!("invalid n: {e}")))?,
        median_lix: cols[3].parse().map_err(|e| bad(format!("invalid median: {e}")))?,
        cs: cols[4].parse().map_err(|e| bad(format!("invalid cs: {e}")))?,
    })
}
