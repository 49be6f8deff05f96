//! Pretrained word vectors, exhaustive cosine nearest neighbours and
//! complexity-ranked substitution candidates.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::fold_case;
use crate::lexindex::{ContentPos, LemmaEntry, LexIndex};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("unknown word '{0}'")]
    UnknownWord(String),
    #[error("no substitution candidates left for '{0}'")]
    EmptySuggestions(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Word vectors stored row-major in one buffer.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    data: Vec<f32>,
    norms: Vec<f64>,
    lookup: HashMap<String, usize>,
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            dim,
            words: Vec::new(),
            data: Vec::new(),
            norms: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    /// Adds a vector. Returns false (and keeps the existing vector) when the
    /// word is already present.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool, EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                line: 0,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.lookup.contains_key(word) {
            return Ok(false);
        }
        self.lookup.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.norms.push(dot(vector, vector).sqrt());
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup.contains_key(word)
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.lookup.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine similarity between rows; any zero vector gives −∞.
    fn cosine(&self, i: usize, j: usize) -> f64 {
        let denom = self.norms[i] * self.norms[j];
        if denom == 0.0 {
            return f64::NEG_INFINITY;
        }
        dot(self.row(i), self.row(j)) / denom
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.cosine(*self.lookup.get(a)?, *self.lookup.get(b)?))
    }

    /// Reads the textual vector format: a `<vocab_size> <dim>` header, then
    /// one `word v1 .. v_dim` line per word.
    pub fn read<R: BufRead>(reader: R) -> Result<EmbeddingTable, EmbeddingError> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.ok_or_else(|| EmbeddingError::ParseError {
            line: 1,
            message: "missing header".into(),
        })?;
        let header_err = |message: &str| EmbeddingError::ParseError {
            line: 1,
            message: message.to_string(),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [size, dim] = fields.as_slice() else {
            return Err(header_err("header must be '<vocab_size> <dim>'"));
        };
        let size: usize = size.parse().map_err(|_| header_err("invalid vocabulary size"))?;
        let dim: usize = dim.parse().map_err(|_| header_err("invalid dimension"))?;
        if dim == 0 {
            return Err(header_err("dimension must be at least 1"));
        }

        let mut table = EmbeddingTable::new(dim);
        table.words.reserve(size);
        table.data.reserve(size.saturating_mul(dim));
        let mut rows = 0usize;
        let mut buf = Vec::with_capacity(dim);
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            rows += 1;
            if rows > size {
                return Err(EmbeddingError::ParseError {
                    line: line_no,
                    message: format!("more vectors than the {size} declared in the header"),
                });
            }
            buf.clear();
            for part in parts {
                let v: f32 = part.parse().map_err(|_| EmbeddingError::ParseError {
                    line: line_no,
                    message: format!("invalid component '{part}'"),
                })?;
                if !v.is_finite() {
                    return Err(EmbeddingError::ParseError {
                        line: line_no,
                        message: format!("non-finite component '{part}'"),
                    });
                }
                buf.push(v);
            }
            if buf.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line: line_no,
                    expected: dim,
                    found: buf.len(),
                });
            }
            if !table.insert(word, &buf)? {
                log::warn!("line {line_no}: duplicate word '{word}', keeping the first vector");
            }
        }
        if rows != size {
            return Err(EmbeddingError::ParseError {
                line: rows + 1,
                message: format!("header declares {size} vectors but the file has {rows}"),
            });
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<EmbeddingTable, EmbeddingError> {
        let file = File::open(path)?;
        Self::read(BufReader::new(file))
    }

    /// The `k` words most similar to `query`, excluding the query itself.
    ///
    /// Ordered by descending cosine similarity, ties by ascending word.
    pub fn nearest(&self, query: &str, k: usize) -> Result<Vec<(String, f64)>, EmbeddingError> {
        if k == 0 {
            return Err(EmbeddingError::InvalidK);
        }
        let &q = self
            .lookup
            .get(query)
            .ok_or_else(|| EmbeddingError::UnknownWord(query.to_string()))?;
        let mut scored: Vec<(usize, f64)> = (0..self.words.len())
            .into_par_iter()
            .filter(|&i| i != q)
            .map(|i| (i, self.cosine(q, i)))
            .collect();
        let by_rank = |a: &(usize, f64), b: &(usize, f64)| -> Ordering {
            b.1.total_cmp(&a.1).then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, by_rank);
            scored.truncate(k);
        }
        scored.sort_unstable_by(by_rank);
        Ok(scored.into_iter().map(|(i, s)| (self.words[i].clone(), s)).collect())
    }
}

/// One row of a substitution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub lemma: String,
    pub pos: ContentPos,
    pub cosine_similarity: f64,
    pub cs: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SuggestOptions {
    pub k: usize,
    /// Words to drop from the candidates (manual sense filtering).
    pub exclude: HashSet<String>,
    /// Restrict index lookups to one part of speech.
    pub pos: Option<ContentPos>,
}

impl SuggestOptions {
    pub fn new(k: usize) -> Self {
        SuggestOptions {
            k,
            ..Default::default()
        }
    }

    pub fn exclude<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.exclude.extend(words.into_iter().map(|w| fold_case(w.as_ref())));
        self
    }

    pub fn pos(mut self, pos: Option<ContentPos>) -> Self {
        self.pos = pos;
        self
    }
}

fn index_entry<'a>(index: &'a LexIndex, word: &str, pos: Option<ContentPos>) -> Option<&'a LemmaEntry> {
    match pos {
        Some(p) => index.get(word, p),
        None => index.primary_entry(word),
    }
}

/// Substitution candidates for `lemma`.
///
/// The first row is the query itself. The rest are its `k` nearest
/// neighbours that are not excluded and are present in the index, sorted by
/// ascending complexity score.
pub fn suggest(
    index: &LexIndex,
    table: &EmbeddingTable,
    lemma: &str,
    options: &SuggestOptions,
) -> Result<Vec<Suggestion>, EmbeddingError> {
    let query_key = fold_case(lemma);
    let reference = index_entry(index, &query_key, options.pos)
        .ok_or_else(|| EmbeddingError::UnknownWord(lemma.to_string()))?;
    let neighbours = table.nearest(lemma, options.k)?;

    let mut seen: HashSet<String> = HashSet::from([query_key.clone()]);
    let mut rows: Vec<Suggestion> = Vec::new();
    for (word, sim) in neighbours {
        let key = fold_case(&word);
        if options.exclude.contains(&key) || !seen.insert(key.clone()) {
            continue;
        }
        if let Some(entry) = index_entry(index, &key, options.pos) {
            rows.push(Suggestion {
                lemma: entry.lemma.clone(),
                pos: entry.pos,
                cosine_similarity: sim,
                cs: entry.cs,
                n: entry.n,
            });
        }
    }
    if rows.is_empty() {
        return Err(EmbeddingError::EmptySuggestions(lemma.to_string()));
    }
    rows.sort_by(|a, b| {
        a.cs.total_cmp(&b.cs)
            .then_with(|| b.cosine_similarity.total_cmp(&a.cosine_similarity))
            .then_with(|| a.lemma.cmp(&b.lemma))
    });

    let mut out = Vec::with_capacity(rows.len() + 1);
    out.push(Suggestion {
        lemma: reference.lemma.clone(),
        pos: reference.pos,
        cosine_similarity: 1.0,
        cs: reference.cs,
        n: reference.n,
    });
    out.extend(rows);
    Ok(out)
}
