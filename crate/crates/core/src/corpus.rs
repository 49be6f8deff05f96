//! Corpus ingestion: plain text and CoNLL-U into [`Document`] records.
//!
//! Every ingestion path ends in [`Document::new`], which drops empty
//! sentences, rejects documents without a single lettered token and fills in
//! [`DocumentStats`].

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, CliInputs, LONG_WORD_LETTERS};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("document '{0}' has no token containing a letter")]
    EmptyDocument(String),
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Coarse part of speech. Only the first four are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl Pos {
    /// Maps a Universal Dependencies UPOS tag onto the coarse tag set.
    pub fn from_upos(upos: &str) -> Pos {
        match upos {
            "NOUN" => Pos::Noun,
            "VERB" | "AUX" => Pos::Verb,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            _ => Pos::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Other => "OTHER",
        }
    }

    pub fn is_content(self) -> bool {
        !matches!(self, Pos::Other)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "NOUN" => Ok(Pos::Noun),
            "VERB" => Ok(Pos::Verb),
            "ADJ" => Ok(Pos::Adj),
            "ADV" => Ok(Pos::Adv),
            "OTHER" => Ok(Pos::Other),
            other => Err(format!("unknown part of speech '{other}'")),
        }
    }
}

/// Case folding used for every lemma key.
pub fn fold_case(s: &str) -> String {
    s.to_lowercase()
}

/// Number of alphabetic characters; digits and punctuation are ignored.
pub fn letter_count(s: &str) -> usize {
    s.chars().filter(|c| c.is_alphabetic()).count()
}

fn is_sentence_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Strips leading and trailing characters that are neither letters nor digits.
fn strip_punctuation(raw: &str) -> &str {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
    pub letter_count: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, lemma: Option<&str>, pos: Pos) -> Token {
        let surface = surface.into();
        let lemma = match lemma {
            Some(l) if !l.is_empty() && l != "_" => fold_case(l),
            _ => fold_case(&surface),
        };
        let letter_count = letter_count(&surface);
        Token {
            surface,
            lemma,
            pos,
            letter_count,
        }
    }

    /// Fallback token: lemma is the lowercased surface and pos is OTHER.
    pub fn plain(surface: impl Into<String>) -> Token {
        Token::new(surface, None, Pos::Other)
    }

    pub fn is_long(&self) -> bool {
        self.letter_count > LONG_WORD_LETTERS
    }
}

/// Counts behind both readability formulas plus the resulting scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DocumentStats {
    /// A: number of tokens.
    pub tokens: usize,
    /// B: number of sentences.
    pub sentences: usize,
    /// C: tokens with more than six letters.
    pub long_words: usize,
    pub letters: usize,
    pub lix: f64,
    pub cli: f64,
}

impl DocumentStats {
    pub fn from_counts(
        tokens: usize,
        sentences: usize,
        long_words: usize,
        letters: usize,
    ) -> Result<Self, metrics::MetricsError> {
        let lix = metrics::lix(tokens, sentences, long_words)?;
        let cli = CliInputs::from_counts(tokens, sentences, letters)?.score()?;
        Ok(DocumentStats {
            tokens,
            sentences,
            long_words,
            letters,
            lix,
            cli,
        })
    }

    pub fn score(&self, metric: metrics::Metric) -> f64 {
        match metric {
            metrics::Metric::Lix => self.lix,
            metrics::Metric::ColemanLiau => self.cli,
        }
    }
}

/// Recomputes the statistics of a list of sentences.
pub fn compute_stats(sentences: &[Vec<Token>]) -> Result<DocumentStats, metrics::MetricsError> {
    let tokens = sentences.iter().map(Vec::len).sum();
    let long_words = sentences.iter().flatten().filter(|t| t.is_long()).count();
    let letters = sentences.iter().flatten().map(|t| t.letter_count).sum();
    DocumentStats::from_counts(tokens, sentences.len(), long_words, letters)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub corpus_label: String,
    pub sentences: Vec<Vec<Token>>,
    pub stats: DocumentStats,
}

impl Document {
    /// Builds a document, dropping empty sentences.
    pub fn new(
        id: impl Into<String>,
        corpus_label: impl Into<String>,
        sentences: Vec<Vec<Token>>,
    ) -> Result<Document, CorpusError> {
        let id = id.into();
        let sentences: Vec<Vec<Token>> = sentences.into_iter().filter(|s| !s.is_empty()).collect();
        if !sentences.iter().flatten().any(|t| t.letter_count > 0) {
            return Err(CorpusError::EmptyDocument(id));
        }
        let stats = compute_stats(&sentences)?;
        Ok(Document {
            id,
            corpus_label: corpus_label.into(),
            sentences,
            stats,
        })
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }

    /// Renders the document as plain text that [`ingest_plain`] reads back
    /// into the same sentence and token structure.
    pub fn to_plain_text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| {
                let words: Vec<&str> = s.iter().map(|t| t.surface.as_str()).collect();
                format!("{}.", words.join(" "))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Splits raw text into sentences of fallback tokens.
///
/// Sentences end at a whitespace-delimited chunk whose last character is
/// `.`, `!` or `?`. Chunks are stripped of surrounding punctuation and dropped
/// if nothing remains.
pub fn tokenize_plain(text: &str) -> Vec<Vec<Token>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for chunk in text.split_whitespace() {
        let surface = strip_punctuation(chunk);
        if !surface.is_empty() {
            current.push(Token::plain(surface));
        }
        if chunk.chars().last().is_some_and(is_sentence_terminal) && !current.is_empty() {
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

pub fn ingest_plain(text: &str, id: &str, corpus_label: &str) -> Result<Document, CorpusError> {
    Document::new(id, corpus_label, tokenize_plain(text))
}

/// Reads a CoNLL-U stream.
///
/// A `# newdoc` comment starts a new document; tokens seen before any such
/// marker go into an implicit document named `<label>-<k>`. Multiword range
/// lines and empty nodes are skipped, as are tokens without any letter or
/// digit (punctuation), so both ingestion paths count the same words.
/// Documents without a lettered token are logged and skipped.
pub fn ingest_conllu<R: BufRead>(reader: R, corpus_label: &str) -> Result<Vec<Document>, CorpusError> {
    let mut builder = ConlluBuilder::new(corpus_label);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            builder.end_sentence();
        } else if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = parse_newdoc(comment) {
                builder.start_document(Some(id));
            }
        } else {
            builder.push_token_line(line, line_no)?;
        }
    }
    Ok(builder.finish())
}

fn parse_newdoc(comment: &str) -> Option<String> {
    let rest = comment.trim_start().strip_prefix("newdoc")?;
    let rest = rest.trim_start();
    match rest.strip_prefix("id") {
        Some(after) => {
            let after = after.trim_start();
            Some(after.strip_prefix('=').unwrap_or(after).trim().to_string())
        }
        None if rest.is_empty() => Some(String::new()),
        None => None,
    }
}

struct ConlluBuilder<'a> {
    label: &'a str,
    doc_id: Option<String>,
    sentences: Vec<Vec<Token>>,
    current: Vec<Token>,
    docs: Vec<Document>,
    implicit: usize,
}

impl<'a> ConlluBuilder<'a> {
    fn new(label: &'a str) -> Self {
        ConlluBuilder {
            label,
            doc_id: None,
            sentences: Vec::new(),
            current: Vec::new(),
            docs: Vec::new(),
            implicit: 0,
        }
    }

    fn end_sentence(&mut self) {
        if !self.current.is_empty() {
            self.sentences.push(std::mem::take(&mut self.current));
        }
    }

    fn flush_document(&mut self) {
        self.end_sentence();
        let sentences = std::mem::take(&mut self.sentences);
        let id = self.doc_id.take();
        if sentences.is_empty() && id.is_none() {
            return;
        }
        let id = match id {
            Some(id) if !id.is_empty() => id,
            _ => {
                self.implicit += 1;
                format!("{}-{}", self.label, self.implicit)
            }
        };
        match Document::new(id, self.label, sentences) {
            Ok(doc) => self.docs.push(doc),
            Err(err) => log::warn!("skipping document: {err}"),
        }
    }

    fn start_document(&mut self, id: Option<String>) {
        self.flush_document();
        self.doc_id = id;
    }

    fn push_token_line(&mut self, line: &str, line_no: usize) -> Result<(), CorpusError> {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(CorpusError::ParseError {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            // multiword range or empty node
            return Ok(());
        }
        if id.parse::<u32>().is_err() {
            return Err(CorpusError::ParseError {
                line: line_no,
                message: format!("invalid token id '{id}'"),
            });
        }
        let (form, lemma, upos) = (cols[1], cols[2], cols[3]);
        if form.is_empty() || lemma.is_empty() || upos.is_empty() {
            return Err(CorpusError::ParseError {
                line: line_no,
                message: "FORM, LEMMA and UPOS must be non-empty".into(),
            });
        }
        let surface = strip_punctuation(form);
        if surface.is_empty() {
            return Ok(());
        }
        let lemma = if lemma == "_" { None } else { Some(lemma) };
        self.current.push(Token::new(surface, lemma, Pos::from_upos(upos)));
        Ok(())
    }

    fn finish(mut self) -> Vec<Document> {
        self.flush_document();
        self.docs
    }
}

/// On-disk format of a manifest entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputFormat {
    Plain,
    Conllu,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(InputFormat::Plain),
            "conllu" => Ok(InputFormat::Conllu),
            other => Err(format!("unknown format '{other}' (expected plain or conllu)")),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Plain => "plain",
            InputFormat::Conllu => "conllu",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub corpus_label: String,
    pub format: InputFormat,
}

/// Parses a `path<TAB>label<TAB>format` manifest. Relative paths resolve
/// against `base_dir`; blank lines and `#` comments are ignored.
pub fn parse_manifest<R: BufRead>(reader: R, base_dir: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let mut entries = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Manifest {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(CorpusError::Manifest {
                line: line_no,
                message: format!("expected 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let format = cols[2].trim().parse().map_err(|message| CorpusError::Manifest {
            line: line_no,
            message,
        })?;
        let label = cols[1].trim();
        if label.is_empty() || label.contains(',') {
            return Err(CorpusError::Manifest {
                line: line_no,
                message: format!("invalid corpus label '{label}'"),
            });
        }
        let raw = Path::new(cols[0].trim());
        let path = if raw.is_absolute() {
            raw.to_path_buf()
        } else {
            base_dir.join(raw)
        };
        entries.push(ManifestEntry {
            path,
            corpus_label: label.to_string(),
            format,
        });
    }
    Ok(entries)
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(BufReader::new(file), base)
}

/// Ingests one manifest entry. Plain-text documents are identified by their
/// path as written in the manifest entry.
pub fn ingest_entry(entry: &ManifestEntry) -> Result<Vec<Document>, CorpusError> {
    match entry.format {
        InputFormat::Plain => {
            let text = std::fs::read_to_string(&entry.path).map_err(|e| CorpusError::io(&entry.path, e))?;
            let id = entry.path.to_string_lossy();
            Ok(vec![ingest_plain(&text, &id, &entry.corpus_label)?])
        }
        InputFormat::Conllu => {
            let file = File::open(&entry.path).map_err(|e| CorpusError::io(&entry.path, e))?;
            ingest_conllu(BufReader::new(file), &entry.corpus_label)
        }
    }
}

/// Ingests all manifest entries in parallel, preserving manifest order.
pub fn ingest_manifest(entries: &[ManifestEntry]) -> Result<Vec<Document>, CorpusError> {
    let parts: Vec<Vec<Document>> = entries.par_iter().map(ingest_entry).collect::<Result<_, _>>()?;
    Ok(parts.into_iter().flatten().collect())
}
