//! Seeded synthetic corpora for exercising the pipeline end to end.
//!
//! [`generate`] produces four classes of annotated documents whose LIX
//! distributions are centred on configurable means. Each document first
//! draws a target LIX, splits the deviation from the class mean between
//! sentence length and long-word share, and then fills token slots with
//! pseudo-words of the right length from a Zipf-weighted vocabulary.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand::rngs::StdRng;
use rand_distr::Normal;

use crate::corpus::{Document, Pos, Token};
use crate::lexindex::{complexity_score, ContentPos, LemmaEntry, LexIndex};
use crate::metrics::LONG_WORD_LETTERS;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusClass {
    pub label: String,
    pub mean_lix: f64,
    pub std_lix: f64,
    /// Average sentence length at the class mean.
    pub words_per_sentence: f64,
    /// Probability that a token comes from the class-specific vocabulary.
    pub specific_share: f64,
}

impl CorpusClass {
    fn new(label: &str, mean_lix: f64, std_lix: f64, words_per_sentence: f64, specific_share: f64) -> Self {
        CorpusClass {
            label: label.to_string(),
            mean_lix,
            std_lix,
            words_per_sentence,
            specific_share,
        }
    }
}

/// Children's books, news, encyclopedia and parliament, with the LIX means
/// and spreads observed for those genres in Norwegian.
pub fn default_classes() -> Vec<CorpusClass> {
    vec![
        CorpusClass::new("children", 21.57, 4.56, 9.0, 0.30),
        CorpusClass::new("news", 40.32, 5.82, 15.0, 0.20),
        CorpusClass::new("encyclopedia", 45.40, 6.40, 17.0, 0.25),
        CorpusClass::new("parliament", 47.04, 6.36, 19.5, 0.25),
    ]
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub docs_per_class: usize,
    pub seed: u64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub classes: Vec<CorpusClass>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs_per_class: 1000,
            seed: 42,
            min_tokens: 120,
            max_tokens: 320,
            classes: default_classes(),
        }
    }
}

#[derive(Debug, Clone)]
struct WordType {
    lemma: String,
    pos: Pos,
}

#[derive(Debug)]
struct Pool {
    words: Vec<WordType>,
    weights: WeightedIndex<f64>,
}

impl Pool {
    fn new(words: Vec<WordType>) -> Pool {
        let weights = WeightedIndex::new((0..words.len()).map(|r| 1.0 / (r as f64 + 2.0))).expect("non-empty pool");
        Pool { words, weights }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> &WordType {
        &self.words[self.weights.sample(rng)]
    }
}

struct Vocabulary {
    shared_short: Pool,
    shared_long: Pool,
    specific: Vec<(Pool, Pool)>,
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "sk", "st", "br", "tr", "kl", "fl",
    "gr", "sl", "sp", "",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "y", "æ", "ø", "å", "ei", "au"];
const CODAS: &[&str] = &["", "", "", "n", "r", "s", "t", "l", "k", "m", "nd", "st", "ng"];

fn pseudo_word<R: Rng>(rng: &mut R, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).unwrap());
        w.push_str(NUCLEI.choose(rng).unwrap());
        w.push_str(CODAS.choose(rng).unwrap());
    }
    w
}

fn content_pos<R: Rng>(rng: &mut R) -> Pos {
    match rng.random_range(0..20) {
        0..=9 => Pos::Noun,
        10..=14 => Pos::Verb,
        15..=17 => Pos::Adj,
        _ => Pos::Adv,
    }
}

fn word_list<R: Rng>(rng: &mut R, used: &mut HashSet<String>, count: usize, long: bool, function_words: usize) -> Vec<WordType> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = if long { rng.random_range(3..=4) } else { rng.random_range(1..=2) };
        let w = pseudo_word(rng, syllables);
        let letters = w.chars().count();
        if (letters > LONG_WORD_LETTERS) != long || letters < 2 || !used.insert(w.clone()) {
            continue;
        }
        let pos = if out.len() < function_words { Pos::Other } else { content_pos(rng) };
        out.push(WordType { lemma: w, pos });
    }
    out
}

impl Vocabulary {
    fn new<R: Rng>(rng: &mut R, classes: usize) -> Vocabulary {
        let mut used = HashSet::new();
        let shared_short = Pool::new(word_list(rng, &mut used, 1500, false, 40));
        let shared_long = Pool::new(word_list(rng, &mut used, 2500, true, 0));
        let specific = (0..classes)
            .map(|_| {
                (
                    Pool::new(word_list(rng, &mut used, 200, false, 0)),
                    Pool::new(word_list(rng, &mut used, 600, true, 0)),
                )
            })
            .collect();
        Vocabulary {
            shared_short,
            shared_long,
            specific,
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn generate_document<R: Rng>(
    rng: &mut R,
    vocab: &Vocabulary,
    class_idx: usize,
    class: &CorpusClass,
    doc_no: usize,
    config: &SynthConfig,
) -> Document {
    let target = Normal::new(class.mean_lix, class.std_lix).unwrap().sample(rng);
    let dev = target - class.mean_lix;
    let wps = (class.words_per_sentence + 0.35 * dev).max(2.0);
    let long_pct = (class.mean_lix - class.words_per_sentence + 0.65 * dev).clamp(0.0, 90.0);

    let tokens = rng.random_range(config.min_tokens..=config.max_tokens);
    let sentences = ((tokens as f64 / wps).round() as usize).clamp(1, tokens);
    let long_words = ((tokens as f64 * long_pct / 100.0).round() as usize).min(tokens);

    let mut is_long = vec![false; tokens];
    for i in rand::seq::index::sample(rng, tokens, long_words) {
        is_long[i] = true;
    }
    let mut lengths = vec![tokens / sentences; sentences];
    for len in lengths.iter_mut().take(tokens % sentences) {
        *len += 1;
    }
    lengths.shuffle(rng);

    let (spec_short, spec_long) = &vocab.specific[class_idx];
    let mut slot = 0;
    let mut out = Vec::with_capacity(sentences);
    for len in lengths {
        let mut sentence = Vec::with_capacity(len);
        for k in 0..len {
            let specific = rng.random_bool(class.specific_share);
            let pool = match (is_long[slot], specific) {
                (false, false) => &vocab.shared_short,
                (false, true) => spec_short,
                (true, false) => &vocab.shared_long,
                (true, true) => spec_long,
            };
            let word = pool.draw(rng);
            let surface = if k == 0 { capitalize(&word.lemma) } else { word.lemma.clone() };
            sentence.push(Token::new(surface, Some(&word.lemma), word.pos));
            slot += 1;
        }
        out.push(sentence);
    }
    let id = format!("{}-{:05}", class.label, doc_no);
    Document::new(id, class.label.clone(), out).expect("synthetic documents contain letters")
}

/// Generates `docs_per_class` documents for every class, grouped by class in
/// configuration order.
pub fn generate(config: &SynthConfig) -> Vec<Document> {
    let mut rng = StdRng::seed_from_u64(config.seed);
    let vocab = Vocabulary::new(&mut rng, config.classes.len());
    let mut docs = Vec::with_capacity(config.docs_per_class * config.classes.len());
    for (ci, class) in config.classes.iter().enumerate() {
        for d in 0..config.docs_per_class {
            docs.push(generate_document(&mut rng, &vocab, ci, class, d, config));
        }
    }
    docs
}

fn upos(pos: Pos) -> &'static str {
    match pos {
        Pos::Noun => "NOUN",
        Pos::Verb => "VERB",
        Pos::Adj => "ADJ",
        Pos::Adv => "ADV",
        Pos::Other => "PRON",
    }
}

/// Writes documents as CoNLL-U, closing each sentence with a `.` token.
pub fn write_conllu<'a, W, I>(docs: I, mut w: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Document>,
{
    for doc in docs {
        writeln!(w, "# newdoc id = {}", doc.id)?;
        for (si, sentence) in doc.sentences.iter().enumerate() {
            writeln!(w, "# sent_id = {}-{}", doc.id, si + 1)?;
            for (ti, t) in sentence.iter().enumerate() {
                writeln!(w, "{}\t{}\t{}\t{}\t_\t_\t0\t_\t_\t_", ti + 1, t.surface, t.lemma, upos(t.pos))?;
            }
            writeln!(w, "{}\t.\t.\tPUNCT\t_\t_\t0\tpunct\t_\t_", sentence.len() + 1)?;
            writeln!(w)?;
        }
    }
    w.flush()
}

/// Generates a corpus into `dir`: one CoNLL-U file per class plus a
/// `manifest.tsv`. Returns the manifest path.
pub fn write_corpus(dir: &Path, config: &SynthConfig) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let docs = generate(config);
    let mut manifest = BufWriter::new(File::create(dir.join("manifest.tsv"))?);
    for class in &config.classes {
        let name = format!("{}.conllu", class.label);
        let file = BufWriter::new(File::create(dir.join(&name))?);
        write_conllu(docs.iter().filter(|d| d.corpus_label == class.label), file)?;
        writeln!(manifest, "{name}\t{}\tconllu", class.label)?;
    }
    manifest.flush()?;
    Ok(dir.join("manifest.tsv"))
}

/// An aggregate index with independent random medians and document
/// frequencies.
///
/// Low-frequency entries (n/m ≤ 5%) draw n from a truncated `n^-2` power
/// law, as document frequencies in natural corpora do; high-frequency
/// entries draw n uniformly above the 5% line. Medians are normal around
/// the pooled LIX mean.
pub fn frequency_index(seed: u64, m: usize, low: usize, high: usize) -> LexIndex {
    let mut rng = StdRng::seed_from_u64(seed);
    let medians = Normal::new(40.58, 6.94).unwrap();
    let cut = m / 20;
    assert!(cut >= 1 && cut < m, "m too small for a 5% split");
    let mut entries = Vec::with_capacity(low + high);
    for i in 0..low + high {
        let n = if i < low {
            let u: f64 = rng.random();
            let n = 1.0 / (1.0 - u * (1.0 - 1.0 / cut as f64));
            (n.floor() as usize).clamp(1, cut)
        } else {
            rng.random_range(cut + 1..=m)
        };
        let median_lix: f64 = medians.sample(&mut rng);
        let median_lix = median_lix.max(0.0);
        entries.push(LemmaEntry {
            lemma: format!("lemma{i:06}"),
            pos: ContentPos::Noun,
            n,
            median_lix,
            cs: complexity_score(median_lix, n, m).expect("1 <= n <= m"),
        });
    }
    LexIndex::from_entries(m, vec!["synthetic".into()], entries).expect("entries are consistent")
}
