use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lexcomp_core::corpus::{ingest_manifest, load_manifest, Document};
use lexcomp_core::embeddings::EmbeddingError;
use lexcomp_core::pipeline::{analyze, corpus_reports, filter_documents, pairwise_ks, FilterConfig};
use lexcomp_core::stats::StatsError;
use lexcomp_core::syllables::SyllableRuleSet;
use lexcomp_core::synth::{self, SynthConfig};
use lexcomp_core::{suggest, ContentPos, EmbeddingTable, LexIndex, LixBand, Metric, SuggestOptions};

/// Lexical complexity scores from document readability.
#[derive(Parser, Debug)]
#[command(name = "lexcomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the four-class synthetic corpus and its manifest.
    Synth {
        /// Directory to write the corpus into.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        docs_per_class: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Score every document and summarize each corpus after outlier filtering.
    Score {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "lix")]
        metric: Metric,
        /// Write the per-corpus report here instead of after the score table.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pairwise Kolmogorov-Smirnov tests between corpora.
    Validate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "lix")]
        metric: Metric,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the lemma index and export its aggregate statistics.
    Build {
        #[command(flatten)]
        input: InputArgs,
        /// Index file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Look up a lemma, optionally with substitution suggestions.
    Query {
        #[arg(long)]
        index: PathBuf,
        lemma: String,
        /// Restrict to one part of speech (NOUN, VERB, ADJ, ADV).
        #[arg(long)]
        pos: Option<ContentPos>,
        /// Number of nearest neighbours to consider.
        #[arg(long, value_name = "K", requires = "vectors")]
        suggest: Option<usize>,
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Comma-separated words to leave out of the suggestions.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Correlate complexity scores with frequency, word length and syllables.
    Analyze {
        #[arg(long)]
        index: PathBuf,
        /// Document-frequency ratio separating frequent from rare lemmas.
        #[arg(long, default_value_t = 0.05)]
        freq_threshold: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Manifest listing `path<TAB>corpus_label<TAB>format` per line.
    #[arg(long)]
    manifest: PathBuf,
    /// Remove documents further than this many standard deviations from
    /// their corpus mean.
    #[arg(long, default_value_t = 4.0)]
    sigma_k: f64,
    /// Remove documents scoring above this value.
    #[arg(long, default_value_t = 100.0)]
    hard_max: f64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write the table to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failures that map to a distinct exit status.
enum Failure {
    NotFound(String),
    Other(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.into())
    }
}

type Outcome = Result<(), Failure>;

// Reals are printed with `{:?}`: shortest round-trip digits, switching to
// exponent notation for very small or large magnitudes.

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_documents(input: &InputArgs, metric: Metric) -> anyhow::Result<Vec<Document>> {
    if input.sigma_k.is_nan() || input.sigma_k <= 0.0 {
        bail!("--sigma-k must be positive");
    }
    let entries = load_manifest(&input.manifest)?;
    if entries.is_empty() {
        bail!("manifest {} lists no documents", input.manifest.display());
    }
    let docs = ingest_manifest(&entries)?;
    if docs.is_empty() {
        bail!("manifest {} produced no documents", input.manifest.display());
    }
    let config = FilterConfig {
        metric,
        sigma_k: input.sigma_k,
        hard_max: input.hard_max,
    };
    let kept = filter_documents(docs, &config);
    if kept.is_empty() {
        bail!("outlier filtering removed every document");
    }
    Ok(kept)
}

fn load_index(path: &Path) -> anyhow::Result<LexIndex> {
    LexIndex::import_aggregates(path).with_context(|| format!("loading index {}", path.display()))
}

fn cmd_synth(out: &Path, docs_per_class: usize, seed: u64) -> Outcome {
    if docs_per_class == 0 {
        return Err(anyhow::anyhow!("--docs-per-class must be positive").into());
    }
    let config = SynthConfig {
        docs_per_class,
        seed,
        ..Default::default()
    };
    let manifest = synth::write_corpus(out, &config).with_context(|| format!("writing corpus to {}", out.display()))?;
    println!("{}", manifest.display());
    Ok(())
}

fn cmd_score(input: &InputArgs, metric: Metric, report: Option<&Path>, output: &OutputArgs) -> Outcome {
    let docs = load_documents(input, metric)?;
    let mut w = open_output(output.out.as_deref())?;
    writeln!(w, "doc_id\tcorpus_label\tA\tB\tC\tlix\tcli\tband")?;
    for d in &docs {
        let s = &d.stats;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{:?}\t{:?}\t{}",
            d.id,
            d.corpus_label,
            s.tokens,
            s.sentences,
            s.long_words,
            s.lix,
            s.cli,
            LixBand::from_score(s.lix)
        )?;
    }
    let mut rw = match report {
        Some(p) => open_output(Some(p))?,
        None => {
            writeln!(w)?;
            w
        }
    };
    writeln!(rw, "corpus_label\tcount\tmean\tstd\tmin\tmax")?;
    for r in corpus_reports(&docs, metric) {
        let s = r.stats;
        writeln!(rw, "{}\t{}\t{:?}\t{:?}\t{:?}\t{:?}", r.label, s.count, s.mean, s.std, s.min, s.max)?;
    }
    rw.flush()?;
    Ok(())
}

fn cmd_validate(input: &InputArgs, metric: Metric, output: &OutputArgs) -> Outcome {
    let docs = load_documents(input, metric)?;
    let pairs = pairwise_ks(&docs, metric)?;
    let mut w = open_output(output.out.as_deref())?;
    writeln!(w, "first\tsecond\tn1\tn2\tD\tp_value\tsignificant")?;
    for p in pairs {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{:?}\t{:?}\t{}",
            p.first, p.second, p.ks.n1, p.ks.n2, p.ks.statistic, p.ks.p_value, p.significant
        )?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_build(input: &InputArgs, out: &Path) -> Outcome {
    let docs = load_documents(input, Metric::Lix)?;
    let index = LexIndex::build(&docs)?;
    index
        .export_aggregates(out)
        .with_context(|| format!("writing {}", out.display()))?;
    println!("m={}\tentries={}", index.m(), index.len());
    Ok(())
}

fn cmd_query(
    index: &Path,
    lemma: &str,
    pos: Option<ContentPos>,
    k: Option<usize>,
    vectors: Option<&Path>,
    exclude: &[String],
    output: &OutputArgs,
) -> Outcome {
    let index = load_index(index)?;
    let entries = index.lookup(lemma, pos);
    if entries.is_empty() {
        return Err(Failure::NotFound(format!("unknown lemma '{lemma}'")));
    }
    let (Some(k), Some(vectors)) = (k, vectors) else {
        let mut w = open_output(output.out.as_deref())?;
        writeln!(w, "lemma\tpos\tcs\tn")?;
        for e in entries {
            writeln!(w, "{}\t{}\t{:?}\t{}", e.lemma, e.pos, e.cs, e.n)?;
        }
        w.flush()?;
        return Ok(());
    };
    let table = EmbeddingTable::load(vectors).with_context(|| format!("loading vectors {}", vectors.display()))?;
    let options = SuggestOptions::new(k).exclude(exclude).pos(pos);
    let rows = match suggest(&index, &table, lemma, &options) {
        Ok(rows) => rows,
        Err(EmbeddingError::UnknownWord(w)) => return Err(Failure::NotFound(format!("no vector for '{w}'"))),
        Err(EmbeddingError::EmptySuggestions(w)) => {
            log::warn!("no substitution candidates left for '{w}'");
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };
    let mut w = open_output(output.out.as_deref())?;
    writeln!(w, "lemma\tpos\tcosine_similarity\tcs\tn")?;
    for s in rows {
        writeln!(w, "{}\t{}\t{:?}\t{:?}\t{}", s.lemma, s.pos, s.cosine_similarity, s.cs, s.n)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_analyze(index: &Path, threshold: f64, output: &OutputArgs) -> Outcome {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(anyhow::anyhow!("--freq-threshold must lie strictly between 0 and 1").into());
    }
    let index = load_index(index)?;
    let rows = analyze(&index, threshold, &SyllableRuleSet::default());
    let mut w = open_output(output.out.as_deref())?;
    writeln!(w, "analysis\tn\trho\tp_value\tnote")?;
    let mut too_few = Vec::new();
    for row in &rows {
        match &row.result {
            Ok(r) => writeln!(w, "{}\t{}\t{:?}\t{:?}\t", row.name, row.n, r.rho, r.p_value)?,
            Err(e) => {
                writeln!(w, "{}\t{}\tNA\tNA\t{e}", row.name, row.n)?;
                if matches!(e, StatsError::TooFew { .. }) {
                    too_few.push(row.name);
                } else {
                    log::warn!("{}: {e}", row.name);
                }
            }
        }
    }
    w.flush()?;
    if !too_few.is_empty() {
        return Err(anyhow::anyhow!("too few entries for: {}", too_few.join(", ")).into());
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Synth {
            out,
            docs_per_class,
            seed,
        } => cmd_synth(out, *docs_per_class, *seed),
        Command::Score {
            input,
            metric,
            report,
            output,
        } => cmd_score(input, *metric, report.as_deref(), output),
        Command::Validate { input, metric, output } => cmd_validate(input, *metric, output),
        Command::Build { input, out } => cmd_build(input, out),
        Command::Query {
            index,
            lemma,
            pos,
            suggest,
            vectors,
            exclude,
            output,
        } => cmd_query(index, lemma, *pos, *suggest, vectors.as_deref(), exclude, output),
        Command::Analyze {
            index,
            freq_threshold,
            output,
        } => cmd_analyze(index, *freq_threshold, output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors count as configuration failures; 2 is reserved for not-found
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotFound(msg)) => {
            eprintln!("lexcomp: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("lexcomp: {e:#}");
            ExitCode::from(1)
        }
    }
}
