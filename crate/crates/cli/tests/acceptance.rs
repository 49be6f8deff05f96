//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p lexcomp-cli --test acceptance`. Every check uses an
//! independent oracle or a hand-computed value; none of the tolerances here
//! may be relaxed.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use lexcomp_core::corpus::{ingest_manifest, load_manifest, Document};
use lexcomp_core::embeddings::EmbeddingError;
use lexcomp_core::lexindex::complexity_score;
use lexcomp_core::metrics::{coleman_liau, lix};
use lexcomp_core::pipeline::{corpus_reports, filter_documents, pairwise_ks, FilterConfig, SIGNIFICANCE};
use lexcomp_core::stats::{ks_two_sample, spearman, Sample};
use lexcomp_core::syllables::{bokmal_fixture, evaluate_counter, SyllableRuleSet};
use lexcomp_core::synth::{self, SynthConfig};
use lexcomp_core::{suggest, EmbeddingTable, LexIndex, Metric, SuggestOptions};
use lexcomp_service::{router, AppState};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use tower::ServiceExt;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Check {
    ensure!((got - want).abs() <= tol, "{what}: got {got}, want {want} (tolerance {tol:e})");
    Ok(())
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

// ---------------------------------------------------------------- oracles

/// Pooled-ECDF sup difference, evaluating both ECDFs by counting.
fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter().chain(b).map(|&x| (ecdf(a, x) - ecdf(b, x)).abs()).fold(0.0, f64::max)
}

/// Average ranks by counting (O(n²)), then textbook Pearson.
fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let less = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na = a.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let nb = b.iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        f64::NEG_INFINITY
    } else {
        dot / (na * nb)
    }
}

// ---------------------------------------------------------------- criteria

fn lix_hand_cases() -> Check {
    for (a, b, c, want) in [(6, 2, 0, 3.0), (100, 10, 25, 35.0), (10, 1, 10, 110.0)] {
        let got = lix(a, b, c).map_err(|e| e.to_string())?;
        close(got, want, 1e-12, &format!("lix({a},{b},{c})"))?;
    }
    Ok(())
}

fn coleman_liau_cases() -> Check {
    close(coleman_liau(500.0, 5.0).map_err(|e| e.to_string())?, 12.12, 1e-9, "cli(500,5)")?;
    let cl = |l: f64, s: f64| coleman_liau(l, s).map_err(|e| e.to_string());
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..1000 {
        let (l1, s1) = (rng.random_range(0.0..600.0), rng.random_range(0.5..50.0));
        let (l2, s2) = (rng.random_range(0.0..600.0), rng.random_range(0.5..50.0));
        let t: f64 = rng.random_range(0.0..=1.0);
        // affine: f(t·x + (1−t)·y) = t·f(x) + (1−t)·f(y)
        let lhs = cl(t * l1 + (1.0 - t) * l2, t * s1 + (1.0 - t) * s2)?;
        let rhs = t * cl(l1, s1)? + (1.0 - t) * cl(l2, s2)?;
        close(lhs, rhs, 1e-12, &format!("affinity at ({l1},{s1}),({l2},{s2}), t={t}"))?;
        close(cl(l1, s1)?, 0.0588 * l1 - 0.296 * s1 - 15.8, 1e-12, "closed form")?;
    }
    Ok(())
}

fn random_sample(rng: &mut StdRng, len: usize) -> Vec<f64> {
    // half the samples are drawn from a small integer range to force ties
    if rng.random_bool(0.5) {
        (0..len).map(|_| rng.random_range(0..10) as f64).collect()
    } else {
        (0..len).map(|_| rng.random_range(-50.0..50.0)).collect()
    }
}

fn ks_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(42);
    for i in 0..1000 {
        let (na, nb) = (rng.random_range(2..=50), rng.random_range(2..=50));
        let a = random_sample(&mut rng, na);
        let b = random_sample(&mut rng, nb);
        let (sa, sb) = (Sample::new(a.clone()).unwrap(), Sample::new(b.clone()).unwrap());
        let ab = ks_two_sample(&sa, &sb);
        let ba = ks_two_sample(&sb, &sa);
        close(ab.statistic, brute_ks(&a, &b), 1e-12, &format!("pair {i} statistic"))?;
        ensure!(ab.statistic == ba.statistic && ab.p_value == ba.p_value, "pair {i} not symmetric");
        ensure!((0.0..=1.0).contains(&ab.p_value), "pair {i} p-value {} outside [0,1]", ab.p_value);

        let same = ks_two_sample(&sa, &Sample::new(a.clone()).unwrap());
        ensure!(same.statistic == 0.0, "identical samples gave D={}", same.statistic);
        let shifted: Vec<f64> = a.iter().map(|x| x + 1000.0).collect();
        let disjoint = ks_two_sample(&sa, &Sample::new(shifted).unwrap());
        ensure!(disjoint.statistic == 1.0, "disjoint samples gave D={}", disjoint.statistic);
    }
    Ok(())
}

fn spearman_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(42);
    let mut compared = 0;
    let mut tied = 0;
    while compared < 1000 {
        let n = rng.random_range(3..=50);
        let x = random_sample(&mut rng, n);
        let y = random_sample(&mut rng, n);
        let oracle = brute_spearman(&x, &y);
        match spearman(&Sample::new(x.clone()).unwrap(), &Sample::new(y.clone()).unwrap()) {
            Ok(r) => {
                close(r.rho, oracle, 1e-12, &format!("rho on pair {compared}"))?;
                compared += 1;
                let distinct: HashSet<u64> = x.iter().map(|v| v.to_bits()).collect();
                if distinct.len() < n {
                    tied += 1;
                }
            }
            Err(e) => ensure!(oracle.is_nan(), "spearman failed ({e}) where the oracle gives {oracle}"),
        }
    }
    ensure!(tied >= 300, "only {tied} of the compared pairs contained ties");
    Ok(())
}

fn synthetic_pipeline() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = SynthConfig::default();
    ensure!(config.docs_per_class >= 500, "generator must produce at least 500 documents per class");
    let manifest = synth::write_corpus(dir.path(), &config).map_err(|e| e.to_string())?;
    let entries = load_manifest(&manifest).map_err(|e| e.to_string())?;
    let docs = ingest_manifest(&entries).map_err(|e| e.to_string())?;
    let docs = filter_documents(docs, &FilterConfig::default());

    let targets = [("children", 21.6), ("news", 40.3), ("encyclopedia", 45.4), ("parliament", 47.0)];
    let reports = corpus_reports(&docs, Metric::Lix);
    for (label, target) in targets {
        let report = reports.iter().find(|r| r.label == label).ok_or(format!("no report for {label}"))?;
        close(report.stats.mean, target, 3.0, &format!("mean LIX of {label}"))?;
    }

    let pairs = pairwise_ks(&docs, Metric::Lix).map_err(|e| e.to_string())?;
    ensure!(pairs.len() == 6, "expected 6 pairs, got {}", pairs.len());
    for p in &pairs {
        ensure!(p.ks.p_value < SIGNIFICANCE, "{}-{} not significant (p={})", p.first, p.second, p.ks.p_value);
        if p.first == "children" || p.second == "children" {
            ensure!(p.ks.statistic > 0.8, "D({}, {}) = {}", p.first, p.second, p.ks.statistic);
        }
    }
    let smallest = pairs
        .iter()
        .min_by(|a, b| a.ks.statistic.total_cmp(&b.ks.statistic))
        .unwrap();
    let pair: HashSet<&str> = [smallest.first.as_str(), smallest.second.as_str()].into();
    ensure!(
        pair == HashSet::from(["encyclopedia", "parliament"]),
        "smallest pair is {}-{} (D={})",
        smallest.first,
        smallest.second,
        smallest.ks.statistic
    );
    Ok(())
}

fn export(index: &LexIndex) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    index.write_aggregates(&mut buf).map_err(|e| e.to_string())?;
    Ok(buf)
}

fn cs_properties() -> Check {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..200 {
        let median = rng.random_range(0.0..100.0);
        let m = rng.random_range(1..3000);
        let at_m = complexity_score(median, m, m).map_err(|e| e.to_string())?;
        ensure!(at_m == 0.0, "cs({median}, n=m={m}) = {at_m}");
        if median > 0.0 {
            let mut prev = f64::INFINITY;
            for n in 1..=m {
                let cs = complexity_score(median, n, m).map_err(|e| e.to_string())?;
                ensure!(cs < prev, "cs not strictly decreasing at median={median} n={n} m={m}");
                prev = cs;
            }
        }
    }

    let docs: Vec<Document> = synth::generate(&SynthConfig {
        docs_per_class: 250,
        ..Default::default()
    });
    let index = LexIndex::build(&docs).map_err(|e| e.to_string())?;
    let file = tempfile::NamedTempFile::new().map_err(|e| e.to_string())?;
    index.export_aggregates(file.path()).map_err(|e| e.to_string())?;
    let back = LexIndex::import_aggregates(file.path()).map_err(|e| e.to_string())?;
    ensure!(back.m() == index.m() && back.len() == index.len(), "round trip changed sizes");
    for (a, b) in back.entries().iter().zip(index.entries()) {
        ensure!(
            a.lemma == b.lemma
                && a.pos == b.pos
                && a.n == b.n
                && a.median_lix.to_bits() == b.median_lix.to_bits()
                && a.cs.to_bits() == b.cs.to_bits(),
            "round trip changed {}/{}",
            b.lemma,
            b.pos
        );
    }
    let original = export(&index)?;
    ensure!(export(&back)? == original, "re-export differs from the original file");

    for seed in 0..3 {
        let mut shuffled = docs.clone();
        shuffled.shuffle(&mut StdRng::seed_from_u64(seed));
        let permuted = LexIndex::build(&shuffled).map_err(|e| e.to_string())?;
        ensure!(export(&permuted)? == original, "permutation {seed} changed the exported file");
    }
    Ok(())
}

fn frequency_pattern() -> Check {
    let index = synth::frequency_index(42, 20_000, 2_000, 500);
    let (high, low) = index.frequency_partition(0.05);
    ensure!(low.len() >= 1000, "low partition has only {} entries", low.len());
    let corr = |entries: &[&lexcomp_core::LemmaEntry]| {
        let cs = Sample::new(entries.iter().map(|e| e.cs).collect()).unwrap();
        let freq = Sample::new(entries.iter().map(|e| e.frequency(index.m())).collect()).unwrap();
        spearman(&cs, &freq).map_err(|e| e.to_string())
    };
    let h = corr(&high)?;
    ensure!(h.rho < 0.0 && h.p_value < 0.01, "high partition: rho={} p={}", h.rho, h.p_value);
    let l = corr(&low)?;
    ensure!(l.rho.abs() < 0.1, "low partition: |rho|={} (n={})", l.rho.abs(), low.len());
    Ok(())
}

fn syllable_counter() -> Check {
    let rules = SyllableRuleSet::default();
    let lexicon = bokmal_fixture();
    ensure!(lexicon.len() == 50, "fixture has {} entries", lexicon.len());
    let accuracy = evaluate_counter(&lexicon, &rules);
    if accuracy != 1.0 {
        let misses: Vec<String> = lexicon
            .iter()
            .filter(|(w, g)| rules.count(w) != *g)
            .map(|(w, g)| format!("{w} ({} vs {g})", rules.count(w)))
            .collect();
        return Err(format!("accuracy {accuracy}: {}", misses.join(", ")));
    }

    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzæøåABCDEFGHIJKLMNOPQRSTUVWXYZÆØÅéü-' 09".chars().collect();
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..10_000 {
        let len = rng.random_range(0..20);
        let word: String = (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
        let count = rules.count(&word);
        let vowels = word.chars().filter(|&c| rules.is_vowel(c)).count();
        ensure!(count <= vowels, "'{word}': {count} syllables but {vowels} vowels");
        ensure!(
            rules.count(&word.to_uppercase()) == count && rules.count(&word.to_lowercase()) == count,
            "'{word}': count depends on case"
        );
    }
    Ok(())
}

fn knn_oracle() -> Check {
    let (size, dim) = (1000, 100);
    let mut rng = StdRng::seed_from_u64(42);
    let mut vectors: Vec<Vec<f32>> = (0..size)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect();
    // exact duplicates and a zero vector exercise the tie rule and the -inf case
    for i in 0..20 {
        vectors[size - 1 - i] = vectors[i].clone();
    }
    vectors[500] = vec![0.0; dim];
    let words: Vec<String> = (0..size).map(|i| format!("w{:04}", (i * 7919) % size)).collect();
    let mut table = EmbeddingTable::new(dim);
    for (w, v) in words.iter().zip(&vectors) {
        ensure!(table.insert(w, v).map_err(|e| e.to_string())?, "duplicate word {w}");
    }

    for q in (0..size).step_by(25).chain([size - 1, 500]) {
        let mut brute: Vec<(f64, &String)> = (0..size)
            .filter(|&i| i != q)
            .map(|i| (cosine(&vectors[q], &vectors[i]), &words[i]))
            .collect();
        brute.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        for k in [1, 10, 50, size - 1] {
            let got = table.nearest(&words[q], k).map_err(|e| e.to_string())?;
            let got_words: Vec<&String> = got.iter().map(|(w, _)| w).collect();
            let want: Vec<&String> = brute.iter().take(k).map(|(_, w)| *w).collect();
            ensure!(got_words == want, "query {} k={k}: order differs from exhaustive scan", words[q]);
        }
    }
    Ok(())
}

fn suggest_fixture() -> Result<(LexIndex, EmbeddingTable), String> {
    let index = LexIndex::import_aggregates(&fixture("index.tsv")).map_err(|e| e.to_string())?;
    let table = EmbeddingTable::load(&fixture("vectors.txt")).map_err(|e| e.to_string())?;
    Ok((index, table))
}

fn suggest_ordering() -> Check {
    let (index, table) = suggest_fixture()?;
    let full = suggest(&index, &table, "ubehag", &SuggestOptions::new(4)).map_err(|e| e.to_string())?;
    let lemmas: Vec<&str> = full.iter().map(|s| s.lemma.as_str()).collect();
    ensure!(lemmas == ["ubehag", "smerte", "stress"], "got {lemmas:?}");
    ensure!(full[0].cosine_similarity == 1.0, "reference row similarity {}", full[0].cosine_similarity);
    ensure!(
        full[1..].windows(2).all(|w| w[0].cs <= w[1].cs),
        "suggestions not ascending by cs"
    );

    let candidates = ["smerte", "stress", "plage", "bil"];
    for mask in 0u32..16 {
        let excluded: Vec<&str> = (0..4).filter(|b| mask & (1 << b) != 0).map(|b| candidates[b]).collect();
        let want: Vec<&str> = lemmas.iter().copied().filter(|l| !excluded.contains(l)).collect();
        match suggest(&index, &table, "ubehag", &SuggestOptions::new(4).exclude(&excluded)) {
            Ok(rows) => {
                let got: Vec<&str> = rows.iter().map(|s| s.lemma.as_str()).collect();
                ensure!(got == want, "excluding {excluded:?}: got {got:?}, want {want:?}");
            }
            Err(EmbeddingError::EmptySuggestions(_)) => {
                ensure!(want == ["ubehag"], "excluding {excluded:?}: unexpected empty result")
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

async fn call(app: axum::Router, req: Request<Body>) -> Result<(StatusCode, Value), String> {
    let resp = app.oneshot(req).await.map_err(|e| e.to_string())?;
    let status = resp.status();
    let bytes = resp.into_body().collect().await.map_err(|e| e.to_string())?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes).map_err(|e| e.to_string())?))
}

async fn service_checks() -> Check {
    let empty = LexIndex::from_entries(1, vec![], vec![]).map_err(|e| e.to_string())?;
    let req = Request::post("/analyze")
        .header("content-type", "application/json")
        .body(Body::from(r#"{"text": "Per er her."}"#))
        .unwrap();
    let (status, body) = call(router(AppState::new(empty, None)), req).await?;
    ensure!(status == StatusCode::OK, "/analyze status {status}");
    ensure!(body["sentence_lix"].as_f64() == Some(3.0), "sentence_lix {}", body["sentence_lix"]);
    ensure!(body["band"] == "VeryEasy", "band {}", body["band"]);
    ensure!(
        body["tokens"].as_array().is_some_and(|t| t.iter().all(|t| t["cs"].is_null())),
        "tokens carry cs against an empty index"
    );

    let (index, table) = suggest_fixture()?;
    let app = router(AppState::new(index.clone(), Some(table.clone())));
    for (k, exclude) in [(3, ""), (4, ""), (3, "smerte"), (4, "stress,plage")] {
        let uri = format!("/suggest?lemma=ubehag&k={k}&exclude={exclude}");
        let (status, body) = call(app.clone(), Request::get(&uri).body(Body::empty()).unwrap()).await?;
        ensure!(status == StatusCode::OK, "{uri}: status {status}");
        let options = SuggestOptions::new(k).exclude(exclude.split(',').filter(|w| !w.is_empty()));
        let direct = suggest(&index, &table, "ubehag", &options).map_err(|e| e.to_string())?;
        ensure!(body == serde_json::to_value(&direct).unwrap(), "{uri}: differs from the library result");
    }
    let (status, _) = call(app, Request::get("/suggest?lemma=plage&k=3").body(Body::empty()).unwrap()).await?;
    ensure!(status == StatusCode::NOT_FOUND, "unknown lemma gave {status}");
    Ok(())
}

// ---------------------------------------------------------------- runner

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: Box<dyn Fn() -> Check>,
}

fn criterion(name: &'static str, limit_secs: Option<u64>, run: impl Fn() -> Check + 'static) -> Criterion {
    Criterion {
        name,
        limit: limit_secs.map(Duration::from_secs),
        run: Box::new(run),
    }
}

fn main() -> ExitCode {
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .expect("tokio runtime");
    let criteria = vec![
        criterion("lix formula hand cases", Some(1), lix_hand_cases),
        criterion("coleman-liau value and linearity", None, coleman_liau_cases),
        criterion("ks statistic matches brute-force oracle", Some(10), ks_oracle),
        criterion("spearman matches rank-then-pearson oracle", Some(10), spearman_oracle),
        criterion("synthetic four-corpus pipeline", Some(60), synthetic_pipeline),
        criterion("complexity score properties", None, cs_properties),
        criterion("frequency correlation pattern", None, frequency_pattern),
        criterion("syllable counter", None, syllable_counter),
        criterion("nearest neighbours match exhaustive scan", Some(5), knn_oracle),
        criterion("suggestion ordering and exclusion", None, suggest_ordering),
        criterion("service analyze and suggest", None, move || runtime.block_on(service_checks())),
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| (c.run)()))
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        if let (Ok(()), Some(limit)) = (&result, c.limit) {
            if elapsed > limit {
                result = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(()) => println!("[PASS] {} ({elapsed:.2?})", c.name),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {} ({elapsed:.2?}): {msg}", c.name);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
