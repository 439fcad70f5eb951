use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use kwgraph::centrality::{compute_all, rank_order, score_dump};
use kwgraph::evaluation::{
    accuracy, document_graph, render_table, write_results, EmbeddingConfig, SweepOptions, NO_EMBEDDING,
};
use kwgraph::network::build_cooccurrence;
use kwgraph::{CentralityParams, CorpusStats, EvalRecord, GraphConfig, MeasureId, ProcessedDocument, Stem, SweepGrid};
use rayon::prelude::*;
use serde::Serialize;

use crate::inputs::{document_file_name, CorpusArgs, CorpusFingerprint, EmbeddingArgs, EmbeddingFingerprint};
use crate::sweep::{cache_dir, run_cached, CellCache};
use crate::{PartialFailure, Usage};

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("cannot create {}", path.display()))
}

fn write_json_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn check_graph_config(w: usize, p: f64, embedding: Option<&EmbeddingConfig>) -> Result<()> {
    GraphConfig::new(w, p).map_err(|e| Usage(e.to_string()))?;
    if p > 0.0 && embedding.is_none() {
        bail!(Usage("--p above 0 needs --embeddings".into()));
    }
    Ok(())
}

pub fn preprocess(corpus: &CorpusArgs, out: Option<&Path>) -> Result<()> {
    let loaded = corpus.load()?;
    let docs = &loaded.processed.documents;
    if let Some(path) = out {
        let mut w = create(path)?;
        for doc in docs {
            write_json_line(&mut w, doc)?;
        }
        w.flush()?;
    }
    println!("{}", CorpusStats::from_documents(docs));
    if !loaded.processed.unusable.is_empty() {
        println!("excluded {}", loaded.processed.unusable.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct SentenceRecord<'a> {
    doc_id: &'a str,
    sentence_index: usize,
    text: &'a str,
}

#[derive(Serialize)]
struct OccurrenceRecord<'a> {
    doc_id: &'a str,
    sentence_index: usize,
    /// Position of the word in the whitespace split of the sentence text.
    token_index: usize,
    stem: &'a str,
    surface: &'a str,
}

/// Writes `vocab.txt` (distinct stems), `sentences.jsonl`, `occurrences.jsonl`
/// (one record per kept token) and `candidates.tsv` (non-adjacent stem pairs
/// per document at window `w`).
pub fn export_candidates(corpus: &CorpusArgs, w: usize, out: &Path) -> Result<()> {
    GraphConfig::new(w, 0.0).map_err(|e| Usage(e.to_string()))?;
    let loaded = corpus.load()?;
    let docs = &loaded.processed.documents;
    if docs.is_empty() {
        log::warn!("corpus has no usable documents; writing empty files");
    }
    create_dir(out)?;

    let vocab: BTreeSet<&Stem> = docs.iter().flat_map(ProcessedDocument::vocabulary).collect();
    let mut v = create(&out.join("vocab.txt"))?;
    for stem in &vocab {
        writeln!(v, "{stem}")?;
    }
    v.flush()?;

    let mut sentences = create(&out.join("sentences.jsonl"))?;
    let mut occurrences = create(&out.join("occurrences.jsonl"))?;
    let mut tokens = 0;
    for doc in docs {
        for (sentence_index, sentence) in doc.sentences.iter().enumerate() {
            write_json_line(
                &mut sentences,
                &SentenceRecord {
                    doc_id: &doc.id,
                    sentence_index,
                    text: &sentence.text,
                },
            )?;
            for token in &sentence.tokens {
                write_json_line(
                    &mut occurrences,
                    &OccurrenceRecord {
                        doc_id: &doc.id,
                        sentence_index,
                        token_index: token.word_index,
                        stem: token.stem.as_str(),
                        surface: &token.surface,
                    },
                )?;
                tokens += 1;
            }
        }
    }
    sentences.flush()?;
    occurrences.flush()?;

    let pairs: Vec<String> = docs
        .par_iter()
        .map(|doc| -> Result<String> {
            let graph = build_cooccurrence(doc, w).with_context(|| doc.id.clone())?;
            let mut lines = String::new();
            for pair in graph.non_adjacent_pairs() {
                lines.push_str(&format!("{}\t{}\t{}\n", doc.id, pair.first, pair.second));
            }
            Ok(lines)
        })
        .collect::<Result<_>>()?;
    let mut c = create(&out.join("candidates.tsv"))?;
    let mut candidate_count = 0;
    for lines in &pairs {
        c.write_all(lines.as_bytes())?;
        candidate_count += lines.lines().count();
    }
    c.flush()?;

    println!(
        "{} stems, {tokens} occurrences, {candidate_count} candidate pairs written to {}",
        vocab.len(),
        out.display()
    );
    Ok(())
}

pub fn build_network(corpus: &CorpusArgs, embeddings: &EmbeddingArgs, w: usize, p: f64, out: &Path) -> Result<()> {
    let embedding = embeddings.load_single()?;
    let config = embedding.as_ref().map(|e| &e.config);
    check_graph_config(w, p, config)?;
    let loaded = corpus.load()?;
    create_dir(out)?;
    let dumps: Vec<(String, String)> = loaded
        .processed
        .documents
        .par_iter()
        .map(|doc| -> Result<(String, String)> {
            let (graph, _) = document_graph(doc, w, p, config)?;
            Ok((document_file_name(&doc.id, "graph"), graph.to_dump()))
        })
        .collect::<Result<_>>()?;
    for (name, dump) in &dumps {
        fs::write(out.join(name), dump).with_context(|| format!("cannot write {name}"))?;
    }
    println!("{} graphs written to {}", dumps.len(), out.display());
    Ok(())
}

pub fn rank(
    corpus: &CorpusArgs,
    embeddings: &EmbeddingArgs,
    w: usize,
    p: f64,
    measures: &[MeasureId],
    out: &Path,
) -> Result<()> {
    let embedding = embeddings.load_single()?;
    let config = embedding.as_ref().map(|e| &e.config);
    check_graph_config(w, p, config)?;
    let loaded = corpus.load()?;
    create_dir(out)?;
    let params = CentralityParams::default();
    let dumps: Vec<(String, String)> = loaded
        .processed
        .documents
        .par_iter()
        .map(|doc| -> Result<(String, String)> {
            let (graph, _) = document_graph(doc, w, p, config)?;
            let scores = compute_all(&graph, measures, &params).with_context(|| doc.id.clone())?;
            Ok((document_file_name(&doc.id, "scores"), score_dump(&scores)))
        })
        .collect::<Result<_>>()?;
    for (name, dump) in &dumps {
        fs::write(out.join(name), dump).with_context(|| format!("cannot write {name}"))?;
    }
    println!("{} score files written to {}", dumps.len(), out.display());
    Ok(())
}

fn read_scores(path: &Path) -> Result<BTreeMap<MeasureId, Vec<(Stem, f64)>>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out: BTreeMap<MeasureId, Vec<(Stem, f64)>> = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let bad = || anyhow!("{}:{}: expected `measure<TAB>stem<TAB>score`", path.display(), i + 1);
        let mut fields = line.split('\t');
        let (Some(m), Some(stem), Some(score), None) = (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(bad());
        };
        let measure: MeasureId = m.parse().map_err(|_| bad())?;
        let score: f64 = score.parse().map_err(|_| bad())?;
        out.entry(measure).or_default().push((Stem::new(stem), score));
    }
    Ok(out)
}

pub fn evaluate(corpus: &CorpusArgs, scores: &Path, out: Option<&Path>) -> Result<()> {
    let loaded = corpus.load()?;
    let docs = &loaded.processed.documents;
    if docs.is_empty() {
        bail!("corpus has no usable documents");
    }
    let mut per_doc: Vec<(String, MeasureId, f64)> = Vec::new();
    let mut totals: BTreeMap<MeasureId, f64> = BTreeMap::new();
    let mut measures: Option<BTreeSet<MeasureId>> = None;
    for doc in docs {
        let path = scores.join(document_file_name(&doc.id, "scores"));
        let table = read_scores(&path)?;
        let present: BTreeSet<MeasureId> = table.keys().copied().collect();
        match &measures {
            None => measures = Some(present),
            Some(m) if *m != present => bail!("{}: measures differ from the other score files", path.display()),
            Some(_) => {}
        }
        for (measure, mut ranked) in table {
            ranked.sort_by(rank_order);
            let extracted: Vec<Stem> = ranked.into_iter().take(doc.gold_stems.len()).map(|(s, _)| s).collect();
            let acc = accuracy(&extracted, &doc.gold_stems)?;
            *totals.entry(measure).or_insert(0.0) += acc;
            per_doc.push((doc.id.clone(), measure, acc));
        }
    }
    if let Some(path) = out {
        let mut w = create(path)?;
        writeln!(w, "document\tmeasure\taccuracy")?;
        for (id, measure, acc) in &per_doc {
            writeln!(w, "{id}\t{measure}\t{acc}")?;
        }
        w.flush()?;
    }
    let stdout = io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "measure\taccuracy\tdocuments")?;
    for (measure, total) in totals {
        writeln!(w, "{measure}\t{}\t{}", total / docs.len() as f64, docs.len())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RunManifest<'a> {
    version: &'static str,
    corpus: &'a CorpusFingerprint,
    documents: usize,
    excluded: Vec<&'a str>,
    embeddings: Vec<&'a EmbeddingFingerprint>,
    grid: &'a SweepGrid,
}

pub fn sweep(
    corpus: &CorpusArgs,
    embeddings: &EmbeddingArgs,
    windows: Vec<usize>,
    fractions: Option<Vec<f64>>,
    measures: Vec<MeasureId>,
    out: &Path,
) -> Result<()> {
    let sources = embeddings.load()?;
    let fractions = match fractions {
        Some(p) => p,
        None if sources.is_empty() => vec![0.0],
        None => (0..=100).map(|i| i as f64 / 100.0).collect(),
    };
    if sources.is_empty() && fractions.iter().any(|&p| p > 0.0) {
        bail!(Usage("fractions above 0 need --embeddings".into()));
    }
    let grid = SweepGrid {
        windows,
        fractions,
        embeddings: if sources.is_empty() {
            vec![NO_EMBEDDING.to_string()]
        } else {
            sources.iter().map(|s| s.config.name.clone()).collect()
        },
        measures,
    };
    grid.validate().map_err(|e| Usage(e.to_string()))?;

    let loaded = corpus.load()?;
    let docs = &loaded.processed.documents;
    if docs.is_empty() {
        bail!("corpus has no usable documents");
    }
    create_dir(out)?;
    let fingerprints: Vec<EmbeddingFingerprint> = sources.iter().map(|s| s.fingerprint.clone()).collect();
    let configs: Vec<EmbeddingConfig> = sources.into_iter().map(|s| s.config).collect();
    let cache = CellCache::new(cache_dir(out), loaded.fingerprint.clone(), &fingerprints);
    let run = run_cached(docs, &grid, &configs, &SweepOptions::default(), &cache)?;
    let outcome = run.outcome;

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        corpus: &loaded.fingerprint,
        documents: docs.len(),
        excluded: loaded.processed.unusable.iter().map(|u| u.document_id()).collect(),
        embeddings: fingerprints.iter().collect(),
        grid: &grid,
    };
    let mut m = create(&out.join("manifest.json"))?;
    serde_json::to_writer_pretty(&mut m, &manifest)?;
    m.write_all(b"\n")?;
    m.flush()?;

    let mut results = create(&out.join("results.jsonl"))?;
    write_results(&mut results, &outcome.records)?;
    results.flush()?;
    let table = render_table(&outcome.records);
    fs::write(out.join("table.txt"), &table).context("cannot write table.txt")?;
    print!("{table}");
    eprintln!(
        "{} cells: {} from cache, {} computed, {} failed",
        outcome.records.len() + outcome.failures.len(),
        run.hits,
        run.computed,
        outcome.failures.len()
    );

    if !outcome.failures.is_empty() {
        eprintln!("failed cells:");
        for (key, reason) in &outcome.failures {
            eprintln!(
                "  {} w={} P={} {}: {reason}",
                key.measure, key.window, key.fraction, key.embedding
            );
        }
        bail!(PartialFailure(outcome.failures.len()));
    }
    Ok(())
}

pub fn report(results: &Path, out: Option<&Path>) -> Result<()> {
    let file = File::open(results).with_context(|| format!("cannot open {}", results.display()))?;
    let mut records: Vec<EvalRecord> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record =
            serde_json::from_str(&line).with_context(|| format!("{}:{}: malformed record", results.display(), i + 1))?;
        records.push(record);
    }
    let table = render_table(&records);
    match out {
        Some(path) => fs::write(path, table).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{table}"),
    }
    Ok(())
}
