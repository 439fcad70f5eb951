//! `kwgraph`: keyword extraction from word co-occurrence networks.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 sweep finished with
//! failed cells.

mod commands;
mod inputs;
mod sweep;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kwgraph::MeasureId;

use inputs::{CorpusArgs, EmbeddingArgs};

/// Bad invocation: flags that parse but do not make sense together.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Sweep completed but some cells failed.
#[derive(Debug)]
pub struct PartialFailure(pub usize);

impl fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} sweep cells failed", self.0)
    }
}

impl std::error::Error for PartialFailure {}

#[derive(Debug, Parser)]
#[command(name = "kwgraph", version, about = "Keyword extraction from word co-occurrence networks")]
struct Cli {
    /// Worker threads (default: one per core)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pre-process the corpus and print its statistics
    Preprocess {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Write the processed documents here as JSON lines
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the stems, occurrences and candidate pairs an embedding exporter needs
    ExportCandidates {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Window used to decide which pairs are non-adjacent
        #[arg(long, default_value_t = 1)]
        w: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one graph dump per document
    BuildNetwork {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[arg(long, default_value_t = 1)]
        w: usize,
        /// Virtual-edge fraction in [0, 1]
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one centrality score dump per document
    Rank {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        #[arg(long, default_value_t = 1)]
        w: usize,
        /// Virtual-edge fraction in [0, 1]
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        /// Comma-separated measure names, or `all`
        #[arg(long, default_value = "all", value_parser = parse_measures)]
        measures: MeasureList,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the dumps written by `rank` against the gold keywords
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Directory written by `rank`
        #[arg(long)]
        scores: PathBuf,
        /// Write per-document accuracies here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a grid of windows, fractions, embeddings and measures
    Sweep {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        embeddings: EmbeddingArgs,
        /// Comma-separated windows
        #[arg(long, default_value = "1,2,3", value_parser = parse_windows)]
        w: WindowList,
        /// Fractions as a comma list or START:STOP:STEP
        /// (default: 0:1:0.01 with embeddings, 0 without)
        #[arg(long, value_parser = parse_fractions)]
        p: Option<FractionList>,
        /// Comma-separated measure names, or `all`
        #[arg(long, default_value = "all", value_parser = parse_measures)]
        measures: MeasureList,
        /// Output directory (results, table, cache)
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the results table from a results file
    Report {
        /// Results file written by `sweep`
        #[arg(long)]
        results: PathBuf,
        /// Write the table here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
pub struct MeasureList(pub Vec<MeasureId>);

#[derive(Debug, Clone)]
pub struct WindowList(pub Vec<usize>);

#[derive(Debug, Clone)]
pub struct FractionList(pub Vec<f64>);

fn parse_measures(s: &str) -> Result<MeasureList, String> {
    if s == "all" {
        return Ok(MeasureList(MeasureId::ALL.to_vec()));
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let m: MeasureId = part.trim().parse().map_err(|e| format!("{e}"))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(MeasureList(out))
}

fn parse_windows(s: &str) -> Result<WindowList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let w: usize = part.trim().parse().map_err(|_| format!("`{part}` is not a window length"))?;
        if !out.contains(&w) {
            out.push(w);
        }
    }
    Ok(WindowList(out))
}

fn parse_number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// `a,b,c` or inclusive `start:stop:step`. Range points are rounded to nine
/// decimals so `0:1:0.01` yields exactly `0.07` rather than `0.07000000000000001`.
fn parse_fractions(s: &str) -> Result<FractionList, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let mut values = match parts.as_slice() {
        [list] => list.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?,
        [start, stop, step] => {
            let (start, stop, step) = (parse_number(start)?, parse_number(stop)?, parse_number(step)?);
            if step <= 0.0 || stop < start {
                return Err(format!("`{s}` is not an increasing range"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect()
        }
        _ => return Err(format!("`{s}` is neither a list nor START:STOP:STEP")),
    };
    let mut seen = Vec::new();
    values.retain(|v: &f64| {
        let fresh = !seen.contains(&v.to_bits());
        seen.push(v.to_bits());
        fresh
    });
    Ok(FractionList(values))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            anyhow::bail!(Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Preprocess { corpus, out } => commands::preprocess(&corpus, out.as_deref()),
        Command::ExportCandidates { corpus, w, out } => commands::export_candidates(&corpus, w, &out),
        Command::BuildNetwork {
            corpus,
            embeddings,
            w,
            p,
            out,
        } => commands::build_network(&corpus, &embeddings, w, p, &out),
        Command::Rank {
            corpus,
            embeddings,
            w,
            p,
            measures,
            out,
        } => commands::rank(&corpus, &embeddings, w, p, &measures.0, &out),
        Command::Evaluate { corpus, scores, out } => commands::evaluate(&corpus, &scores, out.as_deref()),
        Command::Sweep {
            corpus,
            embeddings,
            w,
            p,
            measures,
            out,
        } => commands::sweep(&corpus, &embeddings, w.0, p.map(|p| p.0), measures.0, &out),
        Command::Report { results, out } => commands::report(&results, out.as_deref()),
    }
}

/// The error chain joined by `: `, skipping causes whose text the previous
/// message already ends with.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.ends_with(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(partial) = e.downcast_ref::<PartialFailure>() {
                eprintln!("error: {partial}");
                return ExitCode::from(3);
            }
            eprintln!("error: {}", describe(&e));
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fraction_ranges_land_on_decimal_points() {
        let p = parse_fractions("0:1:0.01").unwrap().0;
        assert_eq!(p.len(), 101);
        assert_eq!(p[7], 0.07);
        assert_eq!(p[100], 1.0);
        assert_eq!(parse_fractions("0:0.3:0.1").unwrap().0, vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_fractions("0,0.05,0").unwrap().0, vec![0.0, 0.05]);
        assert!(parse_fractions("1:0:0.1").is_err());
        assert!(parse_fractions("0:1").is_err());
    }

    #[test]
    fn measure_lists() {
        assert_eq!(parse_measures("all").unwrap().0.len(), 12);
        assert_eq!(parse_measures("k,pi_w").unwrap().0, vec![MeasureId::Degree, MeasureId::PageRankWeighted]);
        assert!(parse_measures("k,zz").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
