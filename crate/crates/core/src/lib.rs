//! # kwgraph
//!
//! Keyword extraction from word co-occurrence networks.
//!
//! Documents are pre-processed into stemmed sentences, turned into
//! co-occurrence networks with window length `w`, optionally enriched with
//! `round(P · E_t)` "virtual" edges between the most embedding-similar
//! non-adjacent words, and ranked by a centrality measure. The top `N` words,
//! with `N` the number of gold stems, are the extracted keywords.
//!
//! The pipeline modules mirror those stages:
//!
//! - [`corpus`]: corpus files, sentence segmentation, tokenization, stemming
//! - [`embedding`]: word vectors and similarity, including the two
//!   contextual-vector aggregation schemes
//! - [`network`]: co-occurrence graphs and virtual-edge enrichment
//! - [`centrality`]: degree, strength, PageRank, eigenvector, betweenness,
//!   closeness and accessibility
//! - [`evaluation`]: keyword selection, accuracy, gains and parameter sweeps

pub mod centrality;
pub mod corpus;
pub mod embedding;
pub mod evaluation;
pub mod network;

pub use centrality::{CentralityError, CentralityParams, CentralityVector, MeasureId};
pub use corpus::{
    load_corpus, preprocess, preprocess_corpus, CorpusError, CorpusFormat, CorpusStats, ProcessedDocument,
    RawDocument, Stem, Stemmer, StemmerId, StopwordSet,
};
pub use embedding::{
    ContextualCorpus, ContextualEmbeddingSet, EmbeddingError, EmbeddingSource, SimilarityIndex, SimilarityMode,
    StaticEmbeddingTable,
};
pub use evaluation::{EvalError, EvalRecord, SweepGrid};
pub use network::{GraphConfig, NetworkError, WordGraph};
