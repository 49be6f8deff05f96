//! Lexical complexity estimation from document-level readability.
//!
//! Documents from corpora of known difficulty are scored with LIX (or
//! Coleman-Liau); every content-word lemma then gets the median score of the
//! documents it occurs in, discounted by how widespread it is. The scores
//! drive substitution suggestions ranked through word-vector similarity.

pub mod corpus;
pub mod embeddings;
pub mod lexindex;
pub mod metrics;
pub mod pipeline;
pub mod stats;
pub mod syllables;
pub mod synth;

pub use corpus::{Document, DocumentStats, Pos, Token};
pub use embeddings::{suggest, EmbeddingTable, SuggestOptions, Suggestion};
pub use lexindex::{ContentPos, LemmaEntry, LexIndex};
pub use metrics::{LixBand, Metric};
