//! Search-and-learn for few-shot data-to-text generation.
//!
//! A small conditional generator is trained on a handful of table and text
//! pairs. Its outputs on unlabeled tables often leave slots unmentioned, so a
//! greedy search inserts a templated phrase for each missing slot at the
//! position the scorer likes best. The repaired outputs become a
//! pseudo-parallel corpus, and the generator is retrained on human plus
//! pseudo pairs. At inference time only the retrained generator runs.
//!
//! Module map:
//!
//! - [`tabular`]: tables, MR parsing, tokenization, delexicalization
//! - [`templates`]: phrase rules for missing slots
//! - [`matching`]: hard and soft slot matching, coverage, SER
//! - [`lm`]: the n-gram scorer/decoder and the remote scorer protocol
//! - [`search`]: insertion search that makes outputs cover their tables
//! - [`corpus`]: corpus files and sample provenance
//! - [`pipeline`]: two-stage training, self-training, recombination
//! - [`eval`]: evaluation reports
//! - [`cli`]: the command-line front end

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod lm;
pub mod matching;
pub mod pipeline;
pub mod search;
pub mod tabular;
pub mod templates;

pub use error::{Error, Result};
