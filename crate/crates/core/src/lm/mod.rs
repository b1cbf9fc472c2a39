//! Conditional sentence scoring P(y | T) and generation.
//!
//! [`DelexModel`] is the built-in scorer; [`RemoteScorer`] speaks the
//! line-delimited JSON protocol in [`remote`] so an external neural model can
//! take its place. Both sit behind [`ScorerHandle`].

mod decode;
mod ngram;
pub mod remote;

use std::sync::Arc;

use rayon::prelude::*;

pub use decode::{beam_search, decode};
pub use ngram::{corpus_fingerprint, delex_symbols, DelexModel, Smoothing, END, START, UNK};
pub use remote::{Endpoint, ModelServer, RemoteConfig, RemoteScorer, Request, Response};

use crate::error::Result;
use crate::tabular::{Sentence, Table};

/// Scores candidate sentences for a table; higher is better.
pub trait Scorer: Sync {
    /// One natural-log score per candidate, in candidate order.
    fn score(&self, table: &Table, candidates: &[Sentence]) -> Result<Vec<f64>>;
}

/// The built-in model used as a scorer.
#[derive(Clone, Debug)]
pub struct LocalScorer {
    model: Arc<DelexModel>,
    /// Divide by the number of predicted tokens (words plus end marker).
    pub length_normalize: bool,
}

impl LocalScorer {
    pub fn new(model: Arc<DelexModel>) -> Self {
        LocalScorer {
            model,
            length_normalize: false,
        }
    }

    pub fn model(&self) -> &DelexModel {
        &self.model
    }

    pub fn log_prob(&self, table: &Table, sentence: &Sentence) -> f64 {
        let lp = self.model.log_prob(table, sentence);
        if self.length_normalize {
            lp / (sentence.len() + 1) as f64
        } else {
            lp
        }
    }
}

impl Scorer for LocalScorer {
    fn score(&self, table: &Table, candidates: &[Sentence]) -> Result<Vec<f64>> {
        Ok(candidates
            .par_iter()
            .map(|c| self.log_prob(table, c))
            .collect())
    }
}

impl Scorer for RemoteScorer {
    fn score(&self, table: &Table, candidates: &[Sentence]) -> Result<Vec<f64>> {
        RemoteScorer::score(self, table, candidates)
    }
}

pub enum ScorerHandle {
    Local(LocalScorer),
    Remote(RemoteScorer),
}

impl ScorerHandle {
    pub fn local(model: Arc<DelexModel>) -> Self {
        ScorerHandle::Local(LocalScorer::new(model))
    }

    /// Decodes with the local model, or asks the remote scorer to generate.
    pub fn generate(&self, table: &Table, max_len: usize, beam_width: usize) -> Result<Sentence> {
        match self {
            ScorerHandle::Local(l) => decode(l.model(), table, max_len, beam_width),
            ScorerHandle::Remote(r) => r.generate(table, max_len),
        }
    }
}

impl Scorer for ScorerHandle {
    fn score(&self, table: &Table, candidates: &[Sentence]) -> Result<Vec<f64>> {
        match self {
            ScorerHandle::Local(l) => l.score(table, candidates),
            ScorerHandle::Remote(r) => Scorer::score(r, table, candidates),
        }
    }
}

/// Total log probability of one sentence under `scorer`.
pub fn log_prob(scorer: &dyn Scorer, table: &Table, sentence: &Sentence) -> Result<f64> {
    Ok(scorer.score(table, std::slice::from_ref(sentence))?[0])
}

pub fn next_token_dist(
    model: &DelexModel,
    context: &[String],
    table: &Table,
) -> std::collections::BTreeMap<String, f64> {
    model.next_token_dist(context, table)
}

pub fn fit(pairs: &[(Table, Sentence)], order: usize, smoothing: Smoothing) -> Result<DelexModel> {
    DelexModel::fit(pairs, order, smoothing)
}
