use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tabular::{delexicalize, placeholder, DelexToken, Sentence, Table};

pub const START: &str = "<s>";
pub const END: &str = "</s>";
pub const UNK: &str = "<unk>";

const FORMAT: &str = "searchlearn-delex-ngram";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    /// Interpolation weights, lowest order first. Non-negative, sum to 1.
    pub lambdas: Vec<f64>,
    /// Additive floor mixed into every allowed token.
    pub epsilon: f64,
}

impl Smoothing {
    pub const DEFAULT_EPSILON: f64 = 1e-6;

    /// (0.1, 0.3, 0.6) for trigrams; weights proportional to order otherwise.
    pub fn default_for(order: usize) -> Smoothing {
        let lambdas = if order == 3 {
            vec![0.1, 0.3, 0.6]
        } else {
            let total = (order * (order + 1) / 2) as f64;
            (1..=order).map(|k| k as f64 / total).collect()
        };
        Smoothing {
            lambdas,
            epsilon: Self::DEFAULT_EPSILON,
        }
    }

    fn validate(&self, order: usize) -> Result<()> {
        if self.lambdas.len() != order {
            return Err(Error::InvalidArgument(format!(
                "{} interpolation weights for order {order}",
                self.lambdas.len()
            )));
        }
        if self.lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidArgument("negative interpolation weight".into()));
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "interpolation weights sum to {sum}"
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Serialized form. Every map is ordered so the JSON is byte-stable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    order: usize,
    smoothing: Smoothing,
    fingerprint: String,
    vocab: Vec<String>,
    /// placeholder symbol → slot name
    placeholders: BTreeMap<String, String>,
    /// One map per order (unigram first): context → next symbol → count.
    counts: Vec<BTreeMap<String, BTreeMap<String, u64>>>,
}

/// Delexicalized interpolated n-gram model of P(y | T).
///
/// Placeholders stand in for slot values, so the model conditions on the
/// table through which placeholders it may emit: placeholders of slots
/// absent from the table get zero probability and their mass is spread over
/// the remaining tokens.
#[derive(Clone, Debug)]
pub struct DelexModel {
    file: ModelFile,
    totals: Vec<HashMap<String, u64>>,
    vocab_set: BTreeSet<String>,
}

impl PartialEq for DelexModel {
    fn eq(&self, other: &Self) -> bool {
        self.file == other.file
    }
}

fn context_key(ctx: &[String]) -> String {
    ctx.join(" ")
}

/// Delexicalized symbols of a sentence with respect to its table.
pub fn delex_symbols(table: &Table, sentence: &Sentence) -> Vec<String> {
    delexicalize(sentence, table).symbols()
}

pub fn corpus_fingerprint(pairs: &[(Table, Sentence)], order: usize, smoothing: &Smoothing) -> String {
    let mut h = Sha256::new();
    h.update(format!("order={order};lambdas={:?};eps={:?}\n", smoothing.lambdas, smoothing.epsilon));
    for (t, s) in pairs {
        h.update(t.linearize().as_bytes());
        h.update(b"\t");
        h.update(s.detokenize().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

impl DelexModel {
    pub fn fit(pairs: &[(Table, Sentence)], order: usize, smoothing: Smoothing) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!("order must be >= 2, got {order}")));
        }
        smoothing.validate(order)?;
        if pairs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut counts: Vec<BTreeMap<String, BTreeMap<String, u64>>> = vec![BTreeMap::new(); order];
        let mut vocab: BTreeSet<String> = [END.to_string(), UNK.to_string()].into();
        let mut placeholders = BTreeMap::new();
        for (table, sentence) in pairs {
            let d = delexicalize(sentence, table);
            for tok in d.tokens() {
                if let DelexToken::Placeholder { slot, .. } = tok {
                    placeholders.insert(placeholder(slot), slot.clone());
                }
            }
            let mut seq: Vec<String> = vec![START.to_string(); order - 1];
            seq.extend(d.symbols());
            seq.push(END.to_string());
            for i in order - 1..seq.len() {
                let next = &seq[i];
                vocab.insert(next.clone());
                for k in 1..=order {
                    let ctx = context_key(&seq[i + 1 - k..i]);
                    *counts[k - 1]
                        .entry(ctx)
                        .or_default()
                        .entry(next.clone())
                        .or_default() += 1;
                }
            }
        }
        let file = ModelFile {
            format: FORMAT.to_string(),
            version: VERSION,
            order,
            fingerprint: corpus_fingerprint(pairs, order, &smoothing),
            smoothing,
            vocab: vocab.into_iter().collect(),
            placeholders,
            counts,
        };
        Ok(DelexModel::from_file(file))
    }

    fn from_file(file: ModelFile) -> Self {
        let totals = file
            .counts
            .iter()
            .map(|m| m.iter().map(|(c, nexts)| (c.clone(), nexts.values().sum())).collect())
            .collect();
        let vocab_set = file.vocab.iter().cloned().collect();
        DelexModel {
            file,
            totals,
            vocab_set,
        }
    }

    pub fn order(&self) -> usize {
        self.file.order
    }

    pub fn smoothing(&self) -> &Smoothing {
        &self.file.smoothing
    }

    pub fn fingerprint(&self) -> &str {
        &self.file.fingerprint
    }

    pub fn vocab(&self) -> &[String] {
        &self.file.vocab
    }

    /// Slot name for a placeholder symbol known to the model.
    pub fn slot_of(&self, symbol: &str) -> Option<&str> {
        self.file.placeholders.get(symbol).map(String::as_str)
    }

    fn allowed(&self, symbol: &str, table: &Table) -> bool {
        match self.file.placeholders.get(symbol) {
            Some(slot) => table.get(slot).is_some(),
            None => true,
        }
    }

    /// Maps arbitrary tokens onto model symbols: out-of-vocabulary tokens,
    /// the start marker, and placeholders barred by `table` become `<unk>`.
    fn canonical<'a>(&'a self, sym: &'a str, table: &Table) -> &'a str {
        if sym != START && self.vocab_set.contains(sym) && self.allowed(sym, table) {
            sym
        } else {
            UNK
        }
    }

    /// Padded history of length order − 1.
    fn history(&self, context: &[String]) -> Vec<String> {
        let n = self.file.order - 1;
        let mut h: Vec<String> = Vec::with_capacity(n);
        if context.len() < n {
            h.extend(std::iter::repeat_n(START.to_string(), n - context.len()));
            h.extend(context.iter().cloned());
        } else {
            h.extend(context[context.len() - n..].iter().cloned());
        }
        h
    }

    /// Effective interpolation weights for a history: orders whose context
    /// was never observed hand their weight to the observed ones.
    fn weights(&self, hist: &[String]) -> Vec<(usize, String, f64)> {
        let order = self.file.order;
        let mut out = Vec::with_capacity(order);
        for k in 1..=order {
            let ctx = context_key(&hist[hist.len() + 1 - k..]);
            if self.totals[k - 1].get(&ctx).copied().unwrap_or(0) > 0 {
                out.push((k, ctx, self.file.smoothing.lambdas[k - 1]));
            }
        }
        let mass: f64 = out.iter().map(|w| w.2).sum();
        if mass > 0.0 {
            out.iter_mut().for_each(|w| w.2 /= mass);
        } else {
            // every observed order has zero weight: fall back to uniform over them
            let n = out.len() as f64;
            out.iter_mut().for_each(|w| w.2 = 1.0 / n);
        }
        out
    }

    fn ml(&self, k: usize, ctx: &str, sym: &str) -> f64 {
        let total = self.totals[k - 1][ctx] as f64;
        let c = self.file.counts[k - 1][ctx].get(sym).copied().unwrap_or(0) as f64;
        c / total
    }

    fn scorer_for<'a>(&'a self, hist: &[String], table: &'a Table) -> StepDist<'a> {
        let weights = self.weights(hist);
        // mass the interpolated estimate puts on barred placeholders
        let mut barred = 0.0;
        for (k, ctx, w) in &weights {
            for (sym, c) in &self.file.counts[k - 1][ctx] {
                if !self.allowed(sym, table) {
                    barred += w * *c as f64 / self.totals[k - 1][ctx] as f64;
                }
            }
        }
        let n_allowed = self
            .file
            .vocab
            .iter()
            .filter(|s| self.allowed(s, table))
            .count();
        let z = (1.0 - barred).max(0.0) + self.file.smoothing.epsilon * n_allowed as f64;
        StepDist {
            model: self,
            table,
            weights,
            z,
        }
    }

    /// Step distribution after a history of model symbols.
    pub(crate) fn step<'a>(&'a self, hist: &[String], table: &'a Table) -> StepDist<'a> {
        self.scorer_for(&self.history(hist), table)
    }

    /// Distribution over the vocabulary after `context` (most recent last).
    /// Placeholders of slots missing from `table` get probability 0.
    pub fn next_token_dist(&self, context: &[String], table: &Table) -> BTreeMap<String, f64> {
        let ctx: Vec<String> = context.iter().map(|s| self.canonical(s, table).to_string()).collect();
        let hist = self.history(&ctx);
        let step = self.scorer_for(&hist, table);
        self.file
            .vocab
            .iter()
            .map(|s| (s.clone(), step.prob(s)))
            .collect()
    }

    /// Natural-log probability of each symbol followed by the end marker.
    pub fn token_log_probs(&self, table: &Table, symbols: &[String]) -> Vec<f64> {
        let mut seq: Vec<String> = vec![START.to_string(); self.file.order - 1];
        seq.extend(symbols.iter().map(|s| self.canonical(s, table).to_string()));
        seq.push(END.to_string());
        let n = self.file.order - 1;
        (n..seq.len())
            .map(|i| {
                let step = self.scorer_for(&seq[i - n..i], table);
                step.prob(&seq[i]).ln()
            })
            .collect()
    }

    /// log P(sentence | table), including the end marker.
    pub fn log_prob(&self, table: &Table, sentence: &Sentence) -> f64 {
        self.token_log_probs(table, &delex_symbols(table, sentence))
            .iter()
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(Error::ModelFormat(format!("unknown format '{}'", file.format)));
        }
        if file.version != VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {}", file.version)));
        }
        if file.order < 2 || file.counts.len() != file.order {
            return Err(Error::ModelFormat("inconsistent order".into()));
        }
        file.smoothing
            .validate(file.order)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        Ok(DelexModel::from_file(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        DelexModel::from_json(&fs::read_to_string(path)?)
    }
}

pub(crate) struct StepDist<'a> {
    model: &'a DelexModel,
    table: &'a Table,
    weights: Vec<(usize, String, f64)>,
    z: f64,
}

impl StepDist<'_> {
    pub(crate) fn prob(&self, sym: &str) -> f64 {
        if !self.model.allowed(sym, self.table) || !self.model.vocab_set.contains(sym) {
            return 0.0;
        }
        let q: f64 = self
            .weights
            .iter()
            .map(|(k, ctx, w)| w * self.model.ml(*k, ctx, sym))
            .sum();
        (q + self.model.file.smoothing.epsilon) / self.z
    }
}
