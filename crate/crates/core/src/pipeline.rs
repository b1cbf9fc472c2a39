//! Two-stage search-and-learn training.
//!
//! 1. Fit the generator on the human parallel pairs.
//! 2. Decode every unlabeled table and repair the output with
//!    [`project_to_feasible`]; the repaired sentences form a pseudo-parallel
//!    corpus.
//! 3. Refit on human pairs followed by pseudo pairs.
//!
//! For a count model, continuing training and refitting on the union give the
//! same model, so stage 2 simply refits.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{to_pairs, Provenance, Sample, UnlabeledTable};
use crate::error::{Error, Result};
use crate::lm::{decode, DelexModel, LocalScorer, ScorerHandle, Smoothing};
use crate::search::{missing_filtered, project_to_feasible, InsertionTrace, SlotFilter, SlotStats};
use crate::tabular::{Sentence, Slot, Table};
use crate::templates::RuleSet;

/// Every tunable of a run. All stages except recombination are
/// deterministic; recombination draws from `seed`.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub order: usize,
    pub smoothing: Smoothing,
    pub beam_width: usize,
    pub max_len: usize,
    pub tau_table: f64,
    pub tau_ref: f64,
    pub seed: u64,
    /// `tcp://host:port`, `cmd:<program>`, or `None` for the built-in model.
    pub scorer: Option<String>,
    pub length_normalize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            order: 3,
            smoothing: Smoothing::default_for(3),
            beam_width: 1,
            max_len: 40,
            tau_table: 0.0,
            tau_ref: 0.0,
            seed: 0,
            scorer: None,
            length_normalize: false,
        }
    }
}

impl PipelineConfig {
    /// Parses flat `key=value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut lambdas: Option<Vec<f64>> = None;
        let mut epsilon = Smoothing::DEFAULT_EPSILON;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::Config(format!("line {}: {m}", i + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |what: &str| bad(&format!("invalid {what} '{v}'"));
            match k {
                "order" => cfg.order = v.parse().map_err(|_| num(k))?,
                "lambdas" => {
                    lambdas = Some(
                        v.split(',')
                            .map(|x| x.trim().parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| num(k))?,
                    )
                }
                "epsilon" => epsilon = v.parse().map_err(|_| num(k))?,
                "beam_width" => cfg.beam_width = v.parse().map_err(|_| num(k))?,
                "max_len" => cfg.max_len = v.parse().map_err(|_| num(k))?,
                "tau_table" => cfg.tau_table = v.parse().map_err(|_| num(k))?,
                "tau_ref" => cfg.tau_ref = v.parse().map_err(|_| num(k))?,
                "seed" => cfg.seed = v.parse().map_err(|_| num(k))?,
                "scorer" => cfg.scorer = (v != "builtin").then(|| v.to_string()),
                "length_normalize" => cfg.length_normalize = v.parse().map_err(|_| num(k))?,
                other => return Err(bad(&format!("unknown key '{other}'"))),
            }
        }
        cfg.smoothing = match lambdas {
            Some(l) => Smoothing { lambdas: l, epsilon },
            None => Smoothing {
                epsilon,
                ..Smoothing::default_for(cfg.order)
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        PipelineConfig::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 2 {
            return Err(Error::Config(format!("order must be >= 2, got {}", self.order)));
        }
        if self.smoothing.lambdas.len() != self.order {
            return Err(Error::Config(format!(
                "{} lambdas given for order {}",
                self.smoothing.lambdas.len(),
                self.order
            )));
        }
        if self.beam_width == 0 || self.max_len == 0 {
            return Err(Error::Config("beam_width and max_len must be >= 1".into()));
        }
        for t in [self.tau_table, self.tau_ref] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Config(format!("threshold {t} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Whether search should restrict itself to frequently referenced slots.
    pub fn uses_slot_selection(&self) -> bool {
        self.tau_table > 0.0 || self.tau_ref > 0.0
    }
}

fn ensure_nonempty<T>(xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        Err(Error::EmptyCorpus)
    } else {
        Ok(())
    }
}

/// First-stage fit on the human pairs.
pub fn stage1(corpus_p: &[Sample], config: &PipelineConfig) -> Result<DelexModel> {
    ensure_nonempty(corpus_p)?;
    DelexModel::fit(&to_pairs(corpus_p), config.order, config.smoothing.clone())
}

/// One repaired pseudo pair plus the insertions that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoPair {
    pub sample: Sample,
    pub raw: Sentence,
    pub trace: InsertionTrace,
}

fn filter_for(table: &Table, stats: Option<&SlotStats>, config: &PipelineConfig) -> Result<SlotFilter> {
    match stats {
        Some(st) if config.uses_slot_selection() => Ok(SlotFilter::from_slots(
            &st.select(table, config.tau_table, config.tau_ref)?,
        )),
        _ => Ok(SlotFilter::All),
    }
}

/// Generates for every unlabeled table and repairs it by insertion search.
/// `stats` (from the human corpus) restricts the search to frequently
/// referenced slots when the config sets thresholds. Output order follows
/// `tables_u`.
pub fn build_pseudo_corpus(
    scorer: &ScorerHandle,
    tables_u: &[Table],
    rules: &RuleSet,
    config: &PipelineConfig,
    stats: Option<&SlotStats>,
) -> Result<Vec<PseudoPair>> {
    ensure_nonempty(tables_u)?;
    tables_u
        .par_iter()
        .map(|table| {
            let raw = scorer.generate(table, config.max_len, config.beam_width)?;
            let filter = filter_for(table, stats, config)?;
            let (repaired, trace) = project_to_feasible(scorer, table, &raw, rules, &filter)?;
            if let Some(slot) = missing_filtered(table, &repaired, rules, &filter).first() {
                return Err(Error::Infeasible(slot.name().to_string()));
            }
            Ok(PseudoPair {
                sample: Sample {
                    table: table.clone(),
                    sentence: repaired,
                    provenance: Provenance::PseudoSearch,
                },
                raw,
                trace,
            })
        })
        .collect()
}

/// Second-stage fit on human pairs followed by pseudo pairs. With no pseudo
/// pairs this equals [`stage1`].
pub fn stage2(corpus_p: &[Sample], pseudo: &[Sample], config: &PipelineConfig) -> Result<DelexModel> {
    ensure_nonempty(corpus_p)?;
    let mut pairs = to_pairs(corpus_p);
    pairs.extend(to_pairs(pseudo));
    DelexModel::fit(&pairs, config.order, config.smoothing.clone())
}

/// Self-training baseline: raw decodes, without search, become the pseudo
/// references. Returns the retrained model and the pseudo samples.
pub fn self_train(
    model: &DelexModel,
    corpus_p: &[Sample],
    tables_u: &[Table],
    config: &PipelineConfig,
) -> Result<(DelexModel, Vec<Sample>)> {
    ensure_nonempty(tables_u)?;
    let pseudo: Vec<Sample> = tables_u
        .par_iter()
        .map(|t| {
            Ok(Sample {
                table: t.clone(),
                sentence: decode(model, t, config.max_len, config.beam_width)?,
                provenance: Provenance::PseudoSelfTrain,
            })
        })
        .collect::<Result<_>>()?;
    let retrained = stage2(corpus_p, &pseudo, config)?;
    Ok((retrained, pseudo))
}

const RECOMBINE_RETRIES: usize = 16;

/// Synthesizes `n` tables: keep the slot names of a randomly chosen source
/// table and draw each value uniformly from the values seen for that name.
/// Exact copies of a source table are redrawn a bounded number of times.
pub fn recombine(tables_p: &[Table], n: usize, seed: u64) -> Result<Vec<UnlabeledTable>> {
    ensure_nonempty(tables_p)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let mut inventory: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for t in tables_p {
        for s in t.slots() {
            inventory.entry(s.name()).or_default().insert(s.value());
        }
    }
    let inventory: BTreeMap<&str, Vec<&str>> =
        inventory.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
    let sources: BTreeSet<Vec<(&str, &str)>> = tables_p
        .iter()
        .map(|t| t.slots().iter().map(|s| (s.name(), s.value())).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut attempt = 0;
        let table = loop {
            let src = tables_p.choose(&mut rng).expect("non-empty sources");
            let slots: Vec<(&str, &str)> = src
                .slots()
                .iter()
                .map(|s| {
                    let vals = &inventory[s.name()];
                    (s.name(), *vals.choose(&mut rng).expect("value seen"))
                })
                .collect();
            attempt += 1;
            if !sources.contains(&slots) || attempt > RECOMBINE_RETRIES {
                let slots = slots
                    .into_iter()
                    .map(|(n, v)| Slot::new(n, v))
                    .collect::<Result<Vec<_>>>()?;
                break Table::new(slots)?.with_sample_id(format!("r{}", i + 1));
            }
        };
        out.push(UnlabeledTable {
            table,
            provenance: Provenance::Recombined,
        });
    }
    Ok(out)
}

/// Deployed inference: decode only, no search.
pub fn infer(model: &DelexModel, table: &Table, config: &PipelineConfig) -> Result<Sentence> {
    decode(model, table, config.max_len, config.beam_width)
}

pub fn infer_all(model: &DelexModel, tables: &[Table], config: &PipelineConfig) -> Result<Vec<Sentence>> {
    tables.par_iter().map(|t| infer(model, t, config)).collect()
}

/// Everything a full run produces.
pub struct SearchAndLearn {
    pub stage1: DelexModel,
    pub pseudo: Vec<PseudoPair>,
    pub stage2: DelexModel,
}

impl SearchAndLearn {
    pub fn pseudo_samples(&self) -> Vec<Sample> {
        self.pseudo.iter().map(|p| p.sample.clone()).collect()
    }
}

pub fn local_handle(model: Arc<DelexModel>, config: &PipelineConfig) -> ScorerHandle {
    let mut scorer = LocalScorer::new(model);
    scorer.length_normalize = config.length_normalize;
    ScorerHandle::Local(scorer)
}

/// Stage 1, search with the stage-1 model as generator and scorer, stage 2.
pub fn search_and_learn(
    corpus_p: &[Sample],
    tables_u: &[Table],
    rules: &RuleSet,
    config: &PipelineConfig,
) -> Result<SearchAndLearn> {
    let stage1_model = stage1(corpus_p, config)?;
    let stats = SlotStats::from_pairs(&to_pairs(corpus_p), Some(rules))?;
    let handle = local_handle(Arc::new(stage1_model.clone()), config);
    let pseudo = build_pseudo_corpus(&handle, tables_u, rules, config, Some(&stats))?;
    let samples: Vec<Sample> = pseudo.iter().map(|p| p.sample.clone()).collect();
    let stage2_model = stage2(corpus_p, &samples, config)?;
    Ok(SearchAndLearn {
        stage1: stage1_model,
        pseudo,
        stage2: stage2_model,
    })
}
