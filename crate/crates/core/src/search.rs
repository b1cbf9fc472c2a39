//! Greedy insertion search.
//!
//! Starting from a decoded sentence that leaves some slots unmentioned, each
//! missing slot (in table order) is rendered through the rule set and
//! inserted at the token boundary the scorer rates highest. Every boundary
//! of the current sentence is a candidate, except boundaries that would split
//! a phrase inserted earlier or a slot mention that is already satisfied.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::Scorer;
use crate::matching::required_words;
use crate::tabular::{find_subsequence, Sentence, Slot, Table};
use crate::templates::RuleSet;

/// One insertion step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub slot: String,
    pub phrase: String,
    pub position: usize,
    pub score: f64,
    pub candidates: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InsertionTrace {
    pub steps: Vec<TraceStep>,
}

impl InsertionTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One JSON object per step, each tagged with `sample`.
    pub fn to_json_lines(&self, sample: &str) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let mut v = serde_json::to_value(s).expect("trace serializes");
            v["sample"] = serde_json::Value::String(sample.to_string());
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }
}

/// Result of scoring every allowed insertion point for one phrase.
#[derive(Clone, Debug, PartialEq)]
pub struct Insertion {
    pub sentence: Sentence,
    pub position: usize,
    pub score: f64,
    pub candidates: usize,
}

/// Scores `phrase` inserted at every allowed boundary `0..=len` as one batch
/// and keeps the best; ties go to the smallest position.
pub fn best_insertion_where(
    scorer: &dyn Scorer,
    table: &Table,
    sentence: &Sentence,
    phrase: &Sentence,
    allowed: impl Fn(usize) -> bool,
) -> Result<Insertion> {
    if phrase.is_empty() {
        return Err(Error::InvalidArgument("empty insertion phrase".into()));
    }
    let positions: Vec<usize> = (0..=sentence.len()).filter(|&p| allowed(p)).collect();
    if positions.is_empty() {
        return Err(Error::InvalidArgument("no insertion point allowed".into()));
    }
    let candidates: Vec<Sentence> = positions.iter().map(|&p| sentence.insert(p, phrase)).collect();
    let scores = scorer.score(table, &candidates)?;
    if scores.len() != candidates.len() {
        return Err(Error::Protocol(format!(
            "scorer returned {} scores for {} candidates",
            scores.len(),
            candidates.len()
        )));
    }
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    let n = candidates.len();
    Ok(Insertion {
        sentence: candidates.into_iter().nth(best).expect("best index in range"),
        position: positions[best],
        score: scores[best],
        candidates: n,
    })
}

/// Best of all `len + 1` insertion points.
pub fn best_insertion(
    scorer: &dyn Scorer,
    table: &Table,
    sentence: &Sentence,
    phrase: &Sentence,
) -> Result<Insertion> {
    best_insertion_where(scorer, table, sentence, phrase, |_| true)
}

/// Which table slots the search must make present.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum SlotFilter {
    #[default]
    All,
    Only(BTreeSet<String>),
}

impl SlotFilter {
    pub fn from_slots(slots: &[Slot]) -> Self {
        SlotFilter::Only(slots.iter().map(|s| s.name().to_string()).collect())
    }

    pub fn includes(&self, slot: &Slot) -> bool {
        match self {
            SlotFilter::All => true,
            SlotFilter::Only(names) => names.contains(slot.name()),
        }
    }
}

/// Slots in the filter whose required words are absent, in table order.
pub fn missing_filtered(
    table: &Table,
    sentence: &Sentence,
    rules: &RuleSet,
    filter: &SlotFilter,
) -> Vec<Slot> {
    let words = sentence.lowercase_words();
    table
        .slots()
        .iter()
        .filter(|s| filter.includes(s))
        .filter(|s| find_subsequence(&words, &required_words(s, Some(rules))).is_none())
        .cloned()
        .collect()
}

/// Marks boundaries strictly inside a protected span as blocked.
fn block_interior(blocked: &mut [bool], start: usize, len: usize) {
    for b in blocked.iter_mut().take(start + len).skip(start + 1) {
        *b = true;
    }
}

/// Inserts a rendered phrase for every filtered slot that is missing, one
/// slot at a time in table order. Feasible input comes back unchanged with an
/// empty trace.
pub fn project_to_feasible(
    scorer: &dyn Scorer,
    table: &Table,
    sentence: &Sentence,
    rules: &RuleSet,
    filter: &SlotFilter,
) -> Result<(Sentence, InsertionTrace)> {
    let mut current = sentence.clone();
    let mut trace = InsertionTrace::default();
    // spans (start, len) of phrases inserted so far
    let mut inserted: Vec<(usize, usize)> = Vec::new();

    for slot in table.slots().iter().filter(|s| filter.includes(s)) {
        let need = required_words(slot, Some(rules));
        let words = current.lowercase_words();
        if find_subsequence(&words, &need).is_some() {
            continue;
        }
        let mut blocked = vec![false; current.len() + 1];
        for &(start, len) in &inserted {
            block_interior(&mut blocked, start, len);
        }
        for other in table.slots().iter().filter(|s| filter.includes(s)) {
            let w = required_words(other, Some(rules));
            if w.is_empty() {
                continue;
            }
            for (i, win) in words.windows(w.len()).enumerate() {
                if win == &w[..] {
                    block_interior(&mut blocked, i, w.len());
                }
            }
        }
        let phrase = rules.render(slot);
        let ins = best_insertion_where(scorer, table, &current, &phrase, |p| !blocked[p])?;
        for span in inserted.iter_mut() {
            if span.0 >= ins.position {
                span.0 += phrase.len();
            }
        }
        inserted.push((ins.position, phrase.len()));
        trace.steps.push(TraceStep {
            slot: slot.name().to_string(),
            phrase: phrase.detokenize(),
            position: ins.position,
            score: ins.score,
            candidates: ins.candidates,
        });
        current = ins.sentence;
    }
    Ok((current, trace))
}

/// Slot statistics over a parallel corpus, used to pick which slots the
/// search should insert when references routinely omit some of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotStats {
    n_tables: usize,
    /// name → (tables containing the slot, references mentioning its value)
    by_name: BTreeMap<String, (usize, usize)>,
}

impl SlotStats {
    pub fn from_pairs(pairs: &[(Table, Sentence)], rules: Option<&RuleSet>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut by_name: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for (table, reference) in pairs {
            let words = reference.lowercase_words();
            for slot in table.slots() {
                let e = by_name.entry(slot.name().to_string()).or_default();
                e.0 += 1;
                if find_subsequence(&words, &required_words(slot, rules)).is_some() {
                    e.1 += 1;
                }
            }
        }
        Ok(SlotStats {
            n_tables: pairs.len(),
            by_name,
        })
    }

    /// (fraction of tables with the slot, fraction of those whose reference mentions it)
    pub fn rates(&self, name: &str) -> (f64, f64) {
        let (with, referenced) = self.by_name.get(name).copied().unwrap_or((0, 0));
        let table_rate = with as f64 / self.n_tables as f64;
        let ref_rate = if with == 0 {
            0.0
        } else {
            referenced as f64 / with as f64
        };
        (table_rate, ref_rate)
    }

    pub fn select(&self, table: &Table, tau_table: f64, tau_ref: f64) -> Result<Vec<Slot>> {
        for t in [tau_table, tau_ref] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidArgument(format!("threshold {t} outside [0, 1]")));
            }
        }
        Ok(table
            .slots()
            .iter()
            .filter(|s| {
                let (tr, rr) = self.rates(s.name());
                tr >= tau_table && rr >= tau_ref
            })
            .cloned()
            .collect())
    }
}

pub fn select_slots_by_stats(
    corpus: &[(Table, Sentence)],
    table: &Table,
    tau_table: f64,
    tau_ref: f64,
) -> Result<Vec<Slot>> {
    SlotStats::from_pairs(corpus, None)?.select(table, tau_table, tau_ref)
}
