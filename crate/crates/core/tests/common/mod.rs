#![allow(dead_code)]

use std::path::PathBuf;

use searchlearn::corpus::{read_parallel, read_unlabeled, Sample};
use searchlearn::lm::Scorer;
use searchlearn::pipeline::PipelineConfig;
use searchlearn::tabular::{Sentence, Slot, Table};
use searchlearn::Result;

pub fn toy_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

pub fn toy_path(name: &str) -> PathBuf {
    toy_dir().join(name)
}

pub struct Toy {
    pub config: PipelineConfig,
    pub train: Vec<Sample>,
    pub unlabeled: Vec<Table>,
    pub test: Vec<Sample>,
}

impl Toy {
    pub fn load() -> Toy {
        Toy {
            config: PipelineConfig::load(toy_path("toy.cfg")).unwrap(),
            train: read_parallel(toy_path("train.tsv")).unwrap(),
            unlabeled: read_unlabeled(toy_path("unlabeled.txt"))
                .unwrap()
                .into_iter()
                .map(|u| u.table)
                .collect(),
            test: read_parallel(toy_path("test.tsv")).unwrap(),
        }
    }

    pub fn test_tables(&self) -> Vec<Table> {
        self.test.iter().map(|s| s.table.clone()).collect()
    }
}

/// Scores a candidate by hashing its lowercased words into a few buckets,
/// so ties are common.
pub struct HashScorer {
    pub buckets: u64,
    pub salt: u64,
}

impl HashScorer {
    pub fn score_words(&self, words: &[String]) -> f64 {
        // FNV-1a
        let mut h: u64 = 0xcbf29ce484222325 ^ self.salt;
        for w in words {
            for b in w.bytes().chain(std::iter::once(0u8)) {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        }
        -((h % self.buckets) as f64)
    }
}

impl Scorer for HashScorer {
    fn score(&self, _table: &Table, candidates: &[Sentence]) -> Result<Vec<f64>> {
        Ok(candidates.iter().map(|c| self.score_words(&c.lowercase_words())).collect())
    }
}

/// Independent hard-coverage recount: every value word sequence (or the
/// rendered boolean phrase) must occur as a contiguous run of words.
pub fn covered(words: &[String], needle: &[String]) -> bool {
    needle.is_empty() || words.windows(needle.len()).any(|w| w == needle)
}

pub fn lower_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut cur = String::new();
        for ch in chunk.chars() {
            if ".,!?;:".contains(ch) {
                if !cur.is_empty() {
                    out.push(cur.to_lowercase());
                    cur.clear();
                }
                out.push(ch.to_string());
            } else {
                cur.push(ch);
            }
        }
        if !cur.is_empty() {
            out.push(cur.to_lowercase());
        }
    }
    out
}

pub fn slot_needle(slot: &Slot) -> Vec<String> {
    match slot.value().to_lowercase().as_str() {
        "yes" => lower_words("family friendly"),
        "no" => lower_words("not family friendly"),
        v => lower_words(v),
    }
}
