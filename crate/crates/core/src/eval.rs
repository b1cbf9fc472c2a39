use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matching::{classify_soft, corpus_coverage_with, to_f64, Fraction, MatchPatterns, SerCounts};
use crate::tabular::{Sentence, Table};
use crate::templates::RuleSet;

/// Corpus-level evaluation. Every rate is pooled over all slots.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub n_samples: usize,
    pub hard_coverage: Fraction,
    pub ser: Fraction,
    pub soft_coverage: Fraction,
    pub added: Fraction,
    pub missing: Fraction,
    pub wrong: Fraction,
    pub avg_len: f64,
    /// Simple n-gram overlap score, only when references are given. Not
    /// comparable to official BLEU scripts.
    pub bleu_plumbing: Option<f64>,
    pub counts: SerCounts,
}

impl EvalReport {
    /// Builds the SER part of a report from pooled counts.
    pub fn from_counts(counts: SerCounts, hard_coverage: Fraction, n_samples: usize, avg_len: f64) -> Result<Self> {
        Ok(EvalReport {
            n_samples,
            hard_coverage,
            ser: counts.ser()?,
            soft_coverage: counts.soft_coverage()?,
            added: counts.added_rate()?,
            missing: counts.missing_rate()?,
            wrong: counts.wrong_rate()?,
            avg_len,
            bleu_plumbing: None,
            counts,
        })
    }

    /// soft = 1 − ser and ser = added + missing + wrong, exactly.
    pub fn identities_hold(&self) -> bool {
        self.soft_coverage == Fraction::from_integer(1) - self.ser
            && self.ser == self.added + self.missing + self.wrong
    }

    pub fn to_json(&self) -> Value {
        let frac = |f: Fraction| json!({"exact": f.to_string(), "value": to_f64(f)});
        json!({
            "n_samples": self.n_samples,
            "hard_coverage": frac(self.hard_coverage),
            "ser": frac(self.ser),
            "soft_coverage": frac(self.soft_coverage),
            "ser_breakdown": {
                "added": frac(self.added),
                "missing": frac(self.missing),
                "wrong": frac(self.wrong),
            },
            "counts": {
                "added": self.counts.added,
                "missing": self.counts.missing,
                "wrong": self.counts.wrong,
                "slots": self.counts.slots,
            },
            "avg_len": self.avg_len,
            "bleu_plumbing": self.bleu_plumbing,
        })
    }
}

fn pct(f: Fraction) -> String {
    format!("{:.2}%", 100.0 * to_f64(f))
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>8} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8}",
            "samples", "HardCov", "Add", "Miss", "Wrong", "SER", "SoftCov", "AvgLen"
        )?;
        writeln!(
            f,
            "{:>8} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8.2}",
            self.n_samples,
            pct(self.hard_coverage),
            pct(self.added),
            pct(self.missing),
            pct(self.wrong),
            pct(self.ser),
            pct(self.soft_coverage),
            self.avg_len
        )?;
        if let Some(b) = self.bleu_plumbing {
            writeln!(f, "bleu (plumbing, not official): {:.4}", b)?;
        }
        Ok(())
    }
}

pub fn evaluate(
    outputs: &[Sentence],
    tables: &[Table],
    refs: Option<&[Sentence]>,
    patterns: &MatchPatterns,
    rules: Option<&RuleSet>,
) -> Result<EvalReport> {
    if outputs.len() != tables.len() {
        return Err(Error::LengthMismatch {
            what: "outputs vs tables",
            left: outputs.len(),
            right: tables.len(),
        });
    }
    if let Some(r) = refs {
        if r.len() != outputs.len() {
            return Err(Error::LengthMismatch {
                what: "references vs outputs",
                left: r.len(),
                right: outputs.len(),
            });
        }
    }
    if outputs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let pairs: Vec<(Table, Sentence)> = tables.iter().cloned().zip(outputs.iter().cloned()).collect();
    let hard = corpus_coverage_with(&pairs, rules)?;
    let mut counts = SerCounts::default();
    for (t, o) in tables.iter().zip(outputs) {
        counts += classify_soft(t, o, patterns)?.counts();
    }
    let avg_len = outputs.iter().map(Sentence::len).sum::<usize>() as f64 / outputs.len() as f64;
    let mut report = EvalReport::from_counts(counts, hard, outputs.len(), avg_len)?;
    report.bleu_plumbing = refs.map(|r| corpus_bleu(outputs, r));
    Ok(report)
}

fn ngram_counts(words: &[&str], n: usize) -> HashMap<Vec<String>, usize> {
    let mut m = HashMap::new();
    if words.len() >= n {
        for w in words.windows(n) {
            *m.entry(w.iter().map(|s| s.to_string()).collect()).or_insert(0) += 1;
        }
    }
    m
}

/// Corpus BLEU with one reference per hypothesis: clipped n-gram precision
/// for n = 1..4, geometric mean, brevity penalty.
pub fn corpus_bleu(hyps: &[Sentence], refs: &[Sentence]) -> f64 {
    const N: usize = 4;
    let mut matched = [0usize; N];
    let mut total = [0usize; N];
    let (mut hyp_len, mut ref_len) = (0usize, 0usize);
    for (h, r) in hyps.iter().zip(refs) {
        let hw: Vec<&str> = h.words().collect();
        let rw: Vec<&str> = r.words().collect();
        hyp_len += hw.len();
        ref_len += rw.len();
        for n in 1..=N {
            let hc = ngram_counts(&hw, n);
            let rc = ngram_counts(&rw, n);
            for (g, c) in &hc {
                matched[n - 1] += (*c).min(rc.get(g).copied().unwrap_or(0));
                total[n - 1] += c;
            }
        }
    }
    if hyp_len == 0 || matched.contains(&0) {
        return 0.0;
    }
    let log_p: f64 = (0..N)
        .map(|i| (matched[i] as f64 / total[i] as f64).ln())
        .sum::<f64>()
        / N as f64;
    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    bp * log_p.exp()
}
