//! Slot coverage checks and slot error rate.
//!
//! Two kinds of matching live here. Hard matching asks whether a slot value
//! occurs verbatim (whole tokens, case-insensitive) in the output. Soft
//! matching runs regular expressions per slot value and sorts every slot
//! into covered, missing, or wrong, plus the set of slots mentioned without
//! being in the table (added).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_rational::Rational64;
use regex::{Regex, RegexBuilder};

use crate::error::{Error, Result};
use crate::tabular::{value_words, Sentence, Slot, Table};
use crate::templates::RuleSet;

/// Exact fraction used for every coverage and error rate.
pub type Fraction = Rational64;

/// Patterns shipped for the E2E domain.
pub const E2E_PATTERNS: &str = include_str!("../data/patterns/e2e.patterns");

pub fn to_f64(f: Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// Lowercased tokens that must appear for `slot` to count as covered. For
/// yes/no slots with a rule set available this is the rendered phrase, since
/// the raw value is never expected in text.
pub fn required_words(slot: &Slot, rules: Option<&RuleSet>) -> Vec<String> {
    match rules {
        Some(r) if slot.is_boolean() => r.render(slot).lowercase_words(),
        _ => value_words(slot.value()),
    }
}

/// Slots whose value does not occur verbatim in `sentence`, in table order.
pub fn find_missing_hard(table: &Table, sentence: &Sentence) -> Vec<Slot> {
    find_missing_with(table, sentence, None)
}

pub fn find_missing_with(table: &Table, sentence: &Sentence, rules: Option<&RuleSet>) -> Vec<Slot> {
    let words = sentence.lowercase_words();
    table
        .slots()
        .iter()
        .filter(|s| crate::tabular::find_subsequence(&words, &required_words(s, rules)).is_none())
        .cloned()
        .collect()
}

/// Micro-averaged hard coverage: (total slots − missing) / total slots.
pub fn corpus_coverage(samples: &[(Table, Sentence)]) -> Result<Fraction> {
    corpus_coverage_with(samples, None)
}

pub fn corpus_coverage_with(
    samples: &[(Table, Sentence)],
    rules: Option<&RuleSet>,
) -> Result<Fraction> {
    let (total, missing) = samples.iter().fold((0i64, 0i64), |(t, m), (table, s)| {
        (
            t + table.len() as i64,
            m + find_missing_with(table, s, rules).len() as i64,
        )
    });
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(Fraction::new(total - missing, total))
}

struct ValuePatterns {
    value: String,
    regexes: Vec<Regex>,
}

/// Regular expressions for soft matching, keyed by slot name.
#[derive(Default)]
pub struct MatchPatterns {
    values: BTreeMap<String, Vec<ValuePatterns>>,
    detectors: BTreeMap<String, Vec<Regex>>,
}

fn compile(pattern: &str, line: usize) -> Result<Regex> {
    RegexBuilder::new(pattern)
        .case_insensitive(true)
        .build()
        .map_err(|e| Error::PatternError {
            line,
            message: e.to_string(),
        })
}

/// Escaped value bounded by non-word characters or the text edges.
pub fn implicit_pattern(value: &str) -> String {
    let escaped = regex::escape(value.trim()).replace(' ', r"\s+");
    format!(r"(?:^|\W){escaped}(?:\W|$)")
}

impl MatchPatterns {
    pub fn empty() -> Self {
        MatchPatterns::default()
    }

    pub fn e2e() -> Self {
        MatchPatterns::parse(E2E_PATTERNS).expect("bundled E2E patterns are valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        MatchPatterns::parse(&fs::read_to_string(path)?)
    }

    /// Lines are `slot=<name>; value=<v>; pattern=<regex>` or
    /// `slot=<name>; detect=<regex>`. Matching is case-insensitive.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = MatchPatterns::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |m: &str| Error::PatternError {
                line: line_no,
                message: m.to_string(),
            };
            let (slot_field, rest) = line.split_once(';').ok_or_else(|| syntax("missing ';'"))?;
            let slot = slot_field
                .trim()
                .strip_prefix("slot=")
                .ok_or_else(|| syntax("expected slot=<name>"))?
                .trim()
                .to_lowercase();
            if slot.is_empty() {
                return Err(syntax("empty slot name"));
            }
            let rest = rest.trim_start();
            if let Some(re) = rest.strip_prefix("detect=") {
                out.add_detector(&slot, re.trim(), line_no)?;
            } else if let Some(v) = rest.strip_prefix("value=") {
                let (value, pat) = v.split_once(';').ok_or_else(|| syntax("missing ';'"))?;
                let pat = pat
                    .trim_start()
                    .strip_prefix("pattern=")
                    .ok_or_else(|| syntax("expected pattern=<regex>"))?;
                out.add_value_pattern(&slot, value.trim(), pat.trim(), line_no)?;
            } else {
                return Err(syntax("expected value= or detect="));
            }
        }
        Ok(out)
    }

    pub fn add_value_pattern(&mut self, slot: &str, value: &str, pattern: &str, line: usize) -> Result<()> {
        let re = compile(pattern, line)?;
        let value = value.to_lowercase();
        let entries = self.values.entry(slot.to_lowercase()).or_default();
        match entries.iter_mut().find(|e| e.value == value) {
            Some(e) => e.regexes.push(re),
            None => entries.push(ValuePatterns {
                value,
                regexes: vec![re],
            }),
        }
        Ok(())
    }

    pub fn add_detector(&mut self, slot: &str, pattern: &str, line: usize) -> Result<()> {
        let re = compile(pattern, line)?;
        self.detectors.entry(slot.to_lowercase()).or_default().push(re);
        Ok(())
    }

    fn value_matches(&self, slot: &Slot, text: &str) -> Result<bool> {
        let v = slot.value().to_lowercase();
        let explicit = self
            .values
            .get(slot.name())
            .and_then(|es| es.iter().find(|e| e.value == v));
        match explicit {
            Some(e) => Ok(e.regexes.iter().any(|r| r.is_match(text))),
            None => Ok(compile(&implicit_pattern(slot.value()), 0)?.is_match(text)),
        }
    }

    fn sibling_matches(&self, slot: &Slot, text: &str) -> bool {
        let v = slot.value().to_lowercase();
        self.values.get(slot.name()).is_some_and(|es| {
            es.iter()
                .filter(|e| e.value != v)
                .any(|e| e.regexes.iter().any(|r| r.is_match(text)))
        })
    }
}

/// Per-sample soft matching outcome.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchReport {
    pub missing: Vec<Slot>,
    pub added: Vec<String>,
    pub wrong: Vec<Slot>,
    pub n_slots: usize,
}

impl MatchReport {
    pub fn counts(&self) -> SerCounts {
        SerCounts {
            added: self.added.len() as u64,
            missing: self.missing.len() as u64,
            wrong: self.wrong.len() as u64,
            slots: self.n_slots as u64,
        }
    }
}

pub fn classify_soft(table: &Table, sentence: &Sentence, patterns: &MatchPatterns) -> Result<MatchReport> {
    let text = sentence.detokenize();
    let mut report = MatchReport {
        n_slots: table.len(),
        ..MatchReport::default()
    };
    for slot in table.slots() {
        if patterns.value_matches(slot, &text)? {
            continue;
        }
        if patterns.sibling_matches(slot, &text) {
            report.wrong.push(slot.clone());
        } else {
            report.missing.push(slot.clone());
        }
    }
    for (name, detectors) in &patterns.detectors {
        if table.get(name).is_none() && detectors.iter().any(|r| r.is_match(&text)) {
            report.added.push(name.clone());
        }
    }
    Ok(report)
}

/// Pooled error counts; summing these over a corpus gives micro-averaged SER.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SerCounts {
    pub added: u64,
    pub missing: u64,
    pub wrong: u64,
    pub slots: u64,
}

impl std::ops::AddAssign for SerCounts {
    fn add_assign(&mut self, o: SerCounts) {
        self.added += o.added;
        self.missing += o.missing;
        self.wrong += o.wrong;
        self.slots += o.slots;
    }
}

impl SerCounts {
    fn frac(&self, n: u64) -> Result<Fraction> {
        if self.slots == 0 {
            return Err(Error::ZeroSlots);
        }
        Ok(Fraction::new(n as i64, self.slots as i64))
    }

    /// (added + missing + wrong) / slots
    pub fn ser(&self) -> Result<Fraction> {
        self.frac(self.added + self.missing + self.wrong)
    }

    pub fn added_rate(&self) -> Result<Fraction> {
        self.frac(self.added)
    }

    pub fn missing_rate(&self) -> Result<Fraction> {
        self.frac(self.missing)
    }

    pub fn wrong_rate(&self) -> Result<Fraction> {
        self.frac(self.wrong)
    }

    pub fn soft_coverage(&self) -> Result<Fraction> {
        Ok(Fraction::from_integer(1) - self.ser()?)
    }
}

pub fn ser(report: &MatchReport) -> Result<Fraction> {
    report.counts().ser()
}
