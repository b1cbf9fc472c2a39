//! Slot-conditioned phrase templates used to insert missing slots.
//!
//! Rule files hold one rule per line:
//!
//! ```text
//! slot=area; when=always; phrase=in {SV} area
//! slot=familyFriendly; when=value_equals(yes); phrase=family friendly
//! ```
//!
//! `{SV}` is replaced by the slot value. The first rule (in file order) whose
//! slot and condition match wins; with no matching rule the bare value is used.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tabular::{Sentence, Slot};

pub const VALUE_PLACEHOLDER: &str = "{SV}";

/// Rules for the E2E restaurant domain.
pub const E2E_RULES: &str = include_str!("../data/rules/e2e.rules");
/// Rules for WikiBio biographies.
pub const WIKIBIO_RULES: &str = include_str!("../data/rules/wikibio.rules");

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Always,
    ValueEquals(String),
    ValueIn(Vec<String>),
    /// Value contains at least one ASCII digit.
    ValueIsNumeric,
    ValueIsNonNumeric,
}

impl Condition {
    fn parse(s: &str) -> Option<Condition> {
        let s = s.trim();
        match s {
            "always" => return Some(Condition::Always),
            "value_is_numeric" => return Some(Condition::ValueIsNumeric),
            "value_is_non_numeric" => return Some(Condition::ValueIsNonNumeric),
            _ => {}
        }
        let (head, arg) = s.strip_suffix(')')?.split_once('(')?;
        let arg = arg.trim();
        match head.trim() {
            "value_equals" if !arg.is_empty() => Some(Condition::ValueEquals(arg.to_lowercase())),
            "value_in" => {
                let set: Vec<String> = arg
                    .split(',')
                    .map(|v| v.trim().to_lowercase())
                    .filter(|v| !v.is_empty())
                    .collect();
                (!set.is_empty()).then_some(Condition::ValueIn(set))
            }
            _ => None,
        }
    }

    pub fn matches(&self, value: &str) -> bool {
        let v = value.trim().to_lowercase();
        match self {
            Condition::Always => true,
            Condition::ValueEquals(x) => v == *x,
            Condition::ValueIn(set) => set.contains(&v),
            Condition::ValueIsNumeric => v.chars().any(|c| c.is_ascii_digit()),
            Condition::ValueIsNonNumeric => !v.chars().any(|c| c.is_ascii_digit()),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Always => f.write_str("always"),
            Condition::ValueEquals(v) => write!(f, "value_equals({v})"),
            Condition::ValueIn(vs) => write!(f, "value_in({})", vs.join(",")),
            Condition::ValueIsNumeric => f.write_str("value_is_numeric"),
            Condition::ValueIsNonNumeric => f.write_str("value_is_non_numeric"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhraseRule {
    pub slot_name: String,
    pub condition: Condition,
    pub pattern: String,
}

impl PhraseRule {
    pub fn applies_to(&self, slot: &Slot) -> bool {
        self.slot_name == slot.name() && self.condition.matches(slot.value())
    }

    pub fn fill(&self, value: &str) -> String {
        self.pattern.replace(VALUE_PLACEHOLDER, value)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    rules: Vec<PhraseRule>,
}

impl RuleSet {
    pub fn empty() -> Self {
        RuleSet::default()
    }

    pub fn e2e() -> Self {
        RuleSet::parse(E2E_RULES).expect("bundled E2E rules are valid")
    }

    pub fn wikibio() -> Self {
        RuleSet::parse(WIKIBIO_RULES).expect("bundled WikiBio rules are valid")
    }

    pub fn rules(&self) -> &[PhraseRule] {
        &self.rules
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        RuleSet::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rules: Vec<PhraseRule> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rule = parse_rule_line(line).map_err(|message| Error::RuleSyntax {
                line: line_no,
                message,
            })?;
            if rules
                .iter()
                .any(|r| r.slot_name == rule.slot_name && r.condition == rule.condition)
            {
                return Err(Error::DuplicateRule {
                    slot: rule.slot_name,
                    condition: rule.condition.to_string(),
                });
            }
            rules.push(rule);
        }
        Ok(RuleSet { rules })
    }

    /// The phrase to insert for `slot`.
    pub fn render(&self, slot: &Slot) -> Sentence {
        match self.rules.iter().find(|r| r.applies_to(slot)) {
            Some(rule) => Sentence::tokenize(&rule.fill(slot.value())),
            None => Sentence::tokenize(slot.value()),
        }
    }
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet> {
    RuleSet::load(path)
}

pub fn render(ruleset: &RuleSet, slot: &Slot) -> Sentence {
    ruleset.render(slot)
}

fn parse_rule_line(line: &str) -> std::result::Result<PhraseRule, String> {
    let fields: Vec<&str> = line.splitn(3, ';').collect();
    if fields.len() != 3 {
        return Err("expected `slot=...; when=...; phrase=...`".into());
    }
    let field = |i: usize, key: &str| -> std::result::Result<String, String> {
        let (k, v) = fields[i]
            .split_once('=')
            .ok_or_else(|| format!("field {} has no '='", i + 1))?;
        if k.trim() != key {
            return Err(format!("expected key '{key}', found '{}'", k.trim()));
        }
        Ok(v.trim().to_string())
    };
    let slot_name = field(0, "slot")?.to_lowercase();
    if slot_name.is_empty() || slot_name.contains(['[', ']']) {
        return Err("invalid slot name".into());
    }
    let cond_text = field(1, "when")?;
    let condition =
        Condition::parse(&cond_text).ok_or_else(|| format!("unknown condition '{cond_text}'"))?;
    let pattern = field(2, "phrase")?;
    if pattern.replace(VALUE_PLACEHOLDER, "x").trim().is_empty() {
        return Err("phrase renders empty".into());
    }
    Ok(PhraseRule {
        slot_name,
        condition,
        pattern,
    })
}
