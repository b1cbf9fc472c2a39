use std::fmt;

use crate::error::{Error, Result};

/// One slot name and value pair. Names are stored lowercased.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    name: String,
    value: String,
}

impl Slot {
    pub fn new(name: &str, value: &str) -> Result<Self> {
        let name = name.trim().to_lowercase();
        let value = value.trim().to_string();
        if name.is_empty() {
            return Err(Error::MalformedMr("empty slot name".into()));
        }
        if value.is_empty() {
            return Err(Error::MalformedMr(format!("empty value for slot '{name}'")));
        }
        for s in [&name, &value] {
            if s.contains(['[', ']']) {
                return Err(Error::MalformedMr(format!("bracket inside '{s}'")));
            }
        }
        Ok(Slot { name, value })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    /// Yes/no style values. These are never matched verbatim; their
    /// rendered phrase stands in for the value.
    pub fn is_boolean(&self) -> bool {
        is_boolean_value(&self.value)
    }
}

pub fn is_boolean_value(value: &str) -> bool {
    matches!(value.to_lowercase().as_str(), "yes" | "no")
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.value)
    }
}

/// An input table: an ordered set of slots with pairwise distinct names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Table {
    slots: Vec<Slot>,
    sample_id: Option<String>,
}

impl Table {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::MalformedMr("table has no slots".into()));
        }
        for (i, s) in slots.iter().enumerate() {
            if slots[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::MalformedMr(format!("slot '{}' repeats", s.name)));
            }
        }
        Ok(Table {
            slots,
            sample_id: None,
        })
    }

    pub fn with_sample_id(mut self, id: impl Into<String>) -> Self {
        self.sample_id = Some(id.into());
        self
    }

    pub fn sample_id(&self) -> Option<&str> {
        self.sample_id.as_deref()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Slot> {
        self.slots.iter().find(|s| s.name == name)
    }

    /// Same slots, ignoring the sample id.
    pub fn same_slots(&self, other: &Table) -> bool {
        self.slots == other.slots
    }

    /// `name[value]name[value]...` with no separator between slots.
    pub fn linearize(&self) -> String {
        self.slots.iter().map(|s| s.to_string()).collect()
    }

    /// E2E-style comma separated MR, as written to corpus files.
    pub fn to_mr(&self) -> String {
        self.slots
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

pub fn linearize(table: &Table) -> String {
    table.linearize()
}

/// Parses `name[value]` pairs. Commas and whitespace between pairs are
/// optional, so both corpus MRs and linearized tables are accepted.
pub fn parse_mr(text: &str) -> Result<Table> {
    let mut slots = Vec::new();
    let mut rest = text;
    loop {
        rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == ',');
        if rest.is_empty() {
            break;
        }
        let open = rest
            .find(['[', ']'])
            .ok_or_else(|| Error::MalformedMr(format!("missing '[' in {text:?}")))?;
        if rest.as_bytes()[open] == b']' {
            return Err(Error::MalformedMr(format!("unbalanced ']' in {text:?}")));
        }
        let name = &rest[..open];
        let after = &rest[open + 1..];
        let close = after
            .find(['[', ']'])
            .ok_or_else(|| Error::MalformedMr(format!("missing ']' in {text:?}")))?;
        if after.as_bytes()[close] == b'[' {
            return Err(Error::MalformedMr(format!("nested '[' in {text:?}")));
        }
        slots.push(Slot::new(name, &after[..close])?);
        rest = &after[close + 1..];
    }
    Table::new(slots)
}
