use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tabular::{value_words, Sentence, Table, Token};

/// Placeholder symbol for a slot name, e.g. `customer rating` → `__customer_rating__`.
pub fn placeholder(slot_name: &str) -> String {
    format!("__{}__", slot_name.replace(char::is_whitespace, "_"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelexToken {
    Word(Token),
    Placeholder {
        slot: String,
        trailing: String,
        /// Original surface tokens when produced by delexicalization.
        surface: Option<Vec<Token>>,
    },
}

impl DelexToken {
    pub fn symbol(&self) -> String {
        match self {
            DelexToken::Word(t) => t.text.clone(),
            DelexToken::Placeholder { slot, .. } => placeholder(slot),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DelexSentence {
    leading: String,
    tokens: Vec<DelexToken>,
}

impl DelexSentence {
    pub fn new(leading: impl Into<String>, tokens: Vec<DelexToken>) -> Self {
        DelexSentence {
            leading: leading.into(),
            tokens,
        }
    }

    /// Builds a sentence from model symbols. `slot_of` maps a symbol to the
    /// slot name it stands for, if it is a placeholder.
    pub fn from_symbols<S, F>(symbols: &[S], slot_of: F) -> Self
    where
        S: AsRef<str>,
        F: Fn(&str) -> Option<String>,
    {
        let spaced = Sentence::from_words(symbols);
        let tokens = spaced
            .tokens()
            .iter()
            .map(|t| match slot_of(&t.text) {
                Some(slot) => DelexToken::Placeholder {
                    slot,
                    trailing: t.trailing.clone(),
                    surface: None,
                },
                None => DelexToken::Word(t.clone()),
            })
            .collect();
        DelexSentence {
            leading: String::new(),
            tokens,
        }
    }

    pub fn tokens(&self) -> &[DelexToken] {
        &self.tokens
    }

    pub fn symbols(&self) -> Vec<String> {
        self.tokens.iter().map(DelexToken::symbol).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Placeholder → value string, from the first occurrence of each placeholder.
    pub fn binding(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for t in &self.tokens {
            if let DelexToken::Placeholder {
                slot,
                surface: Some(surface),
                ..
            } = t
            {
                out.entry(placeholder(slot))
                    .or_insert_with(|| Sentence::from_tokens("", strip_last(surface)).detokenize());
            }
        }
        out
    }
}

fn strip_last(tokens: &[Token]) -> Vec<Token> {
    let mut v = tokens.to_vec();
    if let Some(last) = v.last_mut() {
        last.trailing.clear();
    }
    v
}

/// Replaces slot value mentions with placeholders. Values are matched as
/// case-insensitive whole-token runs, longest first (earlier table position on
/// ties), without overlap. Boolean values are left alone.
pub fn delexicalize(sentence: &Sentence, table: &Table) -> DelexSentence {
    let words = sentence.lowercase_words();
    let mut candidates: Vec<(usize, Vec<String>)> = table
        .slots()
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_boolean())
        .map(|(i, s)| (i, value_words(s.value())))
        .filter(|(_, w)| !w.is_empty())
        .collect();
    candidates.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));

    let mut covered = vec![false; words.len()];
    // (start, len, slot index)
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    for (slot_idx, needle) in &candidates {
        let n = needle.len();
        let mut i = 0;
        while i + n <= words.len() {
            if !covered[i..i + n].iter().any(|&c| c) && words[i..i + n] == needle[..] {
                covered[i..i + n].iter_mut().for_each(|c| *c = true);
                spans.push((i, n, *slot_idx));
                i += n;
            } else {
                i += 1;
            }
        }
    }
    spans.sort_unstable();

    let src = sentence.tokens();
    let mut tokens = Vec::with_capacity(src.len());
    let mut pos = 0;
    for (start, len, slot_idx) in spans {
        tokens.extend(src[pos..start].iter().cloned().map(DelexToken::Word));
        let surface = src[start..start + len].to_vec();
        tokens.push(DelexToken::Placeholder {
            slot: table.slots()[slot_idx].name().to_string(),
            trailing: surface.last().map(|t| t.trailing.clone()).unwrap_or_default(),
            surface: Some(surface),
        });
        pos = start + len;
    }
    tokens.extend(src[pos..].iter().cloned().map(DelexToken::Word));
    DelexSentence {
        leading: sentence.leading().to_string(),
        tokens,
    }
}

/// Substitutes every placeholder with its slot value from `table`. When the
/// placeholder still carries the surface text it replaced and that text
/// matches the table value, the original surface is restored exactly.
pub fn relexicalize(d: &DelexSentence, table: &Table) -> Result<Sentence> {
    let mut out = Vec::with_capacity(d.tokens.len());
    for t in &d.tokens {
        match t {
            DelexToken::Word(tok) => out.push(tok.clone()),
            DelexToken::Placeholder {
                slot,
                trailing,
                surface,
            } => {
                let s = table
                    .get(slot)
                    .ok_or_else(|| Error::UnboundPlaceholder(placeholder(slot)))?;
                let want = value_words(s.value());
                let mut toks = match surface {
                    Some(sf)
                        if sf.iter().map(|t| t.text.to_lowercase()).eq(want.iter().cloned()) =>
                    {
                        sf.clone()
                    }
                    _ => Sentence::tokenize(s.value()).tokens().to_vec(),
                };
                if let Some(last) = toks.last_mut() {
                    last.trailing = trailing.clone();
                }
                out.extend(toks);
            }
        }
    }
    Ok(Sentence::from_tokens(d.leading.clone(), out))
}
