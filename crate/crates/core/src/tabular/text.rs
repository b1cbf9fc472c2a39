use std::fmt;

/// Characters split off the edges of whitespace-delimited chunks.
pub const PUNCTUATION: &[char] = &['.', ',', '!', '?', ';', ':'];

fn is_punct_char(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// True if the token is a single split-off punctuation mark.
pub fn is_punct_token(s: &str) -> bool {
    let mut chars = s.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if is_punct_char(c))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub text: String,
    /// Whitespace that followed the token in the source text, verbatim.
    pub trailing: String,
}

impl Token {
    pub fn new(text: impl Into<String>, trailing: impl Into<String>) -> Self {
        Token {
            text: text.into(),
            trailing: trailing.into(),
        }
    }

    pub fn has_space_after(&self) -> bool {
        !self.trailing.is_empty()
    }
}

/// A tokenized sentence that remembers its original spacing, so
/// `Sentence::tokenize(s).detokenize() == s` for any input.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    leading: String,
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn empty() -> Self {
        Sentence::default()
    }

    pub fn from_tokens(leading: impl Into<String>, tokens: Vec<Token>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.text.is_empty()));
        Sentence {
            leading: leading.into(),
            tokens,
        }
    }

    /// Builds a sentence from bare words using conventional spacing: one space
    /// between words and none before punctuation.
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Self {
        let mut tokens: Vec<Token> = Vec::with_capacity(words.len());
        for w in words {
            let w = w.as_ref();
            if w.is_empty() {
                continue;
            }
            if let Some(prev) = tokens.last_mut() {
                prev.trailing = if is_punct_token(w) {
                    String::new()
                } else {
                    " ".to_string()
                };
            }
            tokens.push(Token::new(w, ""));
        }
        Sentence {
            leading: String::new(),
            tokens,
        }
    }

    pub fn tokenize(text: &str) -> Self {
        let lead_end = text
            .char_indices()
            .find(|(_, c)| !c.is_whitespace())
            .map_or(text.len(), |(i, _)| i);
        let leading = text[..lead_end].to_string();
        let mut tokens = Vec::new();
        let mut rest = &text[lead_end..];
        while !rest.is_empty() {
            let chunk_end = rest
                .char_indices()
                .find(|(_, c)| c.is_whitespace())
                .map_or(rest.len(), |(i, _)| i);
            let chunk = &rest[..chunk_end];
            let after = &rest[chunk_end..];
            let ws_end = after
                .char_indices()
                .find(|(_, c)| !c.is_whitespace())
                .map_or(after.len(), |(i, _)| i);
            let trailing = &after[..ws_end];
            split_chunk(chunk, trailing, &mut tokens);
            rest = &after[ws_end..];
        }
        Sentence { leading, tokens }
    }

    pub fn detokenize(&self) -> String {
        let mut out = self.leading.clone();
        for t in &self.tokens {
            out.push_str(&t.text);
            out.push_str(&t.trailing);
        }
        out
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn leading(&self) -> &str {
        &self.leading
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    pub fn lowercase_words(&self) -> Vec<String> {
        self.words().map(str::to_lowercase).collect()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Returns a copy with `phrase` inserted before token `pos`
    /// (`pos == len()` appends). Existing token texts keep their order; only
    /// whitespace around the insertion point is adjusted.
    pub fn insert(&self, pos: usize, phrase: &Sentence) -> Sentence {
        assert!(pos <= self.tokens.len(), "insertion point out of range");
        if phrase.is_empty() {
            return self.clone();
        }
        let mut tokens = Vec::with_capacity(self.tokens.len() + phrase.len());
        tokens.extend_from_slice(&self.tokens[..pos]);
        let mut inserted: Vec<Token> = phrase.tokens.clone();
        if let Some(prev) = tokens.last_mut() {
            if prev.trailing.is_empty() && !is_punct_token(&inserted[0].text) {
                prev.trailing = " ".to_string();
            }
        }
        let last = inserted.last_mut().expect("non-empty phrase");
        last.trailing = match self.tokens.get(pos) {
            None => String::new(),
            Some(next) if is_punct_token(&next.text) => String::new(),
            Some(_) => " ".to_string(),
        };
        tokens.extend(inserted);
        tokens.extend_from_slice(&self.tokens[pos..]);
        Sentence {
            leading: self.leading.clone(),
            tokens,
        }
    }

    /// Whole-token, case-insensitive subsequence search; returns the start
    /// index of the first occurrence.
    pub fn find_words(&self, needle: &[String]) -> Option<usize> {
        find_subsequence(&self.lowercase_words(), needle)
    }

    pub fn contains_words(&self, needle: &[String]) -> bool {
        self.find_words(needle).is_some()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.detokenize())
    }
}

fn split_chunk(chunk: &str, trailing: &str, out: &mut Vec<Token>) {
    let core_start = chunk
        .char_indices()
        .find(|(_, c)| !is_punct_char(*c))
        .map(|(i, _)| i);
    let Some(core_start) = core_start else {
        // punctuation only
        let n = chunk.chars().count();
        for (i, c) in chunk.chars().enumerate() {
            let tr = if i + 1 == n { trailing } else { "" };
            out.push(Token::new(c.to_string(), tr));
        }
        return;
    };
    let core_end = chunk
        .char_indices()
        .rev()
        .find(|(_, c)| !is_punct_char(*c))
        .map(|(i, c)| i + c.len_utf8())
        .unwrap_or(chunk.len());
    for c in chunk[..core_start].chars() {
        out.push(Token::new(c.to_string(), ""));
    }
    let tail = &chunk[core_end..];
    let core_trailing = if tail.is_empty() { trailing } else { "" };
    out.push(Token::new(&chunk[core_start..core_end], core_trailing));
    let n = tail.chars().count();
    for (i, c) in tail.chars().enumerate() {
        let tr = if i + 1 == n { trailing } else { "" };
        out.push(Token::new(c.to_string(), tr));
    }
}

/// Lowercased token sequence of a slot value, as used for hard matching.
pub fn value_words(value: &str) -> Vec<String> {
    Sentence::tokenize(value).lowercase_words()
}

pub fn find_subsequence(haystack: &[String], needle: &[String]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    haystack.windows(needle.len()).position(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &Sentence) -> Vec<&str> {
        s.words().collect()
    }

    #[test]
    fn splits_edge_punctuation() {
        let s = Sentence::tokenize("It is near Café Rouge.");
        assert_eq!(words(&s), ["It", "is", "near", "Café", "Rouge", "."]);
        assert_eq!(s.detokenize(), "It is near Café Rouge.");
    }

    #[test]
    fn empty_input() {
        let s = Sentence::tokenize("");
        assert!(s.is_empty());
        assert_eq!(s.detokenize(), "");
    }

    #[test]
    fn keeps_exact_spacing() {
        for text in ["a  b", "  lead", "trail \t\n", "x,y", "(hi), there!?", "...", " . "] {
            assert_eq!(Sentence::tokenize(text).detokenize(), text);
        }
    }

    #[test]
    fn leading_and_inner_punct() {
        let s = Sentence::tokenize(",hello world?!");
        assert_eq!(words(&s), [",", "hello", "world", "?", "!"]);
        let s = Sentence::tokenize("£20-25.");
        assert_eq!(words(&s), ["£20-25", "."]);
    }

    #[test]
    fn from_words_spacing() {
        let s = Sentence::from_words(&["The", "Mill", "is", "nice", "."]);
        assert_eq!(s.detokenize(), "The Mill is nice.");
    }

    #[test]
    fn insert_positions() {
        let s = Sentence::tokenize("X is a pub.");
        let p = Sentence::tokenize("in riverside area");
        assert_eq!(s.insert(0, &p).detokenize(), "in riverside area X is a pub.");
        assert_eq!(s.insert(4, &p).detokenize(), "X is a pub in riverside area.");
        assert_eq!(s.insert(5, &p).detokenize(), "X is a pub. in riverside area");
        assert_eq!(Sentence::empty().insert(0, &p).detokenize(), "in riverside area");
    }

    #[test]
    fn case_insensitive_whole_token_search() {
        let s = Sentence::tokenize("near café rouge today");
        assert_eq!(s.find_words(&value_words("Café Rouge")), Some(1));
        let s = Sentence::tokenize("The Mill");
        assert!(!s.contains_words(&value_words("he")));
    }
}
