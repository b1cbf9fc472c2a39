//! Tables, sentences, and the conversions between them.
//!
//! A [`Table`] is the flat meaning representation of one sample
//! (`name[The Mill], area[riverside]`). A [`Sentence`] is word-tokenized text
//! that round-trips byte-exactly through [`Sentence::detokenize`].
//! Delexicalization swaps slot value mentions for `__slot__` placeholders so
//! the n-gram model can share statistics across values.

mod delex;
mod mr;
mod text;

pub use delex::{delexicalize, placeholder, relexicalize, DelexSentence, DelexToken};
pub use mr::{is_boolean_value, linearize, parse_mr, Slot, Table};
pub use text::{find_subsequence, is_punct_token, value_words, Sentence, Token, PUNCTUATION};

pub fn tokenize(text: &str) -> Sentence {
    Sentence::tokenize(text)
}

pub fn detokenize(sentence: &Sentence) -> String {
    sentence.detokenize()
}
