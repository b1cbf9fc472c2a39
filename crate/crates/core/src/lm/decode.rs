use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::lm::ngram::{DelexModel, END, UNK};
use crate::tabular::{relexicalize, DelexSentence, Sentence, Table};

#[derive(Clone, Debug)]
struct Hyp {
    symbols: Vec<String>,
    score: f64,
    finished: bool,
}

/// Higher score first, then lexicographically smaller symbol sequence.
fn rank(a: &Hyp, b: &Hyp) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.symbols.cmp(&b.symbols))
}

/// Beam search over delexicalized symbols; `beam_width == 1` is greedy.
/// Returns the best symbol sequence without the end marker.
pub fn beam_search(
    model: &DelexModel,
    table: &Table,
    max_len: usize,
    beam_width: usize,
) -> Result<Vec<String>> {
    if max_len == 0 || beam_width == 0 {
        return Err(Error::InvalidArgument(
            "max_len and beam_width must be at least 1".into(),
        ));
    }
    let vocab: Vec<&String> = model.vocab().iter().filter(|s| s.as_str() != UNK).collect();
    let mut live = vec![Hyp {
        symbols: Vec::new(),
        score: 0.0,
        finished: false,
    }];
    let mut done: Vec<Hyp> = Vec::new();

    for step in 0..max_len {
        let mut cands: Vec<Hyp> = Vec::new();
        for h in &live {
            let dist = model.step(&h.symbols, table);
            for sym in &vocab {
                let p = dist.prob(sym);
                if p <= 0.0 {
                    continue;
                }
                let mut symbols = h.symbols.clone();
                let finished = sym.as_str() == END;
                if !finished {
                    symbols.push((*sym).clone());
                }
                cands.push(Hyp {
                    symbols,
                    score: h.score + p.ln(),
                    finished: finished || step + 1 == max_len,
                });
            }
        }
        cands.sort_by(rank);
        cands.truncate(beam_width);
        live.clear();
        for c in cands {
            if c.finished {
                done.push(c);
            } else {
                live.push(c);
            }
        }
        if live.is_empty() {
            break;
        }
        // a live hypothesis that cannot beat the best finished one is pruned,
        // since log probabilities only decrease with length
        if let Some(best) = done.iter().min_by(|a, b| rank(a, b)) {
            live.retain(|h| h.score > best.score);
            if live.is_empty() {
                break;
            }
        }
    }
    if done.is_empty() {
        done = live;
    }
    done.sort_by(rank);
    Ok(done.into_iter().next().map(|h| h.symbols).unwrap_or_default())
}

/// Decodes a sentence for `table` and fills placeholders with its values.
pub fn decode(
    model: &DelexModel,
    table: &Table,
    max_len: usize,
    beam_width: usize,
) -> Result<Sentence> {
    let symbols = beam_search(model, table, max_len, beam_width)?;
    let d = DelexSentence::from_symbols(&symbols, |s| model.slot_of(s).map(str::to_string));
    relexicalize(&d, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::Smoothing;
    use crate::tabular::parse_mr;

    fn corpus() -> Vec<(Table, Sentence)> {
        vec![
            (
                parse_mr("name[Aromi], area[riverside]").unwrap(),
                Sentence::tokenize("Aromi sits in the riverside area."),
            ),
            (
                parse_mr("name[The Mill], food[Thai], eatType[pub]").unwrap(),
                Sentence::tokenize("The Mill is a pub serving Thai food."),
            ),
        ]
    }

    #[test]
    fn memorizes_training_patterns() {
        let c = corpus();
        let m = DelexModel::fit(&c, 3, Smoothing::default_for(3)).unwrap();
        let words = |s: &Sentence| Sentence::from_words(&s.words().collect::<Vec<_>>());
        // a wider beam recovers from the tie greedy resolves the wrong way
        for (t, s) in &c {
            assert_eq!(decode(&m, t, 30, 3).unwrap(), words(s));
        }
        for (t, s) in &c {
            let single = DelexModel::fit(&[(t.clone(), s.clone())], 3, Smoothing::default_for(3)).unwrap();
            assert_eq!(decode(&single, t, 30, 1).unwrap(), words(s));
        }
    }

    #[test]
    fn greedy_is_deterministic() {
        let c = corpus();
        let m = DelexModel::fit(&c, 3, Smoothing::default_for(3)).unwrap();
        let t = parse_mr("name[Zizzi], food[Thai], area[riverside]").unwrap();
        let a = decode(&m, &t, 20, 1).unwrap();
        let b = decode(&m, &t, 20, 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unseen_slots_never_emitted() {
        let c = corpus();
        let m = DelexModel::fit(&c, 3, Smoothing::default_for(3)).unwrap();
        let t = parse_mr("name[Zizzi], near[Café Sicilia]").unwrap();
        let out = decode(&m, &t, 20, 2).unwrap();
        assert!(!out.detokenize().contains("Sicilia"));
    }

    #[test]
    fn respects_max_len_and_args() {
        let c = corpus();
        let m = DelexModel::fit(&c, 3, Smoothing::default_for(3)).unwrap();
        let t = parse_mr("name[Aromi], area[riverside]").unwrap();
        assert!(beam_search(&m, &t, 2, 1).unwrap().len() <= 2);
        assert!(beam_search(&m, &t, 0, 1).is_err());
        assert!(beam_search(&m, &t, 5, 0).is_err());
    }
}
