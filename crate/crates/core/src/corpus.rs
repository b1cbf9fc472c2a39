//! Corpus files and the in-memory corpus.
//!
//! * parallel: `MR<TAB>reference`, one sample per line
//! * pseudo: `MR<TAB>text<TAB>provenance`
//! * unlabeled: `MR` per line, optionally `MR<TAB>provenance`
//!
//! Lines starting with `#` and blank lines are skipped everywhere.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tabular::{parse_mr, Sentence, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Human,
    PseudoSearch,
    PseudoSelfTrain,
    Recombined,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Human => "human",
            Provenance::PseudoSearch => "pseudo_search",
            Provenance::PseudoSelfTrain => "pseudo_selftrain",
            Provenance::Recombined => "recombined",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "human" => Ok(Provenance::Human),
            "pseudo_search" => Ok(Provenance::PseudoSearch),
            "pseudo_selftrain" => Ok(Provenance::PseudoSelfTrain),
            "recombined" => Ok(Provenance::Recombined),
            other => Err(format!("unknown provenance '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub table: Table,
    pub sentence: Sentence,
    pub provenance: Provenance,
}

impl Sample {
    pub fn id(&self) -> Option<&str> {
        self.table.sample_id()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnlabeledTable {
    pub table: Table,
    pub provenance: Provenance,
}

/// Parallel pairs plus unlabeled tables, with unique sample ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    parallel: Vec<Sample>,
    unlabeled: Vec<UnlabeledTable>,
}

impl Corpus {
    pub fn new(parallel: Vec<Sample>, unlabeled: Vec<UnlabeledTable>) -> Result<Self> {
        let mut seen = HashSet::new();
        let ids = parallel
            .iter()
            .map(|s| s.table.sample_id())
            .chain(unlabeled.iter().map(|u| u.table.sample_id()));
        for id in ids.flatten() {
            if !seen.insert(id.to_string()) {
                return Err(Error::InvalidArgument(format!("duplicate sample id '{id}'")));
            }
        }
        Ok(Corpus {
            parallel,
            unlabeled,
        })
    }

    pub fn parallel(&self) -> &[Sample] {
        &self.parallel
    }

    pub fn unlabeled(&self) -> &[UnlabeledTable] {
        &self.unlabeled
    }

    pub fn pairs(&self) -> Vec<(Table, Sentence)> {
        to_pairs(&self.parallel)
    }

    pub fn tables(&self) -> Vec<Table> {
        self.unlabeled.iter().map(|u| u.table.clone()).collect()
    }
}

pub fn to_pairs(samples: &[Sample]) -> Vec<(Table, Sentence)> {
    samples
        .iter()
        .map(|s| (s.table.clone(), s.sentence.clone()))
        .collect()
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn format_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::CorpusFormat {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses parallel or pseudo corpus text. A missing third column means
/// `default_provenance`. Sample ids are `<prefix><line>`.
pub fn parse_samples(
    text: &str,
    origin: &str,
    id_prefix: &str,
    default_provenance: Provenance,
) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (line_no, line) in content_lines(text) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err(format_err(origin, line_no, "expected MR<TAB>text[<TAB>provenance]"));
        }
        let table = parse_mr(cols[0])
            .map_err(|e| format_err(origin, line_no, e.to_string()))?
            .with_sample_id(format!("{id_prefix}{line_no}"));
        let provenance = match cols.get(2) {
            Some(p) => p.parse().map_err(|e: String| format_err(origin, line_no, e))?,
            None => default_provenance,
        };
        out.push(Sample {
            table,
            sentence: Sentence::tokenize(cols[1]),
            provenance,
        });
    }
    Ok(out)
}

pub fn parse_unlabeled(text: &str, origin: &str, id_prefix: &str) -> Result<Vec<UnlabeledTable>> {
    let mut out = Vec::new();
    for (line_no, line) in content_lines(text) {
        let (mr, prov) = match line.split_once('\t') {
            Some((mr, p)) => (mr, p.parse().map_err(|e: String| format_err(origin, line_no, e))?),
            None => (line, Provenance::Human),
        };
        let table = parse_mr(mr)
            .map_err(|e| format_err(origin, line_no, e.to_string()))?
            .with_sample_id(format!("{id_prefix}{line_no}"));
        out.push(UnlabeledTable {
            table,
            provenance: prov,
        });
    }
    Ok(out)
}

pub fn read_parallel(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let p = path.as_ref();
    parse_samples(&fs::read_to_string(p)?, &p.display().to_string(), "p", Provenance::Human)
}

pub fn read_pseudo(path: impl AsRef<Path>) -> Result<Vec<Sample>> {
    let p = path.as_ref();
    parse_samples(
        &fs::read_to_string(p)?,
        &p.display().to_string(),
        "s",
        Provenance::PseudoSearch,
    )
}

pub fn read_unlabeled(path: impl AsRef<Path>) -> Result<Vec<UnlabeledTable>> {
    let p = path.as_ref();
    parse_unlabeled(&fs::read_to_string(p)?, &p.display().to_string(), "u")
}

fn clean(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}

/// Two columns for human pairs, three (with provenance) otherwise.
pub fn format_samples(samples: &[Sample], with_provenance: bool) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&s.table.to_mr());
        out.push('\t');
        out.push_str(&clean(&s.sentence.detokenize()));
        if with_provenance {
            out.push('\t');
            out.push_str(s.provenance.as_str());
        }
        out.push('\n');
    }
    out
}

pub fn format_unlabeled(tables: &[UnlabeledTable]) -> String {
    let mut out = String::new();
    for u in tables {
        out.push_str(&u.table.to_mr());
        if u.provenance != Provenance::Human {
            out.push('\t');
            out.push_str(u.provenance.as_str());
        }
        out.push('\n');
    }
    out
}

pub fn write_samples(path: impl AsRef<Path>, samples: &[Sample], with_provenance: bool) -> Result<()> {
    fs::write(path, format_samples(samples, with_provenance))?;
    Ok(())
}

pub fn write_unlabeled(path: impl AsRef<Path>, tables: &[UnlabeledTable]) -> Result<()> {
    fs::write(path, format_unlabeled(tables))?;
    Ok(())
}
