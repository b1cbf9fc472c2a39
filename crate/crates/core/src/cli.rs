//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 remote scorer failure.

use std::fs;
use std::io::{self, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{self, Provenance, Sample};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::lm::{DelexModel, Endpoint, ModelServer, RemoteConfig, RemoteScorer, ScorerHandle};
use crate::matching::MatchPatterns;
use crate::pipeline::{self, local_handle, PipelineConfig};
use crate::search::SlotStats;
use crate::tabular::{Sentence, Table};
use crate::templates::RuleSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_REMOTE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "searchlearn", version, about = "Search-and-learn for few-shot data-to-text generation")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Flat key=value pipeline config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Phrase rule file (default: bundled E2E rules).
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    /// Soft-match pattern file (default: bundled E2E patterns).
    #[arg(long, global = true)]
    patterns: Option<PathBuf>,
    /// `builtin`, `tcp://host:port`, or `cmd:<program> [args]`.
    #[arg(long, global = true)]
    scorer: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Fit the first-stage model on a parallel corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Synthesize unlabeled tables by recombining slot values.
    Augment {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(short = 'n', long, default_value_t = 400)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode unlabeled tables and repair them by insertion search.
    Search {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        tables: PathBuf,
        /// Parallel corpus for slot-selection statistics.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Write one JSON line per insertion step.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Fit the second-stage model on human plus pseudo pairs.
    Retrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        pseudo: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Self-training baseline: retrain on raw decodes.
    Selftrain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        pseudo_out: Option<PathBuf>,
    },
    /// Generate text for tables without search.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tables: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score outputs (`MR<TAB>text` lines) for coverage and SER.
    Eval {
        #[arg(long)]
        input: PathBuf,
        /// References, one per line, aligned with the input.
        #[arg(long)]
        refs: Option<PathBuf>,
        /// Machine-readable JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a remote scorer speaks the protocol.
    ServeCheck,
    /// Serve a built-in model over the scorer protocol (stdio or TCP).
    Serve {
        #[arg(long)]
        model: PathBuf,
        /// `host:port`; stdio when omitted.
        #[arg(long)]
        listen: Option<String>,
    },
}

struct Ctx {
    config: PipelineConfig,
    rules: RuleSet,
    patterns_path: Option<PathBuf>,
}

impl Ctx {
    fn from_globals(g: &GlobalOpts) -> Result<Self> {
        let mut config = match &g.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = g.seed {
            config.seed = seed;
        }
        if let Some(s) = &g.scorer {
            config.scorer = (s != "builtin").then(|| s.clone());
        }
        let rules = match &g.rules {
            Some(p) => RuleSet::load(p)?,
            None => RuleSet::e2e(),
        };
        Ok(Ctx {
            config,
            rules,
            patterns_path: g.patterns.clone(),
        })
    }

    fn patterns(&self) -> Result<MatchPatterns> {
        match &self.patterns_path {
            Some(p) => MatchPatterns::load(p),
            None => Ok(MatchPatterns::e2e()),
        }
    }

    fn remote(&self) -> Result<Option<RemoteScorer>> {
        match &self.config.scorer {
            None => Ok(None),
            Some(ep) => Ok(Some(RemoteScorer::new(
                Endpoint::parse(ep)?,
                RemoteConfig::default(),
            ))),
        }
    }

    fn scorer(&self, model: Option<&Path>) -> Result<ScorerHandle> {
        if let Some(r) = self.remote()? {
            return Ok(ScorerHandle::Remote(r));
        }
        let path = model.ok_or_else(|| {
            Error::InvalidArgument("--model is required with the builtin scorer".into())
        })?;
        Ok(local_handle(Arc::new(DelexModel::load(path)?), &self.config))
    }
}

fn tables_of(path: &Path) -> Result<Vec<Table>> {
    Ok(corpus::read_unlabeled(path)?
        .into_iter()
        .map(|u| u.table)
        .collect())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_remote() {
        EXIT_REMOTE
    } else {
        EXIT_DATA
    }
}

/// Runs the CLI with `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let ctx = Ctx::from_globals(&cli.global)?;
    let cfg = &ctx.config;
    match cli.command {
        Cmd::Train { corpus, model_out } => {
            let samples = corpus::read_parallel(&corpus)?;
            let model = pipeline::stage1(&samples, cfg)?;
            model.save(&model_out)?;
            writeln!(
                out,
                "trained on {} pairs, vocab {}, fingerprint {}",
                samples.len(),
                model.vocab().len(),
                model.fingerprint()
            )?;
        }
        Cmd::Augment { corpus, count, out: path } => {
            let tables: Vec<Table> = corpus::read_parallel(&corpus)?
                .into_iter()
                .map(|s| s.table)
                .collect();
            let synth = pipeline::recombine(&tables, count, cfg.seed)?;
            corpus::write_unlabeled(&path, &synth)?;
            writeln!(out, "wrote {} recombined tables", synth.len())?;
        }
        Cmd::Search {
            model,
            tables,
            corpus: corpus_path,
            out: path,
            trace,
        } => {
            let scorer = ctx.scorer(model.as_deref())?;
            let tables = tables_of(&tables)?;
            let stats = match &corpus_path {
                Some(p) => Some(SlotStats::from_pairs(
                    &corpus::to_pairs(&corpus::read_parallel(p)?),
                    Some(&ctx.rules),
                )?),
                None => None,
            };
            if cfg.uses_slot_selection() && stats.is_none() {
                return Err(Error::InvalidArgument(
                    "slot-selection thresholds need --corpus".into(),
                ));
            }
            let pseudo = pipeline::build_pseudo_corpus(&scorer, &tables, &ctx.rules, cfg, stats.as_ref())?;
            let samples: Vec<Sample> = pseudo.iter().map(|p| p.sample.clone()).collect();
            corpus::write_samples(&path, &samples, true)?;
            if let Some(tp) = trace {
                let mut lines = String::new();
                for p in &pseudo {
                    lines.push_str(&p.trace.to_json_lines(p.sample.id().unwrap_or("")));
                }
                fs::write(tp, lines)?;
            }
            let inserted: usize = pseudo.iter().map(|p| p.trace.steps.len()).sum();
            writeln!(out, "wrote {} pseudo pairs ({inserted} insertions)", samples.len())?;
        }
        Cmd::Retrain {
            corpus,
            pseudo,
            model_out,
        } => {
            let human = corpus::read_parallel(&corpus)?;
            let pseudo = corpus::read_pseudo(&pseudo)?;
            let model = pipeline::stage2(&human, &pseudo, cfg)?;
            model.save(&model_out)?;
            writeln!(
                out,
                "retrained on {} human + {} pseudo pairs, fingerprint {}",
                human.len(),
                pseudo.len(),
                model.fingerprint()
            )?;
        }
        Cmd::Selftrain {
            model,
            corpus,
            tables,
            model_out,
            pseudo_out,
        } => {
            let model = DelexModel::load(&model)?;
            let human = corpus::read_parallel(&corpus)?;
            let tables = tables_of(&tables)?;
            let (retrained, pseudo) = pipeline::self_train(&model, &human, &tables, cfg)?;
            retrained.save(&model_out)?;
            if let Some(p) = pseudo_out {
                corpus::write_samples(p, &pseudo, true)?;
            }
            writeln!(out, "self-trained on {} + {} pairs", human.len(), pseudo.len())?;
        }
        Cmd::Infer {
            model,
            tables,
            out: path,
        } => {
            let model = DelexModel::load(&model)?;
            let tables = tables_of(&tables)?;
            let outputs = pipeline::infer_all(&model, &tables, cfg)?;
            let samples: Vec<Sample> = tables
                .into_iter()
                .zip(outputs)
                .map(|(table, sentence)| Sample {
                    table,
                    sentence,
                    provenance: Provenance::Human,
                })
                .collect();
            corpus::write_samples(&path, &samples, false)?;
            writeln!(out, "wrote {} outputs", samples.len())?;
        }
        Cmd::Eval {
            input,
            refs,
            out: json_out,
        } => {
            let samples = corpus::read_pseudo(&input)?;
            let tables: Vec<Table> = samples.iter().map(|s| s.table.clone()).collect();
            let outputs: Vec<Sentence> = samples.iter().map(|s| s.sentence.clone()).collect();
            let refs: Option<Vec<Sentence>> = match refs {
                Some(p) => Some(
                    fs::read_to_string(p)?
                        .lines()
                        .map(Sentence::tokenize)
                        .collect(),
                ),
                None => None,
            };
            let report = evaluate(&outputs, &tables, refs.as_deref(), &ctx.patterns()?, Some(&ctx.rules))?;
            debug_assert!(report.identities_hold());
            write!(out, "{report}")?;
            if let Some(p) = json_out {
                fs::write(p, serde_json::to_string_pretty(&report.to_json())? + "\n")?;
            }
        }
        Cmd::ServeCheck => {
            let remote = ctx.remote()?.ok_or_else(|| {
                Error::InvalidArgument("serve-check needs --scorer tcp://... or cmd:...".into())
            })?;
            let scores = remote.handshake()?;
            if scores.len() != 3 || scores[0] != scores[2] {
                return Err(Error::Protocol(format!(
                    "handshake expected 3 scores with equal duplicates, got {scores:?}"
                )));
            }
            writeln!(out, "ok: {:?} answered 3 candidates {:?}", remote.endpoint(), scores)?;
        }
        Cmd::Serve { model, listen } => {
            let server = ModelServer::new(DelexModel::load(&model)?, cfg.beam_width);
            match listen {
                Some(addr) => {
                    let listener = TcpListener::bind(&addr)?;
                    writeln!(out, "listening on {}", listener.local_addr()?)?;
                    out.flush()?;
                    Arc::new(server).serve_tcp(listener)?;
                }
                None => {
                    let stdin = io::stdin();
                    server.serve(stdin.lock(), io::stdout().lock())?;
                }
            }
        }
    }
    Ok(())
}
