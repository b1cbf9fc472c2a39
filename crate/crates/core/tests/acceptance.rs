//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are fixed below.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{covered, lower_words, slot_needle, HashScorer, Toy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use searchlearn::corpus::{format_samples, to_pairs, Sample};
use searchlearn::eval::{evaluate, EvalReport};
use searchlearn::lm::{decode, DelexModel, Scorer};
use searchlearn::matching::{classify_soft, ser, Fraction, MatchPatterns, SerCounts};
use searchlearn::pipeline::{
    build_pseudo_corpus, infer_all, local_handle, search_and_learn, self_train, stage1, PipelineConfig,
};
use searchlearn::search::{best_insertion, project_to_feasible, SlotFilter};
use searchlearn::tabular::{detokenize, parse_mr, tokenize, Sentence, Table};
use searchlearn::templates::RuleSet;

const FEASIBILITY_BUDGET: Duration = Duration::from_secs(60);
const NORMALIZATION_TOL: f64 = 1e-9;
const NORMALIZATION_CONTEXTS: usize = 1000;
const ARGMAX_CASES: usize = 200;
const ROUND_TRIP_CASES: usize = 1000;
const SEED: u64 = 0x5eed;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn feasibility(toy: &Toy) -> Outcome {
    let rules = RuleSet::e2e();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let pseudo = pool.install(|| {
        let m = Arc::new(stage1(&toy.train, &toy.config).unwrap());
        build_pseudo_corpus(&local_handle(m, &toy.config), &toy.unlabeled, &rules, &toy.config, None).unwrap()
    });
    let elapsed = start.elapsed();
    let (mut hit, mut total) = (0usize, 0usize);
    for p in &pseudo {
        let w = lower_words(&p.sample.sentence.to_string());
        for slot in p.sample.table.slots() {
            total += 1;
            hit += covered(&w, &slot_needle(slot)) as usize;
        }
    }
    check(
        hit == total && pseudo.len() == toy.unlabeled.len() && elapsed < FEASIBILITY_BUDGET,
        format!(
            "{} pairs from {} human / {} unlabeled, coverage {hit}/{total}, {:.2?} on 1 thread (budget {:?})",
            pseudo.len(),
            toy.train.len(),
            toy.unlabeled.len(),
            elapsed,
            FEASIBILITY_BUDGET
        ),
    )
}

fn argmax_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let vocab = ["the", "a", "pub", "is", "near", "Ranch", ".", ",", "cheap", "in", "riverside", "area"];
    let table = parse_mr("name[X]").unwrap();
    let mut mismatches = 0;
    for _ in 0..ARGMAX_CASES {
        let words: Vec<String> = (0..rng.gen_range(0..12)).map(|_| vocab.choose(&mut rng).unwrap().to_string()).collect();
        let phrase: Vec<String> = (0..rng.gen_range(1..4)).map(|_| vocab.choose(&mut rng).unwrap().to_string()).collect();
        let scorer = HashScorer { buckets: rng.gen_range(2..6), salt: rng.gen() };
        let got = best_insertion(&scorer, &table, &Sentence::from_words(&words), &Sentence::from_words(&phrase)).unwrap();
        let mut best: Option<(usize, f64)> = None;
        for p in 0..=words.len() {
            let mut cand = words[..p].to_vec();
            cand.extend(phrase.iter().cloned());
            cand.extend(words[p..].iter().cloned());
            let sc = scorer.score_words(&cand.iter().map(|w| w.to_lowercase()).collect::<Vec<_>>());
            if best.is_none_or(|(_, b)| sc > b) {
                best = Some((p, sc));
            }
        }
        if best != Some((got.position, got.score)) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{ARGMAX_CASES} cases, {mismatches} mismatches (exact position and score)"))
}

fn ser_arithmetic() -> Outcome {
    let p = MatchPatterns::e2e();
    let fixtures = [
        ("name[Aromi], area[riverside]", "Aromi is in the riverside area.", Fraction::new(0, 2)),
        ("name[Aromi], area[riverside]", "Aromi is in the city centre.", Fraction::new(1, 2)),
        ("name[Aromi], food[Thai]", "Aromi serves Thai food near Café Rouge.", Fraction::new(1, 2)),
        ("name[Aromi], eatType[pub], area[city centre]", "A coffee shop.", Fraction::new(3, 3)),
    ];
    let fixtures_ok = fixtures
        .iter()
        .all(|(mr, text, want)| ser(&classify_soft(&parse_mr(mr).unwrap(), &tokenize(text), &p).unwrap()).unwrap() == *want);
    let pooled = SerCounts { added: 7, missing: 177, wrong: 0, slots: 10_000 };
    let r = EvalReport::from_counts(pooled, Fraction::from_integer(1), 1, 0.0).unwrap();
    let pooled_ok = r.ser == Fraction::new(184, 10_000) && r.soft_coverage == Fraction::new(9_816, 10_000);
    check(
        fixtures_ok && pooled_ok,
        format!(
            "{} fixtures exact; 0.07%+1.77%+0.00% -> SER {} ({:.2}%), soft {} ({:.2}%)",
            fixtures.len(),
            r.ser,
            100.0 * *r.ser.numer() as f64 / *r.ser.denom() as f64,
            r.soft_coverage,
            100.0 * *r.soft_coverage.numer() as f64 / *r.soft_coverage.denom() as f64
        ),
    )
}

fn normalization(toy: &Toy) -> Outcome {
    let m = DelexModel::fit(&to_pairs(&toy.train), toy.config.order, toy.config.smoothing.clone()).unwrap();
    let tables = toy.test_tables();
    let vocab = m.vocab().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0f64;
    for _ in 0..NORMALIZATION_CONTEXTS {
        let ctx: Vec<String> = (0..rng.gen_range(0..8))
            .map(|_| if rng.gen_bool(0.1) { "oov-token".to_string() } else { vocab.choose(&mut rng).unwrap().clone() })
            .collect();
        let t = tables.choose(&mut rng).unwrap();
        let total: f64 = m.next_token_dist(&ctx, t).values().sum();
        worst = worst.max((total - 1.0).abs());
    }
    check(
        worst <= NORMALIZATION_TOL,
        format!("{NORMALIZATION_CONTEXTS} contexts, max |sum - 1| = {worst:.3e} (tol {NORMALIZATION_TOL:e})"),
    )
}

struct Run {
    model_json: [String; 3],
    pseudo_text: String,
    reports: Vec<EvalReport>,
    report_json: String,
}

/// Full pipeline: stage 1, search, stage 2, plus the self-training baseline,
/// each evaluated on the held-out tables; also the pseudo corpus itself.
fn full_run(toy: &Toy) -> Run {
    let rules = RuleSet::e2e();
    let patterns = MatchPatterns::e2e();
    let sl = search_and_learn(&toy.train, &toy.unlabeled, &rules, &toy.config).unwrap();
    let (st, _) = self_train(&sl.stage1, &toy.train, &toy.unlabeled, &toy.config).unwrap();
    let tables = toy.test_tables();
    let refs: Vec<Sentence> = toy.test.iter().map(|s| s.sentence.clone()).collect();
    let mut reports = Vec::new();
    for m in [&sl.stage1, &sl.stage2, &st] {
        let outs = infer_all(m, &tables, &toy.config).unwrap();
        reports.push(evaluate(&outs, &tables, Some(&refs), &patterns, Some(&rules)).unwrap());
    }
    let pseudo: Vec<Sample> = sl.pseudo_samples();
    let pt: Vec<Table> = pseudo.iter().map(|s| s.table.clone()).collect();
    let ps: Vec<Sentence> = pseudo.iter().map(|s| s.sentence.clone()).collect();
    reports.push(evaluate(&ps, &pt, None, &patterns, Some(&rules)).unwrap());
    let report_json = serde_json::to_string(&reports.iter().map(EvalReport::to_json).collect::<Vec<_>>()).unwrap();
    Run {
        model_json: [sl.stage1.to_json(), sl.stage2.to_json(), st.to_json()],
        pseudo_text: format_samples(&pseudo, true),
        reports,
        report_json,
    }
}

fn identities(run: &Run) -> Outcome {
    let n = run.reports.len();
    let ok = run.reports.iter().filter(|r| r.identities_hold()).count();
    check(ok == n, format!("{ok}/{n} eval runs satisfy soft = 1 - ser and ser = add + miss + wrong exactly"))
}

fn coverage_direction(run: &Run) -> Outcome {
    let [s1, s2, st] = [&run.reports[0], &run.reports[1], &run.reports[2]];
    let pct = |f: Fraction| 100.0 * *f.numer() as f64 / *f.denom() as f64;
    check(
        s2.hard_coverage >= s1.hard_coverage && s2.hard_coverage >= st.hard_coverage,
        format!(
            "held-out hard coverage: stage-1 {:.2}%, self-train {:.2}%, stage-2 {:.2}%",
            pct(s1.hard_coverage),
            pct(st.hard_coverage),
            pct(s2.hard_coverage)
        ),
    )
}

fn efficiency(toy: &Toy) -> Outcome {
    let rules = RuleSet::e2e();
    let m = Arc::new(stage1(&toy.train, &toy.config).unwrap());
    let handle = local_handle(m.clone(), &toy.config);
    let tables = toy.test_tables();
    let cfg = &toy.config;
    let time = |f: &dyn Fn()| {
        (0..3)
            .map(|_| {
                let t = Instant::now();
                f();
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let infer_t = time(&|| {
        for t in &tables {
            decode(&m, t, cfg.max_len, cfg.beam_width).unwrap();
        }
    });
    let search_t = time(&|| {
        for t in &tables {
            let y = decode(&m, t, cfg.max_len, cfg.beam_width).unwrap();
            project_to_feasible(&handle as &dyn Scorer, t, &y, &rules, &SlotFilter::All).unwrap();
        }
    });
    check(
        infer_t < search_t,
        format!(
            "{} tables: infer {:.2?}, decode+search {:.2?} ({:.2}x)",
            tables.len(),
            infer_t,
            search_t,
            search_t.as_secs_f64() / infer_t.as_secs_f64()
        ),
    )
}

fn random_mr(rng: &mut ChaCha8Rng) -> (String, usize) {
    let names = ["name", "food", "area", "near", "eattype", "customer rating", "price range", "x"];
    let alphabet: Vec<char> = "abcdefghijklmnopqrstuvwxyzABCXYZ0123456789£é-".chars().collect();
    let mut chosen: Vec<&str> = names.to_vec();
    chosen.shuffle(rng);
    chosen.truncate(rng.gen_range(1..=names.len()));
    let seps = [", ", ",", " ", ""];
    let sep = seps.choose(rng).unwrap();
    let mr = chosen
        .iter()
        .map(|n| {
            let words: Vec<String> = (0..rng.gen_range(1..4))
                .map(|_| (0..rng.gen_range(1..7)).map(|_| *alphabet.choose(rng).unwrap()).collect())
                .collect();
            format!("{n}[{}]", words.join(" "))
        })
        .collect::<Vec<_>>()
        .join(sep);
    (mr, chosen.len())
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let pieces = ["The", "mill", "£20-25", "café", "5", ".", ",", "!", "?", ";", ":", " ", "  ", "\t", "\n", "x.y", "a,b"];
    (0..rng.gen_range(0..25)).map(|_| *pieces.choose(rng).unwrap()).collect()
}

fn round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut failures = Vec::new();
    for i in 0..ROUND_TRIP_CASES {
        let (mr, n) = random_mr(&mut rng);
        let t = parse_mr(&mr).unwrap();
        let lin = t.linearize();
        if t.len() != n || parse_mr(&lin).unwrap() != t || parse_mr(&t.to_mr()).unwrap() != t {
            failures.push(format!("mr #{i}"));
        }
        let s = random_text(&mut rng);
        if detokenize(&tokenize(&s)) != s {
            failures.push(format!("text #{i}"));
        }
    }
    check(
        failures.is_empty(),
        format!("{ROUND_TRIP_CASES} MR + {ROUND_TRIP_CASES} text fixtures, failures: {failures:?}"),
    )
}

fn determinism(a: &Run, b: &Run) -> Outcome {
    let same_models = a.model_json == b.model_json;
    let same_pseudo = a.pseudo_text == b.pseudo_text;
    let same_reports = a.report_json == b.report_json;
    check(
        same_models && same_pseudo && same_reports,
        format!("models identical: {same_models}, pseudo corpus identical: {same_pseudo}, reports identical: {same_reports}"),
    )
}

fn main() {
    let toy = Toy::load();
    assert!(toy.train.len() >= 100 && toy.unlabeled.len() >= 400, "toy corpus too small");
    assert_eq!(toy.config, PipelineConfig::load(common::toy_path("toy.cfg")).unwrap());

    let run_a = full_run(&toy);
    let run_b = full_run(&toy);

    let results: Vec<(&str, Outcome)> = vec![
        ("feasibility", feasibility(&toy)),
        ("argmax-oracle", argmax_oracle()),
        ("ser-arithmetic", ser_arithmetic()),
        ("report-identities", identities(&run_a)),
        ("normalization", normalization(&toy)),
        ("coverage-direction", coverage_direction(&run_a)),
        ("inference-efficiency", efficiency(&toy)),
        ("round-trips", round_trips()),
        ("determinism", determinism(&run_a, &run_b)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
