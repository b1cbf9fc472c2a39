//! The full two-stage pipeline on the toy corpus, compared with the
//! self-training baseline on held-out tables.
use std::time::Instant;

use searchlearn::corpus::{read_parallel, read_unlabeled};
use searchlearn::eval::evaluate;
use searchlearn::matching::MatchPatterns;
use searchlearn::pipeline::{infer_all, search_and_learn, self_train, PipelineConfig};
use searchlearn::tabular::Table;
use searchlearn::templates::RuleSet;

fn main() -> searchlearn::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let cfg = PipelineConfig::load(format!("{dir}/toy.cfg"))?;
    let human = read_parallel(format!("{dir}/train.tsv"))?;
    let unlabeled: Vec<Table> = read_unlabeled(format!("{dir}/unlabeled.txt"))?.into_iter().map(|u| u.table).collect();
    let test = read_parallel(format!("{dir}/test.tsv"))?;
    let test_tables: Vec<Table> = test.iter().map(|s| s.table.clone()).collect();
    let refs: Vec<_> = test.iter().map(|s| s.sentence.clone()).collect();
    let rules = RuleSet::e2e();
    let patterns = MatchPatterns::e2e();

    let t0 = Instant::now();
    let run = search_and_learn(&human, &unlabeled, &rules, &cfg)?;
    println!("search-and-learn: {} pseudo pairs in {:.2?}", run.pseudo.len(), t0.elapsed());
    let (selftrained, _) = self_train(&run.stage1, &human, &unlabeled, &cfg)?;

    for (label, model) in [("stage 1", &run.stage1), ("self-train", &selftrained), ("stage 2", &run.stage2)] {
        let outputs = infer_all(model, &test_tables, &cfg)?;
        let report = evaluate(&outputs, &test_tables, Some(&refs), &patterns, Some(&rules))?;
        println!("== {label}");
        print!("{report}");
    }
    Ok(())
}
