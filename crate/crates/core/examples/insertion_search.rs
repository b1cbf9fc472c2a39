//! Repair a decode that misses slots by inserting rendered phrases where the
//! scorer likes them best.
use std::sync::Arc;

use searchlearn::corpus::{read_parallel, to_pairs};
use searchlearn::lm::{DelexModel, LocalScorer, Smoothing};
use searchlearn::search::{best_insertion, project_to_feasible, SlotFilter};
use searchlearn::tabular::{parse_mr, tokenize};
use searchlearn::templates::RuleSet;

fn main() -> searchlearn::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let pairs = to_pairs(&read_parallel(format!("{dir}/train.tsv"))?);
    let scorer = LocalScorer::new(Arc::new(DelexModel::fit(&pairs, 3, Smoothing::default_for(3))?));
    let rules = RuleSet::e2e();

    let table = parse_mr("name[Cotto], eatType[pub], food[French], area[riverside], familyFriendly[no], near[Ranch]")?;
    let draft = tokenize("Cotto is a pub.");

    let one = best_insertion(&scorer, &table, &draft, &tokenize("near Ranch"))?;
    println!("single insertion at {} of {}: {}", one.position, one.candidates, one.sentence);

    let (fixed, trace) = project_to_feasible(&scorer, &table, &draft, &rules, &SlotFilter::All)?;
    for step in &trace.steps {
        println!("  + {:<22} at {:>2} (score {:.2}, {} candidates)", step.phrase, step.position, step.score, step.candidates);
    }
    println!("draft: {draft}\nfixed: {fixed}");
    Ok(())
}
