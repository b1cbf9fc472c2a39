//! Hard coverage, soft slot matching, and pooled SER over a few outputs.
use searchlearn::eval::evaluate;
use searchlearn::matching::{classify_soft, find_missing_with, MatchPatterns};
use searchlearn::tabular::{parse_mr, tokenize};
use searchlearn::templates::RuleSet;

fn main() -> searchlearn::Result<()> {
    let rules = RuleSet::e2e();
    let patterns = MatchPatterns::e2e();
    let tables = vec![
        parse_mr("name[Aromi], eatType[coffee shop], area[riverside], familyFriendly[yes]")?,
        parse_mr("name[The Mill], food[Italian], priceRange[cheap]")?,
    ];
    let outputs = vec![
        tokenize("Aromi is a coffee shop by the river. It is kid friendly."),
        tokenize("The Mill serves cheap Italian food in the city centre."),
    ];
    for (t, o) in tables.iter().zip(&outputs) {
        let missing: Vec<_> = find_missing_with(t, o, Some(&rules)).iter().map(|s| s.name().to_string()).collect();
        let soft = classify_soft(t, o, &patterns)?;
        println!("{o}\n  hard-missing {missing:?}\n  soft {:?}", soft.counts());
    }
    let report = evaluate(&outputs, &tables, None, &patterns, Some(&rules))?;
    print!("{report}");
    assert!(report.identities_hold());
    Ok(())
}
