use proptest::prelude::*;
use searchlearn::eval::evaluate;
use searchlearn::matching::{classify_soft, ser, Fraction, MatchPatterns, SerCounts};
use searchlearn::tabular::{parse_mr, tokenize};
use searchlearn::Error;

fn f(n: i64, d: i64) -> Fraction {
    Fraction::new(n, d)
}

#[test]
fn hand_built_fixtures() {
    let p = MatchPatterns::e2e();
    // (mr, text, added, missing, wrong)
    let cases = [
        ("name[Aromi], area[riverside]", "Aromi is in the riverside area.", 0, 0, 0),
        ("name[Aromi], area[riverside]", "Aromi is in the city centre.", 0, 0, 1),
        ("name[Aromi], area[riverside]", "Aromi is a place.", 0, 1, 0),
        ("name[Aromi], food[Thai]", "Aromi serves Thai food near Café Rouge.", 1, 0, 0),
        ("name[Aromi], familyFriendly[yes]", "Aromi is not family friendly.", 0, 0, 1),
        ("name[Aromi], familyFriendly[no]", "Aromi is kid friendly.", 0, 0, 1),
        ("name[Aromi], eatType[pub], area[city centre]", "A coffee shop.", 0, 2, 1),
    ];
    for (mr, text, a, m, w) in cases {
        let t = parse_mr(mr).unwrap();
        let r = classify_soft(&t, &tokenize(text), &p).unwrap();
        let c = r.counts();
        assert_eq!((c.added, c.missing, c.wrong), (a as u64, m as u64, w as u64), "{mr} / {text}");
        let n = t.len() as i64;
        assert_eq!(ser(&r).unwrap(), f((a + m + w) as i64, n), "{mr} / {text}");
    }
}

#[test]
fn pooled_breakdown_from_reported_table() {
    // 0.07% added, 1.77% missing, 0% wrong over 10000 slots
    let c = SerCounts { added: 7, missing: 177, wrong: 0, slots: 10_000 };
    assert_eq!(c.ser().unwrap(), f(184, 10_000));
    assert_eq!(c.soft_coverage().unwrap(), f(9_816, 10_000));
    assert!(matches!(SerCounts::default().ser(), Err(Error::ZeroSlots)));
}

proptest! {
    #[test]
    fn report_identities_hold(counts in prop::collection::vec((0u64..4, 0u64..4, 0u64..4, 1u64..8), 1..20)) {
        let mut pooled = SerCounts::default();
        for (a, m, w, extra) in counts {
            pooled += SerCounts { added: a, missing: m, wrong: w, slots: m + w + extra };
        }
        let ser = pooled.ser().unwrap();
        prop_assert_eq!(pooled.soft_coverage().unwrap(), Fraction::from_integer(1) - ser);
        prop_assert_eq!(ser, pooled.added_rate().unwrap() + pooled.missing_rate().unwrap() + pooled.wrong_rate().unwrap());
    }
}

#[test]
fn evaluate_outputs_identities_and_bleu_identity() {
    let tables = vec![parse_mr("name[Aromi], area[riverside]").unwrap(), parse_mr("name[Zizzi], food[Thai], near[Ranch]").unwrap()];
    let outs = vec![tokenize("Aromi is by the river in the city centre."), tokenize("Zizzi is near Ranch.")];
    let r = evaluate(&outs, &tables, Some(&outs), &MatchPatterns::e2e(), None).unwrap();
    assert!(r.identities_hold());
    assert_eq!(r.bleu_plumbing, Some(1.0));
    assert_eq!(r.counts.slots, 5);
}
