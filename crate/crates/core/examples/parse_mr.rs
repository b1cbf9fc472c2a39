//! Parse an MR, linearize it, and round-trip a sentence through the
//! tokenizer and the delexicalizer.
use searchlearn::tabular::{delexicalize, detokenize, parse_mr, relexicalize, tokenize};

fn main() -> searchlearn::Result<()> {
    let table = parse_mr("name[The Eagle], eatType[coffee shop], customer rating[3 out of 5], area[riverside]")?;
    println!("slots:      {}", table.len());
    println!("linearized: {}", table.linearize());
    println!("mr:         {}", table.to_mr());

    let text = "The Eagle is a coffee shop in the riverside area, rated 3 out of 5.";
    let sentence = tokenize(text);
    println!("tokens:     {:?}", sentence.words().collect::<Vec<_>>());
    assert_eq!(detokenize(&sentence), text);

    let delex = delexicalize(&sentence, &table);
    println!("delex:      {}", delex.symbols().join(" "));
    let back = relexicalize(&delex, &table)?;
    assert_eq!(detokenize(&back), text);
    println!("round trip ok");
    Ok(())
}
