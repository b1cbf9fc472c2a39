//! Fit the delexicalized n-gram model on the toy corpus, decode a few
//! held-out tables, and save the model.
use searchlearn::corpus::{read_parallel, to_pairs};
use searchlearn::lm::{decode, DelexModel, Smoothing};

fn main() -> searchlearn::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let train = to_pairs(&read_parallel(format!("{dir}/train.tsv"))?);
    let test = read_parallel(format!("{dir}/test.tsv"))?;
    let model = DelexModel::fit(&train, 3, Smoothing::default_for(3))?;
    println!("vocab {} fingerprint {}", model.vocab().len(), model.fingerprint());

    for s in test.iter().take(3) {
        println!("{}", s.table.to_mr());
        for beam in [1, 4] {
            let out = decode(&model, &s.table, 40, beam)?;
            println!("  beam {beam}: {out}  (log p = {:.3})", model.log_prob(&s.table, &out));
        }
    }

    let path = std::env::temp_dir().join("searchlearn-toy-model.json");
    model.save(&path)?;
    let reloaded = DelexModel::load(&path)?;
    assert_eq!(reloaded.to_json(), model.to_json());
    println!("saved to {}", path.display());
    Ok(())
}
