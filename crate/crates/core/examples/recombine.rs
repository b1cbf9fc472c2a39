//! Synthesize unlabeled tables by resampling slot values from a small corpus.
use searchlearn::corpus::read_parallel;
use searchlearn::pipeline::recombine;
use searchlearn::tabular::Table;

fn main() -> searchlearn::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let tables: Vec<Table> = read_parallel(format!("{dir}/train.tsv"))?.into_iter().map(|s| s.table).collect();
    let synth = recombine(&tables, 5, 42)?;
    for u in &synth {
        println!("{}\t{}", u.table.to_mr(), u.provenance);
    }
    Ok(())
}
