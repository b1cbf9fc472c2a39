//! Serve a model over TCP and drive the search through the remote client.
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;

use searchlearn::corpus::{read_parallel, to_pairs};
use searchlearn::lm::{DelexModel, Endpoint, LocalScorer, ModelServer, RemoteConfig, RemoteScorer, Scorer, Smoothing};
use searchlearn::search::{project_to_feasible, SlotFilter};
use searchlearn::tabular::{parse_mr, tokenize};
use searchlearn::templates::RuleSet;

fn main() -> searchlearn::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy");
    let model = DelexModel::fit(&to_pairs(&read_parallel(format!("{dir}/train.tsv"))?), 3, Smoothing::default_for(3))?;
    let local = LocalScorer::new(Arc::new(model.clone()));

    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let server = Arc::new(ModelServer::new(model, 1));
    thread::spawn(move || server.serve_tcp(listener));

    let remote = RemoteScorer::new(Endpoint::parse(&format!("tcp://{addr}"))?, RemoteConfig::default());
    println!("handshake: {:?}", remote.handshake()?);

    let table = parse_mr("name[Strada], food[Indian], area[city centre]")?;
    let cands = [tokenize("Strada serves Indian food."), tokenize("Strada is in the city centre.")];
    println!("remote {:?}\nlocal  {:?}", remote.score(&table, &cands)?, local.score(&table, &cands)?);
    println!("generate: {}", remote.generate(&table, 30)?);

    let (fixed, _) = project_to_feasible(&remote, &table, &cands[0], &RuleSet::e2e(), &SlotFilter::All)?;
    println!("repaired remotely: {fixed}");
    Ok(())
}
