//! Fit the penalized HMM to simulated reads and save it.
//!
//!     cargo run --release --example train_model -- [lambda]

use std::fs::File;
use std::io::BufWriter;

use readhmm::eval::{default_quality_model, random_genome, simulate_reads};
use readhmm::index::build_state_space;
use readhmm::model::{fit, read_model, write_model, FitConfig};

fn main() -> readhmm::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(250.0, |s| s.parse().expect("lambda"));
    let genome = random_genome(5_000, 3);
    let qm = default_quality_model(36, 40, 0.0123)?;
    let (reads, _) = simulate_reads(&genome, 20_000, 36, &qm, 4)?;

    let space = build_state_space(&reads, 13)?;
    let cfg = FitConfig { d: 4, gamma: 1e-4, lambda, ..FitConfig::default() };
    let res = fit(&reads, space, &cfg)?;
    println!("iter  log-likelihood     penalty   nonzero   states");
    for r in &res.trace {
        println!("{:>4}  {:>14.2}  {:>10.2}  {:>8}  {:>7}", r.iteration, r.loglik, r.penalty, r.nonzero, r.states);
    }

    let path = std::env::temp_dir().join("readhmm-example-model.txt");
    write_model(BufWriter::new(File::create(&path)?), &res.model, &[format!("lambda={lambda}")])?;
    let back = read_model(std::io::BufReader::new(File::open(&path)?))?;
    assert_eq!(back.params, res.model.params);
    println!("model written to {}", path.display());

    let p = &res.model.params;
    let e = p.n_emissions() - 1;
    println!("P(call C | true A) at the last position: {:.4}", p.confusion[e][0][1]);
    Ok(())
}
