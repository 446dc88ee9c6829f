//! Simulate a small genome at high coverage, fit the model, correct with both decoders and
//! score the result against the simulated truth.
//!
//!     cargo run --release --example end_to_end -- [lambda] [genome_len] [reads]

use std::time::Instant;

use rayon::prelude::*;
use readhmm::decode::{Corrector, FanoConfig};
use readhmm::eval::{default_quality_model, random_genome, score_corrections, simulate_reads};
use readhmm::index::build_state_space;
use readhmm::model::{fit, FitConfig};
use readhmm::seq::Read;

fn main() -> readhmm::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let lambda: f64 = args.first().map_or(250.0, |s| s.parse().expect("lambda"));
    let genome_len: usize = args.get(1).map_or(10_000, |s| s.parse().expect("genome length"));
    let n_reads: usize = args.get(2).map_or(40_000, |s| s.parse().expect("read count"));
    let (k, d, len) = (13, 4, 36);

    let genome = random_genome(genome_len, 1);
    let qm = default_quality_model(len, 40, 0.0123)?;
    let (reads, truth) = simulate_reads(&genome, n_reads, len, &qm, 2)?;

    let clock = Instant::now();
    let space = build_state_space(&reads, k)?;
    println!("{} kmers in the state space", space.len());
    let res = fit(&reads, space, &FitConfig { d, lambda, ..FitConfig::default() })?;
    for row in &res.trace {
        println!(
            "iter {:>2}  objective {:.6e}  nonzero {:>7}  states {:>7}",
            row.iteration, row.objective, row.nonzero, row.states
        );
    }
    println!("trained in {:.1?}", clock.elapsed());

    let model = &res.model;
    let corrector = Corrector::new(&model.params, &model.space);
    let fano = FanoConfig::new(0.5, 2.0)?;
    for name in ["aviterbi", "fano"] {
        let clock = Instant::now();
        let corrected: Vec<Read> = reads
            .par_iter()
            .zip(&truth.records)
            .map(|(r, t)| {
                let first = readhmm::seq::Kmer::encode(&t.true_bases[..k]).unwrap();
                let Some(init) = model.space.id_of(first) else { return r.clone() };
                let out = match name {
                    "fano" => corrector.fano(r, &fano, init),
                    _ => corrector.aviterbi(r, d, init),
                };
                match out {
                    Ok(res) => Read { bases: res.corrected, ..r.clone() },
                    Err(_) => r.clone(),
                }
            })
            .collect();
        let rep = score_corrections(&reads, &corrected, &truth, k)?;
        println!("{name:>8}: e {} ce {} fa {} zeta {:.4} eta {:.4} ({:.1?})", rep.e, rep.ce, rep.fa, rep.zeta, rep.eta, clock.elapsed());
    }
    Ok(())
}
