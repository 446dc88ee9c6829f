//! Correct single reads with the Hamming-constrained Viterbi decoder.
//!
//!     cargo run --release --example aviterbi

use readhmm::decode::{pick_initial_state, Corrector};
use readhmm::eval::{default_quality_model, random_genome, simulate_reads};
use readhmm::index::{build_state_space, NeighborhoodIndex};
use readhmm::model::{fit, FitConfig};
use readhmm::seq::bases_to_string;

fn main() -> readhmm::Result<()> {
    let genome = random_genome(5_000, 5);
    let qm = default_quality_model(36, 40, 0.0123)?;
    let (reads, truth) = simulate_reads(&genome, 20_000, 36, &qm, 6)?;
    let space = build_state_space(&reads, 13)?;
    let model = fit(&reads, space, &FitConfig::default())?.model;

    let corrector = Corrector::new(&model.params, &model.space);
    let nbhd = NeighborhoodIndex::new(&model.space, 4);
    let mut shown = 0;
    for (read, t) in reads.iter().zip(&truth.records) {
        if read.bases == t.true_bases || shown == 5 {
            continue;
        }
        shown += 1;
        let first = read.kmers(13)[0].expect("simulated reads have no N");
        let Some(init) = pick_initial_state(first, &model.space, &model.params, &nbhd) else { continue };
        match corrector.aviterbi(read, 4, init) {
            Ok(res) => {
                println!("{}  called    {}", read.id, bases_to_string(&read.bases));
                println!("{}  corrected {}  (ln score {:.2})", read.id, bases_to_string(&res.corrected), res.score);
                println!("{}  truth     {}\n", read.id, bases_to_string(&t.true_bases));
            }
            Err(e) => println!("{}: {e}\n", read.id),
        }
    }
    Ok(())
}
