//! Kmer states, succession counts and Hamming neighborhoods.
//!
//!     cargo run --example state_space

use readhmm::index::{build_state_space, neighborhood, NeighborhoodIndex};
use readhmm::seq::{bases_from_str, Kmer, Read};

fn main() -> readhmm::Result<()> {
    let reads: Vec<Read> = ["ACGTACGGTCA", "ACGTACGGTCA", "ACGTACCGTCA", "TTGNACGTACG"]
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let b = bases_from_str(s).unwrap();
            Read::new(format!("r{i}"), b.clone(), vec![30; b.len()])
        })
        .collect();
    let space = build_state_space(&reads, 4)?;
    println!("{} states (kmers spanning an N are skipped)", space.len());
    space.write_dump(std::io::stdout().lock())?;

    let x = Kmer::parse("ACGG")?;
    for d in 0..=2 {
        let n = neighborhood(x, d, &space);
        let names: Vec<String> = n.members.iter().map(|&id| space.kmer(id).to_string()).collect();
        println!("N_{d}({x}) = {{{}}}", names.join(", "));
    }

    // the posting index answers the same queries for larger radii
    let idx = NeighborhoodIndex::new(&space, 3);
    println!("|N_3({x})| = {}", idx.query(x.bits()).len());
    Ok(())
}
