//! Sample reads from a random genome with the default position-dependent quality model.
//!
//!     cargo run --release --example simulate_reads

use readhmm::eval::{default_quality_model, phred_error, random_genome, simulate_reads};
use readhmm::seq::{bases_to_string, write_fastq};

fn main() -> readhmm::Result<()> {
    let genome = random_genome(10_000, 1);
    let qm = default_quality_model(36, 40, 0.0123)?;
    println!("implied error rate {:.4}%", 100.0 * qm.implied_error_rate());
    for t in [0, 17, 35] {
        let mean_err: f64 = qm.pmf(t).iter().enumerate().map(|(i, p)| p * phred_error(i as u8 + 1)).sum();
        println!("  position {:>2}: expected error {:.4}%", t + 1, 100.0 * mean_err);
    }

    let (reads, truth) = simulate_reads(&genome, 40_000, 36, &qm, 2)?;
    let errors = truth.total_errors(&reads)?;
    println!("{} reads, {errors} substitutions ({:.4}%)", reads.len(), 100.0 * errors as f64 / (reads.len() * 36) as f64);

    let (r, t) = (&reads[0], &truth.records[0]);
    println!("\n{} from position {}", r.id, t.position);
    println!("  called {}", bases_to_string(&r.bases));
    println!("  truth  {}", bases_to_string(&t.true_bases));
    let mut out = Vec::new();
    write_fastq(&mut out, &reads[..2], 33)?;
    print!("\n{}", String::from_utf8_lossy(&out));
    Ok(())
}
