//! Sequential decoding: how the bias changes the amount of backtracking.
//!
//!     cargo run --release --example fano

use readhmm::decode::{Corrector, FanoConfig};
use readhmm::eval::{default_quality_model, random_genome, simulate_reads};
use readhmm::index::build_state_space;
use readhmm::model::{fit, FitConfig};
use readhmm::seq::Kmer;

fn main() -> readhmm::Result<()> {
    let genome = random_genome(5_000, 7);
    let qm = default_quality_model(36, 40, 0.0123)?;
    let (reads, truth) = simulate_reads(&genome, 20_000, 36, &qm, 8)?;
    let space = build_state_space(&reads, 13)?;
    let model = fit(&reads, space, &FitConfig::default())?.model;
    let corrector = Corrector::new(&model.params, &model.space);

    println!("bias  exact reads  failures  mean steps  back moves  lowerings");
    for bias in [1.0, 2.0, 4.0, 10.0] {
        let cfg = FanoConfig::new(0.5, bias)?;
        let (mut exact, mut failed, mut steps, mut back, mut low) = (0, 0, 0, 0, 0);
        for (read, t) in reads.iter().zip(&truth.records).take(5_000) {
            let init = model.space.id_of(Kmer::encode(&t.true_bases[..13])?).expect("true kmer observed");
            match corrector.fano(read, &cfg, init) {
                Ok(res) => {
                    exact += usize::from(res.corrected == t.true_bases);
                    steps += res.stats.visited;
                    back += res.stats.backtracks;
                    low += res.stats.threshold_lowerings;
                }
                Err(_) => failed += 1,
            }
        }
        let ok = (5_000 - failed).max(1);
        println!("{bias:>4}  {exact:>11}  {failed:>8}  {:>10.1}  {back:>10}  {low:>9}", steps as f64 / ok as f64);
    }
    Ok(())
}
