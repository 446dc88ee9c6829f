use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::quality::{phred_error, QualityModel};
use crate::eval::truth::{GroundTruth, TruthRecord};
use crate::seq::{Base, Read};
use crate::{Error, Result};

/// Sample `n` forward-strand reads of length `read_len` uniformly (with replacement) from
/// `genome`, drawing a quality per base and substituting the base with probability
/// `10^(-q/10)`, uniformly among the three other bases.
pub fn simulate_reads(
    genome: &[Base],
    n: usize,
    read_len: usize,
    qmodel: &QualityModel,
    seed: u64,
) -> Result<(Vec<Read>, GroundTruth)> {
    if read_len == 0 || read_len > genome.len() {
        return Err(Error::Config(format!("read length {read_len} must be in 1..={}", genome.len())));
    }
    if qmodel.read_len() != read_len {
        return Err(Error::Config(format!(
            "quality model covers {} positions, reads have {read_len}",
            qmodel.read_len()
        )));
    }
    if let Some(i) = genome.iter().position(|b| *b == Base::N) {
        return Err(Error::Config(format!("genome has N at position {}", i + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last_start = genome.len() - read_len;
    let mut reads = Vec::with_capacity(n);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let start = rng.gen_range(0..=last_start);
        let truth = &genome[start..start + read_len];
        let mut bases = Vec::with_capacity(read_len);
        let mut quals = Vec::with_capacity(read_len);
        for (t, &b) in truth.iter().enumerate() {
            let q = qmodel.sample(t, &mut rng);
            let called = if rng.gen::<f64>() < phred_error(q) {
                let shift: u8 = rng.gen_range(1..4);
                Base::from_code((b.code().unwrap() + shift) % 4)
            } else {
                b
            };
            bases.push(called);
            quals.push(q);
        }
        let id = format!("r{i}");
        records.push(TruthRecord { id: id.clone(), position: start + 1, true_bases: truth.to_vec() });
        reads.push(Read::new(id, bases, quals));
    }
    Ok((reads, GroundTruth { records }))
}

/// Uniform random genome over ACGT.
pub fn random_genome(len: usize, seed: u64) -> Vec<Base> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| Base::from_code(rng.gen_range(0..4))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::default_quality_model;

    #[test]
    fn reproducible_and_consistent() {
        let g = random_genome(2000, 5);
        let qm = default_quality_model(36, 40, 0.0123).unwrap();
        let (r1, t1) = simulate_reads(&g, 500, 36, &qm, 9).unwrap();
        let (r2, t2) = simulate_reads(&g, 500, 36, &qm, 9).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(t1, t2);
        for (i, rec) in t1.records.iter().enumerate() {
            let p = rec.position - 1;
            assert_eq!(&g[p..p + 36], &rec.true_bases[..]);
            assert_eq!(r1[i].id, rec.id);
        }
        let (r3, _) = simulate_reads(&g, 500, 36, &qm, 10).unwrap();
        assert_ne!(r1, r3);
    }

    #[test]
    fn q10_error_rate_is_binomial() {
        let g = random_genome(5000, 1);
        let qm = QualityModel::constant(36, 10).unwrap();
        let (reads, truth) = simulate_reads(&g, 4000, 36, &qm, 3).unwrap();
        let n = (4000 * 36) as f64;
        let rate = truth.total_errors(&reads).unwrap() as f64 / n;
        let sigma = (0.1f64 * 0.9 / n).sqrt();
        assert!((rate - 0.1).abs() < 3.0 * sigma, "{rate}");
    }

    #[test]
    fn d1_rate_within_tenth_of_a_point() {
        let g = random_genome(10_000, 2);
        let qm = default_quality_model(36, 40, 0.0123).unwrap();
        let (reads, truth) = simulate_reads(&g, 40_000, 36, &qm, 4).unwrap();
        let rate = truth.total_errors(&reads).unwrap() as f64 / (40_000.0 * 36.0);
        assert!((rate - 0.0123).abs() < 1e-3, "{rate}");
    }

    #[test]
    fn qmax60_is_essentially_error_free() {
        let g = random_genome(3000, 2);
        let qm = QualityModel::constant(36, 60).unwrap();
        let (reads, truth) = simulate_reads(&g, 2000, 36, &qm, 4).unwrap();
        assert!(truth.total_errors(&reads).unwrap() <= 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = random_genome(30, 2);
        let qm = QualityModel::constant(36, 30).unwrap();
        assert!(simulate_reads(&g, 1, 36, &qm, 0).is_err());
        let g = random_genome(100, 2);
        let qm = QualityModel::constant(20, 30).unwrap();
        assert!(simulate_reads(&g, 1, 36, &qm, 0).is_err());
    }
}
