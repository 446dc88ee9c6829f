//! Scoring: correction probability and gain against ground truth.
//!
//!     cargo run --example evaluate

use readhmm::eval::{score_corrections, CorrectionReport, GroundTruth, TruthRecord};
use readhmm::seq::{bases_from_str, Read};

fn read(id: &str, s: &str) -> Read {
    Read::new(id, bases_from_str(s).unwrap(), vec![30; s.len()])
}

fn main() -> readhmm::Result<()> {
    let truth = GroundTruth {
        records: [("a", "ACGTACGT"), ("b", "TTGACCAG")]
            .iter()
            .map(|(id, s)| TruthRecord { id: id.to_string(), position: 1, true_bases: bases_from_str(s).unwrap() })
            .collect(),
    };
    let original = vec![read("a", "ACGTTCGA"), read("b", "TTGACCTG")];
    // a: both errors fixed; b: the error fixed, plus one correct base changed
    let corrected = vec![read("a", "ACGTACGT"), read("b", "TTGTCCAG")];
    let report = score_corrections(&original, &corrected, &truth, 3)?;
    println!("{report}\n");

    println!("{}", CorrectionReport::from_counts(412_237, 405_971, 678));
    Ok(())
}
