//! Ground truth for simulated or externally aligned reads.

use std::io::{BufRead, Write};

use crate::seq::{bases_to_string, Base, Read};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthRecord {
    pub id: String,
    /// 1-based start on the forward strand of the genome.
    pub position: usize,
    pub true_bases: Vec<Base>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub records: Vec<TruthRecord>,
}

const HEADER: &str = "read_id\tposition\ttrue_sequence";

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Per-base error flags for `read`, which must be the called version of record `i`.
    pub fn error_flags(&self, i: usize, read: &Read) -> Result<Vec<bool>> {
        let rec = &self.records[i];
        if rec.id != read.id || rec.true_bases.len() != read.len() {
            return Err(Error::Mismatch(format!("read {} does not match truth record {}", read.id, rec.id)));
        }
        Ok(rec.true_bases.iter().zip(&read.bases).map(|(t, c)| t != c).collect())
    }

    pub fn total_errors(&self, reads: &[Read]) -> Result<usize> {
        let mut n = 0;
        for (i, r) in reads.iter().enumerate() {
            n += self.error_flags(i, r)?.iter().filter(|f| **f).count();
        }
        Ok(n)
    }

    pub fn write_tsv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{HEADER}")?;
        for r in &self.records {
            writeln!(out, "{}\t{}\t{}", r.id, r.position, bases_to_string(&r.true_bases))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Parse a truth TSV: `read_id`, 1-based `position`, true read string. Lines starting with `#`
/// and the column header are skipped.
pub fn ingest_external_truth<R: BufRead>(reader: R) -> Result<GroundTruth> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') || line == HEADER {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Format { line: lineno, msg: format!("expected 3 tab-separated columns, found {}", cols.len()) });
        }
        if cols[0].is_empty() {
            return Err(Error::Format { line: lineno, msg: "empty read id".into() });
        }
        let position: usize = cols[1]
            .parse()
            .ok()
            .filter(|p| *p >= 1)
            .ok_or_else(|| Error::Format { line: lineno, msg: format!("bad position {:?}", cols[1]) })?;
        let true_bases = cols[2]
            .bytes()
            .map(|c| Base::from_ascii(c).filter(|b| *b != Base::N))
            .collect::<Option<Vec<Base>>>()
            .ok_or_else(|| Error::Format { line: lineno, msg: format!("true sequence {:?} must be over ACGT", cols[2]) })?;
        records.push(TruthRecord { id: cols[0].to_string(), position, true_bases });
    }
    Ok(GroundTruth { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::bases_from_str;

    #[test]
    fn round_trip() {
        let gt = GroundTruth {
            records: vec![
                TruthRecord { id: "r0".into(), position: 1, true_bases: bases_from_str("ACGT").unwrap() },
                TruthRecord { id: "r1".into(), position: 17, true_bases: bases_from_str("TTGA").unwrap() },
            ],
        };
        let mut buf = Vec::new();
        gt.write_tsv(&mut buf, &["seed=3".into()]).unwrap();
        assert_eq!(ingest_external_truth(&buf[..]).unwrap(), gt);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let cases = ["r0\t1\n", "r0\tx\tACGT\n", "r0\t0\tACGT\n", "r0\t3\tACNT\n", "\t3\tACGT\n"];
        for c in cases {
            let text = format!("# c\n{HEADER}\n{c}");
            match ingest_external_truth(text.as_bytes()) {
                Err(Error::Format { line: 3, .. }) => {}
                other => panic!("{c:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn error_flags_compare_bases() {
        let gt = GroundTruth {
            records: vec![TruthRecord { id: "a".into(), position: 1, true_bases: bases_from_str("ACGT").unwrap() }],
        };
        let r = Read::new("a", bases_from_str("AGGN").unwrap(), vec![30; 4]);
        assert_eq!(gt.error_flags(0, &r).unwrap(), vec![false, true, false, true]);
        let wrong = Read::new("b", bases_from_str("ACGT").unwrap(), vec![30; 4]);
        assert!(gt.error_flags(0, &wrong).is_err());
    }
}
