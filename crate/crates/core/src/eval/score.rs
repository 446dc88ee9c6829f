use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::eval::truth::GroundTruth;
use crate::seq::Read;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionReport {
    pub e: u64,
    pub ce: u64,
    pub fa: u64,
    pub zeta: f64,
    pub eta: f64,
}

impl CorrectionReport {
    /// `zeta = ce/e`, `eta = (ce - fa)/e`; both NaN when `e = 0`.
    pub fn from_counts(e: u64, ce: u64, fa: u64) -> Self {
        let (zeta, eta) = if e == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (ce as f64 / e as f64, (ce as f64 - fa as f64) / e as f64)
        };
        CorrectionReport { e, ce, fa, zeta, eta }
    }
}

impl fmt::Display for CorrectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "errors (e)          {:>10}", self.e)?;
        writeln!(f, "corrected (ce)      {:>10}", self.ce)?;
        writeln!(f, "false alarms (fa)   {:>10}", self.fa)?;
        writeln!(f, "zeta = ce/e         {:>10.4}", self.zeta)?;
        write!(f, "eta = (ce-fa)/e     {:>10.4}", self.eta)
    }
}

/// Per-read outcome counts from a correction run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecoderDiagnostics {
    pub reads: u64,
    pub changed: u64,
    pub dead_trellis: u64,
    pub budget_exceeded: u64,
    pub no_initial_state: u64,
    pub length_mismatch: u64,
}

impl DecoderDiagnostics {
    pub fn record(&mut self, status: &str, changed: bool) -> bool {
        self.reads += 1;
        self.changed += u64::from(changed);
        match status {
            "ok" => {}
            "dead_trellis" => self.dead_trellis += 1,
            "budget_exceeded" => self.budget_exceeded += 1,
            "no_initial_state" => self.no_initial_state += 1,
            "length_mismatch" => self.length_mismatch += 1,
            _ => return false,
        }
        true
    }

    pub fn failures(&self) -> u64 {
        self.dead_trellis + self.budget_exceeded + self.no_initial_state + self.length_mismatch
    }

    /// Tally a diagnostics TSV written by the correct command.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut d = DecoderDiagnostics::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() || line.starts_with('#') || line.starts_with("read_id\t") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = || Error::Format { line: i + 1, msg: format!("malformed diagnostics row {line:?}") };
            if cols.len() < 3 {
                return Err(bad());
            }
            let changed = match cols[2] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            if !d.record(cols[1], changed) {
                return Err(bad());
            }
        }
        Ok(d)
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    e: u64,
    ce: u64,
    fa: u64,
}

/// Compare corrected reads against ground truth at 1-based positions `> k_exclusion`.
pub fn score_corrections(
    original: &[Read],
    corrected: &[Read],
    truth: &GroundTruth,
    k_exclusion: usize,
) -> Result<CorrectionReport> {
    if original.len() != corrected.len() || original.len() != truth.len() {
        return Err(Error::Mismatch(format!(
            "read counts differ: {} original, {} corrected, {} truth",
            original.len(),
            corrected.len(),
            truth.len()
        )));
    }
    let t = original
        .par_iter()
        .zip(corrected.par_iter())
        .zip(truth.records.par_iter())
        .map(|((o, c), rec)| {
            if o.id != c.id || o.id != rec.id {
                return Err(Error::Mismatch(format!("read ids differ: {} / {} / {}", o.id, c.id, rec.id)));
            }
            if o.len() != c.len() || o.len() != rec.true_bases.len() {
                return Err(Error::Mismatch(format!("read {} has inconsistent lengths", o.id)));
            }
            let mut t = Tally::default();
            for i in k_exclusion.min(o.len())..o.len() {
                let (ob, cb, tb) = (o.bases[i], c.bases[i], rec.true_bases[i]);
                if ob != tb {
                    t.e += 1;
                }
                if cb != ob {
                    if cb == tb {
                        t.ce += 1;
                    } else {
                        t.fa += 1;
                    }
                }
            }
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(Tally { e: a.e + b.e, ce: a.ce + b.ce, fa: a.fa + b.fa }))?;
    Ok(CorrectionReport::from_counts(t.e, t.ce, t.fa))
}

pub fn write_report_tsv<W: Write>(
    mut out: W,
    report: &CorrectionReport,
    diag: Option<&DecoderDiagnostics>,
    comments: &[String],
) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut head = vec!["e", "ce", "fa", "zeta", "eta"];
    let mut row = vec![
        report.e.to_string(),
        report.ce.to_string(),
        report.fa.to_string(),
        format!("{:.6}", report.zeta),
        format!("{:.6}", report.eta),
    ];
    if let Some(d) = diag {
        head.extend(["reads", "changed", "dead_trellis", "budget_exceeded", "no_initial_state", "length_mismatch"]);
        row.extend(
            [d.reads, d.changed, d.dead_trellis, d.budget_exceeded, d.no_initial_state, d.length_mismatch]
                .map(|x| x.to_string()),
        );
    }
    writeln!(out, "{}", head.join("\t"))?;
    writeln!(out, "{}", row.join("\t"))?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::truth::TruthRecord;
    use crate::seq::bases_from_str;

    fn r(id: &str, s: &str) -> Read {
        Read::new(id, bases_from_str(s).unwrap(), vec![30; s.len()])
    }

    fn truth(rows: &[(&str, &str)]) -> GroundTruth {
        GroundTruth {
            records: rows
                .iter()
                .map(|(id, s)| TruthRecord { id: id.to_string(), position: 1, true_bases: bases_from_str(s).unwrap() })
                .collect(),
        }
    }

    #[test]
    fn definition_arithmetic() {
        let rep = CorrectionReport::from_counts(10, 8, 2);
        assert_eq!(rep.zeta, 0.8);
        assert!((rep.eta - 0.6).abs() < 1e-15);
        assert!(CorrectionReport::from_counts(0, 0, 0).eta.is_nan());
    }

    #[test]
    fn published_fixture() {
        let rep = CorrectionReport::from_counts(412237, 405971, 678);
        assert!((rep.zeta - 0.9848).abs() < 5e-5);
        assert!((rep.eta - 0.9832).abs() < 5e-5);
    }

    #[test]
    fn hand_counted_fixture() {
        // k_exclusion 2: only positions 3.. are scored
        let t = truth(&[("a", "ACGTAC"), ("b", "GGGTTT"), ("c", "CATCAT")]);
        let orig = vec![r("a", "TCGAAC"), r("b", "GGGTTA"), r("c", "CATGAT")];
        let corr = vec![r("a", "TCGTAC"), r("b", "GGGTTC"), r("c", "CATCTT")];
        // a: error at pos1 excluded, error at pos4 fixed -> e1 ce1
        // b: error at pos6 changed to a different wrong base -> e1 fa1
        // c: error at pos4 fixed, correct pos5 changed -> e1 ce1 fa1
        let rep = score_corrections(&orig, &corr, &t, 2).unwrap();
        assert_eq!((rep.e, rep.ce, rep.fa), (3, 2, 2));
    }

    #[test]
    fn noop_corrector_has_zero_gain() {
        let t = truth(&[("a", "ACGTAC")]);
        let orig = vec![r("a", "ACGAAC")];
        let rep = score_corrections(&orig, &orig, &t, 3).unwrap();
        assert_eq!((rep.e, rep.ce, rep.fa, rep.eta), (1, 0, 0, 0.0));
    }

    #[test]
    fn mismatches_are_errors() {
        let t = truth(&[("a", "ACGTAC")]);
        assert!(score_corrections(&[r("a", "ACGTAC")], &[r("b", "ACGTAC")], &t, 3).is_err());
        assert!(score_corrections(&[r("a", "ACGTAC")], &[r("a", "ACGTA")], &t, 3).is_err());
        assert!(score_corrections(&[], &[], &t, 3).is_err());
    }

    #[test]
    fn diagnostics_round_trip() {
        let text = "# x\nread_id\tstatus\tchanged\nr\tweird\t1\n";
        assert!(DecoderDiagnostics::read_tsv(text.as_bytes()).is_err());
        let text = "read_id\tstatus\tchanged\nr0\tok\t1\nr1\tdead_trellis\t0\nr2\tbudget_exceeded\t0\n";
        let d = DecoderDiagnostics::read_tsv(text.as_bytes()).unwrap();
        assert_eq!((d.reads, d.changed, d.dead_trellis, d.budget_exceeded, d.failures()), (3, 1, 1, 1, 2));
    }
}
