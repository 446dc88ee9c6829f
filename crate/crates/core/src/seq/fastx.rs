use std::io::{BufRead, Write};

use super::{Base, Read};
use crate::{Error, Result};

pub const DEFAULT_PHRED_OFFSET: u8 = 33;

/// Highest quality score the model tracks; larger scores are clamped to it at training time.
pub const MAX_QUAL: u8 = 60;

const MAX_PRINTABLE: u8 = b'~';

fn check_offset(offset: u8) -> Result<()> {
    if offset == 33 || offset == 64 {
        Ok(())
    } else {
        Err(Error::Config(format!("phred offset must be 33 or 64, got {offset}")))
    }
}

fn next_line<R: BufRead>(reader: &mut R, buf: &mut String) -> Result<bool> {
    buf.clear();
    if reader.read_line(buf)? == 0 {
        return Ok(false);
    }
    while buf.ends_with('\n') || buf.ends_with('\r') {
        buf.pop();
    }
    Ok(true)
}

/// Parse 4-line FASTQ records. Quality bytes map to `ascii - offset`, with 0 clamped up to 1.
pub fn parse_fastq<R: BufRead>(mut reader: R, offset: u8) -> Result<Vec<Read>> {
    check_offset(offset)?;
    let mut reads = Vec::new();
    let mut header = String::new();
    let mut seq = String::new();
    let mut plus = String::new();
    let mut qual = String::new();
    loop {
        let record = reads.len() + 1;
        if !next_line(&mut reader, &mut header)? {
            break;
        }
        if header.is_empty() {
            // tolerate trailing blank lines only
            let mut rest = String::new();
            while next_line(&mut reader, &mut rest)? {
                if !rest.trim().is_empty() {
                    return Err(Error::Parse { record, msg: "blank line inside FASTQ stream".into() });
                }
            }
            break;
        }
        let id = header
            .strip_prefix('@')
            .ok_or_else(|| Error::Parse { record, msg: format!("header does not start with '@': {header:?}") })?
            .to_string();
        if !next_line(&mut reader, &mut seq)? {
            return Err(Error::Parse { record, msg: "truncated record (missing sequence)".into() });
        }
        if !next_line(&mut reader, &mut plus)? || !plus.starts_with('+') {
            return Err(Error::Parse { record, msg: "missing '+' separator line".into() });
        }
        if !next_line(&mut reader, &mut qual)? {
            return Err(Error::Parse { record, msg: "truncated record (missing qualities)".into() });
        }
        if seq.len() != qual.len() {
            return Err(Error::Parse {
                record,
                msg: format!("sequence length {} != quality length {}", seq.len(), qual.len()),
            });
        }
        let bases = seq
            .bytes()
            .map(|c| {
                Base::from_ascii(c)
                    .ok_or_else(|| Error::Parse { record, msg: format!("illegal base byte {:?}", c as char) })
            })
            .collect::<Result<Vec<_>>>()?;
        let quals = qual
            .bytes()
            .map(|c| {
                if c < offset || c > MAX_PRINTABLE {
                    Err(Error::Parse {
                        record,
                        msg: format!("quality byte {:?} (0x{c:02x}) out of range for offset {offset}", c as char),
                    })
                } else {
                    Ok((c - offset).max(1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        reads.push(Read { id, bases, quals });
    }
    Ok(reads)
}

/// Write canonical 4-line FASTQ records (bare `+` line).
pub fn write_fastq<W: Write>(mut out: W, reads: &[Read], offset: u8) -> Result<()> {
    check_offset(offset)?;
    let mut line = Vec::new();
    for (i, r) in reads.iter().enumerate() {
        if r.bases.len() != r.quals.len() {
            return Err(Error::Parse { record: i + 1, msg: "bases and qualities differ in length".into() });
        }
        line.clear();
        line.push(b'@');
        line.extend_from_slice(r.id.as_bytes());
        line.push(b'\n');
        line.extend(r.bases.iter().map(|b| b.to_ascii()));
        line.extend_from_slice(b"\n+\n");
        for &q in &r.quals {
            let c = offset as u16 + q as u16;
            if q == 0 || c > MAX_PRINTABLE as u16 {
                return Err(Error::Parse {
                    record: i + 1,
                    msg: format!("quality {q} not representable at offset {offset}"),
                });
            }
            line.push(c as u8);
        }
        line.push(b'\n');
        out.write_all(&line)?;
    }
    Ok(())
}

/// Parse (possibly multi-line) FASTA records.
pub fn parse_fasta<R: BufRead>(mut reader: R) -> Result<Vec<(String, Vec<Base>)>> {
    let mut records: Vec<(String, Vec<Base>)> = Vec::new();
    let mut line = String::new();
    let mut lineno = 0;
    while next_line(&mut reader, &mut line)? {
        lineno += 1;
        if let Some(name) = line.strip_prefix('>') {
            records.push((name.to_string(), Vec::new()));
        } else if !line.trim().is_empty() {
            let (_, seq) = records
                .last_mut()
                .ok_or(Error::Format { line: lineno, msg: "sequence before first '>' header".into() })?;
            for c in line.trim().bytes() {
                seq.push(Base::from_ascii(c).ok_or(Error::Format {
                    line: lineno,
                    msg: format!("illegal base {:?}", c as char),
                })?);
            }
        }
    }
    Ok(records)
}

/// Single-line FASTA output.
pub fn write_fasta<W: Write>(mut out: W, records: &[(String, Vec<Base>)]) -> Result<()> {
    for (name, seq) in records {
        writeln!(out, ">{name}")?;
        let s: Vec<u8> = seq.iter().map(|b| b.to_ascii()).collect();
        out.write_all(&s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn parses_simple_record() {
        let reads = parse_fastq(&b"@r1\nACGT\n+\nIIII\n"[..], 33).unwrap();
        assert_eq!(reads.len(), 1);
        assert_eq!(reads[0].id, "r1");
        assert_eq!(reads[0].quals, vec![40, 40, 40, 40]);
    }

    #[test]
    fn clamps_zero_quality() {
        let reads = parse_fastq(&b"@r\nAN\n+\n!#\n"[..], 33).unwrap();
        assert_eq!(reads[0].quals, vec![1, 2]);
        assert_eq!(reads[0].bases, vec![Base::A, Base::N]);
    }

    #[test]
    fn offset_64() {
        let reads = parse_fastq(&b"@r\nAC\n+\nhB\n"[..], 64).unwrap();
        assert_eq!(reads[0].quals, vec![40, 2]);
        let err = parse_fastq(&b"@r\nAC\n+\n!!\n"[..], 64).unwrap_err();
        assert!(err.to_string().contains("'!'"), "{err}");
    }

    #[test]
    fn malformed_records_report_index() {
        let err = parse_fastq(&b"@a\nA\n+\nI\nr2\nA\n+\nI\n"[..], 33).unwrap_err();
        assert!(matches!(err, Error::Parse { record: 2, .. }), "{err:?}");
        let err = parse_fastq(&b"@a\nAC\n+\nI\n"[..], 33).unwrap_err();
        assert!(matches!(err, Error::Parse { record: 1, .. }));
        let err = parse_fastq(&b"@a\nAC\n"[..], 33).unwrap_err();
        assert!(matches!(err, Error::Parse { record: 1, .. }));
        assert!(parse_fastq(&b"@a\nA\n+\nI\n"[..], 40).is_err());
    }

    #[test]
    fn empty_in_empty_out() {
        assert!(parse_fastq(&b""[..], 33).unwrap().is_empty());
        let mut buf = Vec::new();
        write_fastq(&mut buf, &[], 33).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn write_rejects_unprintable_quality() {
        let r = Read::new("x", vec![Base::A], vec![94]);
        assert!(write_fastq(Vec::new(), std::slice::from_ref(&r), 33).is_err());
        assert!(write_fastq(Vec::new(), &[r], 64).is_err());
    }

    #[test]
    fn crlf_and_trailing_blank_lines() {
        let reads = parse_fastq(&b"@a\r\nAC\r\n+\r\nII\r\n\n\n"[..], 33).unwrap();
        assert_eq!(reads.len(), 1);
        assert_eq!(reads[0].bases.len(), 2);
    }

    #[test]
    fn corpus_round_trip_is_byte_identical() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut text = String::new();
        for i in 0..10_000 {
            let len = rng.gen_range(1..80);
            text.push_str(&format!("@read_{i} extra\n"));
            for _ in 0..len {
                text.push(b"ACGTN"[rng.gen_range(0..5)] as char);
            }
            text.push_str("\n+\n");
            for _ in 0..len {
                text.push((33 + rng.gen_range(1..=60u8)) as char);
            }
            text.push('\n');
        }
        let reads = parse_fastq(text.as_bytes(), 33).unwrap();
        assert_eq!(reads.len(), 10_000);
        let mut out = Vec::new();
        write_fastq(&mut out, &reads, 33).unwrap();
        assert_eq!(out, text.as_bytes());
    }

    #[test]
    fn fasta_multiline() {
        let recs = parse_fasta(&b">chr1 desc\nACG\nTTA\n>two\nGG\n"[..]).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].0, "chr1 desc");
        assert_eq!(recs[0].1.len(), 6);
        assert!(parse_fasta(&b"ACGT\n"[..]).is_err());
        let mut out = Vec::new();
        write_fasta(&mut out, &recs).unwrap();
        assert_eq!(out, b">chr1 desc\nACGTTA\n>two\nGG\n");
    }

    proptest! {
        #[test]
        fn single_read_round_trip(seq in "[ACGTN]{1,50}", q in proptest::collection::vec(1u8..=60, 50), off in prop_oneof![Just(33u8), Just(64u8)]) {
            let bases = crate::seq::bases_from_str(&seq).unwrap();
            let quals = q[..bases.len()].to_vec();
            let r = Read::new("id", bases, quals);
            let mut buf = Vec::new();
            write_fastq(&mut buf, std::slice::from_ref(&r), off).unwrap();
            let back = parse_fastq(&buf[..], off).unwrap();
            prop_assert_eq!(back, vec![r]);
        }
    }
}
