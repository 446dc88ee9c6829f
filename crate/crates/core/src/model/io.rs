//! Versioned plain-text model files.
//!
//! ```text
//! # free-form comment lines
//! readhmm-model  1
//! k  13
//! d  4
//! gamma  0.0001
//! lambda  250
//! read_len  36
//! qmax  40
//! TRANS  <n states>
//! <kmer>  <p(A)>  <p(C)>  <p(G)>  <p(T)>
//! CONFUSION  <L - k>
//! <t>  <16 values: g(called | true), true-major, bases in ACGT order>
//! QUAL  <L - k>
//! <t>  <j>  <qmax values>
//! END
//! ```
//!
//! Floats are written in shortest round-trip form, so a write/read cycle is exact.

use std::io::{BufRead, Write};

use crate::index::StateSpace;
use crate::model::{HmmParams, Model};
use crate::seq::Kmer;
use crate::{Error, Result};

const MAGIC: &str = "readhmm-model";
const VERSION: u32 = 1;

pub fn write_model<W: Write>(mut out: W, model: &Model, comments: &[String]) -> Result<()> {
    let p = &model.params;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{MAGIC}\t{VERSION}")?;
    writeln!(out, "k\t{}", p.k)?;
    writeln!(out, "d\t{}", p.d)?;
    writeln!(out, "gamma\t{}", p.gamma)?;
    writeln!(out, "lambda\t{}", p.lambda)?;
    writeln!(out, "read_len\t{}", p.read_len)?;
    writeln!(out, "qmax\t{}", p.qmax)?;
    writeln!(out, "TRANS\t{}", model.space.len())?;
    for (id, row) in p.trans.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", model.space.kmer(id as u32), row[0], row[1], row[2], row[3])?;
    }
    writeln!(out, "CONFUSION\t{}", p.confusion.len())?;
    for (e, m) in p.confusion.iter().enumerate() {
        write!(out, "{}", e + p.k + 1)?;
        for v in m.iter().flatten() {
            write!(out, "\t{v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "QUAL\t{}", p.qual.len())?;
    for (e, pair) in p.qual.iter().enumerate() {
        for (j, pmf) in pair.iter().enumerate() {
            write!(out, "{}\t{j}", e + p.k + 1)?;
            for v in pmf {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
    }
    writeln!(out, "END")?;
    Ok(())
}

struct Lines<R> {
    inner: R,
    lineno: usize,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Vec<String>> {
        loop {
            self.buf.clear();
            if self.inner.read_line(&mut self.buf)? == 0 {
                return Err(Error::Model(format!("unexpected end of file after line {}", self.lineno)));
            }
            self.lineno += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            return Ok(line.split('\t').map(str::to_string).collect());
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> Error {
        Error::Model(format!("line {}: {msg}", self.lineno))
    }

    fn field<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let f = self.next()?;
        if f.len() != 2 || f[0] != key {
            return Err(self.err(format!("expected `{key}\\t<value>`")));
        }
        f[1].parse().map_err(|_| self.err(format!("bad value for {key}: {:?}", f[1])))
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.err(format!("bad number {s:?}")))
    }
}

pub fn read_model<R: BufRead>(reader: R) -> Result<Model> {
    let mut l = Lines { inner: reader, lineno: 0, buf: String::new() };
    let version: u32 = l.field(MAGIC)?;
    if version != VERSION {
        return Err(l.err(format!("unsupported model version {version}")));
    }
    let k: usize = l.field("k")?;
    let d: usize = l.field("d")?;
    let gamma: f64 = l.field("gamma")?;
    let lambda: f64 = l.field("lambda")?;
    let read_len: usize = l.field("read_len")?;
    let qmax: u8 = l.field("qmax")?;
    if k == 0 || k > 32 || read_len <= k || qmax == 0 {
        return Err(l.err("inconsistent header (need 1 <= k <= 32 < read_len, qmax >= 1)"));
    }
    let n: usize = l.field("TRANS")?;
    let mut kmers = Vec::with_capacity(n);
    let mut trans = Vec::with_capacity(n);
    for _ in 0..n {
        let f = l.next()?;
        if f.len() != 5 {
            return Err(l.err("TRANS row needs a kmer and 4 probabilities"));
        }
        let km = Kmer::parse(&f[0]).map_err(|e| l.err(e))?;
        if km.k() != k {
            return Err(l.err(format!("kmer {} has length {} != k", f[0], km.k())));
        }
        if kmers.last().is_some_and(|&prev| prev >= km.bits()) {
            return Err(l.err("TRANS rows must be strictly sorted by kmer"));
        }
        kmers.push(km.bits());
        let mut row = [0.0; 4];
        for b in 0..4 {
            row[b] = l.num(&f[b + 1])?;
        }
        trans.push(row);
    }
    let n_emit = read_len - k;
    let m: usize = l.field("CONFUSION")?;
    if m != n_emit {
        return Err(l.err(format!("expected {n_emit} confusion rows, header says {m}")));
    }
    let mut confusion = Vec::with_capacity(n_emit);
    for e in 0..n_emit {
        let f = l.next()?;
        if f.len() != 17 || l.num::<usize>(&f[0])? != e + k + 1 {
            return Err(l.err("CONFUSION row needs position t and 16 values"));
        }
        let mut mat = [[0.0; 4]; 4];
        for i in 0..16 {
            mat[i / 4][i % 4] = l.num(&f[i + 1])?;
        }
        confusion.push(mat);
    }
    let m: usize = l.field("QUAL")?;
    if m != n_emit {
        return Err(l.err(format!("expected {n_emit} quality blocks, header says {m}")));
    }
    let mut qual = Vec::with_capacity(n_emit);
    for e in 0..n_emit {
        let mut pair: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (j, slot) in pair.iter_mut().enumerate() {
            let f = l.next()?;
            if f.len() != 2 + qmax as usize || l.num::<usize>(&f[0])? != e + k + 1 || l.num::<usize>(&f[1])? != j {
                return Err(l.err(format!("QUAL row needs t, j = {j} and {qmax} values")));
            }
            *slot = f[2..].iter().map(|s| l.num(s)).collect::<Result<_>>()?;
        }
        qual.push(pair);
    }
    if l.next()?.first().map(String::as_str) != Some("END") {
        return Err(l.err("missing END"));
    }
    Ok(Model {
        space: StateSpace::from_kmers(k, kmers),
        params: HmmParams { k, d, gamma, lambda, read_len, qmax, trans, confusion, qual },
    })
}
