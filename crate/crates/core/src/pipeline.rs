//! File-level commands behind the `readhmm` binary: simulate, train, correct, evaluate.
//!
//! Every command runs inside a rayon pool of `threads` workers and writes its outputs
//! atomically (temporary file in the target directory, then rename). Results do not depend on
//! the thread count.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::config::{Decoder, FirstKmerPolicy, RunConfig};
use crate::decode::{pick_initial_state, Corrector, DecodeFailure, DecodeStats};
use crate::eval::{
    default_quality_model, ingest_external_truth, random_genome, score_corrections, simulate_reads,
    write_report_tsv, CorrectionReport, DecoderDiagnostics, GroundTruth, QualityModel,
};
use crate::index::{build_state_space, NeighborhoodIndex, StateId};
use crate::model::{fit, read_model, write_model, FitResult, Model, TraceRow};
use crate::seq::{parse_fasta, parse_fastq, write_fastq, Base, Kmer, Read};
use crate::{Error, Result};

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}

/// Write `path` through a temporary sibling file that is renamed into place on success.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn read_fastq_file(path: &Path, phred_offset: u8) -> Result<Vec<Read>> {
    parse_fastq(open(path)?, phred_offset)
}

pub fn load_model(path: &Path) -> Result<Model> {
    read_model(open(path)?)
}

pub fn load_truth(path: &Path) -> Result<GroundTruth> {
    ingest_external_truth(open(path)?)
}

/// `<path><suffix>`, e.g. `reads.fastq` + `.truth.tsv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn header(command: &str, cfg: &RunConfig, extra: &[String]) -> Vec<String> {
    let mut h = vec![format!("readhmm {command}")];
    h.extend(cfg.echo());
    h.extend(extra.iter().cloned());
    h
}

#[derive(Debug, Clone)]
pub enum GenomeSource {
    Fasta(PathBuf),
    /// Uniform random genome of this length, generated from the run seed.
    Random(usize),
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub genome: GenomeSource,
    pub reads: usize,
    pub read_len: usize,
    pub error_rate: f64,
    pub qmax: u8,
    /// Pin every quality at `qmax` instead of using the default quality model.
    pub constant_quality: bool,
}

pub struct SimulateSummary {
    pub genome_len: usize,
    pub reads: usize,
    pub errors: usize,
    pub implied_error_rate: f64,
}

/// Simulate reads into `fastq` (plain FASTQ) and their truth into `truth` (TSV with a `#` header).
pub fn cmd_simulate(sim: &SimulateConfig, cfg: &RunConfig, fastq: &Path, truth: &Path) -> Result<SimulateSummary> {
    cfg.validate()?;
    let genome: Vec<Base> = match &sim.genome {
        GenomeSource::Random(n) => random_genome(*n, cfg.seed),
        GenomeSource::Fasta(p) => {
            let mut recs = parse_fasta(open(p)?)?;
            if recs.len() != 1 {
                return Err(Error::Config(format!("{} must hold exactly one sequence, found {}", p.display(), recs.len())));
            }
            recs.pop().unwrap().1
        }
    };
    let qm = if sim.constant_quality {
        QualityModel::constant(sim.read_len, sim.qmax)?
    } else {
        default_quality_model(sim.read_len, sim.qmax, sim.error_rate)?
    };
    let (reads, gt) = simulate_reads(&genome, sim.reads, sim.read_len, &qm, cfg.seed)?;
    let errors = gt.total_errors(&reads)?;
    let extra = vec![
        format!("genome={}", match &sim.genome {
            GenomeSource::Fasta(p) => p.display().to_string(),
            GenomeSource::Random(n) => format!("random:{n}"),
        }),
        format!("reads={}", sim.reads),
        format!("read_len={}", sim.read_len),
        format!("qmax={}", sim.qmax),
        format!("quality_model={}", if sim.constant_quality { "constant" } else { "default" }),
        format!("target_error_rate={}", sim.error_rate),
    ];
    write_atomic(fastq, |w| write_fastq(w, &reads, cfg.phred_offset))?;
    write_atomic(truth, |w| gt.write_tsv(w, &header("simulate", cfg, &extra)))?;
    Ok(SimulateSummary { genome_len: genome.len(), reads: reads.len(), errors, implied_error_rate: qm.implied_error_rate() })
}

pub fn write_trace<W: Write>(mut out: W, trace: &[TraceRow], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "iteration\tloglik\tpenalty\tobjective\tnonzero\tstates\treads_used\treads_dead")?;
    for r in trace {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.iteration, r.loglik, r.penalty, r.objective, r.nonzero, r.states, r.reads_used, r.reads_dead
        )?;
    }
    Ok(())
}

/// Fit a model to the reads and write it to `model_out`, with the EM trace in `trace_out`.
pub fn cmd_train(reads_path: &Path, cfg: &RunConfig, model_out: &Path, trace_out: &Path) -> Result<FitResult> {
    cfg.validate()?;
    let pool = thread_pool(cfg.threads)?;
    let reads = read_fastq_file(reads_path, cfg.phred_offset)?;
    let res = pool.install(|| -> Result<FitResult> {
        let space = build_state_space(&reads, cfg.k)?;
        fit(&reads, space, &cfg.fit_config())
    })?;
    let extra = vec![format!("reads={}", reads_path.display()), format!("reads_excluded={}", res.reads_excluded)];
    let head = header("train", cfg, &extra);
    write_atomic(model_out, |w| write_model(w, &res.model, &head))?;
    write_atomic(trace_out, |w| write_trace(w, &res.trace, &head))?;
    Ok(res)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadOutcome {
    pub status: &'static str,
    pub changed: bool,
    pub score: f64,
    pub stats: DecodeStats,
}

/// Correct every read with the configured decoder. Reads that cannot be decoded are returned
/// unchanged and flagged in their outcome. Output order follows input order.
pub fn correct_reads(
    reads: &[Read],
    model: &Model,
    cfg: &RunConfig,
    truth: Option<&GroundTruth>,
) -> Result<(Vec<Read>, Vec<ReadOutcome>)> {
    let k = model.space.k();
    if cfg.k != k {
        return Err(Error::Mismatch(format!("model has k = {k}, configuration asks for k = {}", cfg.k)));
    }
    let fano = cfg.fano_config()?;
    let true_first: Option<HashMap<&str, &[Base]>> = match (cfg.first_kmer, truth) {
        (FirstKmerPolicy::Observed, _) => None,
        (FirstKmerPolicy::Truth, None) => {
            return Err(Error::Config("first_kmer=truth needs a truth file".into()));
        }
        (FirstKmerPolicy::Truth, Some(t)) => {
            Some(t.records.iter().map(|r| (r.id.as_str(), &r.true_bases[..])).collect())
        }
    };
    if let Some(map) = &true_first {
        if let Some(r) = reads.iter().find(|r| !map.contains_key(r.id.as_str())) {
            return Err(Error::Mismatch(format!("read {} has no truth record", r.id)));
        }
    }
    let corrector = Corrector::new(&model.params, &model.space);
    let nbhd: OnceLock<NeighborhoodIndex<'_>> = OnceLock::new();
    let initial = |read: &Read| -> Option<StateId> {
        let first: u64 = match &true_first {
            Some(map) => {
                let tb = map[read.id.as_str()];
                Kmer::encode(tb.get(..k)?).ok()?.bits()
            }
            None => read.with_n_as_a().kmers(k).first().copied().flatten()?,
        };
        pick_initial_state(first, &model.space, &model.params, nbhd.get_or_init(|| NeighborhoodIndex::new(&model.space, cfg.d)))
    };
    let out: Vec<(Read, ReadOutcome)> = reads
        .par_iter()
        .map(|read| {
            let decoded = if read.len() != model.params.read_len {
                Err(DecodeFailure::LengthMismatch { expected: model.params.read_len, found: read.len() })
            } else {
                match initial(read) {
                    None => Err(DecodeFailure::NoInitialState),
                    Some(s) => match cfg.decoder {
                        Decoder::AViterbi => corrector.aviterbi(read, cfg.d, s),
                        Decoder::Fano => corrector.fano(read, &fano, s),
                    },
                }
            };
            match decoded {
                Ok(res) => {
                    let changed = res.corrected != read.bases;
                    let fixed = Read { bases: res.corrected, ..read.clone() };
                    (fixed, ReadOutcome { status: "ok", changed, score: res.score, stats: res.stats })
                }
                Err(f) => (
                    read.clone(),
                    ReadOutcome { status: f.label(), changed: false, score: f64::NAN, stats: DecodeStats::default() },
                ),
            }
        })
        .collect();
    Ok(out.into_iter().unzip())
}

pub fn write_diagnostics<W: Write>(mut out: W, reads: &[Read], outcomes: &[ReadOutcome], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "read_id\tstatus\tchanged\tscore\tvisited\tbacktracks\tthreshold_lowerings")?;
    for (r, o) in reads.iter().zip(outcomes) {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.id,
            o.status,
            u8::from(o.changed),
            o.score,
            o.stats.visited,
            o.stats.backtracks,
            o.stats.threshold_lowerings
        )?;
    }
    Ok(())
}

/// Correct `reads_path` with `model` into `out` (FASTQ) and per-read diagnostics into `diag_out`.
pub fn cmd_correct(
    reads_path: &Path,
    model: &Model,
    cfg: &RunConfig,
    truth_path: Option<&Path>,
    out: &Path,
    diag_out: &Path,
) -> Result<DecoderDiagnostics> {
    cfg.validate()?;
    let pool = thread_pool(cfg.threads)?;
    let reads = read_fastq_file(reads_path, cfg.phred_offset)?;
    let truth = truth_path.map(load_truth).transpose()?;
    let (fixed, outcomes) = pool.install(|| correct_reads(&reads, model, cfg, truth.as_ref()))?;
    let mut diag = DecoderDiagnostics::default();
    for o in &outcomes {
        diag.record(o.status, o.changed);
    }
    write_atomic(out, |w| write_fastq(w, &fixed, cfg.phred_offset))?;
    let extra = vec![format!("reads={}", reads_path.display())];
    write_atomic(diag_out, |w| write_diagnostics(w, &reads, &outcomes, &header("correct", cfg, &extra)))?;
    Ok(diag)
}

/// Score `corrected` against `truth`, excluding the first `cfg.k` bases of each read.
pub fn cmd_evaluate(
    original: &Path,
    corrected: &Path,
    truth: &Path,
    diagnostics: Option<&Path>,
    cfg: &RunConfig,
    report_out: Option<&Path>,
) -> Result<(CorrectionReport, Option<DecoderDiagnostics>)> {
    let pool = thread_pool(cfg.threads)?;
    let orig = read_fastq_file(original, cfg.phred_offset)?;
    let corr = read_fastq_file(corrected, cfg.phred_offset)?;
    let gt = load_truth(truth)?;
    let diag = diagnostics.map(|p| DecoderDiagnostics::read_tsv(open(p)?)).transpose()?;
    let report = pool.install(|| score_corrections(&orig, &corr, &gt, cfg.k))?;
    if let Some(path) = report_out {
        let extra = vec![
            format!("original={}", original.display()),
            format!("corrected={}", corrected.display()),
            format!("truth={}", truth.display()),
        ];
        write_atomic(path, |w| write_report_tsv(w, &report, diag.as_ref(), &header("evaluate", cfg, &extra)))?;
    }
    Ok((report, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, |w| Ok(writeln!(w, "hello")?)).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "hello\n");
        let r = write_atomic(&p, |w| {
            writeln!(w, "partial")?;
            Err(Error::Config("boom".into()))
        });
        assert!(r.is_err());
        assert_eq!(fs::read_to_string(&p).unwrap(), "hello\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn sibling_appends_suffix() {
        assert_eq!(sibling(Path::new("a/b.fastq"), ".truth.tsv"), PathBuf::from("a/b.fastq.truth.tsv"));
    }
}
