use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use readhmm::config::{Decoder, FirstKmerPolicy, RunConfig};
use readhmm::pipeline::{self, GenomeSource, SimulateConfig};

#[derive(Parser)]
#[command(name = "readhmm", version, about = "Kmer-HMM correction of substitution errors in short reads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "phred-offset", default_value_t = 33)]
    phred_offset: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Sample reads with quality-driven substitutions from a genome
    Simulate {
        /// Single-sequence FASTA genome
        #[arg(long, conflicts_with = "random_genome", required_unless_present = "random_genome")]
        genome: Option<PathBuf>,
        /// Use a uniform random genome of this length instead
        #[arg(long = "random-genome")]
        random_genome: Option<usize>,
        #[arg(long, default_value_t = 40_000)]
        reads: usize,
        #[arg(long = "read-len", default_value_t = 36)]
        read_len: usize,
        #[arg(long = "error-rate", default_value_t = 0.0123)]
        error_rate: f64,
        #[arg(long, default_value_t = 40)]
        qmax: u8,
        /// Give every base quality qmax (near error-free reads)
        #[arg(long = "constant-quality")]
        constant_quality: bool,
        /// Simulated reads (FASTQ)
        #[arg(long, short)]
        output: PathBuf,
        /// Truth table (default: <output>.truth.tsv)
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the penalized kmer HMM to a FASTQ file
    Train {
        reads: PathBuf,
        #[arg(long, default_value_t = 13)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value_t = 250.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-4)]
        gamma: f64,
        #[arg(long = "max-iters", default_value_t = 30)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// Model file
        #[arg(long, short)]
        output: PathBuf,
        /// EM trace (default: <output>.trace.tsv)
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Correct reads with a trained model
    Correct {
        reads: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Must match the model (default: taken from the model)
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value = "fano")]
        decoder: Decoder,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 2.0)]
        bias: f64,
        /// Fano step budget per read (default: 64 * (L - k))
        #[arg(long = "max-visits")]
        max_visits: Option<usize>,
        #[arg(long = "first-kmer", default_value = "observed")]
        first_kmer: FirstKmerPolicy,
        /// Truth table, required for --first-kmer truth
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Corrected reads (FASTQ)
        #[arg(long, short)]
        output: PathBuf,
        /// Per-read diagnostics (default: <output>.diag.tsv)
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Score corrected reads against the truth
    Evaluate {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        corrected: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Bases 1..=k of every read are not scored
        #[arg(long)]
        k: usize,
        /// Diagnostics from the correct command, tallied into the report
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        /// Report TSV (the table always goes to stdout)
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn base_config(common: &Common) -> RunConfig {
    let mut cfg = RunConfig { seed: common.seed, phred_offset: common.phred_offset, ..RunConfig::default() };
    if let Some(t) = common.threads {
        cfg.threads = t;
    }
    cfg
}

fn run(cli: Cli) -> readhmm::Result<()> {
    match cli.command {
        Command::Simulate { genome, random_genome, reads, read_len, error_rate, qmax, constant_quality, output, truth, common } => {
            let cfg = base_config(&common);
            let sim = SimulateConfig {
                genome: match (genome, random_genome) {
                    (Some(p), _) => GenomeSource::Fasta(p),
                    (None, Some(n)) => GenomeSource::Random(n),
                    (None, None) => unreachable!("clap requires one genome source"),
                },
                reads,
                read_len,
                error_rate,
                qmax,
                constant_quality,
            };
            let truth = truth.unwrap_or_else(|| pipeline::sibling(&output, ".truth.tsv"));
            let s = pipeline::cmd_simulate(&sim, &cfg, &output, &truth)?;
            eprintln!(
                "simulated {} reads from a {} bp genome: {} substitutions ({:.4}% of bases, model rate {:.4}%)",
                s.reads,
                s.genome_len,
                s.errors,
                100.0 * s.errors as f64 / (s.reads * read_len).max(1) as f64,
                100.0 * s.implied_error_rate
            );
        }
        Command::Train { reads, k, d, lambda, gamma, max_iters, tol, output, trace, common } => {
            let cfg = RunConfig { k, d, lambda, gamma, max_iters, tol, ..base_config(&common) };
            let trace = trace.unwrap_or_else(|| pipeline::sibling(&output, ".trace.tsv"));
            let res = pipeline::cmd_train(&reads, &cfg, &output, &trace)?;
            let last = res.trace.last().expect("at least one iteration");
            eprintln!(
                "{} iterations, {} states, {} nonzero transitions, objective {:.6e} ({} reads excluded)",
                res.trace.len(),
                last.states,
                last.nonzero,
                last.objective,
                res.reads_excluded
            );
        }
        Command::Correct {
            reads,
            model,
            k,
            d,
            decoder,
            delta,
            bias,
            max_visits,
            first_kmer,
            truth,
            output,
            diagnostics,
            common,
        } => {
            let model = pipeline::load_model(&model)?;
            let cfg = RunConfig {
                k: k.unwrap_or(model.params.k),
                d,
                decoder,
                delta,
                bias,
                max_visits,
                first_kmer,
                ..base_config(&common)
            };
            let diag_path = diagnostics.unwrap_or_else(|| pipeline::sibling(&output, ".diag.tsv"));
            let diag = pipeline::cmd_correct(&reads, &model, &cfg, truth.as_deref(), &output, &diag_path)?;
            eprintln!(
                "{} reads, {} changed, {} passed through ({} dead trellis, {} over budget, {} without initial state, {} wrong length)",
                diag.reads,
                diag.changed,
                diag.failures(),
                diag.dead_trellis,
                diag.budget_exceeded,
                diag.no_initial_state,
                diag.length_mismatch
            );
        }
        Command::Evaluate { original, corrected, truth, k, diagnostics, output, common } => {
            let cfg = RunConfig { k, ..base_config(&common) };
            let (report, diag) =
                pipeline::cmd_evaluate(&original, &corrected, &truth, diagnostics.as_deref(), &cfg, output.as_deref())?;
            println!("{report}");
            if let Some(d) = diag {
                println!("reads passed through {:>10}", d.failures());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("readhmm: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
