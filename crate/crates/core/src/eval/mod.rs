//! Read simulation, ground truth and correction scoring.

mod quality;
mod score;
mod simulate;
mod truth;

pub use quality::{default_quality_model, phred_error, QualityModel};
pub use score::{score_corrections, write_report_tsv, CorrectionReport, DecoderDiagnostics};
pub use simulate::{random_genome, simulate_reads};
pub use truth::{ingest_external_truth, GroundTruth, TruthRecord};
