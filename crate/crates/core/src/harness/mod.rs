//! Dataset ingestion, experiment scenarios, reports and plots.

mod config;
mod corpus;
mod scenario;
mod svg;

pub use config::{ClassifierChoice, Scenario, ScenarioConfig};
pub use corpus::{
    extract, ingest, read_corpus, read_corpus_file, read_manifest, read_manifest_file,
    write_corpus, CorpusRecord, Extraction, IngestReport, ManifestRow,
};
pub use scenario::{
    format_table, run_blind_device, run_leave_one_model_out, run_scenario, scenario_samples,
    stratified_split, write_outputs, BlindReport, FittedClassifier, FoldReport, Hyperparameters,
    Pipeline, Report, RunOutput, Sample, SkippedFold, SplitCounts, NATIVE, OTHER, PRISTINE,
};
pub use svg::{emit_svg, PlotPoint, PointKind};
