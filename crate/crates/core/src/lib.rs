//! Identify the case-id, activity and timestamp columns of an unlabeled
//! tabular event log.
//!
//! Identification runs in two stages:
//!
//! ```text
//! CSV > EventLog > features > RoleModel > CandidateSet          (stage 1)
//!                                  |
//!                                  +-> candidate combos > miner > metric (stage 2)
//! ```
//!
//! Stage 1 turns every column into a nine-dimensional [`FeatureVector`] and
//! asks three binary random-forest classifiers how likely the column is to
//! play each role. The top-`k` columns per role survive. When the survivors
//! are unique and distinct the answer is returned directly; otherwise every
//! surviving (case, activity, timestamp) combination is scored by mining a
//! process model on one half of the cases and checking it against the other
//! half, and the best-scoring combination wins.

pub mod cancel;
pub mod classifier;
pub mod conformance;
pub mod discovery;
pub mod features;
pub mod ingest;
pub mod pipeline;
pub mod roles;
pub mod synthgen;

pub use cancel::{CancelToken, Cancelled};
pub use classifier::{
    predict, select_candidates, train, Candidate, CandidateSet, ColumnProbabilities, Hyperparameters, RoleModel,
    RoleProbabilities, TrainingCorpus,
};
pub use conformance::{score_combo, Metric, ScoreOptions, ScoreReport};
pub use discovery::{
    build_dfg, build_traces, mine_heuristics, mine_inductive, tree_to_net, Dfg, MinerKind, MinerParams, PetriNet,
    ProcessTree, TraceLog,
};
pub use features::{featurize_log, global_features, local_features, FeatureVector};
pub use ingest::{load_csv, parse_timestamp_column, EventLog, TimestampFormat, TimestampParse};
pub use pipeline::{
    count_planned_evaluations, identify, identify_with, IdentificationReport, PipelineConfig, PruneReason, Stage,
};
pub use roles::{Combo, Role};
pub use synthgen::{generate_corpus, generate_log, LabeledLog, SynthConfig};
