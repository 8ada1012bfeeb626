//! End-to-end model assessment: candidate fitting, network training,
//! transforming and scoring, replicated studies and persistence.

mod assess;
mod candidates;
mod persist;
mod scores;
mod study;

pub use assess::{
    assess, batch_size_for, AssessConfig, Assessment, DecoupleConfig, ModelSample, MIN_ASSESS_SIZE,
};
pub use candidates::{Candidate, CandidateEntry, CandidateSet, EMPIRICAL_LABEL};
pub use persist::{load_net, net_from_str, net_to_string, save_net, NET_MAGIC};
pub use scores::{median, quantile, ScoreTable};
pub use study::{simulation_study, StudyConfig, StudyOutput, TransformKind, TRAINING_FAILURE_RATIO, TRUE_LABEL};
