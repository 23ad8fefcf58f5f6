//! Seeded Monte Carlo experiments.
//!
//! Every trial draws from its own stream `trial_rng(master_seed, purpose, index)`
//! and results are gathered in trial order, so a report depends only on the
//! master seed and parameters, never on the number of worker threads.

mod harness;
mod law;
mod report;
mod suite;

pub use harness::{sample_limit_law, sample_rn_law, LimitSample, RnSample};
pub use law::{ks_distance, EmpiricalLaw, KsDistance};
pub use report::{Criterion, ExperimentReport, SampleRow, Verdict};
pub use suite::{
    coupling_experiment, lemma11_experiment, lemma2_experiment, lemma7_experiment,
    profile_probability, selftest, theorem1_experiment, theorem2_experiment, theorem3_experiment,
    CouplingConfig, GammaSchedule, Lemma11Config, Thresholds, LIMIT_LAW_NODE_CAP,
};

use thiserror::Error;

use crate::complete::CompleteError;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: CompleteError,
    },
    #[error("empirical law has no samples")]
    EmptyLaw,
    #[error("invalid parameter: {0}")]
    Param(String),
}
