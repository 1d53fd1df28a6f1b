//! Detection-quality metrics and the parameter-sweep harness.

mod harness;
mod metrics;

pub use harness::{
    detectability_at_t, generate_set, pairs_of, pareto_mask, prefix_z, sample_seed, score_pairs, sweep,
    Pair, SweepConfig, SweepResult, SweepRow,
};
pub use metrics::{
    auroc, labelled, paired_auroc_difference, roc_curve, tpr_at_fpr, BootstrapInterval, Label, ScoredSample,
};
