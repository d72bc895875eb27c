//! Distribution-free fairness calibration for score-based binary classifiers.
//!
//! Given any pre-trained scorer `f(x, a) ∈ [0,1]`, a labeled calibration
//! sample, a fairness notion (equality of opportunity, equalized odds,
//! demographic parity, predictive equality, or equalized accuracy), a
//! violation budget α, and a tolerance δ, the calibrator picks per-group
//! decision thresholds from the calibration order statistics such that
//!
//! * the chosen fairness disparity stays ≤ α with probability ≥ 1 − δ over
//!   the calibration draw — for finite samples and with no assumptions on the
//!   data distribution beyond continuity of the scores, and
//! * among all threshold pairs that satisfy that guarantee, the pair with the
//!   smallest estimated misclassification error is selected.
//!
//! The machinery: threshold candidates are index tuples into the per-(label,
//! group) sorted score cells; each tuple's violation probability is bounded by
//! Beta-integrated binomial tails ([`bounds`]); candidates whose bound clears
//! δ form the admissible set, ranked by a plug-in error estimate
//! ([`calibrate`]). [`classify`] applies fitted thresholds and computes
//! fairness reports; [`synth`] provides heavy-tailed synthetic generators, a
//! small logistic base scorer, and a repeated-split benchmark harness.

pub mod bounds;
pub mod calibrate;
pub mod classify;
pub mod core;
pub mod synth;

pub use crate::core::{
    validate_grouped_scores, CandidateEntry, CandidateMode, CellCounts, CellTally, FairnessError,
    FairnessNotion, FairnessReport, FairnessSpec, FittedClassifier, GroupedScores,
    PrevalenceEstimates,
};

pub use crate::bounds::{
    binom_tail, boundary_bound, g_term, g_term_quadrature, min_sample_size, violation_bound,
    violation_bound_halves, violation_bound_with, BoundEval, BoundTermParams, SampleRequirements,
};

pub use crate::calibrate::{
    bayes_paired_threshold, build_candidates, candidate_thresholds, estimate_error, fit,
    rank_below, ErrorEstimate,
};

pub use crate::classify::{fairness_metrics, predict, quantile_summary};

pub use crate::synth::{
    run_benchmark, synth_generate, train_base_scorer, BaseScorer, BenchRow, BenchSource,
    FeatureLaw, SyntheticData, SyntheticModelSpec,
};
