//! Shared domain types for distribution-free fairness calibration.
//!
//! The calibration data is a set of scored, labeled, group-annotated samples.
//! Scores are split into the four cells `T^{y,a}` by label `y ∈ {0,1}` and
//! protected group `a ∈ {0,1}`, and each cell is kept sorted non-decreasing:
//! `T^{y,a} = {t^{y,a}_(1) ≤ … ≤ t^{y,a}_(n^{y,a})}`. Decision thresholds are
//! always order statistics of these cells (or of per-group pools for
//! demographic parity), so every downstream quantity — violation bounds,
//! error estimates, fitted classifiers — is indexed by small integer ranks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced by calibration, bound evaluation, and metric computation.
#[derive(Debug, Error)]
pub enum FairnessError {
    /// A score was outside `[0,1]` (or not finite). The guarantees require the
    /// base classifier to map into `[0,1]`; inputs are rejected, not clamped.
    #[error("score {value} outside [0,1]")]
    ScoreOutOfRange { value: f64 },

    /// A label or group value was not 0 or 1.
    #[error("{name} must be 0 or 1, got {value}")]
    InvalidBinary { name: &'static str, value: i64 },

    /// A parameter failed its domain check.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Calibration cells are smaller than the minimum sample sizes required
    /// for any candidate to satisfy the tolerance δ.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The candidate set is empty: no threshold pair has bound ≤ δ.
    #[error(
        "no admissible candidate: no threshold pair satisfies the bound ≤ delta; \
         try a larger alpha or delta, or more calibration data"
    )]
    NoAdmissibleCandidate,

    /// Equalized accuracy requires `alpha > |p̂_{Y,1} − p̂_{Y,0}|`.
    #[error(
        "equalized accuracy requires alpha > |p_Y1 - p_Y0| = {gap:.6}, got alpha = {alpha}"
    )]
    AssumptionViolated { gap: f64, alpha: f64 },

    /// Paired sequences had different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// An operation that needs data received none.
    #[error("empty input: {what}")]
    EmptyInput { what: &'static str },
}

/// The group-fairness constraint a fitted classifier must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FairnessNotion {
    /// Equality of opportunity: equal true-positive rates (controls |DEOO|).
    Eoo,
    /// Equalized odds: equal TPR and FPR (controls both DEO coordinates).
    Eo,
    /// Demographic parity: equal positive-prediction rates (controls |DDP|).
    Dp,
    /// Predictive equality: equal false-positive rates (controls |DPE|).
    Pe,
    /// Equalized accuracy: equal misclassification rates (controls |DEA|).
    Ea,
}

impl FairnessNotion {
    /// Stable lowercase tag used for CLI parsing and RNG stream keying.
    pub fn tag(self) -> &'static str {
        match self {
            FairnessNotion::Eoo => "eoo",
            FairnessNotion::Eo => "eo",
            FairnessNotion::Dp => "dp",
            FairnessNotion::Pe => "pe",
            FairnessNotion::Ea => "ea",
        }
    }
}

impl std::fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for FairnessNotion {
    type Err = FairnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "eoo" => Ok(FairnessNotion::Eoo),
            "eo" => Ok(FairnessNotion::Eo),
            "dp" => Ok(FairnessNotion::Dp),
            "pe" => Ok(FairnessNotion::Pe),
            "ea" => Ok(FairnessNotion::Ea),
            other => Err(FairnessError::InvalidParameter {
                name: "notion",
                reason: format!("unknown notion {other:?}, expected eoo|eo|dp|pe|ea"),
            }),
        }
    }
}

/// Candidate-set construction strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateMode {
    /// Enumerate every index pair for the notion's threshold-bearing
    /// sequences (quadratic in cell sizes).
    Full,
    /// Pair each `k^{1,0}` with the single `T^{1,1}` index nearest the
    /// group-1 threshold that would be jointly optimal under the estimated
    /// prevalences (linear; EOO and EO only).
    Shrunk,
}

impl CandidateMode {
    pub fn tag(self) -> &'static str {
        match self {
            CandidateMode::Full => "full",
            CandidateMode::Shrunk => "shrunk",
        }
    }
}

impl std::fmt::Display for CandidateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for CandidateMode {
    type Err = FairnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(CandidateMode::Full),
            "shrunk" => Ok(CandidateMode::Shrunk),
            other => Err(FairnessError::InvalidParameter {
                name: "mode",
                reason: format!("unknown candidate mode {other:?}, expected full|shrunk"),
            }),
        }
    }
}

fn default_mc_samples() -> u32 {
    1000
}

fn default_mode() -> CandidateMode {
    CandidateMode::Full
}

/// Everything the calibrator needs besides the scores themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessSpec {
    /// Constraint to enforce.
    pub notion: FairnessNotion,
    /// Violation budget: the fitted classifier satisfies
    /// |disparity| ≤ alpha with probability ≥ 1 − delta.
    pub alpha: f64,
    /// Tolerance on the violation probability.
    pub delta: f64,
    /// Monte Carlo samples per Beta expectation in the bound.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: u32,
    /// Master seed for the deterministic bound-evaluation streams.
    #[serde(default)]
    pub seed: u64,
    /// Candidate-set construction strategy.
    #[serde(default = "default_mode", rename = "mode")]
    pub candidate_mode: CandidateMode,
}

impl FairnessSpec {
    /// A spec with the default Monte Carlo budget (1000), seed 0, full mode.
    pub fn new(notion: FairnessNotion, alpha: f64, delta: f64) -> Self {
        FairnessSpec {
            notion,
            alpha,
            delta,
            mc_samples: default_mc_samples(),
            seed: 0,
            candidate_mode: default_mode(),
        }
    }

    /// Check the numeric preconditions (the EA prevalence assumption is
    /// data-dependent and checked at fit time instead).
    pub fn validate(&self) -> Result<(), FairnessError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(FairnessError::InvalidParameter {
                name: "alpha",
                reason: format!("must lie in (0,1), got {}", self.alpha),
            });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(FairnessError::InvalidParameter {
                name: "delta",
                reason: format!("must lie in (0,1), got {}", self.delta),
            });
        }
        if self.mc_samples == 0 {
            return Err(FairnessError::InvalidParameter {
                name: "mc_samples",
                reason: "must be ≥ 1".to_string(),
            });
        }
        Ok(())
    }
}

/// The four per-cell counts `n^{y,a}`, indexed by `[y][a]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub n_00: usize,
    pub n_01: usize,
    pub n_10: usize,
    pub n_11: usize,
}

impl CellCounts {
    pub fn get(&self, y: u8, a: u8) -> usize {
        match (y, a) {
            (0, 0) => self.n_00,
            (0, 1) => self.n_01,
            (1, 0) => self.n_10,
            (1, 1) => self.n_11,
            _ => unreachable!("y and a are validated binary"),
        }
    }

    /// Total n = Σ n^{y,a}.
    pub fn total(&self) -> usize {
        self.n_00 + self.n_01 + self.n_10 + self.n_11
    }

    /// Pooled per-group size n^a = n^{0,a} + n^{1,a}.
    pub fn group_total(&self, a: u8) -> usize {
        self.get(0, a) + self.get(1, a)
    }
}

/// Calibration scores partitioned by (label, group) and sorted non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedScores {
    cells: [Vec<f64>; 4],
}

fn cell_index(y: u8, a: u8) -> usize {
    (y as usize) * 2 + (a as usize)
}

impl GroupedScores {
    /// Partition raw `(score, y, a)` triples into the four sorted cells.
    ///
    /// Scores must be finite and in `[0,1]`; `y` and `a` must be 0 or 1.
    /// Empty cells are legal here (feasibility is a fit-time concern).
    pub fn from_triples<I>(triples: I) -> Result<Self, FairnessError>
    where
        I: IntoIterator<Item = (f64, u8, u8)>,
    {
        let mut cells: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (score, y, a) in triples {
            if !score.is_finite() || !(0.0..=1.0).contains(&score) {
                return Err(FairnessError::ScoreOutOfRange { value: score });
            }
            if y > 1 {
                return Err(FairnessError::InvalidBinary {
                    name: "label",
                    value: y as i64,
                });
            }
            if a > 1 {
                return Err(FairnessError::InvalidBinary {
                    name: "group",
                    value: a as i64,
                });
            }
            cells[cell_index(y, a)].push(score);
        }
        for cell in &mut cells {
            // Stable sort: duplicates keep their relative order.
            cell.sort_by(|x, y| x.total_cmp(y));
        }
        Ok(GroupedScores { cells })
    }

    /// The sorted cell `T^{y,a}`.
    pub fn cell(&self, y: u8, a: u8) -> &[f64] {
        &self.cells[cell_index(y, a)]
    }

    /// `n^{y,a}`.
    pub fn size(&self, y: u8, a: u8) -> usize {
        self.cells[cell_index(y, a)].len()
    }

    /// All four counts.
    pub fn counts(&self) -> CellCounts {
        CellCounts {
            n_00: self.size(0, 0),
            n_01: self.size(0, 1),
            n_10: self.size(1, 0),
            n_11: self.size(1, 1),
        }
    }

    /// Total `n`.
    pub fn total(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// Pooled per-group sequence `T^a = T^{0,a} ∪ T^{1,a}`, sorted (used by
    /// demographic parity, which thresholds per-group positive rates).
    pub fn pooled(&self, a: u8) -> Vec<f64> {
        let lo = self.cell(0, a);
        let hi = self.cell(1, a);
        let mut merged = Vec::with_capacity(lo.len() + hi.len());
        let (mut i, mut j) = (0, 0);
        while i < lo.len() && j < hi.len() {
            if lo[i] <= hi[j] {
                merged.push(lo[i]);
                i += 1;
            } else {
                merged.push(hi[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&lo[i..]);
        merged.extend_from_slice(&hi[j..]);
        merged
    }

    /// Plug-in prevalence estimates from the cell counts.
    ///
    /// `p̂_a = (n^{1,a}+n^{0,a})/n` and `p̂_{Y,a} = n^{1,a}/(n^{0,a}+n^{1,a})`.
    /// Errors if the total is zero or a group has no samples.
    pub fn prevalence(&self) -> Result<PrevalenceEstimates, FairnessError> {
        let n = self.total();
        if n == 0 {
            return Err(FairnessError::EmptyInput {
                what: "prevalence of an empty sample",
            });
        }
        let mut p_a = [0.0; 2];
        let mut p_ya = [0.0; 2];
        for a in 0..2u8 {
            let n_a = self.size(0, a) + self.size(1, a);
            if n_a == 0 {
                return Err(FairnessError::EmptyInput {
                    what: "group with no samples",
                });
            }
            p_a[a as usize] = n_a as f64 / n as f64;
            p_ya[a as usize] = self.size(1, a) as f64 / n_a as f64;
        }
        Ok(PrevalenceEstimates { p_a, p_ya })
    }
}

/// Validate and partition raw `(score, y, a)` triples (see
/// [`GroupedScores::from_triples`]).
pub fn validate_grouped_scores(
    triples: &[(f64, u8, u8)],
) -> Result<GroupedScores, FairnessError> {
    GroupedScores::from_triples(triples.iter().copied())
}

/// Plug-in estimates p̂_a and p̂_{Y,a} used by the pairing map and the
/// equalized-accuracy bound terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceEstimates {
    p_a: [f64; 2],
    p_ya: [f64; 2],
}

impl PrevalenceEstimates {
    /// Construct directly (values must satisfy p̂_0 + p̂_1 = 1, all in [0,1]).
    pub fn new(p_0: f64, p_1: f64, p_y0: f64, p_y1: f64) -> Result<Self, FairnessError> {
        let ok = |v: f64| (0.0..=1.0).contains(&v) && v.is_finite();
        if !(ok(p_0) && ok(p_1) && ok(p_y0) && ok(p_y1)) || (p_0 + p_1 - 1.0).abs() > 1e-12 {
            return Err(FairnessError::InvalidParameter {
                name: "prevalence",
                reason: format!("need p_0+p_1=1 and all in [0,1], got ({p_0},{p_1},{p_y0},{p_y1})"),
            });
        }
        Ok(PrevalenceEstimates {
            p_a: [p_0, p_1],
            p_ya: [p_y0, p_y1],
        })
    }

    /// Group proportion p̂_a.
    pub fn p_a(&self, a: u8) -> f64 {
        self.p_a[a as usize]
    }

    /// Conditional positive rate p̂_{Y,a}.
    pub fn p_ya(&self, a: u8) -> f64 {
        self.p_ya[a as usize]
    }
}

/// A threshold-index tuple together with its violation bound and estimated
/// error.
///
/// Index semantics depend on the notion:
/// - EOO/EO/EA: `k_10`, `k_11` are the chosen 1-based threshold indices into
///   `T^{1,0}`, `T^{1,1}`; `k_00`, `k_01` are derived 0-based ranks into
///   `T^{0,0}`, `T^{0,1}` (0 = the threshold lies below the whole cell).
/// - PE: roles swap — `k_00`, `k_01` are chosen 1-based indices into
///   `T^{0,a}` (the thresholds sit on negative-label order statistics) and
///   `k_10`, `k_11` are derived 0-based ranks into `T^{1,a}`.
/// - DP: `k_10`, `k_11` are chosen 1-based indices into the *pooled*
///   per-group sequences `T^0`, `T^1`; `k_00`, `k_01` are derived 0-based
///   ranks into `T^{0,0}`, `T^{0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub k_10: usize,
    pub k_11: usize,
    pub k_00: usize,
    pub k_01: usize,
    /// Violation-probability bound L for this tuple (total across terms).
    pub bound: f64,
    /// Plug-in misclassification estimate ê (filled during candidate
    /// construction; `None` only for hand-built entries).
    pub est_error: Option<f64>,
}

/// A calibrated classifier: per-group thresholds plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedClassifier {
    /// Decision threshold for group 0; predict 1 iff score > t_0.
    pub t_0: f64,
    /// Decision threshold for group 1.
    pub t_1: f64,
    /// The spec the fit ran under.
    pub spec: FairnessSpec,
    /// The winning candidate (indices, bound, ê).
    pub chosen: CandidateEntry,
    /// Calibration cell sizes the thresholds were derived from.
    pub calibration_sizes: CellCounts,
}

impl FittedClassifier {
    /// Threshold for a group.
    pub fn threshold(&self, a: u8) -> f64 {
        if a == 0 {
            self.t_0
        } else {
            self.t_1
        }
    }
}

/// Per-cell prediction tallies backing a [`FairnessReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellTally {
    /// Number of samples in the (y,a) cell.
    pub total: usize,
    /// Of those, how many were predicted positive.
    pub predicted_positive: usize,
}

/// Signed fairness metrics of a prediction set, with per-cell tallies.
///
/// A metric whose conditioning cell is empty is `None` ("undefined") — an
/// empty cell must not masquerade as perfect fairness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    /// TPR(a=1) − TPR(a=0).
    pub deoo: Option<f64>,
    /// (TPR gap, FPR gap) — the equalized-odds pair.
    pub deo: [Option<f64>; 2],
    /// P(Ŷ=1|A=1) − P(Ŷ=1|A=0).
    pub ddp: Option<f64>,
    /// FPR(a=1) − FPR(a=0).
    pub dpe: Option<f64>,
    /// Misclassification-rate gap: P(Ŷ≠Y|A=1) − P(Ŷ≠Y|A=0).
    pub dea: Option<f64>,
    /// Overall agreement rate.
    pub accuracy: f64,
    /// Tallies indexed `[y][a]`.
    pub counts: [[CellTally; 2]; 2],
}
