//! Synthetic data generators, a simple logistic base scorer, and the
//! repeated-split benchmark harness.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Normal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::calibrate::fit;
use crate::classify::{fairness_metrics, predict, quantile_summary};
use crate::core::{
    CandidateMode, FairnessError, FairnessNotion, FairnessSpec, GroupedScores,
};

/// Per-cell feature distribution. Each feature coordinate of a row in cell
/// `(y, a)` is drawn i.i.d. from the cell's law; location-family laws draw
/// their location parameter once per row from `U(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureLaw {
    /// Student t with the given degrees of freedom.
    StudentT { df: f64 },
    /// Chi-squared with the given degrees of freedom.
    ChiSquared { df: f64 },
    /// Normal with per-row location `μ ~ U(0,1)` and unit scale.
    NormalLoc,
    /// Laplace with per-row location `μ ~ U(0,1)` and unit scale.
    LaplaceLoc,
}

/// Configuration of one synthetic model: group/label probabilities plus the
/// feature law of each `(y, a)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticModelSpec {
    /// Model identifier, 1–3.
    pub model_id: u8,
    /// Feature dimension (60, 80, 60 for models 1, 2, 3).
    pub dimension: usize,
    /// P(A = 1).
    pub p_1: f64,
    /// `p_y[a]` = P(Y = 1 | A = a).
    pub p_y: [f64; 2],
    /// `cell_laws[y][a]` is the feature law of cell `(y, a)`.
    pub cell_laws: [[FeatureLaw; 2]; 2],
}

impl SyntheticModelSpec {
    /// The built-in models. All three share P(A=1) = 0.7,
    /// P(Y=1|A=1) = 0.7, P(Y=1|A=0) = 0.4 and differ in dimension and
    /// per-cell feature laws.
    pub fn model(id: u8) -> Result<Self, FairnessError> {
        use FeatureLaw::*;
        let (dimension, cell_laws) = match id {
            1 => (
                60,
                // [y][a]: (0,0) t(3), (0,1) χ²₁, (1,0) χ²₃, (1,1) N(μ,1)
                [
                    [StudentT { df: 3.0 }, ChiSquared { df: 1.0 }],
                    [ChiSquared { df: 3.0 }, NormalLoc],
                ],
            ),
            2 => (
                80,
                [
                    [StudentT { df: 4.0 }, ChiSquared { df: 2.0 }],
                    [ChiSquared { df: 4.0 }, LaplaceLoc],
                ],
            ),
            3 => (
                60,
                [
                    [StudentT { df: 1.0 }, StudentT { df: 4.0 }],
                    [ChiSquared { df: 1.0 }, ChiSquared { df: 4.0 }],
                ],
            ),
            other => {
                return Err(FairnessError::InvalidParameter {
                    name: "model_id",
                    reason: format!("unknown model {other}, expected 1, 2, or 3"),
                })
            }
        };
        Ok(Self {
            model_id: id,
            dimension,
            p_1: 0.7,
            p_y: [0.4, 0.7],
            cell_laws,
        })
    }

    /// P(A = 0).
    pub fn p_0(&self) -> f64 {
        1.0 - self.p_1
    }
}

/// A generated synthetic sample: feature rows with labels and groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// One feature vector per row, each of length `dimension`.
    pub features: Vec<Vec<f64>>,
    /// Binary labels.
    pub labels: Vec<u8>,
    /// Binary protected attribute.
    pub groups: Vec<u8>,
    /// Feature dimension.
    pub dimension: usize,
}

fn fill_features(law: FeatureLaw, dim: usize, rng: &mut ChaCha20Rng, out: &mut Vec<f64>) {
    out.clear();
    match law {
        FeatureLaw::StudentT { df } => {
            let dist = StudentT::new(df).expect("valid df");
            out.extend((0..dim).map(|_| rng.sample(dist)));
        }
        FeatureLaw::ChiSquared { df } => {
            let dist = ChiSquared::new(df).expect("valid df");
            out.extend((0..dim).map(|_| rng.sample(dist)));
        }
        FeatureLaw::NormalLoc => {
            let mu: f64 = rng.random();
            let dist = Normal::new(mu, 1.0).expect("valid scale");
            out.extend((0..dim).map(|_| rng.sample(dist)));
        }
        FeatureLaw::LaplaceLoc => {
            let mu: f64 = rng.random();
            out.extend((0..dim).map(|_| {
                // Inverse-CDF sampling of Laplace(mu, 1): for u uniform on
                // (-1/2, 1/2), x = mu - sign(u) ln(1 - 2|u|).
                let u = loop {
                    let u = rng.random::<f64>() - 0.5;
                    if 1.0 - 2.0 * u.abs() > 0.0 {
                        break u;
                    }
                };
                mu - u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }));
        }
    }
}

/// Generate `n` rows from a synthetic model, deterministically in `seed`.
///
/// Each row draws `a ~ Bernoulli(p_1)`, then `y ~ Bernoulli(p_y[a])`, then
/// fills the feature vector i.i.d. from the `(y, a)` cell's law.
pub fn synth_generate(
    model: &SyntheticModelSpec,
    n: usize,
    seed: u64,
) -> Result<SyntheticData, FairnessError> {
    if n == 0 {
        return Err(FairnessError::InvalidParameter {
            name: "n",
            reason: "need at least one row".into(),
        });
    }
    if model.dimension == 0 {
        return Err(FairnessError::InvalidParameter {
            name: "dimension",
            reason: "need at least one feature".into(),
        });
    }
    for p in [model.p_1, model.p_y[0], model.p_y[1]] {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(FairnessError::InvalidParameter {
                name: "probability",
                reason: format!("must lie in [0, 1], got {p}"),
            });
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(model.dimension);
    for _ in 0..n {
        let a = u8::from(rng.random::<f64>() < model.p_1);
        let y = u8::from(rng.random::<f64>() < model.p_y[a as usize]);
        fill_features(
            model.cell_laws[y as usize][a as usize],
            model.dimension,
            &mut rng,
            &mut row,
        );
        features.push(row.clone());
        labels.push(y);
        groups.push(a);
    }
    Ok(SyntheticData {
        features,
        labels,
        groups,
        dimension: model.dimension,
    })
}

/// A trained logistic scorer over (features, group).
///
/// Inputs are standardized with the training means and scales; the group
/// indicator enters as one extra standardized column, followed by an
/// intercept. Scores are the sigmoid of the linear predictor, hence in
/// `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseScorer {
    weights: Vec<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
    dimension: usize,
}

impl BaseScorer {
    /// Score one row. `features` must have the training dimension.
    pub fn score(&self, features: &[f64], group: u8) -> Result<f64, FairnessError> {
        if features.len() != self.dimension {
            return Err(FairnessError::LengthMismatch {
                left: features.len(),
                right: self.dimension,
            });
        }
        if group > 1 {
            return Err(FairnessError::InvalidBinary {
                name: "group",
                value: group as i64,
            });
        }
        let mut z = 0.0;
        for (j, &x) in features.iter().chain(std::iter::once(&(group as f64))).enumerate() {
            z += self.weights[j] * (x - self.means[j]) / self.scales[j];
        }
        z += self.weights[self.dimension + 1]; // intercept
        Ok(1.0 / (1.0 + (-z).exp()))
    }

    /// Score a batch of rows.
    pub fn score_all(&self, features: &[Vec<f64>], groups: &[u8]) -> Result<Vec<f64>, FairnessError> {
        if features.len() != groups.len() {
            return Err(FairnessError::LengthMismatch {
                left: features.len(),
                right: groups.len(),
            });
        }
        features
            .iter()
            .zip(groups)
            .map(|(x, &a)| self.score(x, a))
            .collect()
    }
}

const GD_ITERS: usize = 500;
const GD_RATE: f64 = 0.5;
const GD_RIDGE: f64 = 1e-3;

/// Train a ridge-regularized logistic scorer by full-batch gradient descent
/// (fixed budget, zero initialization) on (features, group) → label.
///
/// # Errors
///
/// Training rows must be non-empty, consistent in dimension, with binary
/// labels/groups and at least one row of each label class.
pub fn train_base_scorer(
    features: &[Vec<f64>],
    labels: &[u8],
    groups: &[u8],
) -> Result<BaseScorer, FairnessError> {
    if features.len() != labels.len() {
        return Err(FairnessError::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if labels.len() != groups.len() {
        return Err(FairnessError::LengthMismatch {
            left: labels.len(),
            right: groups.len(),
        });
    }
    if features.is_empty() {
        return Err(FairnessError::EmptyInput {
            what: "training rows",
        });
    }
    let dim = features[0].len();
    if dim == 0 {
        return Err(FairnessError::EmptyInput {
            what: "feature columns",
        });
    }
    for row in features {
        if row.len() != dim {
            return Err(FairnessError::LengthMismatch {
                left: row.len(),
                right: dim,
            });
        }
        if let Some(&bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(FairnessError::InvalidParameter {
                name: "features",
                reason: format!("entries must be finite, got {bad}"),
            });
        }
    }
    for (&y, &a) in labels.iter().zip(groups) {
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
    }
    let positives = labels.iter().filter(|&&y| y == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(FairnessError::InvalidParameter {
            name: "labels",
            reason: "training data contains a single label class".into(),
        });
    }

    let m = features.len();
    let cols = dim + 1; // features plus the group column
    let mut means = vec![0.0; cols];
    let mut scales = vec![0.0; cols];
    let column = |i: usize, j: usize| -> f64 {
        if j < dim {
            features[i][j]
        } else {
            groups[i] as f64
        }
    };
    for j in 0..cols {
        let mut sum = 0.0;
        for i in 0..m {
            sum += column(i, j);
        }
        means[j] = sum / m as f64;
        let mut ss = 0.0;
        for i in 0..m {
            let d = column(i, j) - means[j];
            ss += d * d;
        }
        let sd = (ss / m as f64).sqrt();
        scales[j] = if sd < 1e-9 { 1.0 } else { sd };
    }

    // Standardized design with trailing intercept column.
    let design: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row: Vec<f64> = (0..cols)
                .map(|j| (column(i, j) - means[j]) / scales[j])
                .collect();
            row.push(1.0);
            row
        })
        .collect();

    let mut weights = vec![0.0; cols + 1];
    let mut grad = vec![0.0; cols + 1];
    for _ in 0..GD_ITERS {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (row, &y) in design.iter().zip(labels) {
            let z: f64 = row.iter().zip(&weights).map(|(x, w)| x * w).sum();
            let residual = 1.0 / (1.0 + (-z).exp()) - y as f64;
            for (g, x) in grad.iter_mut().zip(row) {
                *g += residual * x;
            }
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= GD_RATE * (*g / m as f64 + GD_RIDGE * *w);
        }
    }

    Ok(BaseScorer {
        weights,
        means,
        scales,
        dimension: dim,
    })
}

/// Input source for [`run_benchmark`].
pub enum BenchSource<'a> {
    /// Draw a fresh sample of the given size from a synthetic model at each
    /// repetition and train the base scorer on the training split.
    Model {
        spec: &'a SyntheticModelSpec,
        n: usize,
    },
    /// Pre-scored rows `(score, label, group)`. No training split is taken;
    /// the calibration/test fractions are renormalized over the whole set.
    Scores(&'a [(f64, u8, u8)]),
}

/// One aggregated benchmark row per fairness spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub notion: FairnessNotion,
    pub alpha: f64,
    pub delta: f64,
    pub mode: CandidateMode,
    /// Number of repetitions attempted.
    pub repetitions: usize,
    /// Repetitions where calibration was infeasible or no candidate was
    /// admissible; excluded from the aggregates.
    pub infeasible: usize,
    pub mean_abs_deoo: Option<f64>,
    pub q95_abs_deoo: Option<f64>,
    pub mean_abs_dpe: Option<f64>,
    pub q95_abs_dpe: Option<f64>,
    pub mean_accuracy: Option<f64>,
}

/// Outcome of one (repetition, spec) cell.
enum SpecOutcome {
    Infeasible,
    Metrics {
        abs_deoo: Option<f64>,
        abs_dpe: Option<f64>,
        accuracy: f64,
    },
}

fn derive_seed(master: u64, rep: usize, tag: u8) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"faircal.bench");
    hasher.update(master.to_le_bytes());
    hasher.update((rep as u64).to_le_bytes());
    hasher.update([tag]);
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> (usize, usize) {
    let n_train = (fractions.0 * n as f64).floor() as usize;
    let n_cal = (fractions.1 * n as f64).floor() as usize;
    (n_train.min(n), n_cal.min(n - n_train.min(n)))
}

fn run_one_rep(
    source: &BenchSource,
    grid: &[FairnessSpec],
    fractions: (f64, f64, f64),
    master_seed: u64,
    rep: usize,
) -> Result<Vec<SpecOutcome>, FairnessError> {
    // Assemble (score, label, group) triples plus the split permutation.
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(master_seed, rep, 0));
    let (triples, n_cal_start, n_test_start) = match source {
        BenchSource::Model { spec, n } => {
            let data = synth_generate(spec, *n, derive_seed(master_seed, rep, 1))?;
            let mut order: Vec<usize> = (0..*n).collect();
            order.shuffle(&mut rng);
            let (n_train, n_cal) = split_sizes(*n, fractions);
            if n_train == 0 || n_cal == 0 || n_train + n_cal >= *n {
                return Err(FairnessError::InvalidParameter {
                    name: "split",
                    reason: format!(
                        "fractions {fractions:?} leave an empty split at n = {n}"
                    ),
                });
            }
            let pick = |idxs: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>, Vec<u8>) {
                (
                    idxs.iter().map(|&i| data.features[i].clone()).collect(),
                    idxs.iter().map(|&i| data.labels[i]).collect(),
                    idxs.iter().map(|&i| data.groups[i]).collect(),
                )
            };
            let (train_x, train_y, train_a) = pick(&order[..n_train]);
            let scorer = match train_base_scorer(&train_x, &train_y, &train_a) {
                Ok(s) => s,
                // A single-class training split is a degenerate draw; report
                // the whole repetition as infeasible rather than aborting.
                Err(FairnessError::InvalidParameter { name: "labels", .. }) => {
                    return Ok(grid.iter().map(|_| SpecOutcome::Infeasible).collect());
                }
                Err(e) => return Err(e),
            };
            let rest = &order[n_train..];
            let (rest_x, rest_y, rest_a) = pick(rest);
            let scores = scorer.score_all(&rest_x, &rest_a)?;
            let triples: Vec<(f64, u8, u8)> = scores
                .into_iter()
                .zip(rest_y)
                .zip(rest_a)
                .map(|((s, y), a)| (s, y, a))
                .collect();
            (triples, 0usize, n_cal)
        }
        BenchSource::Scores(rows) => {
            let n = rows.len();
            if n == 0 {
                return Err(FairnessError::EmptyInput { what: "score rows" });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let cal_fraction = fractions.1 / (fractions.1 + fractions.2);
            let n_cal = ((cal_fraction * n as f64).floor() as usize).min(n);
            if n_cal == 0 || n_cal >= n {
                return Err(FairnessError::InvalidParameter {
                    name: "split",
                    reason: format!(
                        "fractions {fractions:?} leave an empty split at n = {n}"
                    ),
                });
            }
            let triples: Vec<(f64, u8, u8)> = order.iter().map(|&i| rows[i]).collect();
            (triples, 0usize, n_cal)
        }
    };

    let cal_rows = &triples[n_cal_start..n_test_start];
    let test_rows = &triples[n_test_start..];
    let calibration = GroupedScores::from_triples(cal_rows.iter().copied())?;
    let test_scores: Vec<f64> = test_rows.iter().map(|r| r.0).collect();
    let test_labels: Vec<u8> = test_rows.iter().map(|r| r.1).collect();
    let test_groups: Vec<u8> = test_rows.iter().map(|r| r.2).collect();

    let mut outcomes = Vec::with_capacity(grid.len());
    for (spec_idx, spec) in grid.iter().enumerate() {
        let mut rep_spec = spec.clone();
        rep_spec.seed = derive_seed(master_seed, rep, 2).wrapping_add(spec_idx as u64);
        match fit(&calibration, &rep_spec) {
            Ok(fitted) => {
                let preds = predict(&fitted, &test_scores, &test_groups)?;
                let report = fairness_metrics(&preds, &test_labels, &test_groups)?;
                outcomes.push(SpecOutcome::Metrics {
                    abs_deoo: report.deoo.map(f64::abs),
                    abs_dpe: report.dpe.map(f64::abs),
                    accuracy: report.accuracy,
                });
            }
            Err(
                FairnessError::Infeasible(_)
                | FairnessError::NoAdmissibleCandidate
                | FairnessError::AssumptionViolated { .. },
            ) => outcomes.push(SpecOutcome::Infeasible),
            Err(e) => return Err(e),
        }
    }
    Ok(outcomes)
}

/// Run the repeated-split benchmark: at each repetition, split the source,
/// train the base scorer (for model sources), calibrate each spec on the
/// calibration split, and evaluate on the test split. Returns one aggregate
/// row per spec with the mean and upper 95% quantile of |DEOO| and |DPE| and
/// the mean accuracy over the feasible repetitions.
///
/// Repetitions run in parallel; every random choice is derived from
/// `(master_seed, repetition index)`, so results are independent of thread
/// scheduling.
pub fn run_benchmark(
    source: &BenchSource,
    grid: &[FairnessSpec],
    repetitions: usize,
    fractions: (f64, f64, f64),
    master_seed: u64,
) -> Result<Vec<BenchRow>, FairnessError> {
    if repetitions == 0 {
        return Err(FairnessError::InvalidParameter {
            name: "repetitions",
            reason: "need at least one repetition".into(),
        });
    }
    if grid.is_empty() {
        return Err(FairnessError::EmptyInput { what: "spec grid" });
    }
    for spec in grid {
        spec.validate()?;
    }
    let (f_train, f_cal, f_test) = fractions;
    if !(f_train >= 0.0 && f_cal > 0.0 && f_test > 0.0)
        || (f_train + f_cal + f_test - 1.0).abs() > 1e-9
    {
        return Err(FairnessError::InvalidParameter {
            name: "split",
            reason: format!(
                "fractions must be positive (train may be 0) and sum to 1, got {fractions:?}"
            ),
        });
    }
    if matches!(source, BenchSource::Model { .. }) && f_train == 0.0 {
        return Err(FairnessError::InvalidParameter {
            name: "split",
            reason: "model sources need a positive training fraction".into(),
        });
    }

    let per_rep: Vec<Vec<SpecOutcome>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| run_one_rep(source, grid, fractions, master_seed, rep))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(grid.len());
    for (spec_idx, spec) in grid.iter().enumerate() {
        let mut abs_deoo = Vec::new();
        let mut abs_dpe = Vec::new();
        let mut accuracy = Vec::new();
        let mut infeasible = 0usize;
        for outcomes in &per_rep {
            match &outcomes[spec_idx] {
                SpecOutcome::Infeasible => infeasible += 1,
                SpecOutcome::Metrics {
                    abs_deoo: d,
                    abs_dpe: p,
                    accuracy: acc,
                } => {
                    if let Some(d) = d {
                        abs_deoo.push(*d);
                    }
                    if let Some(p) = p {
                        abs_dpe.push(*p);
                    }
                    accuracy.push(*acc);
                }
            }
        }
        let mean = |v: &[f64]| {
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        let q95 = |v: &[f64]| {
            if v.is_empty() {
                None
            } else {
                Some(quantile_summary(v, 0.95).expect("non-empty finite values"))
            }
        };
        rows.push(BenchRow {
            notion: spec.notion,
            alpha: spec.alpha,
            delta: spec.delta,
            mode: spec.candidate_mode,
            repetitions,
            infeasible,
            mean_abs_deoo: mean(&abs_deoo),
            q95_abs_deoo: q95(&abs_deoo),
            mean_abs_dpe: mean(&abs_dpe),
            q95_abs_dpe: q95(&abs_dpe),
            mean_accuracy: mean(&accuracy),
        });
    }
    Ok(rows)
}
