//! Applying fitted classifiers and computing empirical fairness reports.

use crate::core::{CellTally, FairnessError, FairnessReport, FittedClassifier};

fn check_score(value: f64) -> Result<(), FairnessError> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(FairnessError::ScoreOutOfRange { value });
    }
    Ok(())
}

fn check_binary(name: &'static str, value: u8) -> Result<(), FairnessError> {
    if value > 1 {
        return Err(FairnessError::InvalidBinary {
            name,
            value: value as i64,
        });
    }
    Ok(())
}

/// Predict labels for scored rows: `ŷ = 1` iff the score strictly exceeds
/// the threshold of the row's group.
///
/// # Errors
///
/// Scores must be finite and in `[0, 1]`, groups binary, and the two slices
/// equally long.
pub fn predict(
    model: &FittedClassifier,
    scores: &[f64],
    groups: &[u8],
) -> Result<Vec<u8>, FairnessError> {
    if scores.len() != groups.len() {
        return Err(FairnessError::LengthMismatch {
            left: scores.len(),
            right: groups.len(),
        });
    }
    scores
        .iter()
        .zip(groups)
        .map(|(&s, &a)| {
            check_score(s)?;
            check_binary("group", a)?;
            Ok(u8::from(s > model.threshold(a)))
        })
        .collect()
}

/// Difference of per-group rates, group 1 minus group 0; `None` when either
/// conditioning cell is empty.
fn rate_gap(tallies: [(usize, usize); 2]) -> Option<f64> {
    let [(n_0, x_0), (n_1, x_1)] = tallies;
    if n_0 == 0 || n_1 == 0 {
        return None;
    }
    Some(x_1 as f64 / n_1 as f64 - x_0 as f64 / n_0 as f64)
}

/// Empirical fairness report for a set of predictions.
///
/// Rates are plain ratios conditioned on label/group cells; every disparity
/// is the group-1 rate minus the group-0 rate. A disparity whose
/// conditioning cell is empty is reported as `None` (undefined), never as 0.
///
/// # Errors
///
/// The three slices must be equally long and non-empty, with binary entries.
pub fn fairness_metrics(
    predictions: &[u8],
    labels: &[u8],
    groups: &[u8],
) -> Result<FairnessReport, FairnessError> {
    if predictions.len() != labels.len() {
        return Err(FairnessError::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if labels.len() != groups.len() {
        return Err(FairnessError::LengthMismatch {
            left: labels.len(),
            right: groups.len(),
        });
    }
    if predictions.is_empty() {
        return Err(FairnessError::EmptyInput { what: "predictions" });
    }

    let mut counts = [[CellTally::default(); 2]; 2];
    let mut correct = 0usize;
    for ((&p, &y), &a) in predictions.iter().zip(labels).zip(groups) {
        check_binary("prediction", p)?;
        check_binary("label", y)?;
        check_binary("group", a)?;
        let tally = &mut counts[y as usize][a as usize];
        tally.total += 1;
        tally.predicted_positive += p as usize;
        correct += usize::from(p == y);
    }

    let cell = |y: usize, a: usize| (counts[y][a].total, counts[y][a].predicted_positive);
    let group = |a: usize| {
        (
            counts[0][a].total + counts[1][a].total,
            counts[0][a].predicted_positive + counts[1][a].predicted_positive,
        )
    };
    let errors = |a: usize| {
        let (n, _) = group(a);
        // Mistakes: predicted positives among Y=0 plus predicted negatives
        // among Y=1.
        let wrong = counts[0][a].predicted_positive
            + (counts[1][a].total - counts[1][a].predicted_positive);
        (n, wrong)
    };

    let deoo = rate_gap([cell(1, 0), cell(1, 1)]);
    let dpe = rate_gap([cell(0, 0), cell(0, 1)]);
    let ddp = rate_gap([group(0), group(1)]);
    let dea = rate_gap([errors(0), errors(1)]);

    Ok(FairnessReport {
        deoo,
        deo: [deoo, dpe],
        ddp,
        dpe,
        dea,
        accuracy: correct as f64 / predictions.len() as f64,
        counts,
    })
}

/// Order-statistic quantile with the upper convention: the `⌈q·m⌉`-th
/// smallest of the `m` values (at least the 1st).
///
/// # Errors
///
/// `values` must be non-empty and finite; `q` must lie in `[0, 1]`.
pub fn quantile_summary(values: &[f64], q: f64) -> Result<f64, FairnessError> {
    if values.is_empty() {
        return Err(FairnessError::EmptyInput { what: "values" });
    }
    if !q.is_finite() || !(0.0..=1.0).contains(&q) {
        return Err(FairnessError::InvalidParameter {
            name: "q",
            reason: format!("quantile must lie in [0, 1], got {q}"),
        });
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(FairnessError::InvalidParameter {
            name: "values",
            reason: format!("entries must be finite, got {bad}"),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len();
    let rank = ((q * m as f64).ceil() as usize).max(1).min(m);
    Ok(sorted[rank - 1])
}
