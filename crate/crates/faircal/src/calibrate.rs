//! Candidate construction, error estimation, and threshold selection.
//!
//! Calibration turns a grouped calibration sample into a fitted pair of
//! group-specific thresholds. The pipeline is:
//!
//! 1. enumerate candidate index tuples over the calibration order statistics
//!    (the full grid, or a shrunk one-dimensional family),
//! 2. keep the candidates whose finite-sample violation bound is at most
//!    `delta` (see [`crate::bounds`]),
//! 3. among the admissible candidates, pick the one with the smallest
//!    estimated misclassification error, breaking ties by the smaller bound
//!    and then by lexicographically smaller chosen indices.
//!
//! [`fit`] performs the three steps lazily: candidates are sorted by
//! estimated error first and bounds are only evaluated until the best
//! admissible error block has been resolved, which selects exactly the same
//! candidate as materialising the whole admissible set.

use crate::bounds::{self, min_sample_size, BoundEval};
use crate::core::{
    CandidateEntry, CandidateMode, CellCounts, FairnessError, FairnessNotion, FairnessSpec,
    FittedClassifier, GroupedScores, PrevalenceEstimates,
};

/// Number of scores in `sorted` that are less than or equal to `x`.
///
/// `sorted` must be sorted ascending. The result is the 0-based rank used for
/// derived indices: if `k = rank_below(s, x)` then `s[k-1] <= x < s[k]`
/// (with the conventions `s[-1] = -inf`, `s[len] = +inf`).
pub fn rank_below(sorted: &[f64], x: f64) -> usize {
    sorted.partition_point(|&s| s <= x)
}

/// Index (1-based) of the score in `sorted` nearest to `target`.
///
/// Ties in distance resolve to the smaller index. `sorted` must be
/// non-empty and ascending.
fn nearest_rank(sorted: &[f64], target: f64) -> usize {
    debug_assert!(!sorted.is_empty());
    let i = sorted.partition_point(|&s| s < target);
    if i == 0 {
        1
    } else if i >= sorted.len() {
        sorted.len()
    } else {
        let left_gap = target - sorted[i - 1];
        let right_gap = sorted[i] - target;
        if left_gap <= right_gap {
            i
        } else {
            i + 1
        }
    }
}

/// Paired threshold for group 1 given a group-0 threshold `t`, under the
/// plug-in model that treats both group score distributions as uniform and
/// equalises the estimated cost-weighted posterior odds.
///
/// Returns `Ok(None)` when the pairing is degenerate: the denominator
/// `2 p_1 p_{Y,1} - (1/t - 2) p_0 p_{Y,0}` is not positive, or the paired
/// value falls outside the open interval `(0, 1)`.
///
/// # Errors
///
/// `t` must lie strictly inside `(0, 1)`.
pub fn bayes_paired_threshold(
    t: f64,
    prevalence: &PrevalenceEstimates,
) -> Result<Option<f64>, FairnessError> {
    if !(t > 0.0 && t < 1.0) || !t.is_finite() {
        return Err(FairnessError::InvalidParameter {
            name: "t",
            reason: format!("must lie strictly inside (0, 1), got {t}"),
        });
    }
    let num = prevalence.p_a(1) * prevalence.p_ya(1);
    let den = 2.0 * num - (1.0 / t - 2.0) * prevalence.p_a(0) * prevalence.p_ya(0);
    if den <= 0.0 {
        return Ok(None);
    }
    let paired = num / den;
    if paired > 0.0 && paired < 1.0 {
        Ok(Some(paired))
    } else {
        Ok(None)
    }
}

/// Estimated misclassification error together with any empty-cell warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEstimate {
    /// The plug-in estimate of the misclassification error, in `[0, 1]`.
    pub value: f64,
    /// Cells `(y, a)` with zero calibration samples; their error terms were
    /// taken as zero, so `value` should be read as a partial estimate.
    pub empty_cells: Vec<(u8, u8)>,
}

/// The group thresholds a candidate encodes, `(t_0, t_1)`.
///
/// For EOO, EO, and EA the thresholds are the chosen order statistics of
/// the positive-label sequences; for PE those of the negative-label
/// sequences; for DP those of the per-group pooled sequences.
pub fn candidate_thresholds(
    notion: FairnessNotion,
    candidate: &CandidateEntry,
    scores: &GroupedScores,
) -> Result<(f64, f64), FairnessError> {
    let counts = scores.counts();
    let pick = |seq: &[f64], k: usize, name: &'static str| -> Result<f64, FairnessError> {
        if k == 0 || k > seq.len() {
            return Err(FairnessError::InvalidParameter {
                name,
                reason: format!("chosen index {k} outside 1..={}", seq.len()),
            });
        }
        Ok(seq[k - 1])
    };
    match notion {
        FairnessNotion::Eoo | FairnessNotion::Eo | FairnessNotion::Ea => Ok((
            pick(scores.cell(1, 0), candidate.k_10, "k_10")?,
            pick(scores.cell(1, 1), candidate.k_11, "k_11")?,
        )),
        FairnessNotion::Pe => Ok((
            pick(scores.cell(0, 0), candidate.k_00, "k_00")?,
            pick(scores.cell(0, 1), candidate.k_01, "k_01")?,
        )),
        FairnessNotion::Dp => {
            let _ = counts;
            let pooled_0 = scores.pooled(0);
            let pooled_1 = scores.pooled(1);
            Ok((
                pick(&pooled_0, candidate.k_10, "k_10")?,
                pick(&pooled_1, candidate.k_11, "k_11")?,
            ))
        }
    }
}

/// Plug-in estimate of the misclassification error of the thresholds encoded
/// by `candidate`.
///
/// With `n` the total calibration size, the estimate is
///
/// ```text
/// ê =   k^{1,0}/(n^{1,0}+1) · n^{1,0}/n  +  k^{1,1}/(n^{1,1}+1) · n^{1,1}/n
///     + (1 - k^{0,0}/n^{0,0}) · n^{0,0}/n + (1 - k^{0,1}/n^{0,1}) · n^{0,1}/n
/// ```
///
/// where `k^{1,a}` counts positive-label scores at or below the group
/// threshold and `k^{0,a}` counts negative-label scores at or below it. For
/// DP candidates the positive-label counts are re-derived from the pooled
/// thresholds; for every other notion all four counts are read from the
/// candidate entry. A cell with zero samples contributes zero and is
/// reported in [`ErrorEstimate::empty_cells`].
pub fn estimate_error(
    notion: FairnessNotion,
    candidate: &CandidateEntry,
    scores: &GroupedScores,
) -> Result<ErrorEstimate, FairnessError> {
    let counts = scores.counts();
    let n = counts.total();
    if n == 0 {
        return Err(FairnessError::EmptyInput {
            what: "calibration scores",
        });
    }
    let (r_10, r_11) = match notion {
        FairnessNotion::Dp => {
            let (t_0, t_1) = candidate_thresholds(notion, candidate, scores)?;
            (
                rank_below(scores.cell(1, 0), t_0),
                rank_below(scores.cell(1, 1), t_1),
            )
        }
        _ => {
            candidate_thresholds(notion, candidate, scores)?;
            (candidate.k_10, candidate.k_11)
        }
    };
    let ranks = [
        (r_10, counts.get(1, 0), (1u8, 0u8)),
        (r_11, counts.get(1, 1), (1u8, 1u8)),
        (candidate.k_00, counts.get(0, 0), (0u8, 0u8)),
        (candidate.k_01, counts.get(0, 1), (0u8, 1u8)),
    ];
    let mut value = 0.0;
    let mut empty_cells = Vec::new();
    for (rank, cell_n, (y, a)) in ranks {
        if cell_n == 0 {
            empty_cells.push((y, a));
            continue;
        }
        if rank > cell_n {
            return Err(FairnessError::InvalidParameter {
                name: "candidate",
                reason: format!("rank {rank} exceeds cell size {cell_n} for (y={y}, a={a})"),
            });
        }
        let weight = cell_n as f64 / n as f64;
        let term = if y == 1 {
            rank as f64 / (cell_n as f64 + 1.0)
        } else {
            1.0 - rank as f64 / cell_n as f64
        };
        value += term * weight;
    }
    Ok(ErrorEstimate { value, empty_cells })
}

/// A candidate index tuple before bound evaluation.
#[derive(Debug, Clone, Copy)]
struct RawCandidate {
    k_10: usize,
    k_11: usize,
    k_00: usize,
    k_01: usize,
    /// Chosen index pair used for lexicographic tie-breaking.
    chosen: (usize, usize),
}

impl RawCandidate {
    fn entry(&self, bound: f64, est_error: Option<f64>) -> CandidateEntry {
        CandidateEntry {
            k_10: self.k_10,
            k_11: self.k_11,
            k_00: self.k_00,
            k_01: self.k_01,
            bound,
            est_error,
        }
    }
}

/// Feasibility gate shared by [`build_candidates`] and [`fit`]: validates the
/// spec, checks the per-cell sample-size requirements, and computes the
/// prevalence estimates.
fn prepare(
    scores: &GroupedScores,
    spec: &FairnessSpec,
) -> Result<(CellCounts, PrevalenceEstimates), FairnessError> {
    spec.validate()?;
    let counts = scores.counts();
    if spec.candidate_mode == CandidateMode::Shrunk
        && !matches!(spec.notion, FairnessNotion::Eoo | FairnessNotion::Eo)
    {
        return Err(FairnessError::InvalidParameter {
            name: "candidate_mode",
            reason: format!(
                "shrunk candidate sets are only defined for eoo and eo, not {}",
                spec.notion
            ),
        });
    }
    let p_y = if spec.notion == FairnessNotion::Ea {
        for a in 0..2u8 {
            if counts.group_total(a) == 0 {
                return Err(FairnessError::Infeasible(format!(
                    "group a={a} has no calibration samples"
                )));
            }
        }
        let prevalence = scores.prevalence()?;
        Some((prevalence.p_ya(0), prevalence.p_ya(1)))
    } else {
        None
    };
    min_sample_size(spec.notion, spec.alpha, spec.delta, p_y)?.check(&counts)?;
    let prevalence = scores.prevalence()?;
    Ok((counts, prevalence))
}

/// Enumerate every candidate index tuple for `notion` in lexicographic order
/// of the chosen pair, deriving the complementary ranks from the encoded
/// thresholds.
fn enumerate_candidates(
    notion: FairnessNotion,
    scores: &GroupedScores,
    counts: &CellCounts,
) -> Vec<RawCandidate> {
    match notion {
        FairnessNotion::Eoo | FairnessNotion::Eo | FairnessNotion::Ea => {
            let t_10 = scores.cell(1, 0);
            let t_11 = scores.cell(1, 1);
            let r_00: Vec<usize> = t_10
                .iter()
                .map(|&t| rank_below(scores.cell(0, 0), t))
                .collect();
            let r_01: Vec<usize> = t_11
                .iter()
                .map(|&t| rank_below(scores.cell(0, 1), t))
                .collect();
            let mut out = Vec::with_capacity(counts.get(1, 0) * counts.get(1, 1));
            for k_10 in 1..=counts.get(1, 0) {
                for k_11 in 1..=counts.get(1, 1) {
                    out.push(RawCandidate {
                        k_10,
                        k_11,
                        k_00: r_00[k_10 - 1],
                        k_01: r_01[k_11 - 1],
                        chosen: (k_10, k_11),
                    });
                }
            }
            out
        }
        FairnessNotion::Pe => {
            let t_00 = scores.cell(0, 0);
            let t_01 = scores.cell(0, 1);
            let r_10: Vec<usize> = t_00
                .iter()
                .map(|&t| rank_below(scores.cell(1, 0), t))
                .collect();
            let r_11: Vec<usize> = t_01
                .iter()
                .map(|&t| rank_below(scores.cell(1, 1), t))
                .collect();
            let mut out = Vec::with_capacity(counts.get(0, 0) * counts.get(0, 1));
            for k_00 in 1..=counts.get(0, 0) {
                for k_01 in 1..=counts.get(0, 1) {
                    out.push(RawCandidate {
                        k_10: r_10[k_00 - 1],
                        k_11: r_11[k_01 - 1],
                        k_00,
                        k_01,
                        chosen: (k_00, k_01),
                    });
                }
            }
            out
        }
        FairnessNotion::Dp => {
            let pooled_0 = scores.pooled(0);
            let pooled_1 = scores.pooled(1);
            let r_00: Vec<usize> = pooled_0
                .iter()
                .map(|&t| rank_below(scores.cell(0, 0), t))
                .collect();
            let r_01: Vec<usize> = pooled_1
                .iter()
                .map(|&t| rank_below(scores.cell(0, 1), t))
                .collect();
            let mut out = Vec::with_capacity(pooled_0.len() * pooled_1.len());
            for k_0 in 1..=pooled_0.len() {
                for k_1 in 1..=pooled_1.len() {
                    out.push(RawCandidate {
                        k_10: k_0,
                        k_11: k_1,
                        k_00: r_00[k_0 - 1],
                        k_01: r_01[k_1 - 1],
                        chosen: (k_0, k_1),
                    });
                }
            }
            out
        }
    }
}

/// Enumerate the shrunk candidate family: one candidate per group-0 chosen
/// index, with the group-1 index paired through [`bayes_paired_threshold`].
/// Degenerate pairings are skipped.
fn enumerate_shrunk(
    scores: &GroupedScores,
    counts: &CellCounts,
    prevalence: &PrevalenceEstimates,
) -> Result<Vec<RawCandidate>, FairnessError> {
    let t_10 = scores.cell(1, 0);
    let t_11 = scores.cell(1, 1);
    let mut out = Vec::with_capacity(counts.get(1, 0));
    for k_10 in 1..=counts.get(1, 0) {
        let t = t_10[k_10 - 1];
        if !(t > 0.0 && t < 1.0) {
            continue;
        }
        let Some(paired) = bayes_paired_threshold(t, prevalence)? else {
            continue;
        };
        let k_11 = nearest_rank(t_11, paired);
        out.push(RawCandidate {
            k_10,
            k_11,
            k_00: rank_below(scores.cell(0, 0), t),
            k_01: rank_below(scores.cell(0, 1), t_11[k_11 - 1]),
            chosen: (k_10, k_11),
        });
    }
    Ok(out)
}

/// Evaluate a candidate's violation bound and admissibility.
///
/// Returns `(bound, admissible)`. For every notion in full mode, and for EOO
/// in shrunk mode, the candidate is admissible when the total bound is at
/// most `delta`. For EO in shrunk mode the positive-label and negative-label
/// halves must each be at most `delta`; the stored bound is still their sum.
fn evaluate_candidate(
    raw: &RawCandidate,
    counts: &CellCounts,
    prevalence: &PrevalenceEstimates,
    spec: &FairnessSpec,
) -> Result<(f64, bool), FairnessError> {
    let entry = raw.entry(f64::NAN, None);
    let eval = BoundEval::MonteCarlo {
        samples: spec.mc_samples,
        seed: spec.seed,
    };
    if spec.candidate_mode == CandidateMode::Shrunk && spec.notion == FairnessNotion::Eo {
        let halves = bounds::violation_bound_halves(
            spec.notion,
            &entry,
            counts,
            prevalence,
            spec.alpha,
            eval,
        )?;
        let total = halves.0 + halves.1;
        Ok((total, halves.0 <= spec.delta && halves.1 <= spec.delta))
    } else {
        let total = bounds::violation_bound_with(
            spec.notion,
            &entry,
            counts,
            prevalence,
            spec.alpha,
            eval,
        )?;
        Ok((total, total <= spec.delta))
    }
}

/// Materialise the admissible candidate set for `spec` over the calibration
/// scores.
///
/// Every enumerated candidate is bound-checked; the admissible ones are
/// returned with their bound and estimated error filled in, ordered by the
/// chosen index pair. Returns [`FairnessError::NoAdmissibleCandidate`] when
/// the admissible set is empty, and [`FairnessError::Infeasible`] when the
/// per-cell sample sizes fail the minimum requirements.
pub fn build_candidates(
    scores: &GroupedScores,
    spec: &FairnessSpec,
) -> Result<Vec<CandidateEntry>, FairnessError> {
    let (counts, prevalence) = prepare(scores, spec)?;
    let raw = match spec.candidate_mode {
        CandidateMode::Full => enumerate_candidates(spec.notion, scores, &counts),
        CandidateMode::Shrunk => enumerate_shrunk(scores, &counts, &prevalence)?,
    };
    let mut out = Vec::new();
    for candidate in &raw {
        let (bound, admissible) = evaluate_candidate(candidate, &counts, &prevalence, spec)?;
        if admissible {
            let est = estimate_error(spec.notion, &candidate.entry(bound, None), scores)?;
            out.push(candidate.entry(bound, Some(est.value)));
        }
    }
    if out.is_empty() {
        return Err(FairnessError::NoAdmissibleCandidate);
    }
    Ok(out)
}

/// Ordering key for final selection: smaller estimated error wins, then the
/// smaller bound, then the lexicographically smaller chosen index pair.
fn better(
    a: (f64, f64, (usize, usize)),
    b: (f64, f64, (usize, usize)),
) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

/// Calibrate group thresholds: select, among the candidates whose violation
/// bound is at most `spec.delta`, the one with the smallest estimated
/// misclassification error.
///
/// Ties in estimated error resolve to the candidate with the smaller bound,
/// and remaining ties to the lexicographically smaller chosen index pair.
/// Bounds are evaluated lazily in order of increasing estimated error, which
/// yields exactly the argmin over the full admissible set because the bound
/// of any given candidate does not depend on evaluation order.
///
/// # Errors
///
/// [`FairnessError::Infeasible`] when the calibration sample fails the
/// minimum per-cell sizes; [`FairnessError::NoAdmissibleCandidate`] when no
/// candidate passes the bound check.
pub fn fit(scores: &GroupedScores, spec: &FairnessSpec) -> Result<FittedClassifier, FairnessError> {
    let (counts, prevalence) = prepare(scores, spec)?;
    let mut raw = match spec.candidate_mode {
        CandidateMode::Full => enumerate_candidates(spec.notion, scores, &counts),
        CandidateMode::Shrunk => enumerate_shrunk(scores, &counts, &prevalence)?,
    };
    if raw.is_empty() {
        return Err(FairnessError::NoAdmissibleCandidate);
    }

    let mut keyed: Vec<(f64, RawCandidate)> = Vec::with_capacity(raw.len());
    for candidate in raw.drain(..) {
        let est = estimate_error(spec.notion, &candidate.entry(f64::NAN, None), scores)?;
        keyed.push((est.value, candidate));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.chosen.cmp(&b.1.chosen)));

    let mut best: Option<(f64, f64, (usize, usize), RawCandidate)> = None;
    let mut idx = 0;
    while idx < keyed.len() {
        let est = keyed[idx].0;
        if best.is_some() {
            break;
        }
        // Resolve the whole block of candidates sharing this estimated error
        // so the (bound, lexicographic) tie-break sees all of them.
        let mut block_end = idx;
        while block_end < keyed.len() && keyed[block_end].0 == est {
            block_end += 1;
        }
        for (est_i, cand_i) in &keyed[idx..block_end] {
            let (bound, admissible) = evaluate_candidate(cand_i, &counts, &prevalence, spec)?;
            if !admissible {
                continue;
            }
            let key = (*est_i, bound, cand_i.chosen);
            match &best {
                Some((e, b, c, _)) if better(key, (*e, *b, *c)) != std::cmp::Ordering::Less => {}
                _ => best = Some((key.0, key.1, key.2, *cand_i)),
            }
        }
        idx = block_end;
    }

    let Some((est, bound, _, candidate)) = best else {
        return Err(FairnessError::NoAdmissibleCandidate);
    };
    let chosen = candidate.entry(bound, Some(est));
    let (t_0, t_1) = candidate_thresholds(spec.notion, &chosen, scores)?;
    Ok(FittedClassifier {
        t_0,
        t_1,
        spec: spec.clone(),
        chosen,
        calibration_sizes: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grouped(cells: [Vec<f64>; 4]) -> GroupedScores {
        // cells order: (0,0), (0,1), (1,0), (1,1)
        let mut triples = Vec::new();
        for (idx, cell) in cells.iter().enumerate() {
            let (y, a) = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)][idx];
            for &s in cell {
                triples.push((s, y, a));
            }
        }
        GroupedScores::from_triples(triples).unwrap()
    }

    fn spec(notion: FairnessNotion, alpha: f64, delta: f64) -> FairnessSpec {
        FairnessSpec {
            notion,
            alpha,
            delta,
            mc_samples: 400,
            seed: 7,
            candidate_mode: CandidateMode::Full,
        }
    }

    #[test]
    fn rank_below_examples() {
        let s = [0.1, 0.4, 0.7];
        assert_eq!(rank_below(&s, 0.5), 2);
        assert_eq!(rank_below(&s, 0.05), 0);
        assert_eq!(rank_below(&s, 0.7), 3);
        assert_eq!(rank_below(&[], 0.3), 0);
    }

    #[test]
    fn nearest_rank_prefers_smaller_index_on_ties() {
        // Dyadic values so the two gaps are exactly equal in f64.
        let s = [0.25, 0.75];
        assert_eq!(nearest_rank(&s, 0.5), 1); // tie resolves to the smaller index
        assert_eq!(nearest_rank(&s, 0.0), 1);
        assert_eq!(nearest_rank(&s, 0.9), 2);
        assert_eq!(nearest_rank(&[0.1, 0.3, 0.5], 0.35), 2);
        assert_eq!(nearest_rank(&[0.2, 0.4, 0.4, 0.6], 0.4), 2); // first of the equal run
    }

    #[test]
    fn bayes_paired_threshold_half_is_fixed_point() {
        let prevalence = PrevalenceEstimates::new(0.6, 0.4, 0.3, 0.8).unwrap();
        let paired = bayes_paired_threshold(0.5, &prevalence).unwrap();
        assert_abs_diff_eq!(paired.unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bayes_paired_threshold_equal_products() {
        // p_1 p_{Y,1} = p_0 p_{Y,0}: paired(0.4) = P / (2P - 0.5P) = 2/3.
        let prevalence = PrevalenceEstimates::new(0.5, 0.5, 0.4, 0.4).unwrap();
        let paired = bayes_paired_threshold(0.4, &prevalence).unwrap();
        assert_abs_diff_eq!(paired.unwrap(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn bayes_paired_threshold_degenerate_and_domain() {
        // Small t makes (1/t - 2) huge: denominator goes non-positive.
        let prevalence = PrevalenceEstimates::new(0.5, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(bayes_paired_threshold(0.1, &prevalence).unwrap(), None);
        assert!(bayes_paired_threshold(0.0, &prevalence).is_err());
        assert!(bayes_paired_threshold(1.0, &prevalence).is_err());
    }

    fn nine_cell_scores() -> GroupedScores {
        let seq: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        grouped([seq.clone(), seq.clone(), seq.clone(), seq])
    }

    #[test]
    fn estimate_error_spec_examples() {
        let scores = nine_cell_scores();
        // k^{1,0} = k^{1,1} = 5, derived k^{0,a} = 9 (thresholds 0.5 but the
        // example fixes the derived ranks at the cell size): use candidates
        // directly.
        let candidate = CandidateEntry {
            k_10: 5,
            k_11: 5,
            k_00: 9,
            k_01: 9,
            bound: 0.0,
            est_error: None,
        };
        let est = estimate_error(FairnessNotion::Eoo, &candidate, &scores).unwrap();
        assert_abs_diff_eq!(est.value, 0.25, epsilon = 1e-15);
        assert!(est.empty_cells.is_empty());

        let all_nine = CandidateEntry {
            k_10: 9,
            k_11: 9,
            k_00: 9,
            k_01: 9,
            bound: 0.0,
            est_error: None,
        };
        let est = estimate_error(FairnessNotion::Eoo, &all_nine, &scores).unwrap();
        assert_abs_diff_eq!(est.value, 0.45, epsilon = 1e-15);
    }

    #[test]
    fn estimate_error_empty_cell_contributes_zero_with_warning() {
        let seq: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let scores = grouped([vec![], seq.clone(), seq.clone(), seq]);
        let candidate = CandidateEntry {
            k_10: 5,
            k_11: 5,
            k_00: 0,
            k_01: 9,
            bound: 0.0,
            est_error: None,
        };
        let est = estimate_error(FairnessNotion::Eoo, &candidate, &scores).unwrap();
        assert_eq!(est.empty_cells, vec![(0, 0)]);
        // n = 27; two positive terms 5/10 * 9/27 each; (0,1) term zero.
        assert_abs_diff_eq!(est.value, 2.0 * 0.5 * (9.0 / 27.0), epsilon = 1e-15);
    }

    #[test]
    fn estimate_error_rejects_out_of_range_rank() {
        let scores = nine_cell_scores();
        let candidate = CandidateEntry {
            k_10: 5,
            k_11: 5,
            k_00: 10,
            k_01: 9,
            bound: 0.0,
            est_error: None,
        };
        assert!(matches!(
            estimate_error(FairnessNotion::Eoo, &candidate, &scores),
            Err(FairnessError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn better_orders_by_error_then_bound_then_lex() {
        use std::cmp::Ordering::*;
        assert_eq!(better((0.1, 0.5, (9, 9)), (0.2, 0.0, (1, 1))), Less);
        assert_eq!(better((0.2, 0.01, (9, 9)), (0.2, 0.05, (1, 1))), Less);
        assert_eq!(better((0.2, 0.05, (1, 2)), (0.2, 0.05, (1, 3))), Less);
        assert_eq!(better((0.2, 0.05, (2, 1)), (0.2, 0.05, (1, 3))), Greater);
    }

    #[test]
    fn fit_selects_min_error_candidate() {
        // Negatives all below positives: any positive threshold captures all
        // negatives, so the estimated error is minimised at k = (1, 1).
        let scores = grouped([
            vec![0.1, 0.2],
            vec![0.1, 0.2],
            vec![0.6, 0.7],
            vec![0.6, 0.7],
        ]);
        let spec = FairnessSpec {
            notion: FairnessNotion::Eoo,
            alpha: 0.9,
            delta: 0.9,
            mc_samples: 400,
            seed: 3,
            candidate_mode: CandidateMode::Full,
        };
        let fitted = fit(&scores, &spec).unwrap();
        assert_eq!((fitted.chosen.k_10, fitted.chosen.k_11), (1, 1));
        assert_eq!((fitted.t_0, fitted.t_1), (0.6, 0.6));
        assert_abs_diff_eq!(
            fitted.chosen.est_error.unwrap(),
            2.0 / 12.0,
            epsilon = 1e-15
        );
        assert_eq!((fitted.chosen.k_00, fitted.chosen.k_01), (2, 2));
        assert!(fitted.chosen.bound <= spec.delta);
    }

    #[test]
    fn fit_matches_build_candidates_argmin() {
        // Mildly overlapping cells, all candidates enumerable.
        let scores = grouped([
            vec![0.05, 0.15, 0.35, 0.45, 0.62],
            vec![0.08, 0.22, 0.41, 0.55, 0.71],
            vec![0.33, 0.52, 0.66, 0.78, 0.91],
            vec![0.28, 0.49, 0.63, 0.81, 0.95],
        ]);
        let spec = FairnessSpec {
            notion: FairnessNotion::Eoo,
            alpha: 0.85,
            delta: 0.8,
            mc_samples: 600,
            seed: 11,
            candidate_mode: CandidateMode::Full,
        };
        let fitted = fit(&scores, &spec).unwrap();
        let all = build_candidates(&scores, &spec).unwrap();
        let best = all
            .iter()
            .min_by(|x, y| {
                better(
                    (x.est_error.unwrap(), x.bound, (x.k_10, x.k_11)),
                    (y.est_error.unwrap(), y.bound, (y.k_10, y.k_11)),
                )
            })
            .unwrap();
        assert_eq!(
            (fitted.chosen.k_10, fitted.chosen.k_11),
            (best.k_10, best.k_11)
        );
        assert_eq!(fitted.chosen.bound, best.bound);
        assert_eq!(fitted.chosen.est_error.unwrap(), best.est_error.unwrap());
    }

    #[test]
    fn fit_infeasible_below_minimum_size() {
        let seq: Vec<f64> = (1..=23).map(|i| i as f64 / 24.0).collect();
        let scores = grouped([seq.clone(), seq.clone(), seq.clone(), seq]);
        let spec = spec(FairnessNotion::Eoo, 0.12, 0.1);
        assert!(matches!(
            fit(&scores, &spec),
            Err(FairnessError::Infeasible(_))
        ));
    }

    #[test]
    fn shrunk_mode_rejected_for_unsupported_notions() {
        let scores = nine_cell_scores();
        let mut s = spec(FairnessNotion::Dp, 0.5, 0.5);
        s.candidate_mode = CandidateMode::Shrunk;
        assert!(matches!(
            fit(&scores, &s),
            Err(FairnessError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn shrunk_candidates_at_most_one_per_group0_index() {
        let seq: Vec<f64> = (1..=30).map(|i| i as f64 / 31.0).collect();
        let scores = grouped([seq.clone(), seq.clone(), seq.clone(), seq.clone()]);
        let mut s = spec(FairnessNotion::Eoo, 0.6, 0.6);
        s.candidate_mode = CandidateMode::Shrunk;
        let candidates = build_candidates(&scores, &s).unwrap();
        assert!(candidates.len() <= 30);
        let mut k10s: Vec<usize> = candidates.iter().map(|c| c.k_10).collect();
        k10s.dedup();
        assert_eq!(k10s.len(), candidates.len());
    }

    #[test]
    fn fit_deterministic_for_fixed_seed() {
        let scores = grouped([
            vec![0.05, 0.15, 0.35, 0.45, 0.62],
            vec![0.08, 0.22, 0.41, 0.55, 0.71],
            vec![0.33, 0.52, 0.66, 0.78, 0.91],
            vec![0.28, 0.49, 0.63, 0.81, 0.95],
        ]);
        let spec = spec(FairnessNotion::Eoo, 0.85, 0.8);
        let a = fit(&scores, &spec).unwrap();
        let b = fit(&scores, &spec).unwrap();
        assert_eq!(a.chosen.bound.to_bits(), b.chosen.bound.to_bits());
        assert_eq!(a.t_0.to_bits(), b.t_0.to_bits());
        assert_eq!(a.t_1.to_bits(), b.t_1.to_bits());
    }

    #[test]
    fn alpha_near_one_admits_every_candidate() {
        let scores = grouped([
            vec![0.1, 0.2, 0.3],
            vec![0.15, 0.25, 0.35],
            vec![0.4, 0.6, 0.8],
            vec![0.45, 0.65, 0.85],
        ]);
        let spec = FairnessSpec {
            notion: FairnessNotion::Eoo,
            alpha: 0.999,
            delta: 0.999,
            mc_samples: 200,
            seed: 1,
            candidate_mode: CandidateMode::Full,
        };
        let candidates = build_candidates(&scores, &spec).unwrap();
        assert_eq!(candidates.len(), 9);
    }
}
