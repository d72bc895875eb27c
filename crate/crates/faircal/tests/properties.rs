//! Property-based tests of the library invariants.

use proptest::prelude::*;
use proptest::strategy::ValueTree;

use faircal::{
    binom_tail, build_candidates, candidate_thresholds, estimate_error, fairness_metrics, fit,
    g_term_quadrature, predict, quantile_summary, rank_below, BoundTermParams, CandidateMode,
    FairnessNotion, FairnessSpec, GroupedScores,
};

/// Scores on a 1e-6 grid strictly inside (0, 1): fine enough to exercise
/// ties and ordering, coarse enough that affine transforms stay injective.
fn cell(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((1u32..999_999).prop_map(|v| v as f64 / 1e6), 1..max_len)
}

fn binary_vec(len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, len..=len)
}

fn grouped(cells: &[Vec<f64>; 4]) -> GroupedScores {
    // order: (0,0), (0,1), (1,0), (1,1)
    let mut triples = Vec::new();
    for (idx, cell) in cells.iter().enumerate() {
        let (y, a) = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)][idx];
        for &s in cell {
            triples.push((s, y, a));
        }
    }
    GroupedScores::from_triples(triples).unwrap()
}

fn direct_binom_tail(n: u64, p: f64, k: u64) -> f64 {
    // Direct summation oracle; exact binomial coefficients fit in f64 for
    // the small n used here.
    let mut total = 0.0;
    for i in k..=n {
        let mut coeff = 1.0;
        for j in 0..i {
            coeff = coeff * (n - j) as f64 / (j + 1) as f64;
        }
        total += coeff * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32);
    }
    total.min(1.0)
}

proptest! {
    #[test]
    fn partition_reconstructs_input(
        c00 in cell(8), c01 in cell(8), c10 in cell(8), c11 in cell(8)
    ) {
        let cells = [c00, c01, c10, c11];
        let scores = grouped(&cells);
        let counts = scores.counts();
        for (idx, raw) in cells.iter().enumerate() {
            let (y, a) = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)][idx];
            let got = scores.cell(y, a);
            prop_assert_eq!(got.len(), raw.len());
            prop_assert_eq!(got.len(), counts.get(y, a));
            prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
            let mut expected = raw.clone();
            expected.sort_by(|x, y| x.total_cmp(y));
            prop_assert_eq!(got, &expected[..]);
        }
        prop_assert_eq!(scores.total(), cells.iter().map(Vec::len).sum::<usize>());
    }

    #[test]
    fn prevalence_identities(
        c00 in cell(8), c01 in cell(8), c10 in cell(8), c11 in cell(8)
    ) {
        let scores = grouped(&[c00.clone(), c01.clone(), c10.clone(), c11.clone()]);
        let prev = scores.prevalence().unwrap();
        prop_assert!((prev.p_a(0) + prev.p_a(1) - 1.0).abs() < 1e-12);
        let n0 = c00.len() + c10.len();
        let n1 = c01.len() + c11.len();
        prop_assert!((prev.p_a(1) - n1 as f64 / (n0 + n1) as f64).abs() < 1e-12);
        prop_assert!((prev.p_ya(0) - c10.len() as f64 / n0 as f64).abs() < 1e-12);
        prop_assert!((prev.p_ya(1) - c11.len() as f64 / n1 as f64).abs() < 1e-12);
    }

    #[test]
    fn binom_tail_matches_direct_sum(
        n in 1u64..=25,
        k_frac in 0.0f64..=1.0,
        p in 0.0f64..=1.0
    ) {
        let k = (k_frac * n as f64).round() as u64;
        let ours = binom_tail(n as usize, p, k as usize).unwrap();
        let direct = direct_binom_tail(n, p, k);
        prop_assert!((ours - direct).abs() <= 1e-10, "n={n} p={p} k={k}: {ours} vs {direct}");
    }

    #[test]
    fn rank_below_counts_at_most(
        seq in cell(24), x in (0u32..1_000_000).prop_map(|v| v as f64 / 1e6)
    ) {
        let mut sorted = seq.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let rank = rank_below(&sorted, x);
        prop_assert_eq!(rank, seq.iter().filter(|&&s| s <= x).count());
    }

    #[test]
    fn quadrature_bound_monotone(
        n in 2usize..24,
        k in 1usize..24,
        alpha in 0.05f64..0.9,
    ) {
        let k = k.min(n);
        let term = |a: f64, kt: usize| {
            g_term_quadrature(&BoundTermParams::plain(n, kt, n, k, 0, a)).unwrap()
        };
        // Decreasing in alpha…
        prop_assert!(term(alpha, k) + 1e-12 >= term((alpha + 0.05).min(0.99), k));
        // …and decreasing in the tail index.
        if k < n {
            prop_assert!(term(alpha, k) + 1e-12 >= term(alpha, k + 1));
        }
        // Always a probability.
        let v = term(alpha, k);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn deo_coordinates_and_metric_ranges(
        len in 2usize..60,
        seed in any::<u64>(),
    ) {
        // Cheap deterministic binary tuples from the seed.
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) & 1) as u8
        };
        let preds: Vec<u8> = (0..len).map(|_| next()).collect();
        let labels: Vec<u8> = (0..len).map(|_| next()).collect();
        let groups: Vec<u8> = (0..len).map(|_| next()).collect();
        let report = fairness_metrics(&preds, &labels, &groups).unwrap();
        prop_assert_eq!(report.deo[0], report.deoo);
        prop_assert_eq!(report.deo[1], report.dpe);
        for metric in [report.deoo, report.dpe, report.ddp, report.dea] {
            if let Some(v) = metric {
                prop_assert!(v.abs() <= 1.0 + 1e-12);
            }
        }
        prop_assert!((0.0..=1.0).contains(&report.accuracy));
        let wrong = preds.iter().zip(&labels).filter(|(p, y)| p != y).count();
        prop_assert!((report.accuracy + wrong as f64 / len as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_is_an_order_statistic(
        values in prop::collection::vec(-1.0f64..1.0, 1..40),
        q in 0.0f64..=1.0,
    ) {
        let v = quantile_summary(&values, q).unwrap();
        prop_assert!(values.iter().any(|&x| x == v));
        let m = values.len();
        let rank = ((q * m as f64).ceil() as usize).max(1);
        prop_assert_eq!(values.iter().filter(|&&x| x <= v).count() >= rank, true);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predict_monotone_in_score(
        t0 in 0.0f64..=1.0,
        t1 in 0.0f64..=1.0,
        scores in prop::collection::vec(0.0f64..=1.0, 1..40),
        group in 0u8..=1,
    ) {
        let c10 = vec![t0.clamp(1e-6, 1.0 - 1e-6)];
        let c11 = vec![t1.clamp(1e-6, 1.0 - 1e-6)];
        let grouped = grouped(&[vec![0.1], vec![0.1], c10, c11]);
        let spec = FairnessSpec {
            notion: FairnessNotion::Eoo,
            alpha: 0.99,
            delta: 0.99,
            mc_samples: 16,
            seed: 0,
            candidate_mode: CandidateMode::Full,
        };
        let fitted = fit(&grouped, &spec).unwrap();
        let mut sorted = scores.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let preds = predict(&fitted, &sorted, &vec![group; sorted.len()]).unwrap();
        prop_assert!(preds.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn shrunk_candidates_subset_of_full_with_identical_bounds(
        c00 in cell(5), c01 in cell(5), c10 in cell(7), c11 in cell(7),
        notion_eo in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let scores = grouped(&[c00, c01, c10, c11]);
        let notion = if notion_eo { FairnessNotion::Eo } else { FairnessNotion::Eoo };
        let base = FairnessSpec {
            notion,
            alpha: 0.8,
            delta: 0.9,
            mc_samples: 64,
            seed,
            candidate_mode: CandidateMode::Shrunk,
        };
        let shrunk = match build_candidates(&scores, &base) {
            Ok(s) => s,
            // Degenerate pairings or bounds above delta everywhere: nothing
            // to compare.
            Err(_) => return Ok(()),
        };
        let full_spec = FairnessSpec { candidate_mode: CandidateMode::Full, ..base };
        let full = build_candidates(&scores, &full_spec).unwrap();
        for s in &shrunk {
            let twin = full.iter().find(|f| {
                (f.k_10, f.k_11, f.k_00, f.k_01) == (s.k_10, s.k_11, s.k_00, s.k_01)
            });
            // EOO shrunk admissibility is the same total-bound rule, so every
            // shrunk candidate must appear. For EO the shrunk rule is
            // stricter (both halves ≤ δ), which implies the total ≤ 2δ; at
            // δ ≥ total it still appears in the full set. Either way the
            // stored bound must be bit-identical when present.
            if let Some(f) = twin {
                prop_assert_eq!(f.bound.to_bits(), s.bound.to_bits());
                prop_assert_eq!(
                    f.est_error.unwrap().to_bits(),
                    s.est_error.unwrap().to_bits()
                );
            } else {
                // Only possible for EO when the summed bound exceeds δ while
                // both halves stay within it — impossible since halves are
                // non-negative and δ ≥ each half means total ≤ 2δ; with our
                // δ = 0.9 < total ≤ 1.8 this can occur. EOO must always match.
                prop_assert!(notion == FairnessNotion::Eo);
                prop_assert!(s.bound > full_spec.delta);
            }
        }
    }

    #[test]
    fn full_mode_candidates_invariant_to_monotone_transform(
        c00 in cell(5), c01 in cell(5), c10 in cell(6), c11 in cell(6),
        dp in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cells = [c00, c01, c10, c11];
        let transform = |s: f64| 0.2 + 0.6 * s;
        let mapped: [Vec<f64>; 4] = [
            cells[0].iter().map(|&s| transform(s)).collect(),
            cells[1].iter().map(|&s| transform(s)).collect(),
            cells[2].iter().map(|&s| transform(s)).collect(),
            cells[3].iter().map(|&s| transform(s)).collect(),
        ];
        let original = grouped(&cells);
        let shifted = grouped(&mapped);
        let notion = if dp { FairnessNotion::Dp } else { FairnessNotion::Eoo };
        let spec = FairnessSpec {
            notion,
            alpha: 0.8,
            delta: 0.9,
            mc_samples: 64,
            seed,
            candidate_mode: CandidateMode::Full,
        };
        let a = build_candidates(&original, &spec).unwrap();
        let b = build_candidates(&shifted, &spec).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(
                (x.k_10, x.k_11, x.k_00, x.k_01),
                (y.k_10, y.k_11, y.k_00, y.k_01)
            );
            prop_assert_eq!(x.bound.to_bits(), y.bound.to_bits());
            prop_assert_eq!(x.est_error.unwrap().to_bits(), y.est_error.unwrap().to_bits());
        }
        let fit_a = fit(&original, &spec).unwrap();
        let fit_b = fit(&shifted, &spec).unwrap();
        prop_assert_eq!(
            (fit_a.chosen.k_10, fit_a.chosen.k_11),
            (fit_b.chosen.k_10, fit_b.chosen.k_11)
        );
        prop_assert!((transform(fit_a.t_0) - fit_b.t_0).abs() < 1e-12);
        prop_assert!((transform(fit_a.t_1) - fit_b.t_1).abs() < 1e-12);
    }

    #[test]
    fn fit_is_deterministic(
        c00 in cell(5), c01 in cell(5), c10 in cell(6), c11 in cell(6),
        seed in any::<u64>(),
    ) {
        let scores = grouped(&[c00, c01, c10, c11]);
        let spec = FairnessSpec {
            notion: FairnessNotion::Eoo,
            alpha: 0.8,
            delta: 0.9,
            mc_samples: 64,
            seed,
            candidate_mode: CandidateMode::Full,
        };
        let a = fit(&scores, &spec).unwrap();
        let b = fit(&scores, &spec).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn estimated_error_within_unit_interval_and_threshold_ranks_consistent(
        c00 in cell(5), c01 in cell(5), c10 in cell(6), c11 in cell(6),
        seed in any::<u64>(),
    ) {
        let scores = grouped(&[c00, c01, c10, c11]);
        let spec = FairnessSpec {
            notion: FairnessNotion::Eoo,
            alpha: 0.8,
            delta: 0.9,
            mc_samples: 64,
            seed,
            candidate_mode: CandidateMode::Full,
        };
        let candidates = build_candidates(&scores, &spec).unwrap();
        for c in &candidates {
            let e = c.est_error.unwrap();
            prop_assert!((0.0..=1.0).contains(&e));
            let again = estimate_error(spec.notion, c, &scores).unwrap();
            prop_assert_eq!(again.value.to_bits(), e.to_bits());
            // Derived ranks agree with counting below the encoded thresholds.
            let (t0, t1) = candidate_thresholds(spec.notion, c, &scores).unwrap();
            prop_assert_eq!(c.k_00, rank_below(scores.cell(0, 0), t0));
            prop_assert_eq!(c.k_01, rank_below(scores.cell(0, 1), t1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn report_defined_iff_cells_populated(
        len in 1usize..30,
        seed in any::<u64>(),
    ) {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) & 1) as u8
        };
        let preds: Vec<u8> = (0..len).map(|_| next()).collect();
        let labels: Vec<u8> = (0..len).map(|_| next()).collect();
        let groups: Vec<u8> = (0..len).map(|_| next()).collect();
        let report = fairness_metrics(&preds, &labels, &groups).unwrap();
        let count = |y: u8, a: u8| {
            labels.iter().zip(&groups).filter(|&(&l, &g)| l == y && g == a).count()
        };
        prop_assert_eq!(report.deoo.is_some(), count(1, 0) > 0 && count(1, 1) > 0);
        prop_assert_eq!(report.dpe.is_some(), count(0, 0) > 0 && count(0, 1) > 0);
        let group_n = |a: u8| groups.iter().filter(|&&g| g == a).count();
        prop_assert_eq!(report.ddp.is_some(), group_n(0) > 0 && group_n(1) > 0);
        prop_assert_eq!(report.dea.is_some(), group_n(0) > 0 && group_n(1) > 0);
    }
}

// Non-proptest cross-checks that belong with the properties.

#[test]
fn binary_vec_strategy_is_used() {
    // Keep the helper exercised (labels/groups strategies are inlined above).
    let strategy = binary_vec(4);
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let value = strategy.new_tree(&mut runner).unwrap().current();
    assert_eq!(value.len(), 4);
    assert!(value.iter().all(|&b| b <= 1));
}
