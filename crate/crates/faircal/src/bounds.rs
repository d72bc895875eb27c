//! Order-statistics machinery behind the distribution-free guarantees.
//!
//! Everything rests on one fact: if `t_(k)` is the k-th order statistic of n
//! i.i.d. scores with continuous CDF `F`, then `F(t_(k)) ~ Beta(k, n−k+1)`.
//! The probability that a threshold pair violates the fairness budget α is
//! bounded by a sum of *g-terms*, each of the form
//!
//! ```text
//! g = E_Q[ Σ_{j=k_tail}^{n_tail} C(n_tail, j) p(Q)^j (1−p(Q))^{n_tail−j} ],
//!     p(Q) = clamp(scale·Q + shift − α, 0, 1),
//!     Q ~ Beta(k_beta + off, n_beta − k_beta + 1 − off)
//! ```
//!
//! — a binomial tail over *one* group's cell whose success probability is
//! driven by the *other* group's order-statistic quantile (the groups are
//! cross-paired; each term integrates the paired group's Beta law inside its
//! own tail). `off` is 0 for terms anchored at chosen thresholds and 1 for
//! terms at derived ranks, where the rank may legitimately be 0 (threshold
//! below the whole cell) or equal to the cell size (the Beta degenerates to a
//! point mass at 1). The clamp realizes the indicator that the quantile gap
//! actually exceeds α.
//!
//! Two evaluation paths are provided: Monte Carlo over the Beta law (the
//! production default, with deterministically keyed streams so results never
//! depend on evaluation order or parallelism) and a 64-node Gauss–Legendre
//! quadrature that is exact while `n_tail + n_beta ≤ 128` (the integrand is a
//! polynomial), used as a test oracle and for small-sample feasibility scans.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::Distribution;
use sha2::{Digest, Sha256};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::core::{
    CandidateEntry, CellCounts, FairnessError, FairnessNotion, FairnessSpec, GroupedScores,
    PrevalenceEstimates,
};

/// Upper binomial tail P(Bin(n, p) ≥ k) = Σ_{j=k}^{n} C(n,j) p^j (1−p)^{n−j}.
///
/// Computed through the regularized incomplete beta identity
/// `I_p(k, n−k+1)` for k ≥ 1 — O(1) and overflow-free for any n. Returns 1
/// when k = 0 (the whole distribution).
pub fn binom_tail(n: usize, p: f64, k: usize) -> Result<f64, FairnessError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(FairnessError::InvalidParameter {
            name: "p",
            reason: format!("must lie in [0,1], got {p}"),
        });
    }
    if k > n {
        return Err(FairnessError::InvalidParameter {
            name: "k",
            reason: format!("tail start {k} exceeds n = {n}"),
        });
    }
    if k == 0 {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok(beta_reg(k as f64, (n - k + 1) as f64, p))
}

/// Parameters of one g-term.
///
/// The success probability fed to the binomial tail is
/// `p(Q) = clamp(scale·Q + shift − alpha, 0, 1)` with
/// `Q ~ Beta(k_beta + shape_offset, n_beta − k_beta + 1 − shape_offset)`.
/// `scale`/`shift` are identity (1, 0) except for the equalized-accuracy
/// terms, which rescale the paired quantile by the prevalence estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTermParams {
    /// Binomial tail size (the cell the violation event lives in).
    pub n_tail: usize,
    /// Tail start index; may be 0 for derived ranks (tail = 1).
    pub k_tail: usize,
    /// The paired group's cell size (Beta shape source).
    pub n_beta: usize,
    /// The paired group's rank; chosen indices are ≥ 1, derived ranks
    /// (shape_offset = 1) may be 0 … n_beta.
    pub k_beta: usize,
    /// 0 for terms anchored at chosen thresholds, 1 for derived-rank terms.
    pub shape_offset: u8,
    /// The violation budget subtracted inside the clamp.
    pub alpha: f64,
    /// Affine rescaling of Q (equalized accuracy); 1 otherwise.
    pub scale: f64,
    /// Affine shift of Q (equalized accuracy); 0 otherwise.
    pub shift: f64,
}

impl BoundTermParams {
    /// A plain term: `p(Q) = clamp(Q − alpha, 0, 1)`.
    pub fn plain(
        n_tail: usize,
        k_tail: usize,
        n_beta: usize,
        k_beta: usize,
        shape_offset: u8,
        alpha: f64,
    ) -> Self {
        BoundTermParams {
            n_tail,
            k_tail,
            n_beta,
            k_beta,
            shape_offset,
            alpha,
            scale: 1.0,
            shift: 0.0,
        }
    }

    /// Equalized-accuracy positive-label term for group `a`:
    /// `p(Q) = clamp((p_{Y,1−a}·Q − alpha)/p_{Y,a}, 0, 1)`.
    pub fn ea_positive(
        n_tail: usize,
        k_tail: usize,
        n_beta: usize,
        k_beta: usize,
        alpha: f64,
        p_ya: f64,
        p_y_other: f64,
    ) -> Self {
        BoundTermParams {
            n_tail,
            k_tail,
            n_beta,
            k_beta,
            shape_offset: 0,
            alpha,
            scale: p_y_other / p_ya,
            shift: alpha * (p_ya - 1.0) / p_ya,
        }
    }

    /// Equalized-accuracy negative-label term for group `a`:
    /// `p(Q) = clamp(((1−p_{Y,1−a})·Q + p_{Y,1−a} − p_{Y,a} − alpha)/(1−p_{Y,a}), 0, 1)`.
    pub fn ea_negative(
        n_tail: usize,
        k_tail: usize,
        n_beta: usize,
        k_beta: usize,
        alpha: f64,
        p_ya: f64,
        p_y_other: f64,
    ) -> Self {
        BoundTermParams {
            n_tail,
            k_tail,
            n_beta,
            k_beta,
            shape_offset: 1,
            alpha,
            scale: (1.0 - p_y_other) / (1.0 - p_ya),
            shift: alpha + (p_y_other - p_ya - alpha) / (1.0 - p_ya),
        }
    }

    /// The feasibility boundary term: both indices at the cell size with the
    /// paired quantile taken at its essential supremum (the `t_(n+1) = +∞`
    /// convention), i.e. the Beta degenerates to a point mass at 1 and the
    /// term collapses to `(1−alpha)^n`. This is the term the minimum sample
    /// sizes invert.
    pub fn boundary(n: usize, alpha: f64) -> Self {
        BoundTermParams {
            n_tail: n,
            k_tail: n,
            n_beta: n,
            k_beta: n,
            shape_offset: 1,
            alpha,
            scale: 1.0,
            shift: 0.0,
        }
    }

    fn validate(&self) -> Result<(), FairnessError> {
        let min_k = 1usize.saturating_sub(self.shape_offset as usize);
        if self.shape_offset > 1 {
            return Err(FairnessError::InvalidParameter {
                name: "shape_offset",
                reason: format!("must be 0 or 1, got {}", self.shape_offset),
            });
        }
        if self.k_tail > self.n_tail || self.k_tail < min_k || self.n_tail == 0 {
            return Err(FairnessError::InvalidParameter {
                name: "k_tail",
                reason: format!(
                    "need {} ≤ k_tail ≤ n_tail, got k_tail={} n_tail={}",
                    min_k, self.k_tail, self.n_tail
                ),
            });
        }
        if self.k_beta > self.n_beta || self.k_beta < min_k || self.n_beta == 0 {
            return Err(FairnessError::InvalidParameter {
                name: "k_beta",
                reason: format!(
                    "need {} ≤ k_beta ≤ n_beta, got k_beta={} n_beta={}",
                    min_k, self.k_beta, self.n_beta
                ),
            });
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() || !self.shift.is_finite() {
            return Err(FairnessError::InvalidParameter {
                name: "scale",
                reason: format!("need finite scale > 0, got scale={} shift={}", self.scale, self.shift),
            });
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(FairnessError::InvalidParameter {
                name: "alpha",
                reason: format!("must be finite and ≥ 0, got {}", self.alpha),
            });
        }
        Ok(())
    }

    /// Beta shape parameters (a, b) of Q; b = 0 means a point mass at 1.
    fn beta_shapes(&self) -> (f64, f64) {
        let off = self.shape_offset as usize;
        (
            (self.k_beta + off) as f64,
            (self.n_beta - self.k_beta + 1 - off) as f64,
        )
    }

    fn success_prob(&self, q: f64) -> f64 {
        (self.scale * q + self.shift - self.alpha).clamp(0.0, 1.0)
    }
}

/// Monte Carlo estimate of a g-term over the supplied stream.
///
/// Exact short-circuits: `k_tail = 0` gives 1 (the tail is the whole
/// distribution); a success probability that is 0 over the entire Q range
/// gives 0; a degenerate Beta (derived rank equal to the cell size) is a
/// point mass and needs no sampling.
pub fn g_term<R: Rng + ?Sized>(
    params: &BoundTermParams,
    mc_samples: u32,
    rng: &mut R,
) -> Result<f64, FairnessError> {
    params.validate()?;
    if mc_samples == 0 {
        return Err(FairnessError::InvalidParameter {
            name: "mc_samples",
            reason: "must be ≥ 1".to_string(),
        });
    }
    if params.k_tail == 0 {
        return Ok(1.0);
    }
    if params.success_prob(1.0) <= 0.0 {
        // scale > 0, so p(·) is maximal at Q = 1; the whole integrand is 0.
        return Ok(0.0);
    }
    let (a, b) = params.beta_shapes();
    if b == 0.0 {
        return binom_tail(params.n_tail, params.success_prob(1.0), params.k_tail);
    }
    let beta = rand_distr::Beta::new(a, b).map_err(|e| FairnessError::InvalidParameter {
        name: "beta_shapes",
        reason: e.to_string(),
    })?;
    let mut acc = 0.0;
    for _ in 0..mc_samples {
        let q: f64 = beta.sample(rng);
        acc += binom_tail(params.n_tail, params.success_prob(q), params.k_tail)?;
    }
    Ok(acc / mc_samples as f64)
}

/// 64-node Gauss–Legendre nodes and weights on [−1, 1], computed once by
/// Newton iteration on the Legendre recurrence.
fn gauss_legendre_64() -> &'static ([f64; 64], [f64; 64]) {
    static TABLE: OnceLock<([f64; 64], [f64; 64])> = OnceLock::new();
    TABLE.get_or_init(|| {
        const N: usize = 64;
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N.div_ceil(2) {
            // Chebyshev initial guess for the i-th root of P_N.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Evaluate P_N and P'_N by upward recurrence.
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=N {
                    let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = pj;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[N - 1 - i] = x;
            weights[i] = w;
            weights[N - 1 - i] = w;
        }
        (nodes, weights)
    })
}

fn beta_pdf(q: f64, a: f64, b: f64) -> f64 {
    ((a - 1.0) * q.ln() + (b - 1.0) * (1.0 - q).ln() - ln_beta(a, b)).exp()
}

/// Deterministic quadrature evaluation of a g-term.
///
/// The Q-range is split at the points where the clamped success probability
/// leaves {0} and reaches 1: the interior piece is integrated with 64-node
/// Gauss–Legendre (exact while `n_tail + n_beta ≤ 128` since the integrand is
/// polynomial there), and the saturated piece contributes the exact Beta
/// survival mass. Degenerate Betas collapse to a point evaluation.
pub fn g_term_quadrature(params: &BoundTermParams) -> Result<f64, FairnessError> {
    params.validate()?;
    if params.k_tail == 0 {
        return Ok(1.0);
    }
    if params.success_prob(1.0) <= 0.0 {
        return Ok(0.0);
    }
    let (a, b) = params.beta_shapes();
    if b == 0.0 {
        return binom_tail(params.n_tail, params.success_prob(1.0), params.k_tail);
    }
    // p(q) = scale·q + shift − alpha crosses 0 at q0 and 1 at q1 (scale > 0).
    let q0 = (params.alpha - params.shift) / params.scale;
    let q1 = (1.0 + params.alpha - params.shift) / params.scale;
    let lo = q0.max(0.0);
    let hi = q1.min(1.0);
    let mut total = 0.0;
    if hi > lo {
        let (nodes, weights) = gauss_legendre_64();
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let q = mid + half * x;
            let p = params.success_prob(q);
            acc += w * binom_tail(params.n_tail, p, params.k_tail)? * beta_pdf(q, a, b);
        }
        total += half * acc;
    }
    if q1 < 1.0 {
        // p ≡ 1 above q1: the tail is certain there.
        total += 1.0 - beta_reg(a, b, q1.max(0.0));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// How to evaluate violation bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundEval {
    /// Monte Carlo with per-(candidate, term) streams keyed from the seed.
    MonteCarlo { samples: u32, seed: u64 },
    /// Deterministic Gauss–Legendre quadrature (test oracle / small n).
    Quadrature,
}

/// One deterministic stream per (seed, notion, candidate, term), so bound
/// values never depend on which candidates get evaluated, in what order, or
/// on how work is scheduled across threads.
fn term_stream(seed: u64, notion: FairnessNotion, c: &CandidateEntry, term: u8) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(notion.tag().as_bytes());
    h.update([0u8]);
    for k in [c.k_10, c.k_11, c.k_00, c.k_01] {
        h.update((k as u64).to_le_bytes());
    }
    h.update([term]);
    ChaCha20Rng::from_seed(h.finalize().into())
}

fn check_chosen(k: usize, n: usize, name: &'static str) -> Result<(), FairnessError> {
    if k < 1 || k > n {
        return Err(FairnessError::InvalidParameter {
            name,
            reason: format!("chosen index must satisfy 1 ≤ k ≤ {n}, got {k}"),
        });
    }
    Ok(())
}

fn check_derived(k: usize, n: usize, name: &'static str) -> Result<(), FairnessError> {
    if k > n {
        return Err(FairnessError::InvalidParameter {
            name,
            reason: format!("derived rank must satisfy 0 ≤ k ≤ {n}, got {k}"),
        });
    }
    Ok(())
}

/// Assemble the g-terms for a candidate under a notion. Term order is fixed
/// (it keys the RNG streams): group-0 term(s) before group-1, y=1 before y=0.
pub(crate) fn bound_terms(
    notion: FairnessNotion,
    candidate: &CandidateEntry,
    counts: &CellCounts,
    prevalence: &PrevalenceEstimates,
    alpha: f64,
) -> Result<Vec<BoundTermParams>, FairnessError> {
    let (n_00, n_01, n_10, n_11) = (counts.n_00, counts.n_01, counts.n_10, counts.n_11);
    let (k_10, k_11, k_00, k_01) = (
        candidate.k_10,
        candidate.k_11,
        candidate.k_00,
        candidate.k_01,
    );
    match notion {
        FairnessNotion::Eoo => {
            check_chosen(k_10, n_10, "k_10")?;
            check_chosen(k_11, n_11, "k_11")?;
            Ok(vec![
                BoundTermParams::plain(n_10, k_10, n_11, k_11, 0, alpha),
                BoundTermParams::plain(n_11, k_11, n_10, k_10, 0, alpha),
            ])
        }
        FairnessNotion::Eo => {
            check_chosen(k_10, n_10, "k_10")?;
            check_chosen(k_11, n_11, "k_11")?;
            check_derived(k_00, n_00, "k_00")?;
            check_derived(k_01, n_01, "k_01")?;
            Ok(vec![
                BoundTermParams::plain(n_10, k_10, n_11, k_11, 0, alpha),
                BoundTermParams::plain(n_11, k_11, n_10, k_10, 0, alpha),
                BoundTermParams::plain(n_00, k_00, n_01, k_01, 1, alpha),
                BoundTermParams::plain(n_01, k_01, n_00, k_00, 1, alpha),
            ])
        }
        FairnessNotion::Dp => {
            // k_10/k_11 address the pooled per-group sequences T^0/T^1.
            let n_0 = counts.group_total(0);
            let n_1 = counts.group_total(1);
            check_chosen(k_10, n_0, "k_10 (pooled)")?;
            check_chosen(k_11, n_1, "k_11 (pooled)")?;
            Ok(vec![
                BoundTermParams::plain(n_0, k_10, n_1, k_11, 0, alpha),
                BoundTermParams::plain(n_1, k_11, n_0, k_10, 0, alpha),
            ])
        }
        FairnessNotion::Pe => {
            // Chosen indices live on the negative-label cells.
            check_chosen(k_00, n_00, "k_00")?;
            check_chosen(k_01, n_01, "k_01")?;
            Ok(vec![
                BoundTermParams::plain(n_00, k_00, n_01, k_01, 0, alpha),
                BoundTermParams::plain(n_01, k_01, n_00, k_00, 0, alpha),
            ])
        }
        FairnessNotion::Ea => {
            let gap = (prevalence.p_ya(1) - prevalence.p_ya(0)).abs();
            if alpha <= gap {
                return Err(FairnessError::AssumptionViolated { gap, alpha });
            }
            check_chosen(k_10, n_10, "k_10")?;
            check_chosen(k_11, n_11, "k_11")?;
            check_derived(k_00, n_00, "k_00")?;
            check_derived(k_01, n_01, "k_01")?;
            let (py0, py1) = (prevalence.p_ya(0), prevalence.p_ya(1));
            Ok(vec![
                BoundTermParams::ea_positive(n_10, k_10, n_11, k_11, alpha, py0, py1),
                BoundTermParams::ea_positive(n_11, k_11, n_10, k_10, alpha, py1, py0),
                BoundTermParams::ea_negative(n_00, k_00, n_01, k_01, alpha, py0, py1),
                BoundTermParams::ea_negative(n_01, k_01, n_00, k_00, alpha, py1, py0),
            ])
        }
    }
}

/// Violation-probability bound split into its positive-label and
/// negative-label halves `(L_1, L_0)`.
///
/// For the two-term notions (EOO, DP, PE) every term concerns a single label
/// side, so the second component is zero. For EO and EA the first component
/// sums the two y=1 terms and the second the two y=0 terms. The total bound
/// is always `L_1 + L_0`, summed in exactly this grouping so that callers
/// combining the halves reproduce [`violation_bound_with`] bit for bit.
pub fn violation_bound_halves(
    notion: FairnessNotion,
    candidate: &CandidateEntry,
    counts: &CellCounts,
    prevalence: &PrevalenceEstimates,
    alpha: f64,
    eval: BoundEval,
) -> Result<(f64, f64), FairnessError> {
    let terms = bound_terms(notion, candidate, counts, prevalence, alpha)?;
    let mut halves = (0.0, 0.0);
    for (i, term) in terms.iter().enumerate() {
        let value = match eval {
            BoundEval::MonteCarlo { samples, seed } => {
                let mut rng = term_stream(seed, notion, candidate, i as u8);
                g_term(term, samples, &mut rng)?
            }
            BoundEval::Quadrature => g_term_quadrature(term)?,
        };
        if i < 2 {
            halves.0 += value;
        } else {
            halves.1 += value;
        }
    }
    Ok(halves)
}

/// Violation-probability bound L for a candidate, with an explicit
/// evaluation strategy.
pub fn violation_bound_with(
    notion: FairnessNotion,
    candidate: &CandidateEntry,
    counts: &CellCounts,
    prevalence: &PrevalenceEstimates,
    alpha: f64,
    eval: BoundEval,
) -> Result<f64, FairnessError> {
    let (l_pos, l_neg) = violation_bound_halves(notion, candidate, counts, prevalence, alpha, eval)?;
    Ok(l_pos + l_neg)
}

/// Violation-probability bound L for a candidate under a spec (Monte Carlo
/// with the spec's sample count and seed-keyed streams).
///
/// The bound depends on the scores only through cell sizes and the
/// candidate's ranks; prevalence estimates enter only for equalized accuracy.
pub fn violation_bound(
    notion: FairnessNotion,
    candidate: &CandidateEntry,
    scores: &GroupedScores,
    prevalence: &PrevalenceEstimates,
    spec: &FairnessSpec,
) -> Result<f64, FairnessError> {
    violation_bound_with(
        notion,
        candidate,
        &scores.counts(),
        prevalence,
        spec.alpha,
        BoundEval::MonteCarlo {
            samples: spec.mc_samples,
            seed: spec.seed,
        },
    )
}

/// Minimum per-cell (or per-group, for demographic parity) sample sizes for
/// the candidate set to possibly be non-empty at tolerance δ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRequirements {
    /// Minimum n^{y,a}, indexed [y][a]; 0 where the notion puts no
    /// requirement on the cell.
    pub per_cell: [[usize; 2]; 2],
    /// Minimum pooled per-group size n^a (demographic parity only).
    pub pooled_per_group: Option<usize>,
}

impl SampleRequirements {
    /// Check realized counts, returning an infeasibility error naming every
    /// deficient cell and the required minima.
    pub fn check(&self, counts: &CellCounts) -> Result<(), FairnessError> {
        let mut deficits = Vec::new();
        for y in 0..2u8 {
            for a in 0..2u8 {
                let need = self.per_cell[y as usize][a as usize];
                let have = counts.get(y, a);
                if have < need {
                    deficits.push(format!("n^{{{y},{a}}} = {have} < required {need}"));
                }
            }
        }
        if let Some(need) = self.pooled_per_group {
            for a in 0..2u8 {
                let have = counts.group_total(a);
                if have < need {
                    deficits.push(format!("n^{a} = {have} < required {need} (pooled)"));
                }
            }
        }
        if deficits.is_empty() {
            Ok(())
        } else {
            Err(FairnessError::Infeasible(deficits.join("; ")))
        }
    }
}

/// ⌈log(frac)/log(base)⌉ for 0 < frac < 1; a base ≤ 0 means the boundary
/// term is exactly 0 for any n (the clamp kills it), so one sample suffices.
fn ceil_log_ratio(frac: f64, base: f64) -> Result<usize, FairnessError> {
    if base <= 0.0 {
        return Ok(1);
    }
    if base >= 1.0 {
        return Err(FairnessError::Infeasible(format!(
            "boundary term base {base} ≥ 1: no finite sample size satisfies the tolerance"
        )));
    }
    let n = (frac.ln() / base.ln()).ceil();
    Ok((n as usize).max(1))
}

/// Minimum sample sizes per notion.
///
/// These invert the feasibility boundary term `(1−α)^n` (the bound of the
/// extreme candidate whose paired quantile sits at its supremum): the
/// tolerance δ splits evenly across the notion's term count. Equalized
/// accuracy needs the prevalence estimates `(p̂_{Y,0}, p̂_{Y,1})` and requires
/// `alpha > |p̂_{Y,1} − p̂_{Y,0}|`.
pub fn min_sample_size(
    notion: FairnessNotion,
    alpha: f64,
    delta: f64,
    p_y: Option<(f64, f64)>,
) -> Result<SampleRequirements, FairnessError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FairnessError::InvalidParameter {
            name: "alpha",
            reason: format!("must lie in (0,1), got {alpha}"),
        });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FairnessError::InvalidParameter {
            name: "delta",
            reason: format!("must lie in (0,1), got {delta}"),
        });
    }
    let mut per_cell = [[0usize; 2]; 2];
    let mut pooled = None;
    match notion {
        FairnessNotion::Eoo => {
            let m = ceil_log_ratio(delta / 2.0, 1.0 - alpha)?;
            per_cell[1] = [m, m];
        }
        FairnessNotion::Pe => {
            let m = ceil_log_ratio(delta / 2.0, 1.0 - alpha)?;
            per_cell[0] = [m, m];
        }
        FairnessNotion::Dp => {
            pooled = Some(ceil_log_ratio(delta / 2.0, 1.0 - alpha)?);
        }
        FairnessNotion::Eo => {
            let m = ceil_log_ratio(delta / 4.0, 1.0 - alpha)?;
            per_cell = [[m, m], [m, m]];
        }
        FairnessNotion::Ea => {
            let (py0, py1) = p_y.ok_or(FairnessError::InvalidParameter {
                name: "p_y",
                reason: "equalized accuracy needs prevalence estimates (p_Y0, p_Y1)".to_string(),
            })?;
            let gap = (py1 - py0).abs();
            if alpha <= gap {
                return Err(FairnessError::AssumptionViolated { gap, alpha });
            }
            let frac = delta / 4.0;
            per_cell[0][0] = ceil_log_ratio(frac, 1.0 - alpha / (1.0 - py0))?;
            per_cell[0][1] = ceil_log_ratio(frac, 1.0 - alpha / (1.0 - py1))?;
            per_cell[1][0] = ceil_log_ratio(frac, (py1 - alpha) / py0)?;
            per_cell[1][1] = ceil_log_ratio(frac, (py0 - alpha) / py1)?;
        }
    }
    Ok(SampleRequirements {
        per_cell,
        pooled_per_group: pooled,
    })
}

/// The feasibility boundary bound at symmetric cell size n: the sum of the
/// notion's point-mass boundary terms, each `(1−α)^n`, evaluated through the
/// quadrature path. `min_sample_size` is exactly the smallest n that brings
/// this value to ≤ δ (for EOO/EO/DP/PE; equalized accuracy's asymmetric
/// version is inverted cell-by-cell in `min_sample_size`).
pub fn boundary_bound(notion: FairnessNotion, n: usize, alpha: f64) -> Result<f64, FairnessError> {
    let terms = match notion {
        FairnessNotion::Eoo | FairnessNotion::Dp | FairnessNotion::Pe => 2,
        FairnessNotion::Eo => 4,
        FairnessNotion::Ea => {
            return Err(FairnessError::InvalidParameter {
                name: "notion",
                reason: "equalized accuracy has no symmetric boundary bound".to_string(),
            })
        }
    };
    let one = g_term_quadrature(&BoundTermParams::boundary(n, alpha))?;
    Ok((terms as f64) * one)
}
