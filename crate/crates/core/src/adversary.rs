//! The lower-bound world: skewed distributions over the d-subset class,
//! the overlap failure criterion, pluggable proper learners and the Monte
//! Carlo estimators built on them.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{invalid, PacError, Result};
use crate::measures::true_error_unchecked;
use crate::model::{sample_dataset_with, Dataset, DiscreteDistribution, Hypothesis, RngStream, NEG, POS};

/// Slack for the excess-error check on failing trials.
pub const FAILURE_TOLERANCE: f64 = 1e-12;

/// A truth hypothesis from the d-subset class over `u` points together with
/// the skew of its distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryInstance {
    u: usize,
    d: usize,
    alpha: f64,
    truth: Vec<usize>,
}

impl AdversaryInstance {
    /// `truth` lists the `d` points labeled `-1`, in any order.
    pub fn new(u: usize, d: usize, alpha: f64, truth: &[usize]) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d must be >= 1"));
        }
        if u < 2 * d {
            return Err(invalid(format!("need u >= 2d, got u={u}, d={d}")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(invalid(format!("skew must lie in [0,1), got {alpha}")));
        }
        let mut truth = truth.to_vec();
        truth.sort_unstable();
        truth.dedup();
        if truth.len() != d || truth.last().is_some_and(|&x| x >= u) {
            return Err(invalid(format!("truth must be {d} distinct points below {u}")));
        }
        Ok(Self { u, d, alpha, truth })
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Sorted `-1` points of the truth.
    pub fn truth(&self) -> &[usize] {
        &self.truth
    }

    pub fn truth_hypothesis(&self) -> Hypothesis {
        Hypothesis::from_negative_set(self.u, &self.truth).expect("validated")
    }

    /// `(1 - alpha) d / u`.
    pub fn tau(&self) -> f64 {
        (1.0 - self.alpha) * self.d as f64 / self.u as f64
    }

    /// Rank of the truth in the lexicographic enumeration of the class.
    pub fn truth_index(&self) -> u128 {
        let mut rank = 0u128;
        let mut prev = 0usize;
        for (j, &x) in self.truth.iter().enumerate() {
            for skipped in prev..x {
                rank += crate::model::binomial((self.u - skipped - 1) as u64, (self.d - j - 1) as u64).unwrap_or(0);
            }
            prev = x + 1;
        }
        rank
    }

    /// FNV-1a over the sorted truth points.
    pub fn truth_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 * self.truth.len());
        for &x in &self.truth {
            bytes.extend_from_slice(&(x as u64).to_le_bytes());
        }
        fnv1a64(&bytes)
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// All labels `+1`; truth points get mass `(1-alpha)/u`, the rest share
/// the remainder evenly.
pub fn build_distribution(inst: &AdversaryInstance) -> DiscreteDistribution {
    let (u, d) = (inst.u, inst.d);
    let low = (1.0 - inst.alpha) / u as f64;
    let high = (1.0 - (1.0 - inst.alpha) * d as f64 / u as f64) / (u - d) as f64;
    let mut marginal = vec![high; u];
    for &x in &inst.truth {
        marginal[x] = low;
    }
    let concept = Hypothesis::constant(u, POS).expect("valid label");
    DiscreteDistribution::deterministic_from(&marginal, &concept).expect("masses are positive and sum to one")
}

/// `min(sqrt(u ln(u/d) / (n C')), 1/C')`.
pub fn skew_for(u: usize, d: usize, n: usize, c_prime: f64) -> f64 {
    let (uf, df) = (u as f64, d as f64);
    (uf * (uf / df).ln() / (n as f64 * c_prime)).sqrt().min(1.0 / c_prime)
}

/// Solves `u = round((1-alpha) d / tau)` jointly with [`skew_for`] by
/// fixed-point iteration from `u = round(d / tau)`.
pub fn choose_parameters(tau: f64, d: usize, n: usize, c_prime: f64) -> Result<(usize, f64)> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(PacError::ParametersOutOfRange(format!("tau must lie in (0,1), got {tau}")));
    }
    if d == 0 || n == 0 {
        return Err(PacError::ParametersOutOfRange("d and n must be >= 1".into()));
    }
    if c_prime.is_nan() || c_prime <= 2.0 {
        return Err(PacError::ParametersOutOfRange(format!("C' must exceed 2, got {c_prime}")));
    }
    let out_of_range = |u: usize| {
        PacError::ParametersOutOfRange(format!("tau={tau}, d={d} forces u={u} < 2d"))
    };
    let mut u = (d as f64 / tau).round() as usize;
    for _ in 0..100 {
        if u < 2 * d {
            return Err(out_of_range(u));
        }
        let alpha = skew_for(u, d, n, c_prime);
        let next = ((1.0 - alpha) * d as f64 / tau).round() as usize;
        if next == u {
            return Ok((u, alpha));
        }
        u = next;
    }
    Err(PacError::ParametersOutOfRange(format!(
        "no fixed point within 100 iterations for tau={tau}, d={d}, n={n}"
    )))
}

/// `-1` on the `d` least-sampled points, ties to the lowest index.
pub fn least_frequent_learner(data: &Dataset, u: usize, d: usize) -> Result<Hypothesis> {
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    if data.domain_size() != u || d > u {
        return Err(invalid(format!("dataset domain {} does not match u={u} or d={d} too large", data.domain_size())));
    }
    let counts = data.counts();
    let mut order: Vec<usize> = (0..u).collect();
    order.sort_by_key(|&x| (counts.point(x), x));
    Hypothesis::from_negative_set(u, &order[..d])
}

/// Whether the `-1` sets of `learned` and the truth overlap in at most
/// `d/2` points. A failing output is checked to pay the excess error
/// `alpha d / (2u)`; a shortfall is an [`PacError::InvariantViolation`].
pub fn is_failure(learned: &Hypothesis, inst: &AdversaryInstance) -> Result<bool> {
    if learned.domain_size() != inst.u || learned.count_negative() != inst.d {
        return Err(invalid(format!(
            "learner output must label exactly {} of {} points -1",
            inst.d, inst.u
        )));
    }
    let overlap = inst.truth.iter().filter(|&&x| learned.label(x) == NEG).count();
    let failed = 2 * overlap <= inst.d;
    if failed {
        let err = true_error_unchecked(learned, &build_distribution(inst));
        let floor = inst.tau() + inst.alpha * inst.d as f64 / (2.0 * inst.u as f64);
        if err < floor - FAILURE_TOLERANCE {
            return Err(PacError::InvariantViolation(format!(
                "failing output has error {err} below {floor}"
            )));
        }
    }
    Ok(failed)
}

/// What a learner may look at besides its sample.
#[derive(Debug, Clone, Copy)]
pub struct LearnerView<'a> {
    pub u: usize,
    pub d: usize,
    truth: &'a [usize],
}

impl<'a> LearnerView<'a> {
    pub fn new(u: usize, d: usize, truth: &'a [usize]) -> Self {
        Self { u, d, truth }
    }

    /// The hidden truth; only cheating baselines call this.
    pub fn reveal_truth(&self) -> &'a [usize] {
        self.truth
    }
}

/// A proper learner for the d-subset class.
pub trait ProperLearner: Sync {
    fn name(&self) -> &str;
    fn learn(&self, data: &Dataset, view: &LearnerView<'_>) -> Result<Hypothesis>;
}

impl<F> ProperLearner for F
where
    F: Fn(&Dataset, usize, usize) -> Result<Hypothesis> + Sync,
{
    fn name(&self) -> &str {
        "custom"
    }

    fn learn(&self, data: &Dataset, view: &LearnerView<'_>) -> Result<Hypothesis> {
        self(data, view.u, view.d)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LeastFrequent;

impl ProperLearner for LeastFrequent {
    fn name(&self) -> &str {
        "least_frequent"
    }

    fn learn(&self, data: &Dataset, view: &LearnerView<'_>) -> Result<Hypothesis> {
        least_frequent_learner(data, view.u, view.d)
    }
}

/// Always `-1` on points `0..d`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedPrefix;

impl ProperLearner for FixedPrefix {
    fn name(&self) -> &str {
        "fixed_prefix"
    }

    fn learn(&self, _data: &Dataset, view: &LearnerView<'_>) -> Result<Hypothesis> {
        Hypothesis::from_negative_set(view.u, &(0..view.d).collect::<Vec<_>>())
    }
}

/// Returns the truth.
#[derive(Debug, Clone, Copy, Default)]
pub struct TruthOracle;

impl ProperLearner for TruthOracle {
    fn name(&self) -> &str {
        "truth_oracle"
    }

    fn learn(&self, _data: &Dataset, view: &LearnerView<'_>) -> Result<Hypothesis> {
        Hypothesis::from_negative_set(view.u, view.reveal_truth())
    }
}

/// One lower-bound trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial_id: u64,
    pub truth_index_hash: u64,
    pub failed: bool,
    pub learner_error: f64,
    pub tau: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub rows: Vec<TrialRow>,
}

/// Uniform d-subset of `0..u` by a partial Fisher-Yates shuffle.
pub fn random_subset<R: Rng + ?Sized>(u: usize, d: usize, rng: &mut R) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..u).collect();
    for j in 0..d {
        let k = rng.random_range(j..u);
        pool.swap(j, k);
    }
    pool.truncate(d);
    pool
}

/// Runs the learner on one sample and scores the output.
pub fn run_trial(
    trial_id: u64,
    inst: &AdversaryInstance,
    data: &Dataset,
    learner: &dyn ProperLearner,
) -> Result<TrialRow> {
    let view = LearnerView::new(inst.u, inst.d, inst.truth());
    let learned = learner.learn(data, &view)?;
    let failed = is_failure(&learned, inst)?;
    Ok(TrialRow {
        trial_id,
        truth_index_hash: inst.truth_hash(),
        failed,
        learner_error: true_error_unchecked(&learned, &build_distribution(inst)),
        tau: inst.tau(),
        alpha: inst.alpha,
    })
}

/// Draws the truth and the sample of trial `trial_id` from stream `trial_id` of `seed`.
pub fn draw_trial(u: usize, d: usize, n: usize, alpha: f64, seed: u64, trial_id: u64) -> Result<(AdversaryInstance, Dataset)> {
    let mut rng = RngStream::new(seed, trial_id).rng();
    let truth = random_subset(u, d, &mut rng);
    let inst = AdversaryInstance::new(u, d, alpha, &truth)?;
    let data = sample_dataset_with(&build_distribution(&inst), n, &mut rng)?;
    Ok((inst, data))
}

fn rate_and_stderr(successes: usize, trials: usize) -> (f64, f64) {
    let rate = successes as f64 / trials as f64;
    (rate, (rate * (1.0 - rate) / trials as f64).sqrt())
}

/// Monte Carlo failure rate of `learner` over a uniformly random truth.
/// Trials run on the current rayon pool; results do not depend on its size.
pub fn estimate_failure_probability(
    u: usize,
    d: usize,
    n: usize,
    alpha: f64,
    trials: usize,
    seed: u64,
    learner: &dyn ProperLearner,
) -> Result<FailureEstimate> {
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    AdversaryInstance::new(u, d, alpha, &(0..d).collect::<Vec<_>>())?;
    let rows = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (inst, data) = draw_trial(u, d, n, alpha, seed, t)?;
            run_trial(t, &inst, &data, learner)
        })
        .collect::<Result<Vec<_>>>()?;
    let (rate, stderr) = rate_and_stderr(rows.iter().filter(|r| r.failed).count(), trials);
    Ok(FailureEstimate { rate, stderr, rows })
}

/// `max(pn - sqrt(pn ln(m/k))/6, pn/2)`.
pub fn balls_threshold(n: usize, m: usize, p: f64, k: usize) -> f64 {
    let pn = p * n as f64;
    (pn - (pn * (m as f64 / k as f64).ln()).sqrt() / 6.0).max(pn / 2.0)
}

/// Fraction of trials in which at least `k` of the `m` designated bins
/// (probability `p` each) receive fewer than [`balls_threshold`] of `n`
/// balls. The leftover mass is spread over the other `u - m` bins, which
/// are never inspected, so only the designated counts are drawn.
pub fn balls_low_count_rate(
    n: usize,
    u: usize,
    m: usize,
    p: f64,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n == 0 || trials == 0 {
        return Err(invalid("n and trials must be >= 1"));
    }
    if !(p >= 12.0 / n as f64 && p <= 0.5) {
        return Err(invalid(format!("need 12/n <= p <= 1/2, got p={p}, n={n}")));
    }
    if m == 0 || m > u || k > m {
        return Err(invalid(format!("need 1 <= m <= u and k <= m, got u={u}, m={m}, k={k}")));
    }
    let leftover = 1.0 - m as f64 * p;
    if leftover < -1e-12 || (m == u && leftover > 1e-12) {
        return Err(invalid(format!("m p = {} cannot be spread over {} bins", m as f64 * p, u)));
    }
    if k == 0 {
        return Ok((1.0, 0.0));
    }
    let threshold = balls_threshold(n, m, p, k);
    let successes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(seed, t).rng();
            let mut left = n as u64;
            let mut mass_left = 1.0;
            let mut low = 0usize;
            for _ in 0..m {
                let q = (p / mass_left).min(1.0);
                let c = if left == 0 {
                    0
                } else {
                    Binomial::new(left, q).expect("q in [0,1]").sample(&mut rng)
                };
                if (c as f64) < threshold {
                    low += 1;
                }
                left -= c;
                mass_left -= p;
            }
            usize::from(low >= k)
        })
        .sum::<usize>();
    Ok(rate_and_stderr(successes, trials))
}
