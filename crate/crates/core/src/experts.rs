//! The disagreeing-experts learner: the core loop that collects pairs of
//! near-optimal hypotheses with large empirical disagreement, the
//! composite classifier that routes on their agreement, the three-way
//! split wrapper that validates it against plain ERM, and exact
//! diagnostics against a known generating distribution.

use std::fmt;
use std::ops::Range;

use crate::erm::{
    alpha_bound, clamped_ln, erm_from_mistakes, make_schedule, mistake_counts, near_optimal_from_mistakes,
    pair_search_counts, ErmResult, PairSearch, Schedule, TheoryConstants,
};
use crate::error::{invalid, PacError, Result};
use crate::measures::{condition_on_agreement, true_disagreement, true_error_unchecked, ExpertPairList};
use crate::model::{Dataset, DiscreteDistribution, Hypothesis, RngStream};

/// Identity tolerance for exact probability checks.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Fixed inputs shared by the core loop and the wrapper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerParams {
    pub d: usize,
    pub delta: f64,
    pub consts: TheoryConstants,
    pub pair_search: PairSearch,
}

impl LearnerParams {
    pub fn new(d: usize, delta: f64, consts: TheoryConstants) -> Self {
        Self {
            d,
            delta,
            consts,
            pair_search: PairSearch::Exhaustive,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("d must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        self.consts.validate()
    }
}

/// Routes a point to `h_eq` when every expert pair agrees on it and to
/// `h_neq` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeClassifier {
    pairs: ExpertPairList,
    pair_indices: Vec<(usize, usize)>,
    h_eq: Hypothesis,
    h_neq: Hypothesis,
    eq_index: usize,
    neq_index: usize,
}

impl CompositeClassifier {
    /// Builds a classifier from class indices.
    pub fn from_indices(
        members: &[Hypothesis],
        pair_indices: Vec<(usize, usize)>,
        eq_index: usize,
        neq_index: usize,
    ) -> Result<Self> {
        let get = |i: usize| {
            members
                .get(i)
                .cloned()
                .ok_or_else(|| invalid(format!("index {i} outside class of {} members", members.len())))
        };
        let mut pairs = ExpertPairList::empty();
        for &(a, b) in &pair_indices {
            pairs.push(get(a)?, get(b)?);
        }
        Ok(Self {
            pairs,
            pair_indices,
            h_eq: get(eq_index)?,
            h_neq: get(neq_index)?,
            eq_index,
            neq_index,
        })
    }

    pub fn pairs(&self) -> &ExpertPairList {
        &self.pairs
    }

    pub fn pair_indices(&self) -> &[(usize, usize)] {
        &self.pair_indices
    }

    pub fn h_eq(&self) -> &Hypothesis {
        &self.h_eq
    }

    pub fn h_neq(&self) -> &Hypothesis {
        &self.h_neq
    }

    pub fn eq_index(&self) -> usize {
        self.eq_index
    }

    pub fn neq_index(&self) -> usize {
        self.neq_index
    }

    pub fn domain_size(&self) -> usize {
        self.h_eq.domain_size()
    }

    pub fn predict(&self, x: usize) -> Result<i8> {
        if x >= self.domain_size() {
            return Err(invalid(format!("point {x} outside domain of size {}", self.domain_size())));
        }
        Ok(self.route(x))
    }

    #[inline]
    fn route(&self, x: usize) -> i8 {
        if self.pairs.all_agree(x) {
            self.h_eq.label(x)
        } else {
            self.h_neq.label(x)
        }
    }

    /// The classifier's full labeling of the domain (generally not a class member).
    pub fn to_hypothesis(&self) -> Hypothesis {
        Hypothesis::new((0..self.domain_size()).map(|x| self.route(x)).collect()).expect("labels are +-1")
    }
}

/// Why the core loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BreakReason {
    Completed,
    GammaBelowZt,
    NoDisagreeingPair,
    EmptyTi,
}

impl BreakReason {
    pub fn as_str(self) -> &'static str {
        match self {
            BreakReason::Completed => "completed",
            BreakReason::GammaBelowZt => "gamma_below_Zt",
            BreakReason::NoDisagreeingPair => "no_disagreeing_pair",
            BreakReason::EmptyTi => "empty_Ti",
        }
    }
}

impl fmt::Display for BreakReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One pass of the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number.
    pub i: usize,
    /// Range of `B` forming block `B^i`.
    pub block: Range<usize>,
    pub t_size: usize,
    /// `None` when `T^i` was empty.
    pub gamma: Option<f64>,
    pub erm_index: Option<usize>,
    pub alpha: Option<f64>,
    pub threshold: Option<f64>,
    pub h_size: Option<usize>,
    pub pair: Option<(usize, usize)>,
    /// The filtered block `T^i`; dropped by [`CoreTrace::without_samples`].
    pub t_sample: Option<Dataset>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreTrace {
    pub iterations: Vec<IterationRecord>,
    pub break_reason: BreakReason,
    pub r: usize,
    pub pair_indices: Vec<(usize, usize)>,
    pub c_eq_size: usize,
    pub c_neq_size: usize,
    /// `C_=` was empty and `h_eq` fell back to class index 0.
    pub c_eq_defaulted: bool,
    /// `C_≠` was empty and `h_neq` fell back to class index 0.
    pub c_neq_defaulted: bool,
    pub schedule: Schedule,
    pub tau_tilde: f64,
    /// `|B|`, the `n` of the loop.
    pub n: usize,
    pub d: usize,
    pub delta: f64,
}

impl CoreTrace {
    /// `n / t`, the nominal block size.
    pub fn block_size(&self) -> f64 {
        self.n as f64 / self.schedule.t as f64
    }

    pub fn without_samples(mut self) -> Self {
        for it in &mut self.iterations {
            it.t_sample = None;
        }
        self
    }
}

fn block_ranges(len: usize, t: usize) -> Vec<Range<usize>> {
    let base = len / t;
    (0..t)
        .map(|i| {
            let start = i * base;
            let end = if i + 1 == t { len } else { start + base };
            start..end
        })
        .collect()
}

fn erm_or_default(members: &[Hypothesis], data: &Dataset) -> (usize, bool) {
    if data.is_empty() {
        return (0, true);
    }
    let counts = data.counts();
    (erm_from_mistakes(&mistake_counts(members, &counts), counts.total).index, false)
}

/// The core loop on a sample of `2n` points with a known error estimate.
///
/// The first `floor(|S|/2)` samples form `B`, the rest form `C`. `B` is cut
/// into `t` contiguous blocks, the last absorbing the remainder.
pub fn core_train(
    sample: &Dataset,
    members: &[Hypothesis],
    params: &LearnerParams,
    tau_tilde: f64,
    rng: &RngStream,
) -> Result<(CompositeClassifier, CoreTrace)> {
    params.validate()?;
    if sample.len() < 2 {
        return Err(invalid(format!("core loop needs at least 2 samples, got {}", sample.len())));
    }
    if members.is_empty() {
        return Err(invalid("empty hypothesis list"));
    }
    if members[0].domain_size() != sample.domain_size() {
        return Err(invalid("class and sample domains differ"));
    }
    let n = sample.len() / 2;
    let schedule = make_schedule(tau_tilde, n, params.d, params.delta, &params.consts)?;
    let b = sample.slice(0..n);
    let c = sample.slice(n..sample.len());
    let block_n = n as f64 / schedule.t as f64;

    let mut pairs = ExpertPairList::empty();
    let mut pair_indices = Vec::new();
    let mut iterations = Vec::new();
    let mut reason = BreakReason::Completed;

    for (k, block) in block_ranges(n, schedule.t).into_iter().enumerate() {
        let i = k + 1;
        let t_sample = b.slice(block.clone()).filter(|s| pairs.all_agree(s.point));
        let mut rec = IterationRecord {
            i,
            block,
            t_size: t_sample.len(),
            gamma: None,
            erm_index: None,
            alpha: None,
            threshold: None,
            h_size: None,
            pair: None,
            t_sample: None,
        };
        if t_sample.is_empty() {
            rec.t_sample = Some(t_sample);
            iterations.push(rec);
            reason = BreakReason::EmptyTi;
            break;
        }
        let counts = t_sample.counts();
        let mistakes = mistake_counts(members, &counts);
        let ErmResult { index, gamma, .. } = erm_from_mistakes(&mistakes, counts.total);
        rec.gamma = Some(gamma);
        rec.erm_index = Some(index);
        if gamma <= schedule.z_t {
            rec.t_sample = Some(t_sample);
            iterations.push(rec);
            reason = BreakReason::GammaBelowZt;
            break;
        }
        let alpha = alpha_bound(block_n, params.d, params.delta, gamma, &params.consts)?;
        let near = near_optimal_from_mistakes(&mistakes, counts.total, gamma, alpha);
        let threshold = gamma / clamped_ln(1.0 / gamma);
        rec.alpha = Some(alpha);
        rec.threshold = Some(threshold);
        rec.h_size = Some(near.len());
        let stream = rng.with_stream(rng.stream.wrapping_add(i as u64));
        let found = pair_search_counts(members, &near, &counts, threshold, params.pair_search, &stream);
        rec.pair = found;
        rec.t_sample = Some(t_sample);
        iterations.push(rec);
        match found {
            None => {
                reason = BreakReason::NoDisagreeingPair;
                break;
            }
            Some((a, bidx)) => {
                pairs.push(members[a].clone(), members[bidx].clone());
                pair_indices.push((a, bidx));
            }
        }
    }

    let c_eq = c.filter(|s| pairs.all_agree(s.point));
    let c_neq = c.filter(|s| !pairs.all_agree(s.point));
    let (eq_index, c_eq_defaulted) = erm_or_default(members, &c_eq);
    let (neq_index, c_neq_defaulted) = erm_or_default(members, &c_neq);

    let classifier = CompositeClassifier::from_indices(members, pair_indices.clone(), eq_index, neq_index)?;
    let trace = CoreTrace {
        r: pair_indices.len(),
        iterations,
        break_reason: reason,
        pair_indices,
        c_eq_size: c_eq.len(),
        c_neq_size: c_neq.len(),
        c_eq_defaulted,
        c_neq_defaulted,
        schedule,
        tau_tilde,
        n,
        d: params.d,
        delta: params.delta,
    };
    Ok((classifier, trace))
}

/// Which candidate the validation split picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selected {
    Core,
    Erm,
}

/// The wrapper's returned classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum FinalClassifier {
    Composite(CompositeClassifier),
    Proper { index: usize, hypothesis: Hypothesis },
}

impl FinalClassifier {
    pub fn predict(&self, x: usize) -> Result<i8> {
        match self {
            FinalClassifier::Composite(c) => c.predict(x),
            FinalClassifier::Proper { hypothesis, .. } => {
                if x >= hypothesis.domain_size() {
                    return Err(invalid(format!("point {x} outside domain")));
                }
                Ok(hypothesis.label(x))
            }
        }
    }

    pub fn to_hypothesis(&self) -> Hypothesis {
        match self {
            FinalClassifier::Composite(c) => c.to_hypothesis(),
            FinalClassifier::Proper { hypothesis, .. } => hypothesis.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub classifier: FinalClassifier,
    pub selected: Selected,
    pub core: CompositeClassifier,
    pub trace: CoreTrace,
    /// ERM on `S_2`.
    pub erm: ErmResult,
    pub tau_tilde: f64,
    /// `er_{S_3}` of the core classifier and of the ERM candidate.
    pub validation_errors: (f64, f64),
}

fn mistakes_of(labels: &Hypothesis, data: &Dataset) -> usize {
    data.iter().filter(|s| labels.label(s.point) != s.label).count()
}

/// Splits `sample` into thirds (`S_3` takes the remainder), estimates the
/// optimal error on `S_1`, runs the core loop and ERM on `S_2`, and keeps
/// whichever errs less on `S_3` (ties go to the core classifier).
pub fn train(sample: &Dataset, members: &[Hypothesis], params: &LearnerParams, rng: &RngStream) -> Result<TrainOutcome> {
    params.validate()?;
    let total = sample.len();
    if total < 3 {
        return Err(invalid(format!("training needs at least 3 samples, got {total}")));
    }
    if members.is_empty() || members[0].domain_size() != sample.domain_size() {
        return Err(invalid("class and sample domains differ or class is empty"));
    }
    let third = total / 3;
    let s1 = sample.slice(0..third);
    let s2 = sample.slice(third..2 * third);
    let s3 = sample.slice(2 * third..total);

    let c1 = s1.counts();
    let raw_tau = erm_from_mistakes(&mistake_counts(members, &c1), c1.total).gamma;
    let floor = 1.0 / (2.0 * third as f64);
    let tau_tilde = if raw_tau <= 0.0 {
        floor
    } else if raw_tau >= 1.0 {
        1.0 - floor
    } else {
        raw_tau
    };

    let (core, trace) = core_train(&s2, members, params, tau_tilde, rng)?;
    let c2 = s2.counts();
    let erm = erm_from_mistakes(&mistake_counts(members, &c2), c2.total);

    let core_labels = core.to_hypothesis();
    let core_mistakes = mistakes_of(&core_labels, &s3);
    let erm_mistakes = mistakes_of(&members[erm.index], &s3);
    let s3n = s3.len() as f64;
    let (selected, classifier) = if core_mistakes <= erm_mistakes {
        (Selected::Core, FinalClassifier::Composite(core.clone()))
    } else {
        (
            Selected::Erm,
            FinalClassifier::Proper {
                index: erm.index,
                hypothesis: members[erm.index].clone(),
            },
        )
    };
    Ok(TrainOutcome {
        classifier,
        selected,
        core,
        trace,
        erm,
        tau_tilde,
        validation_errors: (core_mistakes as f64 / s3n, erm_mistakes as f64 / s3n),
    })
}

/// Largest deviation found for a single hypothesis or pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub first: usize,
    /// Second member for pair witnesses; equal to `first` otherwise.
    pub second: usize,
    pub deviation: f64,
    pub allowance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationFailure {
    pub i: usize,
    pub e0: bool,
    pub e1: bool,
    /// Witness with the largest deviation/allowance ratio, if any were checked.
    pub worst_hypothesis: Option<Witness>,
    pub worst_pair: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureEventReport {
    pub iterations: Vec<IterationFailure>,
}

impl FailureEventReport {
    pub fn any(&self) -> bool {
        self.iterations.iter().any(|f| f.e0 || f.e1)
    }
}

fn ratio(w: &Witness) -> f64 {
    if w.allowance > 0.0 {
        w.deviation / w.allowance
    } else {
        f64::INFINITY
    }
}

fn keep_worst(slot: &mut Option<Witness>, cand: Witness) {
    if slot.as_ref().is_none_or(|w| ratio(&cand) > ratio(w)) {
        *slot = Some(cand);
    }
}

/// Failure-event conditions for one filtered block against its exact
/// conditional distribution, with allowance
/// `alpha(block_n, d, delta, min(true, empirical)) / 32`.
#[allow(clippy::too_many_arguments)]
pub fn block_failure_events(
    i: usize,
    t_sample: &Dataset,
    conditional: &DiscreteDistribution,
    members: &[Hypothesis],
    block_n: f64,
    d: usize,
    delta: f64,
    consts: &TheoryConstants,
) -> Result<IterationFailure> {
    if t_sample.is_empty() {
        return Err(PacError::EmptySample);
    }
    let counts = t_sample.counts();
    let m = counts.total as f64;
    let allowance = |beta: f64| alpha_bound(block_n, d, delta, beta.clamp(0.0, 1.0), consts).map(|a| a / 32.0);

    let mut e0 = false;
    let mut worst_h = None;
    for (k, h) in members.iter().enumerate() {
        let emp = counts.mistakes(h) as f64 / m;
        let tru = true_error_unchecked(h, conditional);
        let w = Witness {
            first: k,
            second: k,
            deviation: (tru - emp).abs(),
            allowance: allowance(tru.min(emp))?,
        };
        e0 |= w.deviation > w.allowance;
        keep_worst(&mut worst_h, w);
    }

    let mut e1 = false;
    let mut worst_p = None;
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let emp = counts.disagreements(&members[a], &members[b]) as f64 / m;
            let tru = true_disagreement(&members[a], &members[b], conditional)?;
            let w = Witness {
                first: a,
                second: b,
                deviation: (tru - emp).abs(),
                allowance: allowance(tru.min(emp))?,
            };
            e1 |= w.deviation > w.allowance;
            keep_worst(&mut worst_p, w);
        }
    }
    Ok(IterationFailure {
        i,
        e0,
        e1,
        worst_hypothesis: worst_h,
        worst_pair: worst_p,
    })
}

fn pairs_before(members: &[Hypothesis], pair_indices: &[(usize, usize)], k: usize) -> Result<ExpertPairList> {
    let mut list = ExpertPairList::empty();
    for &(a, b) in &pair_indices[..k.min(pair_indices.len())] {
        let h1 = members.get(a).ok_or_else(|| invalid(format!("pair index {a} outside class")))?;
        let h2 = members.get(b).ok_or_else(|| invalid(format!("pair index {b} outside class")))?;
        list.push(h1.clone(), h2.clone());
    }
    Ok(list)
}

/// Evaluates the per-block failure events of every iteration that saw a
/// nonempty `T^i`. The events are reported as raw conditions; no
/// conditioning on earlier events is applied.
pub fn diagnose_failure_events(
    trace: &CoreTrace,
    members: &[Hypothesis],
    dist: &DiscreteDistribution,
    consts: &TheoryConstants,
) -> Result<FailureEventReport> {
    let mut out = Vec::new();
    for rec in &trace.iterations {
        let t_sample = rec
            .t_sample
            .as_ref()
            .ok_or_else(|| PacError::MissingTraceData(format!("iteration {} has no retained T^i", rec.i)))?;
        if t_sample.is_empty() {
            continue;
        }
        let before = pairs_before(members, &trace.pair_indices, rec.i - 1)?;
        let cond = condition_on_agreement(dist, &before)?;
        out.push(block_failure_events(
            rec.i,
            t_sample,
            &cond.conditional,
            members,
            trace.block_size().max(1.0),
            trace.d,
            trace.delta,
            consts,
        )?);
    }
    Ok(FailureEventReport { iterations: out })
}

/// Exact tracked quantities of one loop stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgressRecord {
    pub i: usize,
    /// `min_h er_{D^i}(h)`.
    pub best_conditional_error: f64,
    /// `Pr_D[exists j <= min(i, r): pair j disagrees]`.
    pub disagreement_mass: f64,
    /// `tau (1 - 1/(32 ln(1/tau)))^(i-1)`.
    pub error_bound: f64,
    pub error_bound_held: bool,
    /// `disagreement_mass <= 8 (tau - best_conditional_error)`.
    pub disagreement_bound_held: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressReport {
    pub tau: f64,
    pub records: Vec<ProgressRecord>,
}

fn best_error(members: &[Hypothesis], dist: &DiscreteDistribution) -> f64 {
    members
        .iter()
        .map(|h| true_error_unchecked(h, dist))
        .fold(f64::INFINITY, f64::min)
}

/// One selected pair's unconditional identities on `D^i` and its agreement
/// region `D^{i+1}`: the error-sum decomposition and the averaging bound.
/// Returns the largest residual of the decomposition.
pub fn check_pair_identities(
    members: &[Hypothesis],
    h1: &Hypothesis,
    h2: &Hypothesis,
    stage: &DiscreteDistribution,
) -> Result<f64> {
    let pair = ExpertPairList::new(vec![(h1.clone(), h2.clone())])?;
    let lhs = true_error_unchecked(h1, stage) + true_error_unchecked(h2, stage);
    let disagree = true_disagreement(h1, h2, stage)?;
    let (rhs, next) = match condition_on_agreement(stage, &pair) {
        Ok(next) => (
            next.region_mass * (true_error_unchecked(h1, &next.conditional) + true_error_unchecked(h2, &next.conditional))
                + disagree,
            Some(next.conditional),
        ),
        Err(PacError::EmptyRegion) => (disagree, None),
        Err(e) => return Err(e),
    };
    let residual = (lhs - rhs).abs();
    if residual > IDENTITY_TOLERANCE {
        return Err(PacError::InvariantViolation(format!(
            "error decomposition off by {residual:e}"
        )));
    }
    if let Some(next) = next {
        let e1 = true_error_unchecked(h1, &next);
        let e2 = true_error_unchecked(h2, &next);
        if (e1 - e2).abs() > IDENTITY_TOLERANCE {
            return Err(PacError::InvariantViolation(format!(
                "agreeing pair has unequal conditional errors {e1} and {e2}"
            )));
        }
        let best = best_error(members, &next);
        if best > 0.5 * (e1 + e2) + IDENTITY_TOLERANCE {
            return Err(PacError::InvariantViolation(format!(
                "class minimum {best} exceeds pair average {}",
                0.5 * (e1 + e2)
            )));
        }
    }
    Ok(residual)
}

/// Exact per-stage quantities for a finished loop. The decomposition and
/// averaging identities are enforced (an [`PacError::InvariantViolation`]
/// signals a bug); the progress inequalities are only reported.
pub fn exact_progress_report(
    trace: &CoreTrace,
    members: &[Hypothesis],
    dist: &DiscreteDistribution,
) -> Result<ProgressReport> {
    let tau = best_error(members, dist);
    let r = trace.r;
    let shrink = 1.0 - 1.0 / (32.0 * clamped_ln(1.0 / tau.max(f64::MIN_POSITIVE)));
    let mut records = Vec::with_capacity(r + 1);
    for i in 1..=r + 1 {
        let before = pairs_before(members, &trace.pair_indices, i - 1)?;
        let stage = match condition_on_agreement(dist, &before) {
            Ok(s) => s.conditional,
            Err(PacError::EmptyRegion) => break,
            Err(e) => return Err(e),
        };
        let best = best_error(members, &stage);
        let upto = pairs_before(members, &trace.pair_indices, i.min(r))?;
        let disagreement_mass = if upto.is_empty() {
            0.0
        } else {
            (0..dist.domain_size())
                .filter(|&x| !upto.all_agree(x))
                .map(|x| dist.point_mass(x))
                .sum()
        };
        if i <= r {
            let (a, b) = trace.pair_indices[i - 1];
            check_pair_identities(members, &members[a], &members[b], &stage)?;
        }
        let error_bound = tau * shrink.powi(i as i32 - 1);
        records.push(ProgressRecord {
            i,
            best_conditional_error: best,
            disagreement_mass,
            error_bound,
            error_bound_held: best <= error_bound + IDENTITY_TOLERANCE,
            disagreement_bound_held: disagreement_mass <= 8.0 * (tau - best) + IDENTITY_TOLERANCE,
        });
    }
    Ok(ProgressReport { tau, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_dataset, HypothesisClass, NEG, POS};

    fn h(labels: &[i8]) -> Hypothesis {
        Hypothesis::new(labels.to_vec()).unwrap()
    }

    fn params(d: usize) -> LearnerParams {
        LearnerParams::new(d, 0.1, TheoryConstants::default())
    }

    #[test]
    fn block_ranges_put_remainder_last() {
        assert_eq!(block_ranges(10, 3), vec![0..3, 3..6, 6..10]);
        assert_eq!(block_ranges(5, 1), vec![0..5]);
        assert_eq!(block_ranges(2, 4), vec![0..0, 0..0, 0..0, 0..2]);
    }

    #[test]
    fn realizable_breaks_immediately() {
        let members = vec![h(&[1, -1, 1]), h(&[1, 1, 1]), h(&[-1, -1, -1])];
        let pairs: Vec<(usize, i8)> = (0..60).map(|k| (k % 3, members[0].label(k % 3))).collect();
        let data = Dataset::from_pairs(3, &pairs).unwrap();
        let (clf, trace) = core_train(&data, &members, &params(1), 0.05, &RngStream::new(1, 0)).unwrap();
        assert_eq!(trace.break_reason, BreakReason::GammaBelowZt);
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.r, 0);
        assert_eq!(trace.c_neq_size, 0);
        assert!(trace.c_neq_defaulted);
        assert_eq!(clf.eq_index(), 0);
        for x in 0..3 {
            assert_eq!(clf.predict(x).unwrap(), members[0].label(x));
        }
    }

    #[test]
    fn complementary_pair_is_found() {
        // Hand trace: class {h, -h} on 2 points; labels agree with h on 60% of samples.
        // gamma_1 = 0.4 > Z_t (tiny c_Z), H^1 = both since er(-h) = 0.6 <= 0.4 + alpha
        // (alpha >= 0.2 at this size), disagreement 1 >= 0.4 / 1.
        let hyp = h(&[1, -1]);
        let members = vec![hyp.clone(), hyp.negated()];
        let mut pairs = Vec::new();
        for k in 0..40 {
            let x = k % 2;
            let good = k % 10 < 6;
            pairs.push((x, if good { hyp.label(x) } else { -hyp.label(x) }));
        }
        let data = Dataset::from_pairs(2, &pairs).unwrap();
        let consts = TheoryConstants { c_z: 1e-6, c_t: 0.1, ..Default::default() };
        let p = LearnerParams::new(1, 0.1, consts);
        let (clf, trace) = core_train(&data, &members, &p, 0.4, &RngStream::new(0, 0)).unwrap();
        assert_eq!(trace.schedule.t, 1);
        let first = &trace.iterations[0];
        assert_eq!(first.block, 0..20);
        assert!((first.gamma.unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(first.h_size, Some(2));
        assert_eq!(first.pair, Some((0, 1)));
        assert!(trace.r >= 1);
        assert_eq!(trace.break_reason, BreakReason::Completed);
        // every point disagrees, so C_= is empty and routing goes to h_neq
        assert_eq!(trace.c_eq_size, 0);
        assert!(trace.c_eq_defaulted);
        assert_eq!(trace.c_neq_size, 20);
        assert_eq!(clf.to_hypothesis(), members[clf.neq_index()]);
    }

    #[test]
    fn single_iteration_when_t_is_one() {
        let members = HypothesisClass::d_subset(4, 1).unwrap().enumerate(10).unwrap();
        let dist = DiscreteDistribution::from_marginal(&[0.25; 4], &[0.8, 0.7, 0.9, 0.6]).unwrap();
        let data = sample_dataset(&dist, 400, &RngStream::new(3, 1)).unwrap();
        let consts = TheoryConstants { c_t: 1e-3, c_z: 1e-6, ..Default::default() };
        let (_, trace) = core_train(&data, &members, &LearnerParams::new(1, 0.1, consts), 0.3, &RngStream::new(0, 0)).unwrap();
        assert_eq!(trace.schedule.t, 1);
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.iterations[0].block, 0..200);
    }

    #[test]
    fn core_train_validates() {
        let members = vec![h(&[1, 1])];
        let one = Dataset::from_pairs(2, &[(0, 1)]).unwrap();
        assert!(core_train(&one, &members, &params(1), 0.1, &RngStream::new(0, 0)).is_err());
        let two = Dataset::from_pairs(2, &[(0, 1), (1, 1)]).unwrap();
        assert!(core_train(&two, &members, &params(1), 0.0, &RngStream::new(0, 0)).is_err());
        assert!(core_train(&two, &members, &params(0), 0.1, &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn routing_matches_table() {
        let members = vec![h(&[1, 1, -1, -1]), h(&[1, -1, -1, 1]), h(&[-1, -1, -1, -1]), h(&[1, 1, 1, 1])];
        let clf = CompositeClassifier::from_indices(&members, vec![(0, 1)], 2, 3).unwrap();
        // pair (0,1) disagrees on points 1 and 3
        let table = [NEG, POS, NEG, POS];
        for (x, &want) in table.iter().enumerate() {
            assert_eq!(clf.predict(x).unwrap(), want);
        }
        assert!(clf.predict(4).is_err());
        let none = CompositeClassifier::from_indices(&members, vec![], 2, 3).unwrap();
        assert_eq!(none.to_hypothesis(), members[2]);
    }

    #[test]
    fn train_realizable_picks_zero_error() {
        let concept = h(&[1, -1, 1, -1, 1]);
        let members = vec![h(&[1, 1, 1, 1, 1]), concept.clone(), h(&[-1, -1, 1, -1, 1])];
        let dist = DiscreteDistribution::deterministic_from(&[0.2; 5], &concept).unwrap();
        let data = sample_dataset(&dist, 300, &RngStream::new(8, 0)).unwrap();
        let out = train(&data, &members, &params(1), &RngStream::new(8, 1)).unwrap();
        assert_eq!(out.tau_tilde, 1.0 / 200.0);
        assert_eq!(out.validation_errors.1, 0.0);
        assert_eq!(out.classifier.to_hypothesis(), concept);
    }

    #[test]
    fn train_needs_three_samples() {
        let members = vec![h(&[1, 1])];
        let two = Dataset::from_pairs(2, &[(0, 1), (1, 1)]).unwrap();
        assert!(train(&two, &members, &params(1), &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn train_selection_rule() {
        let members = HypothesisClass::d_subset(6, 2).unwrap().enumerate(100).unwrap();
        let dist = DiscreteDistribution::from_marginal(&[1.0 / 6.0; 6], &[0.9, 0.1, 0.8, 0.7, 0.95, 0.2]).unwrap();
        for seed in 0..20 {
            let data = sample_dataset(&dist, 301, &RngStream::new(seed, 0)).unwrap();
            let consts = TheoryConstants { c_z: 1e-4, ..Default::default() };
            let out = train(&data, &members, &LearnerParams::new(2, 0.1, consts), &RngStream::new(seed, 1)).unwrap();
            let s3 = data.slice(200..301);
            let err = |hy: &Hypothesis| crate::measures::empirical_error(hy, &s3).unwrap();
            let picked = err(&out.classifier.to_hypothesis());
            let (core_err, erm_err) = out.validation_errors;
            assert_eq!(picked, core_err.min(erm_err));
            assert_eq!(core_err, err(&out.core.to_hypothesis()));
            assert_eq!(erm_err, err(&members[out.erm.index]));
            if core_err <= erm_err {
                assert_eq!(out.selected, Selected::Core);
            }
        }
    }

    #[test]
    fn failure_events_extremes() {
        let members = vec![h(&[1, -1]), h(&[1, 1]), h(&[-1, 1]), h(&[-1, -1])];
        let dist = DiscreteDistribution::from_marginal(&[0.5, 0.5], &[0.7, 0.4]).unwrap();
        let tiny = Dataset::from_pairs(2, &[(0, 1)]).unwrap();
        let f = block_failure_events(1, &tiny, &dist, &members, 1.0, 1, 0.1, &TheoryConstants::default()).unwrap();
        assert!(f.e0);
        let single = vec![h(&[1, -1])];
        let f = block_failure_events(1, &tiny, &dist, &single, 1.0, 1, 0.1, &TheoryConstants::default()).unwrap();
        assert!(!f.e1);
        assert!(f.worst_pair.is_none());
    }

    #[test]
    fn diagnose_needs_samples() {
        let members = vec![h(&[1, -1]), h(&[-1, 1])];
        let dist = DiscreteDistribution::from_marginal(&[0.5, 0.5], &[0.7, 0.4]).unwrap();
        let data = sample_dataset(&dist, 100, &RngStream::new(1, 1)).unwrap();
        let (_, trace) = core_train(&data, &members, &params(1), 0.3, &RngStream::new(0, 0)).unwrap();
        assert!(diagnose_failure_events(&trace, &members, &dist, &TheoryConstants::default()).is_ok());
        let stripped = trace.without_samples();
        assert!(matches!(
            diagnose_failure_events(&stripped, &members, &dist, &TheoryConstants::default()),
            Err(PacError::MissingTraceData(_))
        ));
    }

    #[test]
    fn progress_without_pairs() {
        let members = vec![h(&[1, -1, 1]), h(&[1, 1, 1])];
        let dist = DiscreteDistribution::from_marginal(&[0.2, 0.3, 0.5], &[0.9, 0.2, 0.6]).unwrap();
        let data = sample_dataset(&dist, 100, &RngStream::new(4, 0)).unwrap();
        let consts = TheoryConstants { c_z: 100.0, ..Default::default() };
        let (_, trace) = core_train(&data, &members, &LearnerParams::new(1, 0.1, consts), 0.3, &RngStream::new(0, 0)).unwrap();
        assert_eq!(trace.r, 0);
        let rep = exact_progress_report(&trace, &members, &dist).unwrap();
        assert_eq!(rep.records.len(), 1);
        let tau = members.iter().map(|m| true_error_unchecked(m, &dist)).fold(1.0, f64::min);
        assert_eq!(rep.records[0].best_conditional_error, tau);
        assert_eq!(rep.records[0].disagreement_mass, 0.0);
    }
}
