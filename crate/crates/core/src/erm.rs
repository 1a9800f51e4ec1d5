//! Empirical risk minimization over a materialized class, the deviation
//! bound `alpha(n, d, delta, beta)`, the loop schedule `(t, Z_t)`, the
//! near-optimal set and the disagreeing-pair search.
//!
//! Every logarithm of the form `ln(1/x)`, `ln ln(1/x)` or `ln(n/d)` is
//! clamped below at 1 (see [`clamped_ln`]); outside the asymptotic regime
//! the raw values can be zero or negative.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, PacError, Result};
use crate::model::{Dataset, Hypothesis, LabelCounts, RngStream};

/// The "sufficiently large" constants of the learner, as configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoryConstants {
    pub c_alpha: f64,
    pub c_t: f64,
    pub c_z: f64,
    pub c_tau: f64,
    pub c_n: f64,
    pub c_p: f64,
}

impl Default for TheoryConstants {
    /// Experimental mode: every constant is 1.
    fn default() -> Self {
        Self {
            c_alpha: 1.0,
            c_t: 1.0,
            c_z: 1.0,
            c_tau: 1.0,
            c_n: 1.0,
            c_p: 1.0,
        }
    }
}

impl TheoryConstants {
    /// Large constants in the spirit of the analysis. At desk scale this
    /// preset usually makes the loop exit on `gamma <= Z_t` immediately.
    pub fn theory() -> Self {
        Self {
            c_alpha: 32.0,
            c_t: 32.0,
            c_z: 4096.0,
            c_tau: 1024.0,
            c_n: 1024.0,
            c_p: 64.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("c_alpha", self.c_alpha),
            ("c_t", self.c_t),
            ("c_z", self.c_z),
            ("c_tau", self.c_tau),
            ("c_n", self.c_n),
            ("c_p", self.c_p),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be a positive finite number, got {v}")));
            }
        }
        Ok(())
    }
}

/// `max(ln(x), 1)` for `x > 0`.
#[inline]
pub fn clamped_ln(x: f64) -> f64 {
    x.ln().max(1.0)
}

/// Loop length `t` and early-exit threshold `Z_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t: usize,
    pub z_t: f64,
}

/// ERM output: lowest-index minimizer and its empirical error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmResult {
    pub index: usize,
    pub gamma: f64,
    pub mistakes: u64,
}

fn check_members(members: &[Hypothesis], data: &Dataset) -> Result<()> {
    if members.is_empty() {
        return Err(invalid("empty hypothesis list"));
    }
    if members[0].domain_size() != data.domain_size() {
        return Err(invalid(format!(
            "class domain size {} differs from dataset domain size {}",
            members[0].domain_size(),
            data.domain_size()
        )));
    }
    Ok(())
}

/// Mistake counts of every member on the samples summarized by `counts`.
pub(crate) fn mistake_counts(members: &[Hypothesis], counts: &LabelCounts) -> Vec<u64> {
    members.iter().map(|h| counts.mistakes(h)).collect()
}

pub(crate) fn erm_from_mistakes(mistakes: &[u64], total: u64) -> ErmResult {
    let (index, &best) = mistakes
        .iter()
        .enumerate()
        .min_by_key(|(i, &m)| (m, *i))
        .expect("nonempty");
    ErmResult {
        index,
        gamma: best as f64 / total as f64,
        mistakes: best,
    }
}

/// `argmin_h er_S(h)`, ties to the lowest index.
pub fn erm(members: &[Hypothesis], data: &Dataset) -> Result<ErmResult> {
    check_members(members, data)?;
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    let counts = data.counts();
    Ok(erm_from_mistakes(&mistake_counts(members, &counts), counts.total))
}

fn check_common(n: f64, d: usize, delta: f64) -> Result<()> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(invalid(format!("n must be >= 1, got {n}")));
    }
    if d == 0 {
        return Err(invalid("d must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0,1), got {delta}")));
    }
    Ok(())
}

/// `beta * (d ln(1/beta) + ln(1/delta))` with `0 ln(1/0) = 0`.
fn variance_term(d: usize, delta: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    beta * (d as f64 * clamped_ln(1.0 / beta) + (1.0 / delta).ln())
}

fn realizable_term(n: f64, d: usize, delta: f64) -> f64 {
    (d as f64 * clamped_ln(n / d as f64) + (1.0 / delta).ln()) / n
}

/// `c_alpha (sqrt(beta (d ln(1/beta) + ln(1/delta)) / n) + (d ln(n/d) + ln(1/delta)) / n)`.
pub fn alpha_bound(n: f64, d: usize, delta: f64, beta: f64, consts: &TheoryConstants) -> Result<f64> {
    check_common(n, d, delta)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid(format!("beta must lie in [0,1], got {beta}")));
    }
    consts.validate()?;
    Ok(consts.c_alpha * ((variance_term(d, delta, beta) / n).sqrt() + realizable_term(n, d, delta)))
}

/// `t = ceil(c_t ln(1/tau) ln ln(1/tau))` (at least 1) and
/// `Z_t = c_Z t ln^2(n/d) (d ln(n/d) + ln(1/delta)) / n`.
pub fn make_schedule(tau_tilde: f64, n: usize, d: usize, delta: f64, consts: &TheoryConstants) -> Result<Schedule> {
    if !(tau_tilde > 0.0 && tau_tilde < 1.0) {
        return Err(invalid(format!("tau estimate must lie in (0,1), got {tau_tilde}")));
    }
    check_common(n as f64, d, delta)?;
    consts.validate()?;
    let l = (1.0 / tau_tilde).ln();
    let raw = consts.c_t * l * clamped_ln(l);
    let t = (raw.ceil() as usize).max(1);
    let nf = n as f64;
    let lnd = clamped_ln(nf / d as f64);
    let z_t = consts.c_z * t as f64 * lnd * lnd * (d as f64 * lnd + (1.0 / delta).ln()) / nf;
    Ok(Schedule { t, z_t })
}

/// Members whose empirical error is at most `gamma + alpha`.
pub fn near_optimal_set(members: &[Hypothesis], data: &Dataset, gamma: f64, alpha: f64) -> Result<Vec<usize>> {
    check_members(members, data)?;
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    let counts = data.counts();
    Ok(near_optimal_from_mistakes(&mistake_counts(members, &counts), counts.total, gamma, alpha))
}

pub(crate) fn near_optimal_from_mistakes(mistakes: &[u64], total: u64, gamma: f64, alpha: f64) -> Vec<usize> {
    let limit = gamma + alpha;
    let n = total as f64;
    mistakes
        .iter()
        .enumerate()
        .filter(|(_, &m)| m as f64 / n <= limit)
        .map(|(i, _)| i)
        .collect()
}

/// How to look for a disagreeing pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairSearch {
    /// Every pair in lexicographic order.
    #[default]
    Exhaustive,
    /// Above `min_set_size` members, check `max_pairs` uniformly drawn
    /// pairs instead of all of them.
    Sampled { min_set_size: usize, max_pairs: usize },
}

/// Disagreement counts restricted to the sample's support.
struct SupportView {
    weights: Vec<u64>,
    points: Vec<usize>,
}

impl SupportView {
    fn new(counts: &LabelCounts) -> Self {
        let points: Vec<usize> = (0..counts.neg.len()).filter(|&x| counts.point(x) > 0).collect();
        let weights = points.iter().map(|&x| counts.point(x)).collect();
        Self { weights, points }
    }

    fn project(&self, h: &Hypothesis) -> Vec<i8> {
        self.points.iter().map(|&x| h.label(x)).collect()
    }

    fn disagreements(&self, a: &[i8], b: &[i8]) -> u64 {
        a.iter()
            .zip(b)
            .zip(&self.weights)
            .filter(|((x, y), _)| x != y)
            .map(|(_, &w)| w)
            .sum()
    }
}

/// First pair `(i, j)`, `i < j` in `index_set` order, whose empirical
/// disagreement is at least `threshold`.
pub fn find_disagreeing_pair(
    members: &[Hypothesis],
    index_set: &[usize],
    data: &Dataset,
    threshold: f64,
) -> Result<Option<(usize, usize)>> {
    find_disagreeing_pair_with(members, index_set, data, threshold, PairSearch::Exhaustive, &RngStream::new(0, 0))
}

/// [`find_disagreeing_pair`] with an explicit search strategy.
pub fn find_disagreeing_pair_with(
    members: &[Hypothesis],
    index_set: &[usize],
    data: &Dataset,
    threshold: f64,
    search: PairSearch,
    rng: &RngStream,
) -> Result<Option<(usize, usize)>> {
    check_members(members, data)?;
    if index_set.is_empty() {
        return Err(invalid("index set must be nonempty"));
    }
    if let Some(&bad) = index_set.iter().find(|&&i| i >= members.len()) {
        return Err(invalid(format!("index {bad} outside class of {} members", members.len())));
    }
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    Ok(pair_search_counts(members, index_set, &data.counts(), threshold, search, rng))
}

pub(crate) fn pair_search_counts(
    members: &[Hypothesis],
    index_set: &[usize],
    counts: &LabelCounts,
    threshold: f64,
    search: PairSearch,
    rng: &RngStream,
) -> Option<(usize, usize)> {
    let k = index_set.len();
    if k < 2 {
        return None;
    }
    let view = SupportView::new(counts);
    let projected: Vec<Vec<i8>> = index_set.iter().map(|&i| view.project(&members[i])).collect();
    let n = counts.total as f64;
    let hit = |a: usize, b: usize| view.disagreements(&projected[a], &projected[b]) as f64 / n >= threshold;

    match search {
        PairSearch::Sampled { min_set_size, max_pairs } if k > min_set_size => {
            let mut r = rng.rng();
            for _ in 0..max_pairs {
                let a = r.random_range(0..k);
                let mut b = r.random_range(0..k - 1);
                if b >= a {
                    b += 1;
                }
                let (a, b) = (a.min(b), a.max(b));
                if hit(a, b) {
                    return Some((index_set[a], index_set[b]));
                }
            }
            None
        }
        _ => {
            for a in 0..k {
                for b in a + 1..k {
                    if hit(a, b) {
                        return Some((index_set[a], index_set[b]));
                    }
                }
            }
            None
        }
    }
}

/// `tau + sqrt(tau (d ln(1/tau) + ln(1/delta)) / n) + (d ln(n/d) + ln(1/delta)) / n`
/// with leading constant 1; a reference curve, not a guarantee.
pub fn erm_theorem_rate(n: f64, d: usize, delta: f64, tau: f64) -> Result<f64> {
    check_common(n, d, delta)?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [0,1], got {tau}")));
    }
    Ok(tau + (variance_term(d, delta, tau) / n).sqrt() + realizable_term(n, d, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{POS, NEG};

    fn h(labels: &[i8]) -> Hypothesis {
        Hypothesis::new(labels.to_vec()).unwrap()
    }

    #[test]
    fn erm_realizable_and_ties() {
        let members = vec![h(&[1, 1]), h(&[1, -1]), h(&[-1, -1])];
        let data = Dataset::from_pairs(2, &[(0, 1), (1, -1), (1, -1)]).unwrap();
        let r = erm(&members, &data).unwrap();
        assert_eq!((r.index, r.gamma), (1, 0.0));

        // members 0 and 2 both err on exactly one sample
        let tied = vec![h(&[1, -1]), h(&[-1, 1]), h(&[1, 1])];
        let data = Dataset::from_pairs(2, &[(0, 1), (1, 1)]).unwrap();
        let r = erm(&tied, &data).unwrap();
        assert_eq!(r.index, 2);
        let data = Dataset::from_pairs(2, &[(0, 1), (1, 1), (1, -1)]).unwrap();
        let r = erm(&tied, &data).unwrap();
        assert_eq!(r.index, 0);
        assert!(erm(&tied, &Dataset::new(2, vec![]).unwrap()).is_err());
    }

    #[test]
    fn alpha_bound_zero_beta() {
        let c = TheoryConstants { c_alpha: 2.5, ..Default::default() };
        let got = alpha_bound(1000.0, 5, 0.1, 0.0, &c).unwrap();
        let want = 2.5 * (5.0 * (200.0f64).ln() + 10.0f64.ln()) / 1000.0;
        assert_eq!(got, want);
    }

    #[test]
    fn alpha_bound_reference_value() {
        // sqrt(0.1 (5 ln 10 + ln 10) / 1000) + (5 ln 200 + ln 10) / 1000 at 50 digits
        let got = alpha_bound(1000.0, 5, 0.1, 0.1, &TheoryConstants::default()).unwrap();
        assert!((got - 0.065_963_393_814_232_61).abs() < 1e-15, "{got}");
    }

    #[test]
    fn alpha_bound_monotone_in_beta() {
        let c = TheoryConstants::default();
        let mut prev = 0.0;
        for i in 0..=200 {
            let beta = i as f64 / 200.0;
            let a = alpha_bound(500.0, 3, 0.05, beta, &c).unwrap();
            assert!(a >= prev, "beta {beta}");
            prev = a;
        }
    }

    #[test]
    fn alpha_bound_rejects_domain_violations() {
        let c = TheoryConstants::default();
        assert!(alpha_bound(0.5, 1, 0.1, 0.1, &c).is_err());
        assert!(alpha_bound(10.0, 0, 0.1, 0.1, &c).is_err());
        assert!(alpha_bound(10.0, 1, 1.0, 0.1, &c).is_err());
        assert!(alpha_bound(10.0, 1, 0.1, 1.5, &c).is_err());
        let bad = TheoryConstants { c_z: 0.0, ..c };
        assert!(alpha_bound(10.0, 1, 0.1, 0.1, &bad).is_err());
    }

    #[test]
    fn schedule_values() {
        let c = TheoryConstants::default();
        // ln(100) ln ln(100) = 4.60517 * 1.52718 = 7.0329
        assert_eq!(make_schedule(0.01, 1000, 2, 0.1, &c).unwrap().t, 8);
        // clamp: tiny c_t
        let small = TheoryConstants { c_t: 1e-3, ..c };
        assert_eq!(make_schedule(0.3, 1000, 2, 0.1, &small).unwrap().t, 1);
        assert_eq!(make_schedule(0.9, 1000, 2, 0.1, &c).unwrap().t, 1);
        let a = make_schedule(0.05, 5000, 3, 0.1, &c).unwrap();
        let b = make_schedule(0.05, 5000, 3, 0.1, &TheoryConstants { c_z: 2.0, ..c }).unwrap();
        assert_eq!(a.t, b.t);
        assert!((b.z_t - 2.0 * a.z_t).abs() < 1e-15);
        assert!(make_schedule(0.0, 10, 1, 0.1, &c).is_err());
        assert!(make_schedule(1.0, 10, 1, 0.1, &c).is_err());
    }

    #[test]
    fn near_optimal_edges() {
        let members = vec![h(&[1, 1]), h(&[1, -1]), h(&[-1, -1]), h(&[-1, 1])];
        let data = Dataset::from_pairs(2, &[(0, 1), (0, 1), (1, -1), (1, 1)]).unwrap();
        let r = erm(&members, &data).unwrap();
        assert_eq!(near_optimal_set(&members, &data, r.gamma, 0.0).unwrap(), vec![0, 1]);
        assert_eq!(near_optimal_set(&members, &data, r.gamma, 1.0).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn pair_search_edges() {
        let members = vec![h(&[1, 1, -1]), h(&[-1, -1, 1])];
        let data = Dataset::from_pairs(3, &[(0, 1), (1, 1), (2, POS), (2, NEG)]).unwrap();
        assert_eq!(find_disagreeing_pair(&members, &[0], &data, 0.0).unwrap(), None);
        assert_eq!(find_disagreeing_pair(&members, &[0, 1], &data, 1.0).unwrap(), Some((0, 1)));
        assert!(find_disagreeing_pair(&members, &[], &data, 0.5).is_err());
    }

    #[test]
    fn theorem_rate_reference_value() {
        // 50-digit evaluation of the rate at n=1e4, d=10, delta=0.05, tau=0.05
        let got = erm_theorem_rate(1e4, 10, 0.05, 0.05).unwrap();
        assert!((got - 0.070_043_421_176_829_97).abs() < 1e-15, "{got}");
    }

    #[test]
    fn theorem_rate_cases() {
        let zero = erm_theorem_rate(1e4, 10, 0.05, 0.0).unwrap();
        assert_eq!(zero, (10.0 * 1000.0f64.ln() + 20.0f64.ln()) / 1e4);
        let mut prev = zero;
        for i in 1..=100 {
            let tau = i as f64 / 100.0 / std::f64::consts::E;
            let v = erm_theorem_rate(1e4, 10, 0.05, tau).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
