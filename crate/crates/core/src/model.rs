//! Finite-domain primitives: hypotheses, hypothesis classes, exact discrete
//! distributions over (point, label) pairs, datasets, and seeded randomness.
//!
//! Every value here is immutable after construction. All randomness flows
//! through an explicit [`RngStream`], so a trial is a pure function of its
//! inputs plus `(seed, stream)`.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{invalid, PacError, Result};

/// Label value `+1`.
pub const POS: i8 = 1;
/// Label value `-1`.
pub const NEG: i8 = -1;

/// Total-mass tolerance for a [`DiscreteDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of hypotheses a class may materialize.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Largest domain accepted by [`vc_dimension_bruteforce`].
pub const MAX_SHATTER_DOMAIN: usize = 24;

fn check_label(label: i8) -> Result<()> {
    if label == POS || label == NEG {
        Ok(())
    } else {
        Err(invalid(format!("label {label} is not -1 or +1")))
    }
}

/// A finite domain `{x_1, .., x_u}`; points are addressed by index `0..u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid("domain size must be at least 1"));
        }
        Ok(Self { size })
    }

    pub fn size(self) -> usize {
        self.size
    }
}

/// A labeling of every point of the domain with `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    labels: Vec<i8>,
}

impl Hypothesis {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid("hypothesis over an empty domain"));
        }
        for &l in &labels {
            check_label(l)?;
        }
        Ok(Self { labels })
    }

    pub fn constant(domain_size: usize, label: i8) -> Result<Self> {
        check_label(label)?;
        Self::new(vec![label; domain_size])
    }

    /// The hypothesis labeling exactly `negatives` with `-1` and all else `+1`.
    pub fn from_negative_set(domain_size: usize, negatives: &[usize]) -> Result<Self> {
        let mut labels = vec![POS; domain_size];
        for &x in negatives {
            if x >= domain_size {
                return Err(invalid(format!("point {x} outside domain of size {domain_size}")));
            }
            labels[x] = NEG;
        }
        Self::new(labels)
    }

    pub fn domain_size(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn label(&self, x: usize) -> i8 {
        self.labels[x]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn negated(&self) -> Self {
        Self {
            labels: self.labels.iter().map(|&l| -l).collect(),
        }
    }

    /// Indices labeled `-1`, ascending.
    pub fn negative_points(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == NEG)
            .map(|(x, _)| x)
            .collect()
    }

    pub fn count_negative(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NEG).count()
    }
}

/// How a class stores its members.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassRepr {
    Explicit(Vec<Hypothesis>),
    /// Every hypothesis labeling exactly `d` of `u` points `-1`.
    DSubset { u: usize, d: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisClass {
    repr: ClassRepr,
    declared_vc: Option<usize>,
}

impl HypothesisClass {
    pub fn explicit(members: Vec<Hypothesis>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| invalid("explicit class must be nonempty"))?;
        let u = first.domain_size();
        let mut seen = HashSet::with_capacity(members.len());
        for (i, h) in members.iter().enumerate() {
            if h.domain_size() != u {
                return Err(invalid(format!(
                    "hypothesis {i} has domain size {} but class uses {u}",
                    h.domain_size()
                )));
            }
            if !seen.insert(h.labels()) {
                return Err(invalid(format!("hypothesis {i} duplicates an earlier member")));
            }
        }
        Ok(Self {
            repr: ClassRepr::Explicit(members),
            declared_vc: None,
        })
    }

    pub fn d_subset(u: usize, d: usize) -> Result<Self> {
        if d == 0 || d > u {
            return Err(invalid(format!("d-subset class needs 1 <= d <= u, got u={u}, d={d}")));
        }
        Ok(Self {
            repr: ClassRepr::DSubset { u, d },
            declared_vc: Some(d.min(u - d)),
        })
    }

    pub fn with_declared_vc(mut self, vc: usize) -> Self {
        self.declared_vc = Some(vc);
        self
    }

    pub fn declared_vc(&self) -> Option<usize> {
        self.declared_vc
    }

    pub fn repr(&self) -> &ClassRepr {
        &self.repr
    }

    pub fn domain_size(&self) -> usize {
        match &self.repr {
            ClassRepr::Explicit(m) => m[0].domain_size(),
            ClassRepr::DSubset { u, .. } => *u,
        }
    }

    /// Logical cardinality, `None` if it overflows `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        match &self.repr {
            ClassRepr::Explicit(m) => Some(m.len() as u128),
            ClassRepr::DSubset { u, d } => binomial(*u as u64, *d as u64),
        }
    }

    /// Materializes the members. D-subset members come in lexicographic
    /// order of their `-1` index sets; the position is the member's identity.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Hypothesis>> {
        match &self.repr {
            ClassRepr::Explicit(m) => Ok(m.clone()),
            ClassRepr::DSubset { u, d } => {
                let card = binomial(*u as u64, *d as u64);
                match card {
                    Some(c) if c <= cap as u128 => {}
                    other => {
                        return Err(PacError::ClassTooLarge {
                            cardinality: other.map_or_else(|| "> 2^128".to_string(), |c| c.to_string()),
                            cap,
                        })
                    }
                }
                let mut out = Vec::with_capacity(card.unwrap_or(0) as usize);
                let mut combo: Vec<usize> = (0..*d).collect();
                loop {
                    out.push(Hypothesis::from_negative_set(*u, &combo)?);
                    if !next_combination(&mut combo, *u) {
                        break;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order. Returns `false` after the last one.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact `n choose k`, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// [`HypothesisClass::enumerate`] with the default cap.
pub fn enumerate_class(class: &HypothesisClass) -> Result<Vec<Hypothesis>> {
    class.enumerate(DEFAULT_ENUMERATION_CAP)
}

/// Exact VC dimension by exhaustive shattering search.
pub fn vc_dimension_bruteforce(class: &HypothesisClass) -> Result<usize> {
    let u = class.domain_size();
    if u > MAX_SHATTER_DOMAIN {
        return Err(PacError::DomainTooLarge {
            size: u,
            max: MAX_SHATTER_DOMAIN,
        });
    }
    let members = enumerate_class(class)?;
    Ok(vc_dimension_of(&members))
}

/// VC dimension of an already-materialized member list (domain <= 24).
///
/// A shattered set of size `k + 1` contains the shattered set formed by its
/// `k` smallest points, so candidates are grown from shattered sets only.
pub fn vc_dimension_of(members: &[Hypothesis]) -> usize {
    if members.is_empty() {
        return 0;
    }
    let u = members[0].domain_size();
    assert!(u <= MAX_SHATTER_DOMAIN, "domain too large for shattering search");
    let masks: Vec<u32> = members
        .iter()
        .map(|h| {
            h.labels()
                .iter()
                .enumerate()
                .fold(0u32, |m, (x, &l)| if l == POS { m | (1 << x) } else { m })
        })
        .collect();

    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    let mut best = 0;
    let max_k = (usize::BITS - members.len().leading_zeros()) as usize; // floor(log2 |H|) + 1
    for k in 1..=u.min(max_k) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |&x| x + 1);
            for x in start..u {
                let mut cand = set.clone();
                cand.push(x);
                if shatters(&masks, &cand) {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        best = k;
        frontier = next;
    }
    best
}

fn shatters(masks: &[u32], points: &[usize]) -> bool {
    let k = points.len();
    let needed = 1usize << k;
    if masks.len() < needed {
        return false;
    }
    let mut seen = vec![false; needed];
    let mut count = 0;
    for &m in masks {
        let mut pattern = 0usize;
        for (bit, &x) in points.iter().enumerate() {
            if m & (1 << x) != 0 {
                pattern |= 1 << bit;
            }
        }
        if !seen[pattern] {
            seen[pattern] = true;
            count += 1;
            if count == needed {
                return true;
            }
        }
    }
    false
}

/// Exact point masses over (point, label) pairs.
///
/// Layout: `mass[2x]` is `Pr[(x, -1)]`, `mass[2x + 1]` is `Pr[(x, +1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    mass: Vec<f64>,
    deterministic: bool,
}

#[inline]
pub(crate) fn slot(x: usize, label: i8) -> usize {
    2 * x + usize::from(label == POS)
}

impl DiscreteDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() || !mass.len().is_multiple_of(2) {
            return Err(invalid("mass vector must hold two entries per point"));
        }
        if let Some((i, m)) = mass.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(invalid(format!("mass[{i}] = {m} is not a nonnegative finite number")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(invalid(format!("total mass {total} is not 1")));
        }
        Ok(Self::trusted(mass))
    }

    /// For masses already known to be normalized up to rounding.
    pub(crate) fn trusted(mass: Vec<f64>) -> Self {
        let deterministic = mass.chunks_exact(2).all(|c| c[0] == 0.0 || c[1] == 0.0);
        Self { mass, deterministic }
    }

    /// Builds from a point marginal and `Pr[y = +1 | x]` per point.
    pub fn from_marginal(marginal: &[f64], prob_pos: &[f64]) -> Result<Self> {
        if marginal.len() != prob_pos.len() {
            return Err(invalid("marginal and conditional lengths differ"));
        }
        let mut mass = Vec::with_capacity(2 * marginal.len());
        for (&m, &q) in marginal.iter().zip(prob_pos) {
            if !(0.0..=1.0).contains(&q) {
                return Err(invalid(format!("conditional probability {q} outside [0,1]")));
            }
            mass.push(m * (1.0 - q));
            mass.push(m * q);
        }
        Self::new(mass)
    }

    /// Every point gets its marginal mass on the label `concept` assigns to it.
    pub fn deterministic_from(marginal: &[f64], concept: &Hypothesis) -> Result<Self> {
        let prob_pos: Vec<f64> = concept
            .labels()
            .iter()
            .map(|&l| if l == POS { 1.0 } else { 0.0 })
            .collect();
        Self::from_marginal(marginal, &prob_pos)
    }

    pub fn domain_size(&self) -> usize {
        self.mass.len() / 2
    }

    #[inline]
    pub fn mass(&self, x: usize, label: i8) -> f64 {
        self.mass[slot(x, label)]
    }

    #[inline]
    pub fn point_mass(&self, x: usize) -> f64 {
        self.mass[2 * x] + self.mass[2 * x + 1]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// True iff no point carries positive mass on both labels.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }
}

/// One labeled draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sample {
    pub point: usize,
    pub label: i8,
}

/// An ordered multiset of samples over a fixed domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    domain_size: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(domain_size: usize, samples: Vec<Sample>) -> Result<Self> {
        Domain::new(domain_size)?;
        for s in &samples {
            if s.point >= domain_size {
                return Err(invalid(format!(
                    "sample point {} outside domain of size {domain_size}",
                    s.point
                )));
            }
            check_label(s.label)?;
        }
        Ok(Self { domain_size, samples })
    }

    pub fn from_pairs(domain_size: usize, pairs: &[(usize, i8)]) -> Result<Self> {
        Self::new(
            domain_size,
            pairs.iter().map(|&(point, label)| Sample { point, label }).collect(),
        )
    }

    pub(crate) fn from_parts_unchecked(domain_size: usize, samples: Vec<Sample>) -> Self {
        Self { domain_size, samples }
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Contiguous sub-range as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        Dataset::from_parts_unchecked(self.domain_size, self.samples[range].to_vec())
    }

    pub fn filter(&self, keep: impl Fn(&Sample) -> bool) -> Dataset {
        Dataset::from_parts_unchecked(
            self.domain_size,
            self.samples.iter().copied().filter(|s| keep(s)).collect(),
        )
    }

    /// Per-point, per-label occurrence counts.
    pub fn counts(&self) -> LabelCounts {
        let mut neg = vec![0u64; self.domain_size];
        let mut pos = vec![0u64; self.domain_size];
        for s in &self.samples {
            if s.label == POS {
                pos[s.point] += 1;
            } else {
                neg[s.point] += 1;
            }
        }
        LabelCounts {
            neg,
            pos,
            total: self.samples.len() as u64,
        }
    }
}

/// Sufficient statistics of a dataset for any 0-1 loss computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCounts {
    pub neg: Vec<u64>,
    pub pos: Vec<u64>,
    pub total: u64,
}

impl LabelCounts {
    #[inline]
    pub fn point(&self, x: usize) -> u64 {
        self.neg[x] + self.pos[x]
    }

    /// Number of samples `h` mislabels.
    pub fn mistakes(&self, h: &Hypothesis) -> u64 {
        h.labels()
            .iter()
            .enumerate()
            .map(|(x, &l)| if l == POS { self.neg[x] } else { self.pos[x] })
            .sum()
    }

    /// Number of samples on which `a` and `b` predict differently.
    pub fn disagreements(&self, a: &Hypothesis, b: &Hypothesis) -> u64 {
        a.labels()
            .iter()
            .zip(b.labels())
            .enumerate()
            .filter(|(_, (la, lb))| la != lb)
            .map(|(x, _)| self.point(x))
            .sum()
    }
}

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8, which addresses 2^64 independent streams per seed;
/// trial `i` of a run uses stream `i`, so serial and parallel execution
/// see the same numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// A stream with the same seed and a different id.
    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws `n` i.i.d. samples from `dist`.
pub fn sample_dataset(dist: &DiscreteDistribution, n: usize, rng: &RngStream) -> Result<Dataset> {
    let mut r = rng.rng();
    sample_dataset_with(dist, n, &mut r)
}

/// As [`sample_dataset`], continuing an existing generator.
pub fn sample_dataset_with<R: rand::Rng + ?Sized>(
    dist: &DiscreteDistribution,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    let total = dist.total_mass();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(invalid(format!("distribution not normalized (total {total})")));
    }
    let table = WeightedAliasIndex::new(dist.masses().to_vec())
        .map_err(|e| invalid(format!("cannot build sampler: {e}")))?;
    let samples = (0..n)
        .map(|_| {
            let k = table.sample(rng);
            Sample {
                point: k / 2,
                label: if k % 2 == 1 { POS } else { NEG },
            }
        })
        .collect();
    Ok(Dataset::from_parts_unchecked(dist.domain_size(), samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_two() -> DiscreteDistribution {
        DiscreteDistribution::new(vec![0.0, 0.5, 0.5, 0.0]).unwrap()
    }

    #[test]
    fn domain_rejects_zero() {
        assert!(Domain::new(0).is_err());
        assert_eq!(Domain::new(3).unwrap().size(), 3);
    }

    #[test]
    fn hypothesis_validates_labels() {
        assert!(Hypothesis::new(vec![1, 0, -1]).is_err());
        assert!(Hypothesis::new(vec![]).is_err());
        let h = Hypothesis::new(vec![1, -1, -1]).unwrap();
        assert_eq!(h.negative_points(), vec![1, 2]);
        assert_eq!(h.negated().labels(), &[-1, 1, 1]);
    }

    #[test]
    fn explicit_class_rejects_duplicates_and_mixed_domains() {
        let a = Hypothesis::new(vec![1, 1]).unwrap();
        let b = Hypothesis::new(vec![1, 1, 1]).unwrap();
        assert!(HypothesisClass::explicit(vec![]).is_err());
        assert!(HypothesisClass::explicit(vec![a.clone(), a.clone()]).is_err());
        assert!(HypothesisClass::explicit(vec![a, b]).is_err());
    }

    #[test]
    fn point_mass_sampling_is_degenerate() {
        let dist = DiscreteDistribution::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let data = sample_dataset(&dist, 3, &RngStream::new(7, 0)).unwrap();
        let expected = Dataset::from_pairs(2, &[(0, 1), (0, 1), (0, 1)]).unwrap();
        assert_eq!(data, expected);
    }

    #[test]
    fn sampling_frequency_matches_mass() {
        let data = sample_dataset(&uniform_two(), 1_000_000, &RngStream::new(2024, 3)).unwrap();
        let first = data.iter().filter(|s| s.point == 0).count() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&first), "frequency {first}");
        assert!(data.iter().all(|s| (s.point == 0) == (s.label == POS)));
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let dist = DiscreteDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let s = RngStream::new(99, 5);
        assert_eq!(sample_dataset(&dist, 500, &s).unwrap(), sample_dataset(&dist, 500, &s).unwrap());
        assert_ne!(
            sample_dataset(&dist, 500, &s).unwrap(),
            sample_dataset(&dist, 500, &s.with_stream(6)).unwrap()
        );
    }

    #[test]
    fn sampling_rejects_unnormalized() {
        let bad = DiscreteDistribution::trusted(vec![0.2, 0.2]);
        assert!(sample_dataset(&bad, 5, &RngStream::new(1, 1)).is_err());
        assert!(DiscreteDistribution::new(vec![0.2, 0.2]).is_err());
        assert!(DiscreteDistribution::new(vec![-0.5, 1.5]).is_err());
    }

    #[test]
    fn deterministic_flag() {
        assert!(uniform_two().is_deterministic());
        let noisy = DiscreteDistribution::new(vec![0.25, 0.25, 0.5, 0.0]).unwrap();
        assert!(!noisy.is_deterministic());
    }

    #[test]
    fn dsubset_enumeration_order() {
        let h = enumerate_class(&HypothesisClass::d_subset(3, 1).unwrap()).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h[0].labels(), &[-1, 1, 1]);
        assert_eq!(h[2].labels(), &[1, 1, -1]);
        let h = enumerate_class(&HypothesisClass::d_subset(4, 2).unwrap()).unwrap();
        assert_eq!(h.len(), 6);
        let sets: Vec<Vec<usize>> = h.iter().map(|h| h.negative_points()).collect();
        assert_eq!(
            sets,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn dsubset_too_large() {
        // C(40, 20) = 137_846_528_820, computed by exact arithmetic.
        assert_eq!(binomial(40, 20), Some(137_846_528_820));
        let err = enumerate_class(&HypothesisClass::d_subset(40, 20).unwrap()).unwrap_err();
        assert!(matches!(err, PacError::ClassTooLarge { .. }));
    }

    #[test]
    fn dsubset_rejects_bad_d() {
        assert!(HypothesisClass::d_subset(3, 0).is_err());
        assert!(HypothesisClass::d_subset(3, 4).is_err());
    }

    #[test]
    fn vc_of_singleton_and_cube() {
        let one = HypothesisClass::explicit(vec![Hypothesis::constant(3, POS).unwrap()]).unwrap();
        assert_eq!(vc_dimension_bruteforce(&one).unwrap(), 0);
        let cube: Vec<Hypothesis> = (0..8u32)
            .map(|m| Hypothesis::new((0..3).map(|b| if m >> b & 1 == 1 { POS } else { NEG }).collect()).unwrap())
            .collect();
        let cube = HypothesisClass::explicit(cube).unwrap();
        assert_eq!(vc_dimension_bruteforce(&cube).unwrap(), 3);
    }

    /// Independent oracle: test every subset of points for shattering.
    fn vc_oracle(members: &[Hypothesis]) -> usize {
        let u = members[0].domain_size();
        let mut best = 0;
        for subset in 0u32..(1 << u) {
            let pts: Vec<usize> = (0..u).filter(|&x| subset >> x & 1 == 1).collect();
            let patterns: HashSet<Vec<i8>> = members
                .iter()
                .map(|h| pts.iter().map(|&x| h.label(x)).collect())
                .collect();
            if patterns.len() == 1 << pts.len() {
                best = best.max(pts.len());
            }
        }
        best
    }

    #[test]
    fn vc_of_dsubset_matches_oracle() {
        let class = HypothesisClass::d_subset(6, 2).unwrap();
        let members = enumerate_class(&class).unwrap();
        assert_eq!(vc_oracle(&members), 2);
        assert_eq!(vc_dimension_bruteforce(&class).unwrap(), 2);
        for u in 2..=8 {
            for d in 1..u {
                let class = HypothesisClass::d_subset(u, d).unwrap();
                let vc = vc_dimension_bruteforce(&class).unwrap();
                assert_eq!(vc, vc_oracle(&enumerate_class(&class).unwrap()), "u={u} d={d}");
                // all -1 on k points needs k <= d, all +1 needs k <= u - d
                assert_eq!(vc, d.min(u - d), "u={u} d={d}");
                if 2 * d <= u {
                    assert_eq!(vc, d);
                }
            }
        }
    }

    #[test]
    fn vc_rejects_large_domain() {
        let class = HypothesisClass::d_subset(30, 1).unwrap();
        assert!(matches!(vc_dimension_bruteforce(&class), Err(PacError::DomainTooLarge { .. })));
    }
}
