//! Error, disagreement and conditioning computations, plus the
//! determinization / `h_=`, `h_≠` class splitting used for the
//! near-identical-hypotheses decomposition.
//!
//! Conditioning acts on the point marginal: expert pairs only look at `x`,
//! so both label masses at a point are kept or dropped together.

use crate::error::{invalid, PacError, Result};
use crate::model::{Dataset, DiscreteDistribution, Hypothesis, NEG, POS};

fn check_domain(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(invalid(format!(
            "{what} has domain size {got}, expected {expected}"
        )));
    }
    Ok(())
}

/// `er_S(h)`: fraction of samples mislabeled by `h`.
pub fn empirical_error(h: &Hypothesis, data: &Dataset) -> Result<f64> {
    check_domain(data.domain_size(), h.domain_size(), "hypothesis")?;
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    let wrong = data.iter().filter(|s| h.label(s.point) != s.label).count();
    Ok(wrong as f64 / data.len() as f64)
}

/// `er_D(h)`: exact mass of mislabeled (point, label) pairs.
pub fn true_error(h: &Hypothesis, dist: &DiscreteDistribution) -> Result<f64> {
    check_domain(dist.domain_size(), h.domain_size(), "hypothesis")?;
    Ok(true_error_unchecked(h, dist))
}

#[inline]
pub(crate) fn true_error_unchecked(h: &Hypothesis, dist: &DiscreteDistribution) -> f64 {
    h.labels()
        .iter()
        .enumerate()
        .map(|(x, &l)| dist.mass(x, -l))
        .sum()
}

/// Fraction of sample points where `h1` and `h2` differ.
pub fn empirical_disagreement(h1: &Hypothesis, h2: &Hypothesis, data: &Dataset) -> Result<f64> {
    check_domain(data.domain_size(), h1.domain_size(), "first hypothesis")?;
    check_domain(data.domain_size(), h2.domain_size(), "second hypothesis")?;
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    let differ = data
        .iter()
        .filter(|s| h1.label(s.point) != h2.label(s.point))
        .count();
    Ok(differ as f64 / data.len() as f64)
}

/// `Pr_D[h1(x) != h2(x)]`.
pub fn true_disagreement(h1: &Hypothesis, h2: &Hypothesis, dist: &DiscreteDistribution) -> Result<f64> {
    check_domain(dist.domain_size(), h1.domain_size(), "first hypothesis")?;
    check_domain(dist.domain_size(), h2.domain_size(), "second hypothesis")?;
    Ok((0..dist.domain_size())
        .filter(|&x| h1.label(x) != h2.label(x))
        .map(|x| dist.point_mass(x))
        .sum())
}

/// `Pr_S[h(x) = +1]`.
pub fn positive_rate(h: &Hypothesis, data: &Dataset) -> Result<f64> {
    check_domain(data.domain_size(), h.domain_size(), "hypothesis")?;
    if data.is_empty() {
        return Err(PacError::EmptySample);
    }
    let pos = data.iter().filter(|s| h.label(s.point) == POS).count();
    Ok(pos as f64 / data.len() as f64)
}

/// `Pr_D[h(x) = +1]`.
pub fn positive_mass(h: &Hypothesis, dist: &DiscreteDistribution) -> Result<f64> {
    check_domain(dist.domain_size(), h.domain_size(), "hypothesis")?;
    Ok((0..dist.domain_size())
        .filter(|&x| h.label(x) == POS)
        .map(|x| dist.point_mass(x))
        .sum())
}

/// Ordered list of expert pairs `(h^i_1, h^i_2)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpertPairList {
    pairs: Vec<(Hypothesis, Hypothesis)>,
}

impl ExpertPairList {
    pub fn new(pairs: Vec<(Hypothesis, Hypothesis)>) -> Result<Self> {
        if let Some((a, _)) = pairs.first() {
            let u = a.domain_size();
            for (i, (h1, h2)) in pairs.iter().enumerate() {
                if h1.domain_size() != u || h2.domain_size() != u {
                    return Err(invalid(format!("pair {i} does not share domain size {u}")));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Hypothesis, Hypothesis)] {
        &self.pairs
    }

    /// First `k` pairs.
    pub fn prefix(&self, k: usize) -> ExpertPairList {
        ExpertPairList {
            pairs: self.pairs[..k].to_vec(),
        }
    }

    pub fn push(&mut self, h1: Hypothesis, h2: Hypothesis) {
        self.pairs.push((h1, h2));
    }

    /// True iff every pair agrees at `x`.
    #[inline]
    pub fn all_agree(&self, x: usize) -> bool {
        self.pairs.iter().all(|(a, b)| a.label(x) == b.label(x))
    }

    fn domain_size(&self) -> Option<usize> {
        self.pairs.first().map(|(a, _)| a.domain_size())
    }
}

/// A renormalized restriction of a distribution to a region of points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningResult {
    pub conditional: DiscreteDistribution,
    pub region_mass: f64,
}

/// Restricts `dist` to the points where `keep` holds and renormalizes.
pub fn condition_on_points(
    dist: &DiscreteDistribution,
    keep: impl Fn(usize) -> bool,
) -> Result<ConditioningResult> {
    let u = dist.domain_size();
    let region_mass: f64 = (0..u).filter(|&x| keep(x)).map(|x| dist.point_mass(x)).sum();
    if region_mass <= 0.0 {
        return Err(PacError::EmptyRegion);
    }
    let mut mass = vec![0.0; 2 * u];
    for x in (0..u).filter(|&x| keep(x)) {
        mass[2 * x] = dist.mass(x, NEG) / region_mass;
        mass[2 * x + 1] = dist.mass(x, POS) / region_mass;
    }
    Ok(ConditioningResult {
        conditional: DiscreteDistribution::trusted(mass),
        region_mass,
    })
}

fn check_pairs(dist: &DiscreteDistribution, pairs: &ExpertPairList) -> Result<()> {
    if let Some(u) = pairs.domain_size() {
        check_domain(dist.domain_size(), u, "expert pair list")?;
    }
    Ok(())
}

/// `D` conditioned on every pair agreeing; `region_mass = 1 - p`.
pub fn condition_on_agreement(dist: &DiscreteDistribution, pairs: &ExpertPairList) -> Result<ConditioningResult> {
    check_pairs(dist, pairs)?;
    condition_on_points(dist, |x| pairs.all_agree(x))
}

/// `D` conditioned on some pair disagreeing; `region_mass = p`.
pub fn condition_on_disagreement(dist: &DiscreteDistribution, pairs: &ExpertPairList) -> Result<ConditioningResult> {
    check_pairs(dist, pairs)?;
    condition_on_points(dist, |x| !pairs.all_agree(x))
}

/// Output of [`determinize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Determinized {
    pub dist: DiscreteDistribution,
    pub members: Vec<Hypothesis>,
    pub concept: Hypothesis,
}

/// Splits each point `x_i` into `x_{-1}` (index `2i`) and `x_{+1}` (index
/// `2i + 1`), moving the mass of `(x_i, y)` onto `(x_y, y)`. Hypotheses
/// label both copies like the original point, so every true error and the
/// VC dimension are unchanged while labels become a function of the point.
pub fn determinize(dist: &DiscreteDistribution, members: &[Hypothesis]) -> Result<Determinized> {
    let u = dist.domain_size();
    for h in members {
        check_domain(u, h.domain_size(), "class member")?;
    }
    let mut mass = vec![0.0; 4 * u];
    for x in 0..u {
        mass[2 * (2 * x)] = dist.mass(x, NEG);
        mass[2 * (2 * x + 1) + 1] = dist.mass(x, POS);
    }
    let members = members
        .iter()
        .map(|h| {
            let labels = h.labels().iter().flat_map(|&l| [l, l]).collect();
            Hypothesis::new(labels)
        })
        .collect::<Result<Vec<_>>>()?;
    let concept = Hypothesis::new((0..u).flat_map(|_| [NEG, POS]).collect())?;
    Ok(Determinized {
        dist: DiscreteDistribution::trusted(mass),
        members,
        concept,
    })
}

/// Member-wise `h_=` and `h_≠`, parallel to the input list.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitClass {
    pub eq: Vec<Hypothesis>,
    pub neq: Vec<Hypothesis>,
}

/// `h_=(x) = +1` iff `h(x) != h0(x)` and `h(x) = c(x)`;
/// `h_≠(x) = +1` iff `h(x) != h0(x)` and `h(x) != c(x)`.
///
/// Members may collide (e.g. every `h` equal to `h0` maps to all `-1`), so
/// the result is a parallel list rather than a deduplicated class.
pub fn split_class(members: &[Hypothesis], h0: &Hypothesis, concept: &Hypothesis) -> Result<SplitClass> {
    let u = h0.domain_size();
    check_domain(u, concept.domain_size(), "concept")?;
    let mut eq = Vec::with_capacity(members.len());
    let mut neq = Vec::with_capacity(members.len());
    for h in members {
        check_domain(u, h.domain_size(), "class member")?;
        let mut e = vec![NEG; u];
        let mut n = vec![NEG; u];
        for x in 0..u {
            if h.label(x) != h0.label(x) {
                if h.label(x) == concept.label(x) {
                    e[x] = POS;
                } else {
                    n[x] = POS;
                }
            }
        }
        eq.push(Hypothesis::new(e)?);
        neq.push(Hypothesis::new(n)?);
    }
    Ok(SplitClass { eq, neq })
}
