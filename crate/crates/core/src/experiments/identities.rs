//! Randomized exact-identity checks on small instances.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{PacError, Result};
use crate::experts::{CompositeClassifier, IDENTITY_TOLERANCE};
use crate::measures::{
    condition_on_agreement, condition_on_disagreement, determinize, positive_mass, positive_rate, split_class,
    true_disagreement, true_error, ExpertPairList,
};
use crate::model::{sample_dataset_with, DiscreteDistribution, Hypothesis, RngStream, NEG, POS};

/// Names of the checks, in row order.
pub const CHECKS: [&str; 5] = [
    "decomposition",
    "total_probability",
    "average_bound",
    "split_sample_identity",
    "routing",
];

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityRow {
    pub instance: u64,
    pub check: &'static str,
    pub residual: f64,
    pub passed: bool,
}

/// A random small instance: class members, distribution and expert pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallInstance {
    pub members: Vec<Hypothesis>,
    pub dist: DiscreteDistribution,
    pub pairs: Vec<(usize, usize)>,
}

fn random_hypothesis<R: Rng>(u: usize, rng: &mut R) -> Hypothesis {
    Hypothesis::new((0..u).map(|_| if rng.random_bool(0.5) { POS } else { NEG }).collect()).expect("labels are +-1")
}

/// Instance `id` of stream `seed`: 2..=8 points, 2..=8 members, some
/// zero-mass cells, one to three pairs.
pub fn random_instance(seed: u64, id: u64) -> SmallInstance {
    let mut rng = RngStream::new(seed, id).rng();
    let u = rng.random_range(2..=8);
    let k = rng.random_range(2..=8);
    let members: Vec<Hypothesis> = (0..k).map(|_| random_hypothesis(u, &mut rng)).collect();
    let mut mass: Vec<f64> = (0..2 * u)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
        .collect();
    if mass.iter().all(|&m| m == 0.0) {
        mass[0] = 1.0;
    }
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    let dist = DiscreteDistribution::new(mass).expect("normalized");
    let r = rng.random_range(1..=3);
    let pairs = (0..r).map(|_| (rng.random_range(0..k), rng.random_range(0..k))).collect();
    SmallInstance { members, dist, pairs }
}

fn pair_list(inst: &SmallInstance) -> ExpertPairList {
    ExpertPairList::new(
        inst.pairs
            .iter()
            .map(|&(a, b)| (inst.members[a].clone(), inst.members[b].clone()))
            .collect(),
    )
    .expect("same domain")
}

fn decomposition(inst: &SmallInstance) -> Result<f64> {
    let (a, b) = inst.pairs[0];
    let (h1, h2) = (&inst.members[a], &inst.members[b]);
    let single = ExpertPairList::new(vec![(h1.clone(), h2.clone())])?;
    let lhs = true_error(h1, &inst.dist)? + true_error(h2, &inst.dist)?;
    let rhs = match condition_on_agreement(&inst.dist, &single) {
        Ok(agree) => {
            agree.region_mass * (true_error(h1, &agree.conditional)? + true_error(h2, &agree.conditional)?)
                + (1.0 - agree.region_mass)
        }
        Err(PacError::EmptyRegion) => 1.0,
        Err(e) => return Err(e),
    };
    let disagree = true_disagreement(h1, h2, &inst.dist)?;
    let rhs2 = lhs - rhs;
    // Pr[disagree] computed directly must match 1 - agreement mass.
    let agree_mass: f64 = (0..inst.dist.domain_size())
        .filter(|&x| h1.label(x) == h2.label(x))
        .map(|x| inst.dist.point_mass(x))
        .sum();
    Ok(rhs2.abs().max((disagree - (1.0 - agree_mass)).abs()))
}

fn total_probability(inst: &SmallInstance) -> Result<f64> {
    let pairs = pair_list(inst);
    let mut worst: f64 = 0.0;
    for h in &inst.members {
        let er = true_error(h, &inst.dist)?;
        let mut recon = 0.0;
        for part in [condition_on_disagreement(&inst.dist, &pairs), condition_on_agreement(&inst.dist, &pairs)] {
            match part {
                Ok(c) => recon += c.region_mass * true_error(h, &c.conditional)?,
                Err(PacError::EmptyRegion) => {}
                Err(e) => return Err(e),
            }
        }
        worst = worst.max((er - recon).abs());
    }
    Ok(worst)
}

fn average_bound(inst: &SmallInstance) -> Result<f64> {
    let (a, b) = inst.pairs[0];
    let (h1, h2) = (&inst.members[a], &inst.members[b]);
    let single = ExpertPairList::new(vec![(h1.clone(), h2.clone())])?;
    let agree = match condition_on_agreement(&inst.dist, &single) {
        Ok(c) => c.conditional,
        Err(PacError::EmptyRegion) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let e1 = true_error(h1, &agree)?;
    let e2 = true_error(h2, &agree)?;
    let mut best = f64::INFINITY;
    for h in &inst.members {
        best = best.min(true_error(h, &agree)?);
    }
    Ok((e1 - e2).abs().max(best - 0.5 * (e1 + e2)).max(0.0))
}

fn split_sample_identity(inst: &SmallInstance, seed: u64, id: u64) -> Result<f64> {
    let det = determinize(&inst.dist, &inst.members)?;
    let mut rng = RngStream::new(seed, id).with_stream(id | (1 << 63)).rng();
    let n = rng.random_range(1..=30);
    let sample = sample_dataset_with(&det.dist, n, &mut rng)?;
    let h0 = &det.members[0];
    let split = split_class(&det.members, h0, &det.concept)?;
    let er_s0 = crate::measures::empirical_error(h0, &sample)?;
    let er_d0 = true_error(h0, &det.dist)?;
    let mut worst: f64 = 0.0;
    for (k, h) in det.members.iter().enumerate() {
        let er_s = crate::measures::empirical_error(h, &sample)?;
        let er_d = true_error(h, &det.dist)?;
        let ps_neq = positive_rate(&split.neq[k], &sample)?;
        let ps_eq = positive_rate(&split.eq[k], &sample)?;
        let pd_neq = positive_mass(&split.neq[k], &det.dist)?;
        let pd_eq = positive_mass(&split.eq[k], &det.dist)?;
        let sample_gap = (er_s - er_s0) - (ps_neq - ps_eq);
        let full_gap = (er_s - er_d) - ((er_s0 - er_d0) + (ps_neq - pd_neq) - (ps_eq - pd_eq));
        worst = worst.max(sample_gap.abs()).max(full_gap.abs());
    }
    Ok(worst)
}

fn routing(inst: &SmallInstance) -> Result<f64> {
    let k = inst.members.len();
    let (eq, neq) = (inst.pairs[0].0, inst.pairs[inst.pairs.len() - 1].1 % k);
    let clf = CompositeClassifier::from_indices(&inst.members, inst.pairs.clone(), eq, neq)?;
    let u = inst.dist.domain_size();
    let mut mismatches = 0usize;
    let (mut mass_eq, mut mass_neq) = (0.0, 0.0);
    for x in 0..u {
        let agree = inst
            .pairs
            .iter()
            .all(|&(a, b)| inst.members[a].label(x) == inst.members[b].label(x));
        let want = if agree { inst.members[eq].label(x) } else { inst.members[neq].label(x) };
        if clf.predict(x)? != want {
            mismatches += 1;
        }
        if agree {
            mass_eq += inst.dist.point_mass(x);
        } else {
            mass_neq += inst.dist.point_mass(x);
        }
    }
    Ok(mismatches as f64 + (mass_eq + mass_neq - 1.0).abs())
}

/// Runs all checks on `instances` random instances.
pub fn run_identity_suite(instances: usize, seed: u64) -> Result<Vec<IdentityRow>> {
    let per = (0..instances as u64)
        .into_par_iter()
        .map(|id| {
            let inst = random_instance(seed, id);
            let residuals = [
                decomposition(&inst)?,
                total_probability(&inst)?,
                average_bound(&inst)?,
                split_sample_identity(&inst, seed, id)?,
                routing(&inst)?,
            ];
            Ok(CHECKS
                .iter()
                .zip(residuals)
                .map(|(&check, residual)| IdentityRow {
                    instance: id,
                    check,
                    residual,
                    passed: residual <= IDENTITY_TOLERANCE,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per.into_iter().flatten().collect())
}
