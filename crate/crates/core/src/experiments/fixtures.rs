//! Named, deterministic (class, distribution) pairs.

use crate::adversary::{build_distribution, AdversaryInstance};
use crate::error::{invalid, PacError, Result};
use crate::measures::true_error_unchecked;
use crate::model::{
    vc_dimension_bruteforce, DiscreteDistribution, Hypothesis, HypothesisClass, DEFAULT_ENUMERATION_CAP,
    MAX_SHATTER_DOMAIN, NEG, POS,
};

/// Name, argument list and description of every fixture.
pub const FIXTURES: &[(&str, &str, &str)] = &[
    (
        "two_experts",
        "(tau = 0.5)",
        "class {h, -h} on 4 uniform points; labels follow h with probability 1 - tau",
    ),
    (
        "realizable_uniform",
        "",
        "9 thresholds on 8 uniform points; concept is the threshold at 3, tau = 0",
    ),
    (
        "noisy_thresholds",
        "(u = 8, tau = 0.1)",
        "u + 1 thresholds on u uniform points; labels of the threshold at u/2 flip with probability tau",
    ),
    (
        "dsubset_adversary",
        "(u = 16, d = 1, alpha = 0.2)",
        "d-subset class on u points under the skewed all-positive distribution, truth on points 0..d",
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    /// Canonical name including arguments, e.g. `two_experts(0.1)`.
    pub name: String,
    pub class: HypothesisClass,
    pub members: Vec<Hypothesis>,
    pub dist: DiscreteDistribution,
    /// Minimum true error over the class.
    pub tau: f64,
    pub vc: usize,
}

/// A fixture name split into base and numeric arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureName {
    pub base: String,
    pub args: Vec<f64>,
}

impl FixtureName {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (base, args) = match text.find('(') {
            None => (text, Vec::new()),
            Some(open) => {
                let inner = text[open + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| invalid(format!("unbalanced parentheses in fixture `{text}`")))?;
                let args = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|_| invalid(format!("bad fixture argument `{s}` in `{text}`"))))
                    .collect::<Result<Vec<_>>>()?;
                (text[..open].trim(), args)
            }
        };
        if !FIXTURES.iter().any(|(n, _, _)| *n == base) {
            return Err(unknown(base));
        }
        Ok(Self {
            base: base.to_string(),
            args,
        })
    }
}

fn unknown(name: &str) -> PacError {
    PacError::UnknownFixture {
        name: name.to_string(),
        available: FIXTURES.iter().map(|(n, _, _)| *n).collect::<Vec<_>>().join(", "),
    }
}

fn arg(args: &[f64], k: usize, default: f64) -> f64 {
    args.get(k).copied().unwrap_or(default)
}

fn int_arg(args: &[f64], k: usize, default: usize, what: &str) -> Result<usize> {
    let v = arg(args, k, default as f64);
    if v < 0.0 || v.fract() != 0.0 {
        return Err(invalid(format!("{what} must be a nonnegative integer, got {v}")));
    }
    Ok(v as usize)
}

fn arity(name: &FixtureName, max: usize) -> Result<()> {
    if name.args.len() > max {
        return Err(invalid(format!("fixture {} takes at most {max} arguments", name.base)));
    }
    Ok(())
}

/// `-1` below `k`, `+1` from `k` on.
fn threshold(u: usize, k: usize) -> Hypothesis {
    Hypothesis::new((0..u).map(|x| if x < k { NEG } else { POS }).collect()).expect("labels are +-1")
}

fn finish(name: String, class: HypothesisClass, dist: DiscreteDistribution) -> Result<Fixture> {
    let members = class.enumerate(DEFAULT_ENUMERATION_CAP)?;
    let tau = members
        .iter()
        .map(|h| true_error_unchecked(h, &dist))
        .fold(f64::INFINITY, f64::min);
    let vc = if class.domain_size() <= MAX_SHATTER_DOMAIN {
        vc_dimension_bruteforce(&class)?
    } else {
        class
            .declared_vc()
            .ok_or_else(|| invalid(format!("fixture {name} needs a declared VC dimension")))?
    };
    Ok(Fixture {
        name,
        class,
        members,
        dist,
        tau,
        vc,
    })
}

fn fmt_args(base: &str, args: &[String]) -> String {
    format!("{base}({})", args.join(","))
}

/// Builds a fixture from a name such as `two_experts`, `two_experts(0.1)`
/// or `dsubset_adversary(40,1,0.2)`.
pub fn make_fixture(name: &str) -> Result<Fixture> {
    let parsed = FixtureName::parse(name)?;
    let a = &parsed.args;
    match parsed.base.as_str() {
        "two_experts" => {
            arity(&parsed, 1)?;
            let tau = arg(a, 0, 0.5);
            if !(0.0..=0.5).contains(&tau) {
                return Err(invalid(format!("two_experts needs tau in [0, 0.5], got {tau}")));
            }
            let h = Hypothesis::new(vec![POS, NEG, POS, NEG])?;
            let class = HypothesisClass::explicit(vec![h.clone(), h.negated()])?;
            let prob_pos: Vec<f64> = h.labels().iter().map(|&l| if l == POS { 1.0 - tau } else { tau }).collect();
            let dist = DiscreteDistribution::from_marginal(&[0.25; 4], &prob_pos)?;
            finish(fmt_args("two_experts", &[tau.to_string()]), class, dist)
        }
        "realizable_uniform" => {
            arity(&parsed, 0)?;
            let u = 8;
            let class = HypothesisClass::explicit((0..=u).map(|k| threshold(u, k)).collect())?;
            let dist = DiscreteDistribution::deterministic_from(&[1.0 / u as f64; 8], &threshold(u, 3))?;
            finish("realizable_uniform".into(), class, dist)
        }
        "noisy_thresholds" => {
            arity(&parsed, 2)?;
            let u = int_arg(a, 0, 8, "u")?;
            let tau = arg(a, 1, 0.1);
            if u < 2 || !(0.0..0.5).contains(&tau) {
                return Err(invalid(format!("noisy_thresholds needs u >= 2 and tau in [0, 0.5), got u={u}, tau={tau}")));
            }
            let class = HypothesisClass::explicit((0..=u).map(|k| threshold(u, k)).collect())?;
            let target = threshold(u, u / 2);
            let prob_pos: Vec<f64> = target.labels().iter().map(|&l| if l == POS { 1.0 - tau } else { tau }).collect();
            let dist = DiscreteDistribution::from_marginal(&vec![1.0 / u as f64; u], &prob_pos)?;
            finish(fmt_args("noisy_thresholds", &[u.to_string(), tau.to_string()]), class, dist)
        }
        "dsubset_adversary" => {
            arity(&parsed, 3)?;
            let u = int_arg(a, 0, 16, "u")?;
            let d = int_arg(a, 1, 1, "d")?;
            let alpha = arg(a, 2, 0.2);
            let inst = AdversaryInstance::new(u, d, alpha, &(0..d).collect::<Vec<_>>())?;
            let class = HypothesisClass::d_subset(u, d)?;
            finish(
                fmt_args("dsubset_adversary", &[u.to_string(), d.to_string(), alpha.to_string()]),
                class,
                build_distribution(&inst),
            )
        }
        other => Err(unknown(other)),
    }
}

/// Re-parameterizes a fixture so that its optimal error is (close to)
/// `tau`. For `dsubset_adversary` the domain becomes
/// `u = round((1 - alpha) d / tau)`, so the realized error is within one
/// rounding step of the target.
pub fn make_fixture_at_tau(name: &str, tau: f64) -> Result<Fixture> {
    let parsed = FixtureName::parse(name)?;
    let a = &parsed.args;
    match parsed.base.as_str() {
        "two_experts" => make_fixture(&format!("two_experts({tau})")),
        "noisy_thresholds" => {
            let u = int_arg(a, 0, 8, "u")?;
            make_fixture(&format!("noisy_thresholds({u},{tau})"))
        }
        "dsubset_adversary" => {
            let d = int_arg(a, 1, 1, "d")?;
            let alpha = arg(a, 2, 0.2);
            if !(tau > 0.0 && tau < 1.0) {
                return Err(invalid(format!("tau must lie in (0,1), got {tau}")));
            }
            let u = ((1.0 - alpha) * d as f64 / tau).round() as usize;
            make_fixture(&format!("dsubset_adversary({u},{d},{alpha})"))
        }
        "realizable_uniform" if tau == 0.0 => make_fixture("realizable_uniform"),
        base => Err(invalid(format!("fixture {base} has no tau parameter"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_tau_and_vc() {
        let f = make_fixture("two_experts").unwrap();
        assert!((f.tau - 0.5).abs() < 1e-15);
        assert_eq!(f.vc, 1);
        assert_eq!(f.members.len(), 2);
        let f = make_fixture("two_experts(0.05)").unwrap();
        assert!((f.tau - 0.05).abs() < 1e-15);
        let f = make_fixture("realizable_uniform").unwrap();
        assert_eq!(f.tau, 0.0);
        assert_eq!(f.vc, 1);
        assert!(f.dist.is_deterministic());
        let f = make_fixture("noisy_thresholds(10,0.2)").unwrap();
        assert!((f.tau - 0.2).abs() < 1e-12);
        assert_eq!(f.members.len(), 11);
        let f = make_fixture("dsubset_adversary(8,2,0.3)").unwrap();
        assert!((f.tau - 0.7 * 2.0 / 8.0).abs() < 1e-15);
        assert_eq!(f.vc, 2);
        let big = make_fixture("dsubset_adversary(40,1,0.2)").unwrap();
        assert_eq!(big.vc, 1);
    }

    #[test]
    fn at_tau() {
        let f = make_fixture_at_tau("dsubset_adversary", 0.02).unwrap();
        assert_eq!(f.class.domain_size(), 40);
        assert!((f.tau - 0.02).abs() < 1e-15);
        let f = make_fixture_at_tau("two_experts", 0.1).unwrap();
        assert!((f.tau - 0.1).abs() < 1e-15);
        assert!(make_fixture_at_tau("realizable_uniform", 0.1).is_err());
    }

    #[test]
    fn unknown_lists_names() {
        match make_fixture("nope") {
            Err(PacError::UnknownFixture { available, .. }) => assert!(available.contains("two_experts")),
            other => panic!("{other:?}"),
        }
        assert!(make_fixture("two_experts(0.1").is_err());
        assert!(make_fixture("two_experts(0.7)").is_err());
        assert!(make_fixture("realizable_uniform(3)").is_err());
    }

    #[test]
    fn deterministic() {
        for (name, _, _) in FIXTURES {
            assert_eq!(make_fixture(name).unwrap(), make_fixture(name).unwrap());
        }
    }
}
