//! Finite-class agnostic PAC learning: exact measures over discrete
//! distributions, ERM, the disagreeing-experts learner and the
//! lower-bound adversary, plus a seeded experiment runner.

pub mod adversary;
pub mod erm;
pub mod error;
pub mod experiments;
pub mod experts;
pub mod measures;
pub mod model;

pub use erm::{erm, PairSearch, TheoryConstants};
pub use error::{PacError, Result};
pub use experts::{core_train, train, CompositeClassifier, FinalClassifier, LearnerParams};
pub use model::{Dataset, DiscreteDistribution, Hypothesis, HypothesisClass, RngStream, NEG, POS};
