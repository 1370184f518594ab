//! Training-order sampling, t-test tagging, ID3 induction and the classifier
//! file format.

mod id3;
mod sample;
mod tagging;
mod train;
mod tree_io;
mod ttest;

use std::fmt;

use thiserror::Error;

pub use id3::{id3_train, DecisionTree, LabeledVector, TreeKind, TreeNode};
pub use sample::{generate_and_evaluate, OrderSample};
pub use tagging::{preferred_first, tag_pairs, tag_triplets, triplet_universe, TaggedPairExample, TaggedTripletExample};
pub use train::{train, train_from_sample, TrainedClassifiers};
pub use tree_io::{deserialize_tree, serialize_tree, TreeFormatError};
pub use ttest::{critical_value, t_test, TTestResult};

use crate::bdd::DEFAULT_NODE_CAP;

/// Ternary precedence class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    /// The first-named variable should come first.
    Plus,
    /// The reverse.
    Minus,
    /// No significant preference.
    Unknown,
}

impl Class {
    pub fn mirror(self) -> Class {
        match self {
            Class::Plus => Class::Minus,
            Class::Minus => Class::Plus,
            Class::Unknown => Class::Unknown,
        }
    }

    pub fn token(self) -> char {
        match self {
            Class::Plus => '+',
            Class::Minus => '-',
            Class::Unknown => '?',
        }
    }

    pub fn from_token(s: &str) -> Option<Class> {
        match s {
            "+" => Some(Class::Plus),
            "-" => Some(Class::Minus),
            "?" => Some(Class::Unknown),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Class::Plus => 0,
            Class::Minus => 1,
            Class::Unknown => 2,
        }
    }

    pub(crate) const ALL: [Class; 3] = [Class::Plus, Class::Minus, Class::Unknown];
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.token())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub orders: usize,
    pub confidence: f64,
    pub min_samples: usize,
    pub seed: u64,
    pub triplet_cap: usize,
    pub node_cap: usize,
    /// Fresh random orders tried per sample slot before giving up.
    pub retry_cap: usize,
    pub max_depth: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            orders: 200,
            confidence: 0.95,
            min_samples: 5,
            seed: 1,
            triplet_cap: 200_000,
            node_cap: DEFAULT_NODE_CAP,
            retry_cap: 16,
            max_depth: 25,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.confidence > 0.5 && self.confidence < 1.0) {
            return Err(LearnError::Confidence(self.confidence));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("t-test needs at least two values per side (got {0} and {1})")]
    SampleTooSmall(usize, usize),
    #[error("confidence must lie in (0.5, 1), got {0}")]
    Confidence(f64),
    #[error("sample slot {0} failed to evaluate within the retry cap")]
    RetryExhausted(usize),
    #[error("cannot train on an empty example set")]
    NoExamples,
    #[error("feature vector has {got} components, tree expects {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Feature(#[from] crate::features::FeatureError),
}
