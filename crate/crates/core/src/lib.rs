//! Learned static variable ordering for BDD-based model checking.

pub mod model;
pub mod bdd;
pub mod baselines;
pub mod features;
pub mod seed;
pub mod learning;
pub mod ordering;
pub mod harness;
pub mod synth;
