//! Perfect Bayesian equilibria in two-player extensive-form games.
//!
//! Modules:
//! - [`efg`]: game representation, JSON interchange, reach/utility calculus.
//! - [`plausibility`]: plausibility orders over nodes.
//! - [`verify`]: checks for sequential rationality, Bayes' rule and AGM-consistency.
//! - [`solvers`]: CFR and PBE-CFR.
//! - [`games`]: benchmark generators and small fixture games.
//! - [`psro`]: a compact policy-space response oracle loop.

pub mod efg;
pub mod games;
pub mod plausibility;
pub mod psro;
pub mod solvers;
pub mod verify;
