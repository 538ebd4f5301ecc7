//! Exact-arithmetic toolkit for coarsening-at-random (CAR) mechanisms over
//! finite sample spaces.
//!
//! A coarsening mechanism replaces an outcome `x` of a finite set `E` by an
//! observed subset `A ∋ x`. It is CAR when the probability of reporting `A`
//! does not depend on which `x ∈ A` occurred. The CAR mechanisms over `E` form
//! a polytope whose vertices are characterized by 0/1 incidence systems; this
//! crate decides CAR, enumerates and tests vertices, converts between rational
//! mechanisms and uniform multicovers, decomposes mechanisms into mixtures of
//! vertices, simulates the multicover sampling procedure, and builds the
//! Fibonacci-height family of extreme mechanisms.
//!
//! All probabilities are exact [`Rational`]s. Floating point only appears in
//! [`decompose::approximate_rational`] (input) and in the sampler statistics.

pub mod cli;
pub mod decompose;
pub mod error;
pub mod extremes;
pub mod fibonacci;
pub mod json;
pub mod linalg;
pub mod model;
pub mod multicover;
pub mod rational;
pub mod sampler;
pub mod subset;

pub use error::{Error, Result};
pub use model::{CarMechanism, CoarseningMechanism, Mixture};
pub use multicover::UniformMulticover;
pub use rational::Rational;
pub use subset::{SampleSpace, Subset};
