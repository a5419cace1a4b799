//! Lattice-based integer factoring with a simulated probabilistic-bit
//! (p-bit) engine for refining closest-vector approximations.
//!
//! The pipeline for one CVP instance is:
//!
//! 1. build a prime lattice for the semiprime `N` ([`lattice::PrimeLattice`]),
//! 2. LLL-reduce it and run Babai's nearest plane algorithm, recording the
//!    rounding direction of every Gram-Schmidt coefficient,
//! 3. map the reduced neighborhood of Babai's point onto a fully connected
//!    p-bit network whose energy is the squared distance to the target
//!    ([`pbit`]),
//! 4. turn sampled states into `(u, v)` pairs and keep the smooth relation
//!    pairs ([`sieve`]),
//! 5. combine enough relations into a congruence of squares over GF(2)
//!    ([`algebra`]).
//!
//! [`oracle`] enumerates the same neighborhood exhaustively and is the ground
//! truth for the engine; [`experiments`] runs the measurement campaigns.
//!
//! The lattice routines are generic over a [`Scalar`] used for Gram-Schmidt
//! arithmetic. The pipeline uses exact rationals; `f64` is available for
//! quick experiments and for cross-checking.

pub mod algebra;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod numtheory;
pub mod oracle;
pub mod pbit;
pub mod scalar;
pub mod seed;
pub mod serde_util;
pub mod sieve;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used by default for Gram-Schmidt data.
pub type Rational = num_rational::BigRational;

pub type ExactGso = lattice::Gso<Rational>;
pub type FloatGso = lattice::Gso<f64>;
pub type ExactReducedBasis = lattice::ReducedBasis<Rational>;
pub type FloatReducedBasis = lattice::ReducedBasis<f64>;
pub type ExactBabai = lattice::BabaiResult<Rational>;
pub type FloatBabai = lattice::BabaiResult<f64>;
pub type ExactInstance = lattice::CvpInstance<Rational>;
pub type FloatInstance = lattice::CvpInstance<f64>;
