//! Prime lattices, Gram-Schmidt, LLL and Babai's nearest plane algorithm.

mod babai;
mod gso;
mod lll;
pub mod logs;
mod prime;

pub use babai::{
    babai_integer_target, babai_nearest_plane, neighborhood_coefficients, neighborhood_point,
    BabaiResult,
};
pub use gso::{gram_schmidt, Gso, Orthogonalization};
pub use lll::{lll_reduce, lll_reduce_vectors, ReducedBasis, DEFAULT_DELTA};
pub use prime::{uv_from_coefficients, PrimeLattice, DEFAULT_PRECISION};

use num_bigint::BigInt;

use crate::{seed, Result, Scalar};

/// Everything derived from one prime lattice up to Babai's approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvpInstance<T> {
    pub lattice: PrimeLattice,
    pub reduced: ReducedBasis<T>,
    pub babai: BabaiResult<T>,
}

impl<T: Scalar> CvpInstance<T> {
    /// Fresh random lattice for `n`; `f` is drawn from a stream seeded by
    /// `seed`.
    pub fn build(n: &BigInt, m: usize, c: u32, seed: u64) -> Result<Self> {
        let lattice = PrimeLattice::build(n, m, c, &mut seed::rng(seed))?;
        Self::from_lattice(lattice, DEFAULT_DELTA)
    }

    pub fn from_lattice(lattice: PrimeLattice, delta: f64) -> Result<Self> {
        let reduced = lll_reduce::<T>(&lattice, delta)?;
        let babai = babai_integer_target(&reduced, &lattice.target)?;
        Ok(Self {
            lattice,
            reduced,
            babai,
        })
    }

    pub fn dim(&self) -> usize {
        self.lattice.m
    }

    pub fn neighborhood_point(&self, z: &[bool]) -> Result<Vec<BigInt>> {
        neighborhood_point(&self.babai, &self.reduced, z)
    }

    /// Coefficients of the neighborhood point for `z` in the prime-lattice
    /// basis, recovered from the point itself.
    pub fn prime_coefficients(&self, z: &[bool]) -> Result<Vec<BigInt>> {
        let point = self.neighborhood_point(z)?;
        self.lattice.coefficients_of(&point)
    }

    /// `|x - t|^2` for an integer point `x`.
    pub fn distance_sq(&self, point: &[BigInt]) -> BigInt {
        point
            .iter()
            .zip(&self.lattice.target)
            .map(|(x, t)| (x - t) * (x - t))
            .sum()
    }
}
