//! Exact integer and rational linear algebra over `num` big numbers.

mod arith;
mod compound;
mod matrix;
mod pluecker;

use thiserror::Error;

pub use arith::{
    binomial, combinations, factorial, floor_power, floor_rational, gcd_all, is_prime, log2_bigint, log2_rational,
    next_prime, padic_valuation, rational_to_f64, sqrt_lower, sqrt_upper,
};
pub use compound::{block_determinant, compound_matrix};
pub use matrix::{bareiss_determinant, dot, norm_squared, primitive_integer_vector, rat, ExactMatrix};
pub use pluecker::{
    generalized_determinant_squared, is_primitive_basis, pluecker_coordinates, pluecker_decode, raw_minors,
    PlueckerVector, RationalSubspace,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("basis has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("Pluecker vector is not decomposable")]
    NotDecomposable,
    #[error("blocks A1 and A2 do not commute")]
    CommutationViolated,
    #[error("zero input")]
    ZeroInput,
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("matrix has a non-integer entry")]
    NotIntegral,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}
