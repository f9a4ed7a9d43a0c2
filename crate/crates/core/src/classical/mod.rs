//! Classical quadratic sieve: factor base, relation collection, GF(2)
//! linear algebra and the congruence of squares.

pub mod congruence;
pub mod factor_base;
pub mod linalg;
pub mod params;
pub mod pipeline;
pub mod relations;

use thiserror::Error;

use crate::numtheory::Natural;

pub use congruence::{
    assemble_congruence, extract_factors, factor_from_relations, FactorResult, SieveStats,
};
pub use factor_base::{build_factor_base, FactorBase};
pub use linalg::{build_gf2_matrix, gf2_nullspace, BitRow, Gf2Matrix, Selection};
pub use params::{default_params, Execution, SieveParams};
pub use pipeline::{
    factor, factor_with, resolve_params, short_circuit, with_escalation, AttemptError,
    AttemptFailure, FactorError,
};
pub use relations::{collect_relations, collect_relations_in, sieve_interval, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("invalid sieve parameters: {0}")]
    InvalidParams(String),
    #[error("input is even")]
    EvenInput,
    #[error("input {0} is below the sieve minimum of 15")]
    TooSmall(Natural),
    #[error("input is a perfect square of {0}")]
    PerfectSquare(Natural),
    #[error("input {0} is prime")]
    PrimeInput(Natural),
    #[error("empty factor base for B = {bound}; try a larger smoothness bound")]
    EmptyFactorBase { bound: u64 },
    #[error("insufficient relations: found {found}, need {needed}")]
    InsufficientRelations { found: usize, needed: usize },
    #[error("empty relation matrix")]
    EmptyMatrix,
    #[error("inconsistent factor base: exponent vectors differ in length")]
    InconsistentFactorBase,
    #[error("null space is trivial over {relations} relations")]
    NoDependency { relations: usize },
    #[error("invalid dependency: summed exponent is odd")]
    InvalidDependency,
    #[error("all {tried} dependencies trivial; collect more relations")]
    AllDependenciesTrivial { tried: usize },
}
