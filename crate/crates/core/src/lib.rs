//! Quadratic sieve factorization, classically and on a sparse multi-register
//! state-vector simulator.
//!
//! - [`numtheory`]: exact big-integer primitives (Euler-criterion Legendre
//!   symbol, modular powers, integer square roots, prime sieve).
//! - [`classical`]: the quadratic sieve end to end.
//! - [`qsim`]: sparse state vectors over named integer registers, function
//!   oracles, the gate-level QFT and partial measurement.
//! - [`quantum`]: the quantized sieve run step by step on [`qsim`], with a
//!   trace of every intermediate state.
//! - [`semiprime`]: seeded generators of test and benchmark inputs.

pub mod classical;
pub mod numtheory;
pub mod qsim;
pub mod quantum;
pub mod semiprime;

pub use numtheory::Natural;
