//! Sparse state-vector simulator over named integer registers.
//!
//! A [`QuantumState`] maps tuples of register values to complex amplitudes.
//! Only nonzero terms are stored. Every operation consumes the state and
//! returns the new one; clone first to keep the old.

mod dump;
mod product;
mod qft;
mod state;

use thiserror::Error;

pub use dump::{
    read_records, round_sig, value_json, DumpRecord, Snapshot, SnapshotHeader, TermRecord,
    TermSource,
};
pub use product::ProductState;
pub use state::{
    Combine, Domain, MeasureKind, MeasureMode, MeasurementRecord, QuantumState, RegisterSpec,
    Value, MAX_SUPPORT, MIN_POST_SELECT_PROBABILITY, PRUNE_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("duplicate register id {0:?}")]
    DuplicateRegister(String),
    #[error("unknown register {0:?}")]
    UnknownRegister(String),
    #[error("register {0:?} has an empty domain")]
    EmptyDomain(String),
    #[error("empty value set for register {0:?}")]
    EmptyValueSet(String),
    #[error("register {0:?} is not a single-slot register")]
    NotScalar(String),
    #[error("register {0:?} is not |0> in every term")]
    NotZeroed(String),
    #[error("oracle target {0:?} is also an input")]
    TargetIsRead(String),
    #[error("domain overflow in register {register:?} for term {tuple:?}")]
    DomainOverflow { register: String, tuple: Vec<Value> },
    #[error("non-reversible map collision at {tuple:?}")]
    Collision { tuple: Vec<Value> },
    #[error("impossible outcome {value:?} for register {register:?}")]
    ImpossibleOutcome { register: String, value: Vec<Value> },
    #[error("QFT requires qubit register, {0:?} is not one")]
    NotQubitRegister(String),
    #[error("bit {bit} out of range for {width}-qubit register {register:?}")]
    BitOutOfRange {
        register: String,
        bit: u32,
        width: u32,
    },
    #[error("register {0:?} does not hold a single value")]
    NotConstant(String),
    #[error("state support {0} exceeds the simulator limit")]
    SupportTooLarge(usize),
    #[error("basis key has {found} slots, expected {expected}")]
    KeyLength { expected: usize, found: usize },
    #[error("state has zero norm")]
    ZeroNorm,
}
