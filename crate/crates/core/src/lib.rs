//! Concatenated projection pulse sequences for dynamical decoupling of a
//! single qubit coupled to a bath: exact Pauli bookkeeping, sequence
//! construction and classification, symbolic average Hamiltonians, and
//! numerical verification on a small random spin bath.

pub mod dsl;
pub mod numsim;
pub mod pauli;
pub mod sequence;
pub mod symbolic;

pub use dsl::{ParseError, SeqExpr};
pub use numsim::{SimError, SlopeEstimate, SpinBathModel};
pub use pauli::{PauliAxis, Phase, PhasedPauli};
pub use sequence::{CpddClass, PulseSequence, SequenceError};
pub use symbolic::{BathPoly, SbOperator, SymbolicError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Sim(#[from] SimError),
}
