//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by circuit construction, simulation and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Two unitaries (or a unitary and a state) act on different registers.
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },

    /// A basis label or setting string does not fit in the register width.
    #[error("bit string {value:#b} does not fit in {n} bits")]
    BitLengthMismatch { value: u64, n: usize },

    /// A qubit index is outside the register.
    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    /// A bit mask addresses qubits outside the register.
    #[error("mask {mask:#b} does not fit in {n} bits")]
    MaskOutOfRange { mask: u64, n: usize },

    /// A parity or conditioning mask selects no qubits.
    #[error("mask must select at least one qubit")]
    EmptyMask,

    /// Conditioning values lie outside the conditioning mask.
    #[error("condition values {values:#b} are not contained in mask {mask:#b}")]
    ConditionOutsideMask { mask: u64, values: u64 },

    /// A vector length is not a power of two.
    #[error("length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    /// Register too large for the configured state-vector cap.
    #[error("{n} qubits exceeds the configured cap of {cap}")]
    QubitCapExceeded { n: usize, cap: usize },

    /// Post-selection on an event of (numerically) zero probability.
    #[error("conditioning event has probability {probability:.3e}, below the 1e-12 floor")]
    ImpossibleEvent { probability: f64 },

    /// An input state failed the normalization check.
    #[error("state is not normalized: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    /// An angle was written with a zero denominator.
    #[error("angle denominator must be nonzero")]
    ZeroDenominator,

    /// A circuit file violated the format contract (beyond JSON syntax).
    #[error("circuit file: {0}")]
    Format(String),

    /// JSON syntax error, with line/column context from the parser.
    #[error("circuit file: {0}")]
    Json(#[from] serde_json::Error),

    /// Operation applied to a test that does not satisfy its preconditions.
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
