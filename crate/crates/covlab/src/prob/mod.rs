//! Finite probability distributions, conditional kernels, i.i.d. block
//! extensions and Markov-factored joint laws.
//!
//! All weights are plain `f64` probabilities; logarithms elsewhere in the
//! crate are natural, so information quantities are in nats.

mod block;
mod dist;
mod family;
mod joint;
mod kernel;
mod markov;
mod table;

pub use block::{block_space_size, enumerate_blocks, sample_block, Block, BlockDistribution};
pub use dist::FiniteDistribution;
pub use family::PairFamily;
pub use joint::JointDistribution;
pub use kernel::ConditionalKernel;
pub use markov::{compose_markov, MarkovTriple};
pub use table::{distribution_from_text, joint_from_text, kernel_from_text, parse_table};

use thiserror::Error;

/// Absolute tolerance for a weight vector to count as normalized.
pub const SUM_TOL: f64 = 1e-12;
/// Tolerance for induced joint laws (products of validated factors).
pub const JOINT_TOL: f64 = 1e-10;
/// Default cap on the number of blocks a full enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("all weights are zero; no distribution can be formed")]
    ZeroMass,
    #[error("empty weight vector")]
    Empty,
    #[error("weights sum to {sum}, not 1 within {SUM_TOL}")]
    NotNormalized { sum: f64 },
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error("conditioning on zero-probability symbol {symbol}")]
    ZeroMassConditioning { symbol: usize },
    #[error("enumeration of {required} blocks exceeds cap {cap}")]
    EnumerationCap { required: usize, cap: usize },
    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("table parse error at line {line}: {message}")]
    TableParse { line: usize, message: String },
    #[error("operation requires an i.i.d. family; got {family}")]
    UnsupportedFamily { family: &'static str },
}

pub type Result<T> = std::result::Result<T, ProbError>;
