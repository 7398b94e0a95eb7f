//! The enhanced covering construction as executable machinery: eta
//! functions, typicality sets, codebook sampling, the covering map, exact
//! and Monte-Carlo evaluation, the full-set/indicator reduction, and the
//! two-encoder variant.

mod accept;
mod codebook;
mod eta;
mod inequality;
mod two_sided;

pub use accept::{AcceptanceSet, BlockDistortion, DistortionMeasure};
pub use codebook::{
    codebook_size, covering_map, evaluate_codebook_exact, monte_carlo_covering,
    set_covering_reduction, sample_codebook, Codebook, CoveringChoice, CoveringConfig,
    CoveringReport, ExactEval, SetCoveringReport, TrialOutcome,
};
pub use eta::{
    baseline_distortion, delta_n, eta1, eta1_monte_carlo, eta2, in_t1, in_t2, prob_not_in_t1,
    prob_not_in_t2, EtaEvaluator,
};
pub use inequality::{check_covering_inequality, inequality_grid_holds};
pub use two_sided::{two_sided_covering, PairDistortion, PairModel, TwoSidedReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoveringError {
    #[error(transparent)]
    Prob(#[from] crate::prob::ProbError),
    #[error("codebook size e^{{{exponent}}} = {required:.3e} exceeds cap {cap}")]
    CodebookTooLarge {
        exponent: f64,
        required: f64,
        cap: usize,
    },
    #[error("gamma must be > 0, got {0}")]
    BadGamma(f64),
    #[error("spectral rate must be >= 0, got {0}")]
    NegativeRate(f64),
    #[error("codebook is empty")]
    EmptyCodebook,
    #[error("argument {name} = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("Monte-Carlo fallback disabled and enumeration exceeds cap")]
    NeedMonteCarlo,
}

pub type Result<T> = std::result::Result<T, CoveringError>;
