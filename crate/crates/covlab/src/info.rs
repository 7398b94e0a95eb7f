//! Information densities, entropies, mutual informations and estimators
//! for spectral sup/inf-mutual information rates.
//!
//! Everything is in nats. Block densities are computed in log space from
//! per-letter log tables so they stay finite at large blocklengths.

use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::prob::{Block, FiniteDistribution, JointDistribution, PairFamily};
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error("block has zero marginal probability; density undefined")]
    ZeroMarginal,
    #[error("zero joint probability with positive marginals; density is -inf")]
    NegativeInfiniteDensity,
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("eps must lie in (0, 0.5), got {0}")]
    BadEps(f64),
    #[error(transparent)]
    Prob(#[from] crate::prob::ProbError),
    #[error("csv write failed: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, InfoError>;

/// Which tail of the information spectrum an estimate targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sup,
    Inf,
}

/// One realization of the normalized information density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySample {
    /// Nats per symbol.
    pub value: f64,
    pub blocklength: usize,
}

/// A quantile-based estimate of a spectral mutual information rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub rate: f64,
    pub quantile_eps: f64,
    pub sample_count: usize,
    pub direction: Direction,
}

/// Shannon entropy `H = -sum p ln p`, with `0 ln 0 = 0`.
pub fn entropy(dist: &FiniteDistribution) -> f64 {
    dist.weights()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Entropy of a joint table.
pub fn joint_entropy(joint: &JointDistribution) -> f64 {
    joint
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Which coordinate of a joint is the conditioning one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Given {
    Left,
    Right,
}

/// `H(other | given) = H(joint) - H(given marginal)`.
pub fn conditional_entropy(joint: &JointDistribution, given: Given) -> f64 {
    let marginal = match given {
        Given::Left => joint.marginal_left(),
        Given::Right => joint.marginal_right(),
    };
    joint_entropy(joint) - entropy(&marginal)
}

/// Mutual information of a single-letter joint; zero-mass cells contribute 0.
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    let pv = joint.marginal_left();
    let pw = joint.marginal_right();
    let mut total = 0.0;
    for v in 0..joint.left_size() {
        for w in 0..joint.right_size() {
            let p = joint.prob(v, w);
            if p > 0.0 {
                total += p * (p / (pv.prob(v) * pw.prob(w))).ln();
            }
        }
    }
    total
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&FiniteDistribution::new(vec![1.0 - p, p]).expect("valid binary law"))
}

/// Normalized information density of an i.i.d. block pair:
/// `(1/n) ln [P_VW(v, w) / (P_V(v) P_W(w))]`, a sum of per-letter log
/// ratios divided by `n`.
pub fn information_density(
    joint: &JointDistribution,
    v_block: &Block,
    w_block: &Block,
) -> Result<DensitySample> {
    let fam = PairFamily::Iid(joint.clone());
    information_density_family(&fam, v_block, w_block)
}

/// Density under any per-letter pair family (i.i.d. or pair chain).
pub fn information_density_family(
    family: &PairFamily,
    v_block: &Block,
    w_block: &Block,
) -> Result<DensitySample> {
    let n = v_block.len();
    let lp_v = family.log_prob_left(v_block);
    let lp_w = family.log_prob_right(w_block);
    if lp_v == f64::NEG_INFINITY || lp_w == f64::NEG_INFINITY {
        return Err(InfoError::ZeroMarginal);
    }
    let lp_vw = family.log_prob_pair(v_block, w_block);
    if lp_vw == f64::NEG_INFINITY {
        return Err(InfoError::NegativeInfiniteDensity);
    }
    Ok(DensitySample {
        value: (lp_vw - lp_v - lp_w) / n as f64,
        blocklength: n,
    })
}

/// Exact spectral rate of an i.i.d. family: both the sup and inf rates
/// equal the single-letter mutual information.
pub fn spectral_rate_iid(family: &PairFamily, _direction: Direction) -> Result<f64> {
    let joint = family.iid_joint()?;
    Ok(mutual_information(joint))
}

/// Quantile surrogate for the p-limsup / p-liminf of density samples.
///
/// Sup direction: smallest sample value `a` with empirical
/// `Pr{Z > a} <= eps` (the `(1-eps)`-quantile). Inf direction: the
/// `eps`-quantile.
pub fn empirical_spectral_rate(
    samples: &[DensitySample],
    eps: f64,
    direction: Direction,
) -> Result<SpectralEstimate> {
    const MIN_SAMPLES: usize = 100;
    if samples.len() < MIN_SAMPLES {
        return Err(InfoError::TooFewSamples {
            got: samples.len(),
            min: MIN_SAMPLES,
        });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(InfoError::BadEps(eps));
    }
    let mut values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(InfoError::NegativeInfiniteDensity);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    let tail = (eps * n as f64).floor() as usize;
    let rate = match direction {
        Direction::Sup => values[n - 1 - tail],
        Direction::Inf => values[tail],
    };
    Ok(SpectralEstimate {
        rate,
        quantile_eps: eps,
        sample_count: n,
        direction,
    })
}

/// Draw `count` density samples at blocklength `n`, one RNG stream per
/// sample so the result is independent of scheduling.
pub fn sample_densities(
    family: &PairFamily,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<DensitySample>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i).rng();
            let (v, w) = family.sample_pair(n, &mut rng);
            information_density_family(family, &v, &w)
        })
        .collect()
}

/// Dump samples as CSV with columns `n,sample_index,density_nats`.
pub fn write_density_csv<W: Write>(samples: &[DensitySample], mut out: W) -> Result<()> {
    writeln!(out, "n,sample_index,density_nats")?;
    for (i, s) in samples.iter().enumerate() {
        writeln!(out, "{},{},{}", s.blocklength, i, s.value)?;
    }
    Ok(())
}
