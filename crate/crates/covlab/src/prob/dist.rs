use rand::Rng;

use super::{ProbError, Result, SUM_TOL};

/// A probability distribution over a finite alphabet `{0, ..., k-1}`.
///
/// Immutable after construction; weights are nonnegative and sum to one
/// within [`SUM_TOL`](super::SUM_TOL).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    weights: Vec<f64>,
}

impl FiniteDistribution {
    /// Build a distribution from already-normalized weights.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::check_nonnegative(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(FiniteDistribution { weights })
    }

    /// Build a distribution by normalizing arbitrary nonnegative weights.
    ///
    /// This is the `make_distribution` entry point: `[1, 2, 1]` becomes
    /// `(0.25, 0.5, 0.25)`.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        Self::check_nonnegative(&weights)?;
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(ProbError::ZeroMass);
        }
        let weights = weights.iter().map(|w| w / sum).collect();
        Ok(FiniteDistribution { weights })
    }

    fn check_nonnegative(weights: &[f64]) -> Result<()> {
        if weights.is_empty() {
            return Err(ProbError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(ProbError::NegativeWeight { index, value });
            }
        }
        Ok(())
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size >= 1);
        FiniteDistribution {
            weights: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(symbol: usize, size: usize) -> Self {
        assert!(symbol < size);
        let mut weights = vec![0.0; size];
        weights[symbol] = 1.0;
        FiniteDistribution { weights }
    }

    pub fn alphabet_size(&self) -> usize {
        self.weights.len()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.weights[symbol]
    }

    /// Natural log of the probability; `-inf` for zero-mass symbols.
    pub fn log_prob(&self, symbol: usize) -> f64 {
        self.weights[symbol].ln()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Symbols with strictly positive probability.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
    }

    /// Draw one symbol by inverse-CDF sampling.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let x: f64 = rng.gen::<f64>();
        let mut acc = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            acc += w;
            if x < acc {
                return i;
            }
        }
        // Roundoff at the top of the CDF: return the last positive symbol.
        self.weights
            .iter()
            .rposition(|&w| w > 0.0)
            .expect("distribution has positive mass")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_symmetric_pair() {
        let d = FiniteDistribution::normalized(vec![1.0, 1.0]).unwrap();
        assert_eq!(d.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn degenerate_mass() {
        let d = FiniteDistribution::normalized(vec![2.0, 0.0]).unwrap();
        assert_eq!(d.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn normalization_arithmetic() {
        let d = FiniteDistribution::normalized(vec![1.0, 2.0, 1.0]).unwrap();
        assert_eq!(d.weights(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn rejects_negative_weight_naming_index() {
        let err = FiniteDistribution::normalized(vec![0.5, -0.1]).unwrap_err();
        match err {
            ProbError::NegativeWeight { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_all_zero() {
        assert!(matches!(
            FiniteDistribution::normalized(vec![0.0, 0.0]),
            Err(ProbError::ZeroMass)
        ));
    }
}
