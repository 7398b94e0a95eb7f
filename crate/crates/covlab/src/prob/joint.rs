use super::{ConditionalKernel, FiniteDistribution, ProbError, Result, SUM_TOL};

/// A joint probability distribution over a pair of finite alphabets.
///
/// Stored row-major: `prob(a, b)` is the mass of the pair `(a, b)` where
/// `a` indexes the left alphabet and `b` the right one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    probs: Vec<f64>,
    left_size: usize,
    right_size: usize,
}

impl JointDistribution {
    pub fn new(probs: Vec<f64>, left_size: usize, right_size: usize) -> Result<Self> {
        if probs.len() != left_size * right_size {
            return Err(ProbError::DimensionMismatch {
                expected: left_size * right_size,
                got: probs.len(),
                context: "joint table size",
            });
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value >= 0.0) {
                return Err(ProbError::NegativeWeight { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(JointDistribution {
            probs,
            left_size,
            right_size,
        })
    }

    /// Doubly symmetric binary source: uniform binary pair whose coordinates
    /// disagree with probability `p`.
    pub fn dsbs(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        let agree = (1.0 - p) / 2.0;
        let disagree = p / 2.0;
        JointDistribution {
            probs: vec![agree, disagree, disagree, agree],
            left_size: 2,
            right_size: 2,
        }
    }

    /// Product of two independent marginals.
    pub fn independent(left: &FiniteDistribution, right: &FiniteDistribution) -> Self {
        let mut probs = Vec::with_capacity(left.alphabet_size() * right.alphabet_size());
        for a in 0..left.alphabet_size() {
            for b in 0..right.alphabet_size() {
                probs.push(left.prob(a) * right.prob(b));
            }
        }
        JointDistribution {
            probs,
            left_size: left.alphabet_size(),
            right_size: right.alphabet_size(),
        }
    }

    /// Joint induced by a marginal on the left and a kernel right-given-left.
    pub fn from_marginal_kernel(left: &FiniteDistribution, kernel: &ConditionalKernel) -> Result<Self> {
        if kernel.input_size() != left.alphabet_size() {
            return Err(ProbError::DimensionMismatch {
                expected: left.alphabet_size(),
                got: kernel.input_size(),
                context: "kernel input vs marginal alphabet",
            });
        }
        let mut probs = Vec::with_capacity(left.alphabet_size() * kernel.output_size());
        for a in 0..left.alphabet_size() {
            for b in 0..kernel.output_size() {
                probs.push(left.prob(a) * kernel.prob(b, a));
            }
        }
        Ok(JointDistribution {
            probs,
            left_size: left.alphabet_size(),
            right_size: kernel.output_size(),
        })
    }

    pub fn left_size(&self) -> usize {
        self.left_size
    }

    pub fn right_size(&self) -> usize {
        self.right_size
    }

    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.right_size + b]
    }

    /// The same joint with the coordinates exchanged.
    pub fn swapped(&self) -> JointDistribution {
        let mut probs = vec![0.0; self.probs.len()];
        for a in 0..self.left_size {
            for b in 0..self.right_size {
                probs[b * self.left_size + a] = self.prob(a, b);
            }
        }
        JointDistribution {
            probs,
            left_size: self.right_size,
            right_size: self.left_size,
        }
    }

    /// Marginal over the left coordinate (sums out the right one).
    pub fn marginal_left(&self) -> FiniteDistribution {
        let weights: Vec<f64> = (0..self.left_size)
            .map(|a| (0..self.right_size).map(|b| self.prob(a, b)).sum())
            .collect();
        FiniteDistribution::normalized(weights).expect("joint has positive mass")
    }

    pub fn marginal_right(&self) -> FiniteDistribution {
        let weights: Vec<f64> = (0..self.right_size)
            .map(|b| (0..self.left_size).map(|a| self.prob(a, b)).sum())
            .collect();
        FiniteDistribution::normalized(weights).expect("joint has positive mass")
    }

    /// Conditional distribution of the right coordinate given `left = a`.
    ///
    /// Conditioning on a zero-mass symbol is an explicit error; rows are
    /// never fabricated.
    pub fn condition_on_left(&self, a: usize) -> Result<FiniteDistribution> {
        let row: Vec<f64> = (0..self.right_size).map(|b| self.prob(a, b)).collect();
        let mass: f64 = row.iter().sum();
        if mass <= 0.0 {
            return Err(ProbError::ZeroMassConditioning { symbol: a });
        }
        FiniteDistribution::normalized(row)
    }

    /// Kernel of right-given-left; fails if any left symbol has zero mass.
    pub fn conditional_right_given_left(&self) -> Result<ConditionalKernel> {
        let rows = (0..self.left_size)
            .map(|a| self.condition_on_left(a))
            .collect::<Result<Vec<_>>>()?;
        ConditionalKernel::new(rows)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dsbs_marginals_are_uniform() {
        let j = JointDistribution::dsbs(0.1);
        assert!((j.marginal_left().prob(0) - 0.5).abs() < 1e-15);
        assert!((j.marginal_right().prob(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dsbs_conditional_is_bsc() {
        let j = JointDistribution::dsbs(0.1);
        let k = j.conditional_right_given_left().unwrap();
        assert!((k.prob(1, 0) - 0.1).abs() < 1e-12);
        assert!((k.prob(0, 1) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identity_coupled_conditional_is_point_mass() {
        let j = JointDistribution::new(vec![0.5, 0.0, 0.0, 0.5], 2, 2).unwrap();
        let row = j.condition_on_left(0).unwrap();
        assert_eq!(row.prob(0), 1.0);
        assert_eq!(row.prob(1), 0.0);
    }

    #[test]
    fn zero_mass_conditioning_is_flagged() {
        let j = JointDistribution::new(vec![1.0, 0.0, 0.0, 0.0], 2, 2).unwrap();
        assert!(matches!(
            j.condition_on_left(1),
            Err(ProbError::ZeroMassConditioning { symbol: 1 })
        ));
    }
}
