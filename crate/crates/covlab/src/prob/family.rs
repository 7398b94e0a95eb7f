use rand::Rng;

use super::{Block, ConditionalKernel, JointDistribution, ProbError, Result};

/// A per-letter model for a pair source `(V, W)`.
///
/// `Iid` draws letter pairs independently from a single-letter joint.
/// `MarkovPair` runs a finite-state chain over flattened pair symbols
/// (`pair = v * right_size + w`), giving a stationary-transition,
/// non-i.i.d. family for density experiments.
#[derive(Debug, Clone)]
pub enum PairFamily {
    Iid(JointDistribution),
    MarkovPair {
        initial: JointDistribution,
        /// Transition over flattened pair symbols.
        transition: ConditionalKernel,
    },
}

impl PairFamily {
    pub fn markov_pair(initial: JointDistribution, transition: ConditionalKernel) -> Result<Self> {
        let states = initial.left_size() * initial.right_size();
        if transition.input_size() != states || transition.output_size() != states {
            return Err(ProbError::DimensionMismatch {
                expected: states,
                got: transition.input_size().max(transition.output_size()),
                context: "pair-chain transition size",
            });
        }
        Ok(PairFamily::MarkovPair {
            initial,
            transition,
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            PairFamily::Iid(_) => "iid",
            PairFamily::MarkovPair { .. } => "markov-pair",
        }
    }

    pub fn left_size(&self) -> usize {
        match self {
            PairFamily::Iid(j) => j.left_size(),
            PairFamily::MarkovPair { initial, .. } => initial.left_size(),
        }
    }

    pub fn right_size(&self) -> usize {
        match self {
            PairFamily::Iid(j) => j.right_size(),
            PairFamily::MarkovPair { initial, .. } => initial.right_size(),
        }
    }

    /// The single-letter joint, if this is an i.i.d. family.
    pub fn iid_joint(&self) -> Result<&JointDistribution> {
        match self {
            PairFamily::Iid(j) => Ok(j),
            PairFamily::MarkovPair { .. } => Err(ProbError::UnsupportedFamily {
                family: "markov-pair",
            }),
        }
    }

    /// Draw a length-`n` pair block.
    pub fn sample_pair<R: Rng>(&self, n: usize, rng: &mut R) -> (Block, Block) {
        let r = self.right_size();
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        match self {
            PairFamily::Iid(joint) => {
                let flat = flatten(joint);
                for _ in 0..n {
                    let pair = flat.sample(rng);
                    left.push(pair / r);
                    right.push(pair % r);
                }
            }
            PairFamily::MarkovPair {
                initial,
                transition,
            } => {
                let mut state = flatten(initial).sample(rng);
                left.push(state / r);
                right.push(state % r);
                for _ in 1..n {
                    state = transition.row(state).sample(rng);
                    left.push(state / r);
                    right.push(state % r);
                }
            }
        }
        (Block(left), Block(right))
    }

    /// Log-probability of a pair block under the family.
    pub fn log_prob_pair(&self, left: &Block, right: &Block) -> f64 {
        let r = self.right_size();
        match self {
            PairFamily::Iid(joint) => left
                .symbols()
                .iter()
                .zip(right.symbols())
                .map(|(&v, &w)| joint.prob(v, w).ln())
                .sum(),
            PairFamily::MarkovPair {
                initial,
                transition,
            } => {
                let states: Vec<usize> = left
                    .symbols()
                    .iter()
                    .zip(right.symbols())
                    .map(|(&v, &w)| v * r + w)
                    .collect();
                let mut lp = initial.probs()[states[0]].ln();
                for pair in states.windows(2) {
                    lp += transition.prob(pair[1], pair[0]).ln();
                }
                lp
            }
        }
    }

    /// Log-probability of the left block with the right coordinate summed
    /// out (forward recursion for the chain case).
    pub fn log_prob_left(&self, left: &Block) -> f64 {
        self.log_prob_marginal(left.symbols(), true)
    }

    pub fn log_prob_right(&self, right: &Block) -> f64 {
        self.log_prob_marginal(right.symbols(), false)
    }

    fn log_prob_marginal(&self, observed: &[usize], left_side: bool) -> f64 {
        let r = self.right_size();
        let matches = |pair: usize, sym: usize| {
            if left_side {
                pair / r == sym
            } else {
                pair % r == sym
            }
        };
        match self {
            PairFamily::Iid(joint) => observed
                .iter()
                .map(|&s| {
                    if left_side {
                        joint.marginal_left().prob(s).ln()
                    } else {
                        joint.marginal_right().prob(s).ln()
                    }
                })
                .sum(),
            PairFamily::MarkovPair {
                initial,
                transition,
            } => {
                // Scaled forward algorithm over pair states.
                let states = initial.left_size() * r;
                let mut alpha: Vec<f64> = (0..states)
                    .map(|p| {
                        if matches(p, observed[0]) {
                            initial.probs()[p]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let mut log_total = 0.0;
                for &sym in &observed[1..] {
                    let scale: f64 = alpha.iter().sum();
                    if scale <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    log_total += scale.ln();
                    for a in alpha.iter_mut() {
                        *a /= scale;
                    }
                    let mut next = vec![0.0; states];
                    for (p, &ap) in alpha.iter().enumerate() {
                        if ap == 0.0 {
                            continue;
                        }
                        for (q, slot) in next.iter_mut().enumerate() {
                            if matches(q, sym) {
                                *slot += ap * transition.prob(q, p);
                            }
                        }
                    }
                    alpha = next;
                }
                let tail: f64 = alpha.iter().sum();
                if tail <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    log_total + tail.ln()
                }
            }
        }
    }
}

fn flatten(joint: &JointDistribution) -> super::FiniteDistribution {
    super::FiniteDistribution::normalized(joint.probs().to_vec())
        .expect("joint has positive mass")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn iid_marginal_log_prob_is_product() {
        let fam = PairFamily::Iid(JointDistribution::dsbs(0.1));
        let b = Block(vec![0, 1, 1, 0]);
        assert!((fam.log_prob_left(&b) - 4.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn markov_pair_reduces_to_iid_with_constant_transition() {
        let joint = JointDistribution::dsbs(0.2);
        let flat = super::flatten(&joint);
        let transition = ConditionalKernel::constant_rows(flat, 4);
        let fam = PairFamily::markov_pair(joint.clone(), transition).unwrap();
        let iid = PairFamily::Iid(joint);
        let (l, r) = iid.sample_pair(6, &mut RngStream::new(5, 0).rng());
        assert!((fam.log_prob_pair(&l, &r) - iid.log_prob_pair(&l, &r)).abs() < 1e-10);
        assert!((fam.log_prob_left(&l) - iid.log_prob_left(&l)).abs() < 1e-10);
        assert!((fam.log_prob_right(&r) - iid.log_prob_right(&r)).abs() < 1e-10);
    }

    #[test]
    fn markov_marginals_sum_to_one() {
        // Sticky pair chain: stay with prob 0.7, move uniformly otherwise.
        let joint = JointDistribution::dsbs(0.1);
        let rows = (0..4)
            .map(|s| {
                let mut w = vec![0.1; 4];
                w[s] = 0.7;
                super::super::FiniteDistribution::new(w).unwrap()
            })
            .collect::<Vec<_>>();
        let fam =
            PairFamily::markov_pair(joint, ConditionalKernel::new(rows).unwrap()).unwrap();
        let n = 5;
        let total: f64 = (0..(1usize << n))
            .map(|rank| fam.log_prob_left(&Block::from_rank(rank, 2, n)).exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "total = {total}");
    }
}
