use super::{
    ConditionalKernel, FiniteDistribution, JointDistribution, ProbError, Result,
};

/// A joint law over `(U, V, W)` factored as `P_{UV} * P_{W|V}`, so that
/// `U` and `W` are conditionally independent given `V` by construction.
///
/// The block law of length `n` is the letterwise i.i.d. extension of the
/// single-letter factorization.
#[derive(Debug, Clone)]
pub struct MarkovTriple {
    joint_uv: JointDistribution,
    kernel_w_given_v: ConditionalKernel,
    blocklength: usize,
    single_letter: bool,
    marginal_v: FiniteDistribution,
    marginal_w: FiniteDistribution,
    u_given_v: Vec<Option<FiniteDistribution>>,
}

/// Build a [`MarkovTriple`] from its two factors.
pub fn compose_markov(
    joint_uv: JointDistribution,
    kernel_w_given_v: ConditionalKernel,
    blocklength: usize,
) -> Result<MarkovTriple> {
    if kernel_w_given_v.input_size() != joint_uv.right_size() {
        return Err(ProbError::DimensionMismatch {
            expected: joint_uv.right_size(),
            got: kernel_w_given_v.input_size(),
            context: "kernel input vs v-alphabet",
        });
    }
    if blocklength < 1 {
        return Err(ProbError::Empty);
    }
    let marginal_v = joint_uv.marginal_right();
    let mut w_weights = vec![0.0; kernel_w_given_v.output_size()];
    for v in 0..marginal_v.alphabet_size() {
        let pv = marginal_v.prob(v);
        for w in 0..kernel_w_given_v.output_size() {
            w_weights[w] += pv * kernel_w_given_v.prob(w, v);
        }
    }
    let marginal_w = FiniteDistribution::normalized(w_weights)?;
    let swapped = joint_uv.swapped(); // (v, u)
    let u_given_v = (0..marginal_v.alphabet_size())
        .map(|v| swapped.condition_on_left(v).ok())
        .collect();
    Ok(MarkovTriple {
        joint_uv,
        kernel_w_given_v,
        blocklength,
        single_letter: true,
        marginal_v,
        marginal_w,
        u_given_v,
    })
}

impl MarkovTriple {
    pub fn u_size(&self) -> usize {
        self.joint_uv.left_size()
    }

    pub fn v_size(&self) -> usize {
        self.joint_uv.right_size()
    }

    pub fn w_size(&self) -> usize {
        self.kernel_w_given_v.output_size()
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }

    pub fn is_single_letter(&self) -> bool {
        self.single_letter
    }

    pub fn joint_uv(&self) -> &JointDistribution {
        &self.joint_uv
    }

    pub fn kernel_w_given_v(&self) -> &ConditionalKernel {
        &self.kernel_w_given_v
    }

    pub fn marginal_v(&self) -> &FiniteDistribution {
        &self.marginal_v
    }

    pub fn marginal_w(&self) -> &FiniteDistribution {
        &self.marginal_w
    }

    /// Single-letter `P(u, v, w) = P(u, v) * P(w | v)`.
    pub fn prob_uvw(&self, u: usize, v: usize, w: usize) -> f64 {
        self.joint_uv.prob(u, v) * self.kernel_w_given_v.prob(w, v)
    }

    /// Conditional `P(u | v)`; errors on zero-mass `v`.
    pub fn u_given_v(&self, v: usize) -> Result<&FiniteDistribution> {
        self.u_given_v[v]
            .as_ref()
            .ok_or(ProbError::ZeroMassConditioning { symbol: v })
    }

    /// Single-letter joint over `(v, w)`.
    pub fn joint_vw(&self) -> JointDistribution {
        JointDistribution::from_marginal_kernel(&self.marginal_v, &self.kernel_w_given_v)
            .expect("dimensions validated at construction")
    }

    /// Single-letter joint over `(u, w)` (the `V` coordinate summed out).
    pub fn joint_uw(&self) -> JointDistribution {
        let mut probs = vec![0.0; self.u_size() * self.w_size()];
        for u in 0..self.u_size() {
            for v in 0..self.v_size() {
                let puv = self.joint_uv.prob(u, v);
                if puv == 0.0 {
                    continue;
                }
                for w in 0..self.w_size() {
                    probs[u * self.w_size() + w] += puv * self.kernel_w_given_v.prob(w, v);
                }
            }
        }
        JointDistribution::new(probs, self.u_size(), self.w_size())
            .expect("product of validated factors")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_forces_w_equal_v() {
        let joint = JointDistribution::independent(
            &FiniteDistribution::uniform(2),
            &FiniteDistribution::uniform(2),
        );
        let t = compose_markov(joint, ConditionalKernel::identity(2), 1).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                for w in 0..2 {
                    let expect = if w == v { 0.25 } else { 0.0 };
                    assert!((t.prob_uvw(u, v, w) - expect).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn uniform_rows_make_w_independent() {
        let joint = JointDistribution::dsbs(0.1);
        let kernel = ConditionalKernel::constant_rows(FiniteDistribution::uniform(2), 2);
        let t = compose_markov(joint, kernel, 1).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                for w in 0..2 {
                    let expect = t.joint_uv().prob(u, v) * 0.5;
                    assert!((t.prob_uvw(u, v, w) - expect).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn dsbs_bsc_table_matches_direct_multiplication() {
        let joint = JointDistribution::dsbs(0.1);
        let kernel = ConditionalKernel::bsc(0.2);
        let t = compose_markov(joint.clone(), kernel.clone(), 1).unwrap();
        let mut total = 0.0;
        for u in 0..2 {
            for v in 0..2 {
                for w in 0..2 {
                    let direct = joint.prob(u, v) * kernel.prob(w, v);
                    assert!((t.prob_uvw(u, v, w) - direct).abs() < 1e-15);
                    total += t.prob_uvw(u, v, w);
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditional_independence_identity() {
        // P(u,v,w) * P(v) == P(u,v) * P(v,w) for every triple.
        let joint = JointDistribution::dsbs(0.3);
        let kernel = ConditionalKernel::bsc(0.25);
        let t = compose_markov(joint, kernel, 1).unwrap();
        let vw = t.joint_vw();
        for u in 0..2 {
            for v in 0..2 {
                for w in 0..2 {
                    let lhs = t.prob_uvw(u, v, w) * t.marginal_v().prob(v);
                    let rhs = t.joint_uv().prob(u, v) * vw.prob(v, w);
                    assert!((lhs - rhs).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let joint = JointDistribution::dsbs(0.1);
        let kernel = ConditionalKernel::identity(3);
        assert!(compose_markov(joint, kernel, 1).is_err());
    }
}
