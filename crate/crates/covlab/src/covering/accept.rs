use std::collections::HashSet;

use crate::prob::{Block, MarkovTriple};

/// Bounded per-letter distortion table `d(u, w) >= 0`, inducing the
/// normalized block distortion `d_n = (1/n) sum_i d(u_i, w_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMeasure {
    table: Vec<Vec<f64>>,
    d_zero: f64,
}

impl DistortionMeasure {
    pub fn new(table: Vec<Vec<f64>>) -> Self {
        assert!(!table.is_empty() && !table[0].is_empty());
        let width = table[0].len();
        let mut d_zero: f64 = 0.0;
        for row in &table {
            assert_eq!(row.len(), width, "ragged distortion table");
            for &d in row {
                assert!(d.is_finite() && d >= 0.0, "distortion entries must be finite and >= 0");
                d_zero = d_zero.max(d);
            }
        }
        DistortionMeasure { table, d_zero }
    }

    /// Hamming distortion on a square alphabet.
    pub fn hamming(size: usize) -> Self {
        let table = (0..size)
            .map(|u| (0..size).map(|w| if u == w { 0.0 } else { 1.0 }).collect())
            .collect();
        DistortionMeasure::new(table)
    }

    pub fn per_letter(&self, u: usize, w: usize) -> f64 {
        self.table[u][w]
    }

    /// Normalized block distortion.
    pub fn block(&self, u: &Block, w: &Block) -> f64 {
        debug_assert_eq!(u.len(), w.len());
        let sum: f64 = u
            .symbols()
            .iter()
            .zip(w.symbols())
            .map(|(&a, &b)| self.table[a][b])
            .sum();
        sum / u.len() as f64
    }

    /// Upper bound of the block-distortion image.
    pub fn d_zero(&self) -> f64 {
        self.d_zero
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }
}

/// A per-letter statistic whose block average against a threshold decides
/// set membership. Used for both distortion-ball and density-typical sets.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LetterStat {
    /// `stat[u][w]` per-letter values.
    pub table: Vec<Vec<f64>>,
    /// Membership holds iff `(1/n) sum_i stat(u_i, w_i) <= level`.
    pub level: f64,
}

#[derive(Debug, Clone)]
enum AcceptKind {
    Full,
    /// `(u, w)` accepted iff block distortion `<= level`.
    DistortionThreshold {
        measure: DistortionMeasure,
        level: f64,
    },
    /// `(u, w)` accepted iff the normalized information density of the pair
    /// under the triple's `(U, W)` joint is `<= threshold`.
    DensityTypical {
        log_ratio: Vec<Vec<f64>>,
        threshold: f64,
    },
    /// Explicit membership list (small instances only).
    ExplicitList(HashSet<(Block, Block)>),
}

/// The set `A_n` (or `B_n`) as a total, deterministic predicate over
/// `(u-block, w-block)` pairs.
#[derive(Debug, Clone)]
pub struct AcceptanceSet {
    kind: AcceptKind,
    description: String,
}

impl AcceptanceSet {
    /// Accepts every pair.
    pub fn full() -> Self {
        AcceptanceSet {
            kind: AcceptKind::Full,
            description: "full".to_string(),
        }
    }

    pub fn distortion_threshold(measure: DistortionMeasure, level: f64) -> Self {
        AcceptanceSet {
            description: format!("distortion<= {level}"),
            kind: AcceptKind::DistortionThreshold { measure, level },
        }
    }

    /// Pairs whose normalized `(U, W)` information density under the given
    /// triple stays at or below `threshold` (in nats). Zero-probability
    /// pairs have density `-inf` and are members vacuously.
    pub fn density_typical(triple: &MarkovTriple, threshold: f64) -> Self {
        let joint_uw = triple.joint_uw();
        let pu = joint_uw.marginal_left();
        let pw = joint_uw.marginal_right();
        let log_ratio = (0..joint_uw.left_size())
            .map(|u| {
                (0..joint_uw.right_size())
                    .map(|w| (joint_uw.prob(u, w) / (pu.prob(u) * pw.prob(w))).ln())
                    .collect()
            })
            .collect();
        AcceptanceSet {
            description: format!("density<= {threshold}"),
            kind: AcceptKind::DensityTypical {
                log_ratio,
                threshold,
            },
        }
    }

    pub fn explicit(pairs: HashSet<(Block, Block)>) -> Self {
        AcceptanceSet {
            description: format!("explicit({} pairs)", pairs.len()),
            kind: AcceptKind::ExplicitList(pairs),
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_full(&self) -> bool {
        matches!(self.kind, AcceptKind::Full)
    }

    /// Total membership predicate.
    pub fn contains(&self, u: &Block, w: &Block) -> bool {
        match &self.kind {
            AcceptKind::Full => true,
            AcceptKind::DistortionThreshold { measure, level } => {
                measure.block(u, w) <= *level
            }
            AcceptKind::DensityTypical {
                log_ratio,
                threshold,
            } => {
                let sum: f64 = u
                    .symbols()
                    .iter()
                    .zip(w.symbols())
                    .map(|(&a, &b)| log_ratio[a][b])
                    .sum();
                sum <= *threshold * u.len() as f64
            }
            AcceptKind::ExplicitList(set) => set.contains(&(u.clone(), w.clone())),
        }
    }

    /// Per-letter threshold form, when the set has one. `None` means the
    /// membership is only available as the raw predicate (explicit lists).
    pub(crate) fn letter_stat(&self) -> Option<Option<LetterStat>> {
        match &self.kind {
            AcceptKind::Full => Some(None),
            AcceptKind::DistortionThreshold { measure, level } => Some(Some(LetterStat {
                table: measure.table().to_vec(),
                level: *level,
            })),
            AcceptKind::DensityTypical {
                log_ratio,
                threshold,
            } => Some(Some(LetterStat {
                table: log_ratio.clone(),
                level: *threshold,
            })),
            AcceptKind::ExplicitList(_) => None,
        }
    }
}

/// Block distortion used by the covering construction: either a per-letter
/// measure or the outside-indicator of a set (`d_n = 1{(u,w) not in B}`),
/// which is what the Proposition reduction feeds in.
#[derive(Debug, Clone)]
pub enum BlockDistortion {
    PerLetter(DistortionMeasure),
    OutsideIndicator(AcceptanceSet),
}

impl BlockDistortion {
    pub fn per_letter(measure: DistortionMeasure) -> Self {
        BlockDistortion::PerLetter(measure)
    }

    pub fn outside_indicator(set: AcceptanceSet) -> Self {
        BlockDistortion::OutsideIndicator(set)
    }

    pub fn block_value(&self, u: &Block, w: &Block) -> f64 {
        match self {
            BlockDistortion::PerLetter(m) => m.block(u, w),
            BlockDistortion::OutsideIndicator(set) => {
                if set.contains(u, w) {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn d_zero(&self) -> f64 {
        match self {
            BlockDistortion::PerLetter(m) => m.d_zero(),
            BlockDistortion::OutsideIndicator(_) => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{compose_markov, ConditionalKernel, JointDistribution};

    #[test]
    fn hamming_block_distortion() {
        let d = DistortionMeasure::hamming(2);
        let u = Block(vec![0, 1, 1, 0]);
        let w = Block(vec![0, 0, 1, 1]);
        assert_eq!(d.block(&u, &w), 0.5);
        assert_eq!(d.d_zero(), 1.0);
    }

    #[test]
    fn full_set_accepts_everything() {
        let a = AcceptanceSet::full();
        assert!(a.contains(&Block(vec![0]), &Block(vec![1])));
    }

    #[test]
    fn distortion_threshold_membership() {
        let a = AcceptanceSet::distortion_threshold(DistortionMeasure::hamming(2), 0.25);
        let u = Block(vec![0, 0, 0, 0]);
        assert!(a.contains(&u, &Block(vec![0, 0, 0, 1])));
        assert!(!a.contains(&u, &Block(vec![0, 0, 1, 1])));
    }

    #[test]
    fn density_typical_matches_direct_density() {
        let t = compose_markov(JointDistribution::dsbs(0.1), ConditionalKernel::bsc(0.2), 4)
            .unwrap();
        let mi = crate::info::mutual_information(&t.joint_uw());
        let a = AcceptanceSet::density_typical(&t, mi + 0.05);
        // All-agree block has density ln(p/(pu*pw)) per letter above I.
        let u = Block(vec![0, 0, 0, 0]);
        let d = crate::info::information_density(&t.joint_uw(), &u, &u)
            .unwrap()
            .value;
        assert_eq!(a.contains(&u, &u), d <= mi + 0.05);
    }

    #[test]
    fn outside_indicator_flips_membership() {
        let a = AcceptanceSet::distortion_threshold(DistortionMeasure::hamming(2), 0.0);
        let d = BlockDistortion::outside_indicator(a);
        let u = Block(vec![0, 1]);
        assert_eq!(d.block_value(&u, &u), 0.0);
        assert_eq!(d.block_value(&u, &Block(vec![1, 1])), 1.0);
        assert_eq!(d.d_zero(), 1.0);
    }
}
