//! Random codebooks, the covering map, and its exact / Monte-Carlo
//! evaluation.
//!
//! A codebook is `M` i.i.d. blocks drawn from the `W` marginal. The
//! covering map sends each source block `v` to the codeword minimizing
//! `eta2` among codewords that keep `eta1` under the typicality threshold,
//! falling back to an unconstrained minimum when no codeword qualifies.
//! Ties always resolve to the lowest codebook index, which keeps every
//! evaluation path bit-deterministic.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rayon::prelude::*;

use crate::info::mutual_information;
use crate::prob::{
    enumerate_blocks, sample_block, Block, FiniteDistribution, MarkovTriple,
    DEFAULT_ENUMERATION_CAP,
};
use crate::rng::RngStream;

use super::accept::{AcceptanceSet, BlockDistortion};
use super::eta::{baseline_distortion, delta_n, eta1, eta2, EtaEvaluator};
use super::{CoveringError, Result};

const ETA_EPS: f64 = 1e-12;
/// Per-source-block cap on codeword probes in the class-ordered search
/// before falling back to a linear scan of the codebook.
const PROBE_BUDGET: usize = 1 << 16;

/// `M = ceil(e^{n (rate + gamma)})`, guarded against absurd sizes.
pub fn codebook_size(rate: f64, gamma: f64, n: usize, cap: usize) -> Result<usize> {
    if !(gamma > 0.0) {
        return Err(CoveringError::BadGamma(gamma));
    }
    if !(rate >= 0.0) {
        return Err(CoveringError::NegativeRate(rate));
    }
    let exponent = n as f64 * (rate + gamma);
    let required = exponent.exp().ceil();
    if required > cap as f64 {
        return Err(CoveringError::CodebookTooLarge {
            exponent,
            required,
            cap,
        });
    }
    Ok(required as usize)
}

/// A sampled codebook: `M` blocks over the reproduction alphabet.
#[derive(Debug, Clone)]
pub struct Codebook {
    words: Vec<Block>,
}

impl Codebook {
    pub fn new(words: Vec<Block>) -> Result<Self> {
        if words.is_empty() {
            return Err(CoveringError::EmptyCodebook);
        }
        Ok(Codebook { words })
    }

    pub fn words(&self) -> &[Block] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Draw `m` i.i.d. codewords from the single-letter reproduction law.
pub fn sample_codebook<R: Rng>(
    marginal: &FiniteDistribution,
    n: usize,
    m: usize,
    rng: &mut R,
) -> Codebook {
    Codebook {
        words: (0..m).map(|_| sample_block(marginal, n, rng)).collect(),
    }
}

/// The codeword a source block is mapped to.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringChoice {
    pub index: usize,
    pub word: Block,
    /// True when no codeword met the `eta1` threshold and the minimum was
    /// taken over the whole codebook instead.
    pub used_fallback: bool,
}

/// Map one source block through the codebook.
pub fn covering_map(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    distortion: &BlockDistortion,
    codebook: &Codebook,
    v: &Block,
    t1_threshold: f64,
) -> Result<CoveringChoice> {
    if codebook.is_empty() {
        return Err(CoveringError::EmptyCodebook);
    }
    let evaluator = EtaEvaluator::new(triple, accept, distortion);
    let mut etas = Vec::with_capacity(codebook.len());
    for word in codebook.words() {
        let pair = match &evaluator {
            Some(ev) => (ev.eta1_pair(v, word), ev.eta2_pair(v, word)),
            None => (
                eta1(triple, accept, v, word)?,
                eta2(triple, distortion, v, word)?,
            ),
        };
        etas.push(pair);
    }
    let (index, used_fallback) = select_codeword(&etas, t1_threshold);
    Ok(CoveringChoice {
        index,
        word: codebook.words()[index].clone(),
        used_fallback,
    })
}

/// Lowest-index `eta2` minimizer, preferring codewords under the `eta1`
/// threshold.
fn select_codeword(etas: &[(f64, f64)], t1_threshold: f64) -> (usize, bool) {
    let mut best_t1: Option<(usize, f64)> = None;
    let mut best_all: Option<(usize, f64)> = None;
    for (i, &(e1, e2)) in etas.iter().enumerate() {
        if best_all.map_or(true, |(_, b)| e2 < b) {
            best_all = Some((i, e2));
        }
        if e1 <= t1_threshold + ETA_EPS && best_t1.map_or(true, |(_, b)| e2 < b) {
            best_t1 = Some((i, e2));
        }
    }
    match best_t1 {
        Some((i, _)) => (i, false),
        None => (best_all.expect("codebook is nonempty").0, true),
    }
}

/// Exact performance of one fixed codebook: expectations over the source
/// law, not sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEval {
    /// `Pr{(U, F(V)) not in A}`.
    pub miss_prob: f64,
    /// `E[d_n(U, F(V))]`.
    pub achieved_distortion: f64,
    /// Probability mass of source blocks with no codeword under the
    /// `eta1` threshold.
    pub fallback_rate: f64,
    pub distinct_words_used: usize,
}

/// Evaluate a codebook exactly by enumerating the source block space.
///
/// Binary single-letter models with threshold-form sets take a fast path
/// that works on the joint type classes of `(v, w)` instead of scanning
/// every codeword per source block.
pub fn evaluate_codebook_exact(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    distortion: &BlockDistortion,
    codebook: &Codebook,
    t1_threshold: f64,
) -> Result<ExactEval> {
    if codebook.is_empty() {
        return Err(CoveringError::EmptyCodebook);
    }
    let evaluator = EtaEvaluator::new(triple, accept, distortion);
    if let Some(ev) = &evaluator {
        if binary_fast_path_applies(triple) {
            return evaluate_binary(triple, ev, codebook, t1_threshold);
        }
    }
    evaluate_generic(triple, accept, distortion, evaluator.as_ref(), codebook, t1_threshold)
}

fn binary_fast_path_applies(triple: &MarkovTriple) -> bool {
    triple.u_size() == 2
        && triple.v_size() == 2
        && triple.w_size() == 2
        && triple.blocklength() <= 60
        && (0..2).all(|v| triple.marginal_v().prob(v) > 0.0)
}

fn evaluate_generic(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    distortion: &BlockDistortion,
    evaluator: Option<&EtaEvaluator<'_>>,
    codebook: &Codebook,
    t1_threshold: f64,
) -> Result<ExactEval> {
    let n = triple.blocklength();
    let v_blocks = enumerate_blocks(triple.v_size(), n, DEFAULT_ENUMERATION_CAP)?;
    let pv = triple.marginal_v();
    let mut miss = 0.0;
    let mut achieved = 0.0;
    let mut fallback = 0.0;
    let mut used = HashSet::new();
    for v in &v_blocks {
        let p: f64 = v.symbols().iter().map(|&s| pv.prob(s)).product();
        if p == 0.0 {
            continue;
        }
        let mut etas = Vec::with_capacity(codebook.len());
        for word in codebook.words() {
            let pair = match evaluator {
                Some(ev) => (ev.eta1_pair(v, word), ev.eta2_pair(v, word)),
                None => (
                    eta1(triple, accept, v, word)?,
                    eta2(triple, distortion, v, word)?,
                ),
            };
            etas.push(pair);
        }
        let (index, used_fallback) = select_codeword(&etas, t1_threshold);
        miss += p * etas[index].0;
        achieved += p * etas[index].1;
        if used_fallback {
            fallback += p;
        }
        used.insert(index);
    }
    Ok(ExactEval {
        miss_prob: miss,
        achieved_distortion: achieved,
        fallback_rate: fallback,
        distinct_words_used: used.len(),
    })
}

/// Eta tables for one value of `z = weight(v)`, indexed `[a][b]` where `a`
/// counts positions with `v = 0, w = 1` and `b` positions with
/// `v = 1, w = 0`.
struct ZTables {
    e1: Vec<Vec<f64>>,
    e2: Vec<Vec<f64>>,
    /// Classes `(a, b)` sorted by ascending `e2`, then `(a, b)`.
    order: Vec<(usize, usize)>,
}

fn z_tables(ev: &EtaEvaluator<'_>, n: usize, z: usize) -> ZTables {
    let mut e1 = vec![vec![0.0; z + 1]; n - z + 1];
    let mut e2 = vec![vec![0.0; z + 1]; n - z + 1];
    let mut order = Vec::with_capacity((n - z + 1) * (z + 1));
    for a in 0..=(n - z) {
        for b in 0..=z {
            let counts = [
                (n - z - a) as u16, // v=0, w=0
                a as u16,           // v=0, w=1
                b as u16,           // v=1, w=0
                (z - b) as u16,     // v=1, w=1
            ];
            e1[a][b] = ev.eta1_for_counts(&counts);
            e2[a][b] = ev.eta2_for_counts(&counts);
            order.push((a, b));
        }
    }
    order.sort_by(|&(a1, b1), &(a2, b2)| {
        e2[a1][b1]
            .partial_cmp(&e2[a2][b2])
            .expect("finite eta values")
            .then(a1.cmp(&a2))
            .then(b1.cmp(&b2))
    });
    ZTables { e1, e2, order }
}

/// All masks with `k` bits set among the given positions, OR-ed onto `base`.
fn for_each_combo(positions: &[usize], k: usize, base: u64, f: &mut impl FnMut(u64)) {
    if k == 0 {
        f(base);
        return;
    }
    if positions.len() < k {
        return;
    }
    for_each_combo(&positions[1..], k - 1, base | (1u64 << positions[0]), f);
    for_each_combo(&positions[1..], k, base, f);
}

enum Probe {
    Found { a: usize, b: usize, index: usize },
    Empty,
    OverBudget,
}

/// Walk classes in ascending-`e2` order, returning the lowest codebook
/// index among the minimizing classes.
#[allow(clippy::too_many_arguments)]
fn probe_classes(
    classes: &[(usize, usize)],
    tables: &ZTables,
    v_mask: u64,
    zero_positions: &[usize],
    one_positions: &[usize],
    word_index: &HashMap<u64, usize>,
    binom: &[Vec<u64>],
    budget: &mut usize,
) -> Probe {
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for &(a, b) in classes {
        let e2 = tables.e2[a][b];
        if let Some((best_e2, ..)) = best {
            if e2 > best_e2 {
                break;
            }
        }
        let class_size =
            (binom[zero_positions.len()][a] * binom[one_positions.len()][b]) as usize;
        if *budget < class_size {
            return Probe::OverBudget;
        }
        *budget -= class_size;
        let mut class_min: Option<usize> = None;
        for_each_combo(zero_positions, a, 0, &mut |up| {
            for_each_combo(one_positions, b, up, &mut |flip| {
                if let Some(&i) = word_index.get(&(v_mask ^ flip)) {
                    class_min = Some(class_min.map_or(i, |m: usize| m.min(i)));
                }
            });
        });
        if let Some(i) = class_min {
            match best {
                Some((_, m, ..)) if m <= i => {}
                _ => best = Some((e2, i, a, b)),
            }
        }
    }
    match best {
        Some((_, index, a, b)) => Probe::Found { a, b, index },
        None => Probe::Empty,
    }
}

fn evaluate_binary(
    triple: &MarkovTriple,
    ev: &EtaEvaluator<'_>,
    codebook: &Codebook,
    t1_threshold: f64,
) -> Result<ExactEval> {
    let n = triple.blocklength();
    let full_mask: u64 = if n == 64 { !0 } else { (1u64 << n) - 1 };
    let word_masks: Vec<u64> = codebook
        .words()
        .iter()
        .map(|w| {
            w.symbols()
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &s)| m | ((s as u64) << i))
        })
        .collect();
    let mut word_index: HashMap<u64, usize> = HashMap::with_capacity(word_masks.len());
    for (i, &m) in word_masks.iter().enumerate() {
        word_index.entry(m).or_insert(i);
    }

    let tables: Vec<ZTables> = (0..=n).map(|z| z_tables(ev, n, z)).collect();
    let t1_orders: Vec<Vec<(usize, usize)>> = tables
        .iter()
        .map(|t| {
            t.order
                .iter()
                .copied()
                .filter(|&(a, b)| t.e1[a][b] <= t1_threshold + ETA_EPS)
                .collect()
        })
        .collect();

    let binom = {
        let mut c = vec![vec![0u64; n + 1]; n + 1];
        for i in 0..=n {
            c[i][0] = 1;
            for j in 1..=i {
                c[i][j] = c[i - 1][j - 1] + if j <= i - 1 { c[i - 1][j] } else { 0 };
            }
        }
        c
    };

    let pv = triple.marginal_v();
    let p0 = pv.prob(0);
    let p1 = pv.prob(1);
    let pow0: Vec<f64> = (0..=n).map(|k| p0.powi(k as i32)).collect();
    let pow1: Vec<f64> = (0..=n).map(|k| p1.powi(k as i32)).collect();

    let mut miss = 0.0;
    let mut achieved = 0.0;
    let mut fallback = 0.0;
    let mut used = HashSet::new();

    for v_mask in 0..=full_mask {
        let z = v_mask.count_ones() as usize;
        let p = pow0[n - z] * pow1[z];
        let zero_positions: Vec<usize> =
            (0..n).filter(|&i| v_mask & (1u64 << i) == 0).collect();
        let one_positions: Vec<usize> =
            (0..n).filter(|&i| v_mask & (1u64 << i) != 0).collect();
        let t = &tables[z];

        let mut budget = PROBE_BUDGET;
        let probed = match probe_classes(
            &t1_orders[z],
            t,
            v_mask,
            &zero_positions,
            &one_positions,
            &word_index,
            &binom,
            &mut budget,
        ) {
            Probe::Found { a, b, index } => Some((a, b, index, false)),
            Probe::Empty => match probe_classes(
                &t.order,
                t,
                v_mask,
                &zero_positions,
                &one_positions,
                &word_index,
                &binom,
                &mut budget,
            ) {
                Probe::Found { a, b, index } => Some((a, b, index, true)),
                Probe::Empty => return Err(CoveringError::EmptyCodebook),
                Probe::OverBudget => None,
            },
            Probe::OverBudget => None,
        };

        let (a, b, index, used_fallback) = match probed {
            Some(choice) => choice,
            None => linear_scan(&word_masks, v_mask, full_mask, t, t1_threshold),
        };

        miss += p * t.e1[a][b];
        achieved += p * t.e2[a][b];
        if used_fallback {
            fallback += p;
        }
        used.insert(index);
        if v_mask == full_mask {
            break;
        }
    }

    Ok(ExactEval {
        miss_prob: miss,
        achieved_distortion: achieved,
        fallback_rate: fallback,
        distinct_words_used: used.len(),
    })
}

fn linear_scan(
    word_masks: &[u64],
    v_mask: u64,
    full_mask: u64,
    t: &ZTables,
    t1_threshold: f64,
) -> (usize, usize, usize, bool) {
    let mut best_t1: Option<(f64, usize, usize, usize)> = None;
    let mut best_all: Option<(f64, usize, usize, usize)> = None;
    for (i, &w) in word_masks.iter().enumerate() {
        let a = (!v_mask & w & full_mask).count_ones() as usize;
        let b = (v_mask & !w).count_ones() as usize;
        let e2 = t.e2[a][b];
        if best_all.map_or(true, |(best, ..)| e2 < best) {
            best_all = Some((e2, a, b, i));
        }
        if t.e1[a][b] <= t1_threshold + ETA_EPS && best_t1.map_or(true, |(best, ..)| e2 < best) {
            best_t1 = Some((e2, a, b, i));
        }
    }
    match best_t1 {
        Some((_, a, b, i)) => (a, b, i, false),
        None => {
            let (_, a, b, i) = best_all.expect("codebook is nonempty");
            (a, b, i, true)
        }
    }
}

/// Parameters of one covering experiment.
#[derive(Debug, Clone)]
pub struct CoveringConfig {
    pub gamma: f64,
    /// Density-ratio level for the `T2` diagnostic; defaults to
    /// `rate + gamma / 2`.
    pub rho: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub m_cap: usize,
}

impl CoveringConfig {
    pub fn new(gamma: f64, trials: usize, seed: u64) -> Self {
        CoveringConfig {
            gamma,
            rho: None,
            trials,
            seed,
            m_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Outcome of one codebook draw (exact given the codebook).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub miss_prob: f64,
    pub achieved_distortion: f64,
    pub fallback_rate: f64,
    pub distinct_words_used: usize,
}

/// Aggregated covering experiment: codebook-averaged performance plus the
/// scenario constants it is judged against.
#[derive(Debug, Clone)]
pub struct CoveringReport {
    pub blocklength: usize,
    pub rate: f64,
    pub gamma: f64,
    pub rho: f64,
    pub m_used: usize,
    pub delta_n: f64,
    pub t1_threshold: f64,
    pub baseline_distortion: f64,
    pub miss_prob: f64,
    pub achieved_distortion: f64,
    pub fallback_rate: f64,
    pub per_trial: Vec<TrialOutcome>,
}

/// Run the covering experiment: draw `trials` codebooks, evaluate each
/// exactly, and average. Trial `t` uses stream `t` of the seed, so results
/// are byte-identical regardless of thread count.
pub fn monte_carlo_covering(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    distortion: &BlockDistortion,
    config: &CoveringConfig,
) -> Result<CoveringReport> {
    if config.trials == 0 {
        return Err(CoveringError::Domain {
            name: "trials",
            value: 0.0,
            domain: ">= 1",
        });
    }
    let n = triple.blocklength();
    let rate = mutual_information(&triple.joint_vw());
    let m = codebook_size(rate, config.gamma, n, config.m_cap)?;
    let delta = delta_n(triple, accept, n)?;
    let threshold = delta.sqrt();
    let rho = config.rho.unwrap_or(rate + config.gamma / 2.0);
    let baseline = baseline_distortion(triple, distortion, n)?;

    let per_trial: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(config.seed, trial as u64).rng();
            let codebook = sample_codebook(triple.marginal_w(), n, m, &mut rng);
            let eval =
                evaluate_codebook_exact(triple, accept, distortion, &codebook, threshold)?;
            Ok(TrialOutcome {
                trial,
                miss_prob: eval.miss_prob,
                achieved_distortion: eval.achieved_distortion,
                fallback_rate: eval.fallback_rate,
                distinct_words_used: eval.distinct_words_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let t = config.trials as f64;
    Ok(CoveringReport {
        blocklength: n,
        rate,
        gamma: config.gamma,
        rho,
        m_used: m,
        delta_n: delta,
        t1_threshold: threshold,
        baseline_distortion: baseline,
        miss_prob: per_trial.iter().map(|o| o.miss_prob).sum::<f64>() / t,
        achieved_distortion: per_trial.iter().map(|o| o.achieved_distortion).sum::<f64>() / t,
        fallback_rate: per_trial.iter().map(|o| o.fallback_rate).sum::<f64>() / t,
        per_trial,
    })
}

/// Specialize the construction to probability covering: the acceptance set
/// is everything, the distortion is the outside-indicator of the target
/// set, and the covered probability is one minus the achieved distortion.
#[derive(Debug, Clone)]
pub struct SetCoveringReport {
    pub covering: CoveringReport,
    /// `Pr{(U, F(V)) in B}`, codebook-averaged.
    pub covered_probability: f64,
    /// `Pr{(U, W) in B}` with `W` drawn fresh through the channel.
    pub baseline_probability: f64,
}

pub fn set_covering_reduction(
    triple: &MarkovTriple,
    target_set: &AcceptanceSet,
    config: &CoveringConfig,
) -> Result<SetCoveringReport> {
    let accept = AcceptanceSet::full();
    let distortion = BlockDistortion::outside_indicator(target_set.clone());
    let covering = monte_carlo_covering(triple, &accept, &distortion, config)?;
    Ok(SetCoveringReport {
        covered_probability: 1.0 - covering.achieved_distortion,
        baseline_probability: 1.0 - covering.baseline_distortion,
        covering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::accept::DistortionMeasure;
    use crate::prob::{compose_markov, ConditionalKernel, JointDistribution};

    fn dsbs_bsc(n: usize) -> MarkovTriple {
        compose_markov(JointDistribution::dsbs(0.1), ConditionalKernel::bsc(0.2), n).unwrap()
    }

    #[test]
    fn codebook_size_arithmetic() {
        // n = 4, rate = ln 2, gamma = ln 2: e^{8 ln 2} = 256.
        let m = codebook_size(2f64.ln(), 2f64.ln(), 4, 1 << 20).unwrap();
        assert_eq!(m, 256);
    }

    #[test]
    fn codebook_size_guards() {
        assert!(matches!(
            codebook_size(0.5, 0.0, 4, 1 << 20),
            Err(CoveringError::BadGamma(_))
        ));
        assert!(matches!(
            codebook_size(-0.1, 0.5, 4, 1 << 20),
            Err(CoveringError::NegativeRate(_))
        ));
        assert!(matches!(
            codebook_size(1.0, 1.0, 40, 1 << 20),
            Err(CoveringError::CodebookTooLarge { .. })
        ));
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let d = FiniteDistribution::uniform(2);
        let mut r1 = RngStream::new(11, 0).rng();
        let mut r2 = RngStream::new(11, 0).rng();
        let c1 = sample_codebook(&d, 8, 32, &mut r1);
        let c2 = sample_codebook(&d, 8, 32, &mut r2);
        assert_eq!(c1.words(), c2.words());
    }

    #[test]
    fn covering_map_prefers_exact_match() {
        let n = 4;
        let t = dsbs_bsc(n);
        let accept = AcceptanceSet::full();
        let dist = BlockDistortion::per_letter(DistortionMeasure::hamming(2));
        let v = Block(vec![0, 1, 1, 0]);
        let codebook = Codebook::new(vec![
            Block(vec![1, 1, 1, 1]),
            Block(vec![0, 1, 1, 0]),
            Block(vec![0, 1, 1, 0]),
        ])
        .unwrap();
        let choice = covering_map(&t, &accept, &dist, &codebook, &v, 0.0).unwrap();
        // eta2 is minimized by the matching word; ties go to the lower index.
        assert_eq!(choice.index, 1);
        assert!(!choice.used_fallback);
    }

    #[test]
    fn covering_map_fallback_when_no_t1_codeword() {
        let n = 2;
        let t = dsbs_bsc(n);
        // A tiny threshold no codeword can meet for a strict acceptance set.
        let accept = AcceptanceSet::distortion_threshold(DistortionMeasure::hamming(2), 0.0);
        let dist = BlockDistortion::per_letter(DistortionMeasure::hamming(2));
        let codebook = Codebook::new(vec![Block(vec![1, 1]), Block(vec![0, 0])]).unwrap();
        let choice =
            covering_map(&t, &accept, &dist, &codebook, &Block(vec![0, 0]), 0.0).unwrap();
        assert!(choice.used_fallback);
        assert_eq!(choice.index, 1);
    }

    #[test]
    fn fast_path_matches_generic_path() {
        let n = 6;
        let t = dsbs_bsc(n);
        let accept = AcceptanceSet::distortion_threshold(DistortionMeasure::hamming(2), 0.3);
        let dist = BlockDistortion::per_letter(DistortionMeasure::hamming(2));
        let ev = EtaEvaluator::new(&t, &accept, &dist).unwrap();
        let delta = delta_n(&t, &accept, n).unwrap();
        let mut rng = RngStream::new(5, 0).rng();
        for _ in 0..3 {
            let codebook = sample_codebook(t.marginal_w(), n, 24, &mut rng);
            let fast = evaluate_binary(&t, &ev, &codebook, delta.sqrt()).unwrap();
            let slow = evaluate_generic(
                &t,
                &accept,
                &dist,
                Some(&ev),
                &codebook,
                delta.sqrt(),
            )
            .unwrap();
            // Paths accumulate in different orders; agreement is up to
            // roundoff, the selections themselves are identical.
            assert!((fast.miss_prob - slow.miss_prob).abs() < 1e-12);
            assert!((fast.achieved_distortion - slow.achieved_distortion).abs() < 1e-12);
            assert!((fast.fallback_rate - slow.fallback_rate).abs() < 1e-12);
            assert_eq!(fast.distinct_words_used, slow.distinct_words_used);
        }
    }

    #[test]
    fn fast_path_matches_generic_path_density_set() {
        let n = 5;
        let t = dsbs_bsc(n);
        let mi = mutual_information(&t.joint_uw());
        let accept = AcceptanceSet::density_typical(&t, mi + 0.15);
        let dist = BlockDistortion::outside_indicator(accept.clone());
        let ev = EtaEvaluator::new(&t, &accept, &dist).unwrap();
        let delta = delta_n(&t, &accept, n).unwrap();
        let mut rng = RngStream::new(6, 0).rng();
        let codebook = sample_codebook(t.marginal_w(), n, 16, &mut rng);
        let fast = evaluate_binary(&t, &ev, &codebook, delta.sqrt()).unwrap();
        let slow =
            evaluate_generic(&t, &accept, &dist, Some(&ev), &codebook, delta.sqrt()).unwrap();
        assert!((fast.miss_prob - slow.miss_prob).abs() < 1e-12);
        assert!((fast.achieved_distortion - slow.achieved_distortion).abs() < 1e-12);
        assert!((fast.fallback_rate - slow.fallback_rate).abs() < 1e-12);
        assert_eq!(fast.distinct_words_used, slow.distinct_words_used);
    }

    #[test]
    fn full_space_codebook_covers_perfectly() {
        // Codebook = all blocks, Hamming distortion: achieved distortion 0.
        let n = 3;
        let t = dsbs_bsc(n);
        let accept = AcceptanceSet::full();
        let dist = BlockDistortion::per_letter(DistortionMeasure::hamming(2));
        let codebook = Codebook::new(enumerate_blocks(2, n, 1 << 20).unwrap()).unwrap();
        let eval = evaluate_codebook_exact(&t, &accept, &dist, &codebook, 0.0).unwrap();
        // Best codeword for v is the conditionally most likely word, not v
        // itself, but with U correlated to V the distortion must beat the
        // independent baseline.
        let baseline = baseline_distortion(&t, &dist, n).unwrap();
        assert!(eval.achieved_distortion < baseline);
        assert_eq!(eval.fallback_rate, 0.0);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let t = dsbs_bsc(4);
        let accept = AcceptanceSet::full();
        let dist = BlockDistortion::per_letter(DistortionMeasure::hamming(2));
        let config = CoveringConfig::new(0.5, 4, 42);
        let r1 = monte_carlo_covering(&t, &accept, &dist, &config).unwrap();
        let r2 = monte_carlo_covering(&t, &accept, &dist, &config).unwrap();
        assert_eq!(r1.per_trial, r2.per_trial);
        assert_eq!(r1.miss_prob.to_bits(), r2.miss_prob.to_bits());
        assert_eq!(
            r1.achieved_distortion.to_bits(),
            r2.achieved_distortion.to_bits()
        );
    }

    #[test]
    fn proposition_probabilities_are_complementary() {
        let t = dsbs_bsc(4);
        let mi = mutual_information(&t.joint_uw());
        let target = AcceptanceSet::density_typical(&t, mi + 0.2);
        let config = CoveringConfig::new(0.4, 3, 9);
        let report = set_covering_reduction(&t, &target, &config).unwrap();
        assert_eq!(
            report.covered_probability.to_bits(),
            (1.0 - report.covering.achieved_distortion).to_bits()
        );
        assert!(report.covered_probability >= report.baseline_probability - 1e-9);
        assert!((0.0..=1.0).contains(&report.covered_probability));
    }
}
