//! The two eta functions of the covering construction and the typicality
//! sets built from them.
//!
//! `eta1(v, w)` is the conditional probability, given `V = v`, that
//! `(U, w)` falls outside the acceptance set; `eta2(v, w)` is the
//! conditional expected distortion against the fixed `w`. Both reduce, for
//! per-letter models and threshold-style sets, to functions of the joint
//! type of `(v, w)`, which is what makes exact evaluation tractable at
//! nontrivial blocklengths.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::Rng;

use crate::prob::{enumerate_blocks, Block, MarkovTriple, DEFAULT_ENUMERATION_CAP};

use super::accept::{AcceptanceSet, BlockDistortion, LetterStat};
use super::Result;

/// Slack used when comparing block statistic sums against thresholds, so
/// lattice-valued statistics never flip on roundoff.
const STAT_EPS: f64 = 1e-9;
/// Slack for set-membership comparisons of eta values against thresholds.
const ETA_EPS: f64 = 1e-12;

/// A finite distribution over real statistic values, sorted by value.
type ValueDist = Vec<(f64, f64)>;

fn merge_values(mut entries: Vec<(f64, f64)>) -> ValueDist {
    entries.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite statistic values"));
    let mut out: ValueDist = Vec::with_capacity(entries.len());
    for (v, p) in entries {
        match out.last_mut() {
            Some(last) if (v - last.0).abs() <= STAT_EPS => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

fn convolve(a: &ValueDist, b: &ValueDist) -> ValueDist {
    let mut entries = Vec::with_capacity(a.len() * b.len());
    for &(va, pa) in a {
        for &(vb, pb) in b {
            entries.push((va + vb, pa * pb));
        }
    }
    merge_values(entries)
}

fn tail_above(dist: &ValueDist, threshold: f64) -> f64 {
    dist.iter()
        .filter(|(v, _)| *v > threshold + STAT_EPS)
        .map(|(_, p)| p)
        .sum()
}

/// Conditional block probability `P(u | v)` under the letterwise kernel.
fn cond_prob_u_given_v(triple: &MarkovTriple, u: &Block, v: &Block) -> Result<f64> {
    let mut p = 1.0;
    for (&us, &vs) in u.symbols().iter().zip(v.symbols()) {
        p *= triple.u_given_v(vs)?.prob(us);
        if p == 0.0 {
            break;
        }
    }
    Ok(p)
}

/// `eta1` by exact enumeration of the `u`-block space.
pub fn eta1(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    v: &Block,
    w: &Block,
) -> Result<f64> {
    if accept.is_full() {
        // The indicator never fires.
        for &vs in v.symbols() {
            triple.u_given_v(vs)?;
        }
        return Ok(0.0);
    }
    let n = v.len();
    let u_blocks = enumerate_blocks(triple.u_size(), n, DEFAULT_ENUMERATION_CAP)?;
    let mut total = 0.0;
    for u in &u_blocks {
        let p = cond_prob_u_given_v(triple, u, v)?;
        if p > 0.0 && !accept.contains(u, w) {
            total += p;
        }
    }
    Ok(total)
}

/// `eta2` by exact enumeration of the `u`-block space.
pub fn eta2(
    triple: &MarkovTriple,
    distortion: &BlockDistortion,
    v: &Block,
    w: &Block,
) -> Result<f64> {
    let n = v.len();
    let u_blocks = enumerate_blocks(triple.u_size(), n, DEFAULT_ENUMERATION_CAP)?;
    let mut total = 0.0;
    for u in &u_blocks {
        let p = cond_prob_u_given_v(triple, u, v)?;
        if p > 0.0 {
            total += p * distortion.block_value(u, w);
        }
    }
    Ok(total)
}

/// Conditional Monte-Carlo estimate of `eta1` with its standard error,
/// for `u`-spaces past the enumeration cap.
pub fn eta1_monte_carlo<R: Rng>(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    v: &Block,
    w: &Block,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    assert!(samples >= 2);
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut symbols = Vec::with_capacity(v.len());
        for &vs in v.symbols() {
            symbols.push(triple.u_given_v(vs)?.sample(rng));
        }
        let u = Block(symbols);
        if !accept.contains(&u, w) {
            hits += 1;
        }
    }
    let mean = hits as f64 / samples as f64;
    let stderr = (mean * (1.0 - mean) / samples as f64).sqrt();
    Ok((mean, stderr))
}

enum StatKind {
    /// Eta is identically zero (full acceptance / zero distortion).
    Zero,
    /// Eta is linear in the type: per-cell letter values.
    Linear { letter: Vec<f64> },
    /// Eta is a tail probability of a per-letter statistic sum.
    Tail {
        /// Distribution of the statistic of `(U, w)` given the `(v, w)` cell.
        cells: Vec<Option<ValueDist>>,
        level: f64,
    },
}

/// Type-indexed evaluator for the eta functions of one scenario.
///
/// Available whenever the acceptance set and the distortion have per-letter
/// threshold form; explicit-list sets must go through the brute-force
/// [`eta1`] / [`eta2`] path instead.
pub struct EtaEvaluator<'a> {
    triple: &'a MarkovTriple,
    n: usize,
    accept_stat: StatKind,
    dist_stat: StatKind,
    cache1: RefCell<HashMap<Vec<u16>, f64>>,
    cache2: RefCell<HashMap<Vec<u16>, f64>>,
}

impl<'a> EtaEvaluator<'a> {
    pub fn new(
        triple: &'a MarkovTriple,
        accept: &AcceptanceSet,
        distortion: &BlockDistortion,
    ) -> Option<Self> {
        let n = triple.blocklength();
        let accept_stat = match accept.letter_stat()? {
            None => StatKind::Zero,
            Some(stat) => StatKind::Tail {
                cells: build_cells(triple, &stat),
                level: stat.level,
            },
        };
        let dist_stat = match distortion {
            BlockDistortion::PerLetter(m) => StatKind::Linear {
                letter: linear_cells(triple, m.table()),
            },
            BlockDistortion::OutsideIndicator(set) => match set.letter_stat()? {
                None => StatKind::Zero,
                Some(stat) => StatKind::Tail {
                    cells: build_cells(triple, &stat),
                    level: stat.level,
                },
            },
        };
        Some(EtaEvaluator {
            triple,
            n,
            accept_stat,
            dist_stat,
            cache1: RefCell::new(HashMap::new()),
            cache2: RefCell::new(HashMap::new()),
        })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn triple(&self) -> &MarkovTriple {
        self.triple
    }

    fn cell_count(&self) -> usize {
        self.triple.v_size() * self.triple.w_size()
    }

    /// Joint type of a `(v, w)` block pair, flattened `v * w_size + w`.
    pub fn type_of(&self, v: &Block, w: &Block) -> Vec<u16> {
        let w_size = self.triple.w_size();
        let mut counts = vec![0u16; self.cell_count()];
        for (&vs, &ws) in v.symbols().iter().zip(w.symbols()) {
            counts[vs * w_size + ws] += 1;
        }
        counts
    }

    fn eval_stat(kind: &StatKind, counts: &[u16], n: usize) -> f64 {
        match kind {
            StatKind::Zero => 0.0,
            StatKind::Linear { letter } => {
                let sum: f64 = counts
                    .iter()
                    .zip(letter)
                    .filter(|(&c, _)| c > 0)
                    .map(|(&c, &l)| c as f64 * l)
                    .sum();
                sum / n as f64
            }
            StatKind::Tail { cells, level } => {
                let mut acc: ValueDist = vec![(0.0, 1.0)];
                for (c, cell) in counts.iter().zip(cells) {
                    if *c == 0 {
                        continue;
                    }
                    let cell = cell.as_ref().expect("eta on zero-mass v symbol");
                    for _ in 0..*c {
                        acc = convolve(&acc, cell);
                    }
                }
                tail_above(&acc, level * n as f64)
            }
        }
    }

    /// `eta1` as a function of the joint type.
    pub fn eta1_for_counts(&self, counts: &[u16]) -> f64 {
        if matches!(self.accept_stat, StatKind::Zero) {
            return 0.0;
        }
        if let Some(&v) = self.cache1.borrow().get(counts) {
            return v;
        }
        let v = Self::eval_stat(&self.accept_stat, counts, self.n);
        self.cache1.borrow_mut().insert(counts.to_vec(), v);
        v
    }

    /// `eta2` as a function of the joint type.
    pub fn eta2_for_counts(&self, counts: &[u16]) -> f64 {
        match &self.dist_stat {
            StatKind::Zero => 0.0,
            StatKind::Linear { .. } => Self::eval_stat(&self.dist_stat, counts, self.n),
            StatKind::Tail { .. } => {
                if let Some(&v) = self.cache2.borrow().get(counts) {
                    return v;
                }
                let v = Self::eval_stat(&self.dist_stat, counts, self.n);
                self.cache2.borrow_mut().insert(counts.to_vec(), v);
                v
            }
        }
    }

    pub fn eta1_pair(&self, v: &Block, w: &Block) -> f64 {
        self.eta1_for_counts(&self.type_of(v, w))
    }

    pub fn eta2_pair(&self, v: &Block, w: &Block) -> f64 {
        self.eta2_for_counts(&self.type_of(v, w))
    }
}

/// Distribution of `stat(U, w)` given the `(v, w)` cell, per cell.
fn build_cells(triple: &MarkovTriple, stat: &LetterStat) -> Vec<Option<ValueDist>> {
    let mut cells = Vec::with_capacity(triple.v_size() * triple.w_size());
    for v in 0..triple.v_size() {
        for w in 0..triple.w_size() {
            cells.push(triple.u_given_v(v).ok().map(|row| {
                merge_values(
                    row.support()
                        .map(|u| (stat.table[u][w], row.prob(u)))
                        .collect(),
                )
            }));
        }
    }
    cells
}

/// Per-cell expected per-letter distortion `E[d(U, w) | v]`; NaN marks
/// zero-mass `v` rows.
fn linear_cells(triple: &MarkovTriple, table: &[Vec<f64>]) -> Vec<f64> {
    let mut cells = Vec::with_capacity(triple.v_size() * triple.w_size());
    for v in 0..triple.v_size() {
        for w in 0..triple.w_size() {
            cells.push(match triple.u_given_v(v) {
                Ok(row) => row.support().map(|u| row.prob(u) * table[u][w]).sum(),
                Err(_) => f64::NAN,
            });
        }
    }
    cells
}

/// `delta_n = E[eta1(V, W)] = Pr{(U, W) not in A}`, exact.
pub fn delta_n(triple: &MarkovTriple, accept: &AcceptanceSet, n: usize) -> Result<f64> {
    match accept.letter_stat() {
        Some(None) => Ok(0.0),
        Some(Some(stat)) => {
            let joint_uw = triple.joint_uw();
            let mut entries = Vec::new();
            for u in 0..joint_uw.left_size() {
                for w in 0..joint_uw.right_size() {
                    let p = joint_uw.prob(u, w);
                    if p > 0.0 {
                        entries.push((stat.table[u][w], p));
                    }
                }
            }
            let letter = merge_values(entries);
            let mut acc: ValueDist = vec![(0.0, 1.0)];
            for _ in 0..n {
                acc = convolve(&acc, &letter);
            }
            Ok(tail_above(&acc, stat.level * n as f64))
        }
        None => {
            // Explicit lists: brute-force over the (u, w) block space.
            let u_blocks = enumerate_blocks(triple.u_size(), n, DEFAULT_ENUMERATION_CAP)?;
            let w_blocks = enumerate_blocks(triple.w_size(), n, DEFAULT_ENUMERATION_CAP)?;
            let joint_uw = triple.joint_uw();
            let mut total = 0.0;
            for u in &u_blocks {
                for w in &w_blocks {
                    if accept.contains(u, w) {
                        continue;
                    }
                    let p: f64 = u
                        .symbols()
                        .iter()
                        .zip(w.symbols())
                        .map(|(&a, &b)| joint_uw.prob(a, b))
                        .product();
                    total += p;
                }
            }
            Ok(total)
        }
    }
}

/// Exact baseline `E[d_n(U, W)]` (equals `E[eta2(V, W)]`).
pub fn baseline_distortion(
    triple: &MarkovTriple,
    distortion: &BlockDistortion,
    n: usize,
) -> Result<f64> {
    match distortion {
        BlockDistortion::PerLetter(m) => {
            let joint_uw = triple.joint_uw();
            let mut total = 0.0;
            for u in 0..joint_uw.left_size() {
                for w in 0..joint_uw.right_size() {
                    total += joint_uw.prob(u, w) * m.per_letter(u, w);
                }
            }
            Ok(total)
        }
        BlockDistortion::OutsideIndicator(set) => delta_n(triple, set, n),
    }
}

/// Membership in `T1`: `eta1(v, w) <= threshold` (threshold is the caller's
/// `sqrt(delta_n)`).
pub fn in_t1(
    triple: &MarkovTriple,
    accept: &AcceptanceSet,
    v: &Block,
    w: &Block,
    threshold: f64,
) -> Result<bool> {
    Ok(eta1(triple, accept, v, w)? <= threshold + ETA_EPS)
}

/// Membership in `T2(rho)`: normalized conditional/marginal log ratio of
/// the `w` block given `v` at or below `rho`. A zero-marginal `w` symbol
/// makes the ratio undefined and the pair a non-member.
pub fn in_t2(triple: &MarkovTriple, v: &Block, w: &Block, rho: f64) -> Result<bool> {
    let kernel = triple.kernel_w_given_v();
    let pw = triple.marginal_w();
    let n = v.len();
    let mut sum = 0.0;
    for (&vs, &ws) in v.symbols().iter().zip(w.symbols()) {
        let marginal = pw.prob(ws);
        if marginal <= 0.0 {
            return Ok(false);
        }
        sum += (kernel.prob(ws, vs) / marginal).ln();
        if sum == f64::NEG_INFINITY {
            return Ok(true);
        }
    }
    Ok(sum <= rho * n as f64 + STAT_EPS)
}

/// Enumerate joint types of length `n` over cells with the given
/// probabilities, calling `f(counts, weight)` for each type with positive
/// probability weight.
fn for_each_type(n: usize, probs: &[f64], f: &mut impl FnMut(&[u16], f64)) {
    let log_fact: Vec<f64> = {
        let mut lf = vec![0.0; n + 1];
        for i in 1..=n {
            lf[i] = lf[i - 1] + (i as f64).ln();
        }
        lf
    };
    let mut counts = vec![0u16; probs.len()];

    fn rec(
        cell: usize,
        remaining: usize,
        log_weight: f64,
        counts: &mut Vec<u16>,
        probs: &[f64],
        log_fact: &[f64],
        f: &mut impl FnMut(&[u16], f64),
    ) {
        if cell + 1 == probs.len() {
            if remaining > 0 && probs[cell] == 0.0 {
                return;
            }
            counts[cell] = remaining as u16;
            let lw = log_weight
                + if remaining > 0 {
                    remaining as f64 * probs[cell].ln() - log_fact[remaining]
                } else {
                    0.0
                };
            f(counts, lw.exp());
            counts[cell] = 0;
            return;
        }
        let max_here = if probs[cell] == 0.0 { 0 } else { remaining };
        for c in 0..=max_here {
            counts[cell] = c as u16;
            let lw = log_weight
                + if c > 0 {
                    c as f64 * probs[cell].ln() - log_fact[c]
                } else {
                    0.0
                };
            rec(cell + 1, remaining - c, lw, counts, probs, log_fact, f);
        }
        counts[cell] = 0;
    }

    rec(0, n, log_fact[n], &mut counts, probs, &log_fact, f);
}

/// Exact `Pr{(V, W) not in T1}` for the scenario behind the evaluator.
pub fn prob_not_in_t1(evaluator: &EtaEvaluator<'_>, threshold: f64) -> f64 {
    let triple = evaluator.triple();
    let joint_vw = triple.joint_vw();
    let probs: Vec<f64> = joint_vw.probs().to_vec();
    let mut total = 0.0;
    for_each_type(evaluator.blocklength(), &probs, &mut |counts, weight| {
        if weight > 0.0 && evaluator.eta1_for_counts(counts) > threshold + ETA_EPS {
            total += weight;
        }
    });
    total
}

/// Exact `Pr{(V, W) not in T2(rho)}` at blocklength `n`.
pub fn prob_not_in_t2(triple: &MarkovTriple, rho: f64, n: usize) -> f64 {
    let joint_vw = triple.joint_vw();
    let kernel = triple.kernel_w_given_v();
    let pw = triple.marginal_w();
    let mut entries = Vec::new();
    for v in 0..triple.v_size() {
        for w in 0..triple.w_size() {
            let p = joint_vw.prob(v, w);
            if p > 0.0 {
                entries.push(((kernel.prob(w, v) / pw.prob(w)).ln(), p));
            }
        }
    }
    let letter = merge_values(entries);
    let mut acc: ValueDist = vec![(0.0, 1.0)];
    for _ in 0..n {
        acc = convolve(&acc, &letter);
    }
    tail_above(&acc, rho * n as f64)
}
