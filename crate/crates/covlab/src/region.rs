//! Two-terminal coding systems and the rate-distortion region they live
//! in: encoders, decoders, operational rates, exact/sampled distortion, and
//! a test-channel sweep producing the achievable (R1, R2) frontier at a
//! distortion target.

use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::covering::PairDistortion;
use crate::info::mutual_information;
use crate::prob::{
    block_space_size, enumerate_blocks, Block, ConditionalKernel, FiniteDistribution,
    JointDistribution, ProbError, DEFAULT_ENUMERATION_CAP,
};
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("argument {name} = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// A block encoder: a total map from source blocks (by rank) to indices.
#[derive(Debug, Clone)]
pub struct Encoder {
    map: Vec<usize>,
    range_size: usize,
    alphabet: usize,
    blocklength: usize,
}

impl Encoder {
    pub fn new(
        map: Vec<usize>,
        range_size: usize,
        alphabet: usize,
        blocklength: usize,
    ) -> Result<Self> {
        let domain = block_space_size(alphabet, blocklength, DEFAULT_ENUMERATION_CAP)?;
        if map.len() != domain {
            return Err(RegionError::Invalid {
                what: "encoder map",
                detail: format!("expected {domain} entries, got {}", map.len()),
            });
        }
        if let Some(&bad) = map.iter().find(|&&i| i >= range_size) {
            return Err(RegionError::Invalid {
                what: "encoder map",
                detail: format!("index {bad} outside range of size {range_size}"),
            });
        }
        Ok(Encoder {
            map,
            range_size,
            alphabet,
            blocklength,
        })
    }

    pub fn constant(index: usize, range_size: usize, alphabet: usize, n: usize) -> Result<Self> {
        let domain = block_space_size(alphabet, n, DEFAULT_ENUMERATION_CAP)?;
        Encoder::new(vec![index; domain], range_size, alphabet, n)
    }

    /// Lossless encoder: every block gets its own index (its rank).
    pub fn identity(alphabet: usize, n: usize) -> Result<Self> {
        let domain = block_space_size(alphabet, n, DEFAULT_ENUMERATION_CAP)?;
        Encoder::new((0..domain).collect(), domain, alphabet, n)
    }

    pub fn encode(&self, block: &Block) -> usize {
        self.map[block.rank(self.alphabet)]
    }

    pub fn range_size(&self) -> usize {
        self.range_size
    }

    pub fn blocklength(&self) -> usize {
        self.blocklength
    }
}

/// Operational rate in nats per symbol: log-cardinality of the image
/// actually hit, not of the declared range.
pub fn code_rate(encoder: &Encoder) -> f64 {
    let used: HashSet<usize> = encoder.map.iter().copied().collect();
    (used.len() as f64).ln() / encoder.blocklength as f64
}

/// A decoder: a total map from index pairs to a reconstruction block pair.
#[derive(Debug, Clone)]
pub struct Decoder {
    map: Vec<(Block, Block)>,
    range1: usize,
    range2: usize,
}

impl Decoder {
    pub fn new(map: Vec<(Block, Block)>, range1: usize, range2: usize) -> Result<Self> {
        if map.len() != range1 * range2 {
            return Err(RegionError::Invalid {
                what: "decoder map",
                detail: format!("expected {} entries, got {}", range1 * range2, map.len()),
            });
        }
        Ok(Decoder {
            map,
            range1,
            range2,
        })
    }

    pub fn decode(&self, i1: usize, i2: usize) -> &(Block, Block) {
        &self.map[i1 * self.range2 + i2]
    }

    pub fn range_sizes(&self) -> (usize, usize) {
        (self.range1, self.range2)
    }
}

/// A rate pair with the distortion it is achieved at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple {
    pub r1: f64,
    pub r2: f64,
    pub d: f64,
}

impl RateTriple {
    pub fn new(r1: f64, r2: f64, d: f64) -> Result<Self> {
        for (name, value) in [("r1", r1), ("r2", r2), ("d", d)] {
            if !(value >= 0.0) {
                return Err(RegionError::Domain {
                    name,
                    value,
                    domain: ">= 0",
                });
            }
        }
        Ok(RateTriple { r1, r2, d })
    }
}

/// A pair of test channels with reconstruction maps; the four-way law
/// factorizes as `P(x1,x2) * P(z1|x1) * P(z2|x2)` by construction.
#[derive(Debug, Clone)]
pub struct TestChannelPair {
    pub k1: ConditionalKernel,
    pub k2: ConditionalKernel,
    /// `h1[z1 * |Z2| + z2]` = first-terminal reconstruction symbol.
    pub h1: Vec<usize>,
    /// `h2[z1 * |Z2| + z2]` = second-terminal reconstruction symbol.
    pub h2: Vec<usize>,
}

impl TestChannelPair {
    pub fn z1_size(&self) -> usize {
        self.k1.output_size()
    }

    pub fn z2_size(&self) -> usize {
        self.k2.output_size()
    }

    /// FNV-1a over the kernel entries and reconstruction maps; used to
    /// identify a channel in CSV output.
    pub fn channel_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        };
        for kernel in [&self.k1, &self.k2] {
            for input in 0..kernel.input_size() {
                for output in 0..kernel.output_size() {
                    for b in kernel.prob(output, input).to_bits().to_le_bytes() {
                        eat(b);
                    }
                }
            }
        }
        for map in [&self.h1, &self.h2] {
            for &y in map {
                for b in (y as u64).to_le_bytes() {
                    eat(b);
                }
            }
        }
        h
    }
}

/// The three rate bounds of a test-channel pair, plus the distortion its
/// reconstructions achieve.
#[derive(Debug, Clone)]
pub struct RegionReport {
    pub i_x1z1: f64,
    pub i_x2z2: f64,
    pub i_z1z2: f64,
    /// `max(I(X1;Z1) - I(Z1;Z2), 0)` and friends; `clamped` records which
    /// differences were negative before clamping.
    pub b1: f64,
    pub b2: f64,
    pub b12: f64,
    pub clamped: [bool; 3],
    pub distortion: f64,
}

fn validate_channel(
    joint_x: &JointDistribution,
    channel: &TestChannelPair,
    d: &PairDistortion,
) -> Result<()> {
    let sizes = d.sizes();
    let checks = [
        ("k1 input", channel.k1.input_size(), joint_x.left_size()),
        ("k2 input", channel.k2.input_size(), joint_x.right_size()),
        ("d x1 size", sizes[0], joint_x.left_size()),
        ("d x2 size", sizes[1], joint_x.right_size()),
        (
            "h1 length",
            channel.h1.len(),
            channel.z1_size() * channel.z2_size(),
        ),
        (
            "h2 length",
            channel.h2.len(),
            channel.z1_size() * channel.z2_size(),
        ),
    ];
    for (what, got, expected) in checks {
        if got != expected {
            return Err(RegionError::Invalid {
                what,
                detail: format!("expected {expected}, got {got}"),
            });
        }
    }
    if channel.h1.iter().any(|&y| y >= sizes[2]) || channel.h2.iter().any(|&y| y >= sizes[3]) {
        return Err(RegionError::Invalid {
            what: "reconstruction map",
            detail: "symbol outside reconstruction alphabet".to_string(),
        });
    }
    Ok(())
}

/// Single-letter joint of `(Z1, Z2)` under the factorized four-way law.
fn z_pair_joint(
    joint_x: &JointDistribution,
    k1: &ConditionalKernel,
    k2: &ConditionalKernel,
) -> JointDistribution {
    let (t1, t2) = (k1.output_size(), k2.output_size());
    let mut probs = vec![0.0; t1 * t2];
    for x1 in 0..joint_x.left_size() {
        for x2 in 0..joint_x.right_size() {
            let p = joint_x.prob(x1, x2);
            if p == 0.0 {
                continue;
            }
            for z1 in 0..t1 {
                for z2 in 0..t2 {
                    probs[z1 * t2 + z2] += p * k1.prob(z1, x1) * k2.prob(z2, x2);
                }
            }
        }
    }
    JointDistribution::new(probs, t1, t2).expect("product of validated factors")
}

/// Evaluate the three rate bounds and the reconstruction distortion of one
/// test-channel pair against an i.i.d. pair source.
pub fn rate_region_bounds(
    joint_x: &JointDistribution,
    channel: &TestChannelPair,
    d: &PairDistortion,
) -> Result<RegionReport> {
    validate_channel(joint_x, channel, d)?;
    let i1 = mutual_information(&JointDistribution::from_marginal_kernel(
        &joint_x.marginal_left(),
        &channel.k1,
    )?);
    let i2 = mutual_information(&JointDistribution::from_marginal_kernel(
        &joint_x.marginal_right(),
        &channel.k2,
    )?);
    let iz = mutual_information(&z_pair_joint(joint_x, &channel.k1, &channel.k2));

    let raw = [i1 - iz, i2 - iz, i1 + i2 - iz];
    let clamped = [raw[0] < 0.0, raw[1] < 0.0, raw[2] < 0.0];

    let t2 = channel.z2_size();
    let mut distortion = 0.0;
    for x1 in 0..joint_x.left_size() {
        for x2 in 0..joint_x.right_size() {
            let p = joint_x.prob(x1, x2);
            if p == 0.0 {
                continue;
            }
            for z1 in 0..channel.z1_size() {
                for z2 in 0..t2 {
                    let w = p * channel.k1.prob(z1, x1) * channel.k2.prob(z2, x2);
                    if w > 0.0 {
                        let cell = z1 * t2 + z2;
                        distortion += w * d.value(x1, x2, channel.h1[cell], channel.h2[cell]);
                    }
                }
            }
        }
    }

    Ok(RegionReport {
        i_x1z1: i1,
        i_x2z2: i2,
        i_z1z2: iz,
        b1: raw[0].max(0.0),
        b2: raw[1].max(0.0),
        b12: raw[2].max(0.0),
        clamped,
        distortion,
    })
}

/// Distortion-minimizing reconstruction maps for fixed kernels: each
/// `(z1, z2)` cell independently picks the `(y1, y2)` pair minimizing the
/// posterior expected distortion, ties to the lowest pair.
pub fn best_reconstruction_maps(
    joint_x: &JointDistribution,
    k1: &ConditionalKernel,
    k2: &ConditionalKernel,
    d: &PairDistortion,
) -> (Vec<usize>, Vec<usize>) {
    let sizes = d.sizes();
    let (t1, t2) = (k1.output_size(), k2.output_size());
    let mut h1 = vec![0usize; t1 * t2];
    let mut h2 = vec![0usize; t1 * t2];
    for z1 in 0..t1 {
        for z2 in 0..t2 {
            let mut best = f64::INFINITY;
            let mut pick = (0usize, 0usize);
            for y1 in 0..sizes[2] {
                for y2 in 0..sizes[3] {
                    let mut cost = 0.0;
                    for x1 in 0..joint_x.left_size() {
                        for x2 in 0..joint_x.right_size() {
                            let w = joint_x.prob(x1, x2) * k1.prob(z1, x1) * k2.prob(z2, x2);
                            if w > 0.0 {
                                cost += w * d.value(x1, x2, y1, y2);
                            }
                        }
                    }
                    if cost < best {
                        best = cost;
                        pick = (y1, y2);
                    }
                }
            }
            h1[z1 * t2 + z2] = pick.0;
            h2[z1 * t2 + z2] = pick.1;
        }
    }
    (h1, h2)
}

/// How a block-coding system is averaged.
#[derive(Debug, Clone, Copy)]
pub enum SimMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct SimResult {
    pub distortion: f64,
    /// Standard error for Monte-Carlo mode; `None` for exact sums.
    pub stderr: Option<f64>,
}

/// Average distortion of a full encoder/decoder system against an i.i.d.
/// pair source.
pub fn simulate_system(
    joint_x: &JointDistribution,
    enc1: &Encoder,
    enc2: &Encoder,
    decoder: &Decoder,
    d: &PairDistortion,
    mode: SimMode,
) -> Result<SimResult> {
    let n = enc1.blocklength();
    if enc2.blocklength() != n {
        return Err(RegionError::Invalid {
            what: "encoders",
            detail: "blocklength mismatch".to_string(),
        });
    }
    if decoder.range_sizes() != (enc1.range_size(), enc2.range_size()) {
        return Err(RegionError::Invalid {
            what: "decoder",
            detail: "index range mismatch with encoders".to_string(),
        });
    }

    let block_d = |b1: &Block, b2: &Block| -> f64 {
        let (y1, y2) = decoder.decode(enc1.encode(b1), enc2.encode(b2));
        let sum: f64 = (0..n)
            .map(|k| d.value(b1.symbols()[k], b2.symbols()[k], y1.symbols()[k], y2.symbols()[k]))
            .sum();
        sum / n as f64
    };

    match mode {
        SimMode::Exact => {
            let x1_blocks = enumerate_blocks(joint_x.left_size(), n, DEFAULT_ENUMERATION_CAP)?;
            let x2_blocks = enumerate_blocks(joint_x.right_size(), n, DEFAULT_ENUMERATION_CAP)?;
            let mut total = 0.0;
            for b1 in &x1_blocks {
                for b2 in &x2_blocks {
                    let p: f64 = b1
                        .symbols()
                        .iter()
                        .zip(b2.symbols())
                        .map(|(&a, &b)| joint_x.prob(a, b))
                        .product();
                    if p > 0.0 {
                        total += p * block_d(b1, b2);
                    }
                }
            }
            Ok(SimResult {
                distortion: total,
                stderr: None,
            })
        }
        SimMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(RegionError::Domain {
                    name: "samples",
                    value: samples as f64,
                    domain: ">= 2",
                });
            }
            let s2 = joint_x.right_size();
            let flat = FiniteDistribution::new(joint_x.probs().to_vec())?;
            let mut rng = RngStream::new(seed, 0).rng();
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let mut b1 = Vec::with_capacity(n);
                let mut b2 = Vec::with_capacity(n);
                for _ in 0..n {
                    let pair = flat.sample(&mut rng);
                    b1.push(pair / s2);
                    b2.push(pair % s2);
                }
                let v = block_d(&Block(b1), &Block(b2));
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / samples as f64;
            let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
            Ok(SimResult {
                distortion: mean,
                stderr: Some((var / samples as f64).sqrt()),
            })
        }
    }
}

/// One achievable rate pair on the swept frontier.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    pub rates: RateTriple,
    pub channel: TestChannelPair,
}

/// Result of a region sweep; an empty feasible set is a result, not an
/// error.
#[derive(Debug, Clone)]
pub struct Frontier {
    pub target_d: f64,
    pub feasible_channels: usize,
    /// Pareto-minimal rate pairs sorted by ascending `r1`.
    pub points: Vec<FrontierPoint>,
}

impl Frontier {
    pub fn is_feasible(&self) -> bool {
        !self.points.is_empty()
    }

    /// Smallest `r1 + r2` over the frontier.
    pub fn min_sum_rate(&self) -> Option<f64> {
        self.points
            .iter()
            .map(|p| p.rates.r1 + p.rates.r2)
            .min_by(|a, b| a.partial_cmp(b).expect("finite rates"))
    }
}

const FEASIBILITY_SLACK: f64 = 1e-9;

/// All probability rows on a `dim`-simplex lattice with `points` levels
/// per coordinate, in lexicographic order.
fn simplex_grid(dim: usize, points: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && points >= 2);
    let steps = points - 1;
    let mut rows = Vec::new();
    let mut current = vec![0usize; dim];
    fn rec(
        slot: usize,
        remaining: usize,
        steps: usize,
        current: &mut Vec<usize>,
        rows: &mut Vec<Vec<f64>>,
    ) {
        if slot + 1 == current.len() {
            current[slot] = remaining;
            rows.push(
                current
                    .iter()
                    .map(|&c| c as f64 / steps as f64)
                    .collect(),
            );
            return;
        }
        for c in 0..=remaining {
            current[slot] = c;
            rec(slot + 1, remaining - c, steps, current, rows);
        }
    }
    rec(0, steps, steps, &mut current, &mut rows);
    rows
}

/// Every kernel whose rows all lie on the simplex grid.
fn grid_kernels(inputs: usize, outputs: usize, points: usize) -> Vec<ConditionalKernel> {
    let rows = simplex_grid(outputs, points);
    let mut kernels = Vec::new();
    let mut picks = vec![0usize; inputs];
    loop {
        let chosen: Vec<FiniteDistribution> = picks
            .iter()
            .map(|&i| FiniteDistribution::new(rows[i].clone()).expect("grid rows are normalized"))
            .collect();
        kernels.push(ConditionalKernel::new(chosen).expect("nonempty rows"));
        let mut slot = inputs;
        loop {
            if slot == 0 {
                return kernels;
            }
            slot -= 1;
            picks[slot] += 1;
            if picks[slot] < rows.len() {
                break;
            }
            picks[slot] = 0;
        }
    }
}

fn evaluate_channel_pair(
    joint_x: &JointDistribution,
    k1: &ConditionalKernel,
    k2: &ConditionalKernel,
    d: &PairDistortion,
    target_d: f64,
) -> Option<Vec<FrontierPoint>> {
    let (h1, h2) = best_reconstruction_maps(joint_x, k1, k2, d);
    let channel = TestChannelPair {
        k1: k1.clone(),
        k2: k2.clone(),
        h1,
        h2,
    };
    let report = rate_region_bounds(joint_x, &channel, d).expect("validated dimensions");
    if report.distortion > target_d + FEASIBILITY_SLACK {
        return None;
    }
    // Corner points of the rectangle-minus-sum-constraint region.
    let corners = [
        (report.b1, (report.b12 - report.b1).max(0.0)),
        ((report.b12 - report.b2).max(0.0), report.b2),
    ];
    Some(
        corners
            .iter()
            .map(|&(r1, r2)| FrontierPoint {
                rates: RateTriple {
                    r1,
                    r2,
                    d: report.distortion,
                },
                channel: channel.clone(),
            })
            .collect(),
    )
}

/// Lower-left Pareto reduction, sorted by ascending `r1`.
fn pareto_frontier(mut points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    points.sort_by(|a, b| {
        a.rates
            .r1
            .partial_cmp(&b.rates.r1)
            .expect("finite rates")
            .then(a.rates.r2.partial_cmp(&b.rates.r2).expect("finite rates"))
    });
    let mut kept: Vec<FrontierPoint> = Vec::new();
    for p in points {
        if kept
            .last()
            .map_or(true, |q| p.rates.r2 < q.rates.r2 - 1e-12)
        {
            kept.push(p);
        }
    }
    kept
}

/// Sweep test-channel pairs on a simplex lattice and return the Pareto
/// frontier of rate pairs meeting the distortion target.
pub fn region_sweep(
    joint_x: &JointDistribution,
    aux_sizes: (usize, usize),
    grid_points: usize,
    d: &PairDistortion,
    target_d: f64,
) -> Result<Frontier> {
    if !(1..=4).contains(&aux_sizes.0) || !(1..=4).contains(&aux_sizes.1) {
        return Err(RegionError::Domain {
            name: "aux_sizes",
            value: aux_sizes.0.max(aux_sizes.1) as f64,
            domain: "1..=4",
        });
    }
    if grid_points < 3 {
        return Err(RegionError::Domain {
            name: "grid_points",
            value: grid_points as f64,
            domain: ">= 3",
        });
    }
    let kernels1 = grid_kernels(joint_x.left_size(), aux_sizes.0, grid_points);
    let kernels2 = grid_kernels(joint_x.right_size(), aux_sizes.1, grid_points);

    // Prune per task: at loose targets nearly every channel pair is
    // feasible, and keeping all of them alive would exhaust memory on
    // fine grids.
    let per_k1: Vec<(usize, Vec<FrontierPoint>)> = kernels1
        .par_iter()
        .map(|k1| {
            let mut feasible = 0usize;
            let mut points = Vec::new();
            for k2 in &kernels2 {
                if let Some(mut p) = evaluate_channel_pair(joint_x, k1, k2, d, target_d) {
                    feasible += 1;
                    points.append(&mut p);
                    if points.len() >= 4096 {
                        points = pareto_frontier(points);
                    }
                }
            }
            (feasible, pareto_frontier(points))
        })
        .collect();

    let feasible_channels = per_k1.iter().map(|(f, _)| f).sum();
    let all: Vec<FrontierPoint> = per_k1.into_iter().flat_map(|(_, p)| p).collect();
    Ok(Frontier {
        target_d,
        feasible_channels,
        points: pareto_frontier(all),
    })
}

/// Side-information specialization: the second channel is the identity, so
/// `X2` is available losslessly, and only the first terminal's rate is
/// optimized. Returns the minimum feasible `R1`, or `None` when no grid
/// channel meets the target.
pub fn wyner_ziv_specialize(
    joint_x: &JointDistribution,
    d1: &[Vec<f64>],
    aux_size: usize,
    grid_points: usize,
    target_d: f64,
) -> Result<Option<f64>> {
    if !(1..=4).contains(&aux_size) {
        return Err(RegionError::Domain {
            name: "aux_size",
            value: aux_size as f64,
            domain: "1..=4",
        });
    }
    if grid_points < 3 {
        return Err(RegionError::Domain {
            name: "grid_points",
            value: grid_points as f64,
            domain: ">= 3",
        });
    }
    let s2 = joint_x.right_size();
    let y_size = d1[0].len();
    let marginal1 = joint_x.marginal_left();
    let mut best: Option<f64> = None;
    for k1 in grid_kernels(joint_x.left_size(), aux_size, grid_points) {
        // Best reconstruction per (z1, x2) cell, then feasibility.
        let mut distortion = 0.0;
        for z1 in 0..aux_size {
            for x2 in 0..s2 {
                let mut cell_best = f64::INFINITY;
                for y in 0..y_size {
                    let cost: f64 = (0..joint_x.left_size())
                        .map(|x1| joint_x.prob(x1, x2) * k1.prob(z1, x1) * d1[x1][y])
                        .sum();
                    if cost < cell_best {
                        cell_best = cost;
                    }
                }
                distortion += cell_best;
            }
        }
        if distortion > target_d + FEASIBILITY_SLACK {
            continue;
        }
        let i_x1z1 =
            mutual_information(&JointDistribution::from_marginal_kernel(&marginal1, &k1)?);
        // I(Z1; X2) through the reversed chain Z1 - X1 - X2.
        let mut z1x2 = vec![0.0; aux_size * s2];
        for x1 in 0..joint_x.left_size() {
            for x2 in 0..s2 {
                let p = joint_x.prob(x1, x2);
                for z1 in 0..aux_size {
                    z1x2[z1 * s2 + x2] += p * k1.prob(z1, x1);
                }
            }
        }
        let i_z1x2 = mutual_information(&JointDistribution::new(z1x2, aux_size, s2)?);
        let r1 = (i_x1z1 - i_z1x2).max(0.0);
        if best.map_or(true, |b| r1 < b) {
            best = Some(r1);
        }
    }
    Ok(best)
}

/// Structurally independent search over the same channel space: random
/// restarts plus greedy local refinement of scalarized rate objectives.
/// Test-only oracle for [`region_sweep`].
pub fn brute_force_frontier_oracle(
    joint_x: &JointDistribution,
    aux_sizes: (usize, usize),
    d: &PairDistortion,
    target_d: f64,
    restarts: usize,
    seed: u64,
) -> Result<Frontier> {
    if !(1..=3).contains(&aux_sizes.0) || !(1..=3).contains(&aux_sizes.1) {
        return Err(RegionError::Domain {
            name: "aux_sizes",
            value: aux_sizes.0.max(aux_sizes.1) as f64,
            domain: "1..=3",
        });
    }
    let lambdas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut all_points: Vec<FrontierPoint> = Vec::new();
    let mut feasible_channels = 0usize;

    for (li, &lambda) in lambdas.iter().enumerate() {
        for restart in 0..restarts {
            let mut rng = RngStream::new(seed, (li * restarts + restart) as u64).rng();
            let mut k1 = random_kernel(joint_x.left_size(), aux_sizes.0, &mut rng);
            let mut k2 = random_kernel(joint_x.right_size(), aux_sizes.1, &mut rng);
            let mut score = oracle_score(joint_x, &k1, &k2, d, target_d, lambda);
            for step in [0.4, 0.2, 0.1, 0.05, 0.02, 0.01] {
                let mut improved = true;
                while improved {
                    improved = false;
                    for (side, rows, outputs) in [
                        (0usize, joint_x.left_size(), aux_sizes.0),
                        (1usize, joint_x.right_size(), aux_sizes.1),
                    ] {
                        for row in 0..rows {
                            for candidate in
                                row_moves(if side == 0 { &k1 } else { &k2 }, row, outputs, step)
                            {
                                let (c1, c2) = if side == 0 {
                                    (replace_row(&k1, row, &candidate), k2.clone())
                                } else {
                                    (k1.clone(), replace_row(&k2, row, &candidate))
                                };
                                let s = oracle_score(joint_x, &c1, &c2, d, target_d, lambda);
                                if s < score - 1e-12 {
                                    score = s;
                                    k1 = c1;
                                    k2 = c2;
                                    improved = true;
                                }
                            }
                        }
                    }
                }
            }
            if let Some(mut pts) = evaluate_channel_pair(joint_x, &k1, &k2, d, target_d) {
                feasible_channels += 1;
                all_points.append(&mut pts);
            }
        }
    }

    Ok(Frontier {
        target_d,
        feasible_channels,
        points: pareto_frontier(all_points),
    })
}

fn random_kernel<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> ConditionalKernel {
    let rows = (0..inputs)
        .map(|_| {
            let weights: Vec<f64> = (0..outputs)
                .map(|_| -(rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln())
                .collect();
            FiniteDistribution::normalized(weights).expect("positive weights")
        })
        .collect();
    ConditionalKernel::new(rows).expect("nonempty rows")
}

/// Candidate replacement rows: mass shifts of `step` between coordinate
/// pairs, plus every vertex of the simplex so deterministic kernels are
/// reachable.
fn row_moves(
    kernel: &ConditionalKernel,
    row: usize,
    outputs: usize,
    step: f64,
) -> Vec<FiniteDistribution> {
    let current: Vec<f64> = (0..outputs).map(|o| kernel.prob(o, row)).collect();
    let mut moves = Vec::new();
    for from in 0..outputs {
        for to in 0..outputs {
            if from == to || current[from] < step {
                continue;
            }
            let mut w = current.clone();
            w[from] -= step;
            w[to] += step;
            if let Ok(d) = FiniteDistribution::new(w) {
                moves.push(d);
            }
        }
    }
    for vertex in 0..outputs {
        moves.push(FiniteDistribution::point_mass(vertex, outputs));
    }
    moves
}

fn replace_row(
    kernel: &ConditionalKernel,
    row: usize,
    replacement: &FiniteDistribution,
) -> ConditionalKernel {
    let rows = (0..kernel.input_size())
        .map(|r| {
            if r == row {
                replacement.clone()
            } else {
                FiniteDistribution::new(
                    (0..kernel.output_size()).map(|o| kernel.prob(o, r)).collect(),
                )
                .expect("existing row is normalized")
            }
        })
        .collect();
    ConditionalKernel::new(rows).expect("nonempty rows")
}

/// Infeasible channels score by distortion overshoot; feasible ones by the
/// scalarized sum-corner rates.
fn oracle_score(
    joint_x: &JointDistribution,
    k1: &ConditionalKernel,
    k2: &ConditionalKernel,
    d: &PairDistortion,
    target_d: f64,
    lambda: f64,
) -> f64 {
    let (h1, h2) = best_reconstruction_maps(joint_x, k1, k2, d);
    let channel = TestChannelPair {
        k1: k1.clone(),
        k2: k2.clone(),
        h1,
        h2,
    };
    let report = rate_region_bounds(joint_x, &channel, d).expect("validated dimensions");
    if report.distortion > target_d + FEASIBILITY_SLACK {
        return 1e6 + report.distortion;
    }
    let corners = [
        (report.b1, (report.b12 - report.b1).max(0.0)),
        ((report.b12 - report.b2).max(0.0), report.b2),
    ];
    corners
        .iter()
        .map(|&(r1, r2)| lambda * r1 + (1.0 - lambda) * r2)
        .fold(f64::INFINITY, f64::min)
}

/// Frontier CSV rows: `D,R1,R2,sum_rate,channel_hash`.
pub fn frontier_csv(frontier: &Frontier) -> String {
    let mut out = String::from("D,R1,R2,sum_rate,channel_hash\n");
    for p in &frontier.points {
        out.push_str(&format!(
            "{},{},{},{},{:016x}\n",
            frontier.target_d,
            p.rates.r1,
            p.rates.r2,
            p.rates.r1 + p.rates.r2,
            p.channel.channel_hash()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{binary_entropy, joint_entropy};

    fn hamming_pair() -> PairDistortion {
        PairDistortion::sum_hamming(2)
    }

    #[test]
    fn code_rate_constant_and_identity() {
        let c = Encoder::constant(0, 4, 2, 4).unwrap();
        assert_eq!(code_rate(&c), 0.0);
        let id = Encoder::identity(2, 4).unwrap();
        assert!((code_rate(&id) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn code_rate_counts_hit_image_only() {
        // Range 12 declared, 3 indices actually used, n = 4.
        let map: Vec<usize> = (0..16).map(|r| r % 3).collect();
        let e = Encoder::new(map, 12, 2, 4).unwrap();
        assert!((code_rate(&e) - 3f64.ln() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn identity_system_is_lossless() {
        let n = 3;
        let joint = JointDistribution::dsbs(0.1);
        let enc1 = Encoder::identity(2, n).unwrap();
        let enc2 = Encoder::identity(2, n).unwrap();
        let blocks = enumerate_blocks(2, n, 1 << 20).unwrap();
        let mut map = Vec::new();
        for b1 in &blocks {
            for b2 in &blocks {
                map.push((b1.clone(), b2.clone()));
            }
        }
        let dec = Decoder::new(map, 8, 8).unwrap();
        let r = simulate_system(&joint, &enc1, &enc2, &dec, &hamming_pair(), SimMode::Exact)
            .unwrap();
        assert_eq!(r.distortion, 0.0);
    }

    #[test]
    fn constant_decoder_gives_single_letter_distortion() {
        let n = 3;
        let joint = JointDistribution::dsbs(0.2);
        let enc1 = Encoder::constant(0, 1, 2, n).unwrap();
        let enc2 = Encoder::constant(0, 1, 2, n).unwrap();
        let dec = Decoder::new(vec![(Block(vec![0; n]), Block(vec![0; n]))], 1, 1).unwrap();
        let r = simulate_system(&joint, &enc1, &enc2, &dec, &hamming_pair(), SimMode::Exact)
            .unwrap();
        // E[1{X1 != 0}] + E[1{X2 != 0}] = 0.5 + 0.5.
        assert!((r.distortion - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_tracks_exact() {
        let n = 4;
        let joint = JointDistribution::dsbs(0.2);
        let enc1 = Encoder::constant(0, 1, 2, n).unwrap();
        let enc2 = Encoder::constant(0, 1, 2, n).unwrap();
        let dec = Decoder::new(vec![(Block(vec![0; n]), Block(vec![0; n]))], 1, 1).unwrap();
        let exact = simulate_system(&joint, &enc1, &enc2, &dec, &hamming_pair(), SimMode::Exact)
            .unwrap();
        let mc = simulate_system(
            &joint,
            &enc1,
            &enc2,
            &dec,
            &hamming_pair(),
            SimMode::MonteCarlo {
                samples: 20_000,
                seed: 3,
            },
        )
        .unwrap();
        let se = mc.stderr.unwrap();
        assert!((mc.distortion - exact.distortion).abs() < 5.0 * se.max(1e-3));
    }

    #[test]
    fn constant_channels_have_zero_bounds() {
        let joint = JointDistribution::dsbs(0.1);
        let k = ConditionalKernel::constant_rows(FiniteDistribution::point_mass(0, 2), 2);
        let (h1, h2) = best_reconstruction_maps(&joint, &k, &k, &hamming_pair());
        let channel = TestChannelPair {
            k1: k.clone(),
            k2: k,
            h1,
            h2,
        };
        let r = rate_region_bounds(&joint, &channel, &hamming_pair()).unwrap();
        assert!(r.b1.abs() < 1e-12 && r.b2.abs() < 1e-12 && r.b12.abs() < 1e-12);
        // Best constant reconstruction of each uniform bit misses half the
        // time, on both terminals.
        assert!((r.distortion - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_channels_reach_joint_entropy_sum_rate() {
        let joint = JointDistribution::dsbs(0.1);
        let id = ConditionalKernel::identity(2);
        let (h1, h2) = best_reconstruction_maps(&joint, &id, &id, &hamming_pair());
        let channel = TestChannelPair {
            k1: id.clone(),
            k2: id,
            h1,
            h2,
        };
        let r = rate_region_bounds(&joint, &channel, &hamming_pair()).unwrap();
        assert_eq!(r.distortion, 0.0);
        assert!((r.b12 - joint_entropy(&joint)).abs() < 1e-12);
    }

    #[test]
    fn bound_identity_on_random_channels() {
        let joint = JointDistribution::dsbs(0.15);
        let mut rng = RngStream::new(21, 0).rng();
        for _ in 0..25 {
            let k1 = random_kernel(2, 3, &mut rng);
            let k2 = random_kernel(2, 2, &mut rng);
            let d = PairDistortion::from_fn([2, 2, 2, 2], |x1, x2, y1, y2| {
                (x1 != y1) as usize as f64 + (x2 != y2) as usize as f64
            });
            let (h1, h2) = best_reconstruction_maps(&joint, &k1, &k2, &d);
            let channel = TestChannelPair { k1, k2, h1, h2 };
            let r = rate_region_bounds(&joint, &channel, &d).unwrap();
            // b12 - b1 - b2 = I(Z1;Z2) whenever nothing clamped.
            if !r.clamped.iter().any(|&c| c) {
                assert!((r.b12 - r.b1 - r.b2 - r.i_z1z2).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sweep_trivial_target_contains_origin() {
        let joint = JointDistribution::dsbs(0.1);
        let f = region_sweep(&joint, (2, 2), 3, &hamming_pair(), 2.0).unwrap();
        assert!(f.is_feasible());
        let p = &f.points[0];
        assert!(p.rates.r1.abs() < 1e-12 && p.rates.r2.abs() < 1e-12);
    }

    #[test]
    fn independent_uniform_lossless_corner() {
        let joint = JointDistribution::independent(
            &FiniteDistribution::uniform(2),
            &FiniteDistribution::uniform(2),
        );
        let f = region_sweep(&joint, (2, 2), 3, &hamming_pair(), 0.0).unwrap();
        assert!(f.is_feasible());
        let sum = f.min_sum_rate().unwrap();
        assert!((sum - 2.0 * 2f64.ln()).abs() < 0.02, "sum rate {sum}");
        for p in &f.points {
            assert!(p.rates.r1 >= 2f64.ln() - 0.02);
            assert!(p.rates.r2 >= 2f64.ln() - 0.02);
        }
    }

    #[test]
    fn side_information_corner_is_conditional_entropy() {
        let joint = JointDistribution::dsbs(0.1);
        let d1 = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let r1 = wyner_ziv_specialize(&joint, &d1, 2, 5, 0.0)
            .unwrap()
            .expect("identity channel is feasible");
        assert!((r1 - binary_entropy(0.1)).abs() < 0.03, "r1 = {r1}");
    }

    #[test]
    fn wyner_ziv_zero_rate_at_large_target() {
        let joint = JointDistribution::dsbs(0.25);
        let d1 = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let r1 = wyner_ziv_specialize(&joint, &d1, 2, 5, 0.5).unwrap().unwrap();
        assert_eq!(r1, 0.0);
    }

    #[test]
    fn oracle_agrees_with_sweep_on_lossless_corner() {
        let joint = JointDistribution::dsbs(0.1);
        let d = hamming_pair();
        let sweep = region_sweep(&joint, (2, 2), 5, &d, 0.0).unwrap();
        let oracle = brute_force_frontier_oracle(&joint, (2, 2), &d, 0.0, 8, 33).unwrap();
        let (s, o) = (
            sweep.min_sum_rate().expect("sweep feasible"),
            oracle.min_sum_rate().expect("oracle feasible"),
        );
        assert!((s - o).abs() < 0.02, "sweep {s} oracle {o}");
    }

    #[test]
    fn frontier_monotone_in_target() {
        let joint = JointDistribution::dsbs(0.1);
        let d = hamming_pair();
        let tight = region_sweep(&joint, (2, 2), 5, &d, 0.05).unwrap();
        let loose = region_sweep(&joint, (2, 2), 5, &d, 0.2).unwrap();
        for p in &tight.points {
            let dominated = loose.points.iter().any(|q| {
                q.rates.r1 <= p.rates.r1 + 1e-9 && q.rates.r2 <= p.rates.r2 + 1e-9
            });
            assert!(dominated, "point ({}, {}) not dominated", p.rates.r1, p.rates.r2);
        }
    }

    #[test]
    fn infeasible_target_reports_empty_not_error() {
        let joint = JointDistribution::dsbs(0.1);
        // Negative distortion target is unmeetable.
        let f = region_sweep(&joint, (2, 2), 3, &hamming_pair(), -1.0).unwrap();
        assert!(!f.is_feasible());
        assert_eq!(f.feasible_channels, 0);
        let o = brute_force_frontier_oracle(&joint, (2, 2), &hamming_pair(), -1.0, 2, 5).unwrap();
        assert!(!o.is_feasible());
    }

    #[test]
    fn frontier_csv_shape() {
        let joint = JointDistribution::dsbs(0.1);
        let f = region_sweep(&joint, (2, 2), 3, &hamming_pair(), 2.0).unwrap();
        let csv = frontier_csv(&f);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "D,R1,R2,sum_rate,channel_hash");
        assert_eq!(csv.lines().count(), f.points.len() + 1);
    }

    #[test]
    fn covering_code_distortion_matches_covering_module() {
        use crate::covering::{
            covering_map, sample_codebook, AcceptanceSet, BlockDistortion, Codebook,
            DistortionMeasure,
        };
        use crate::prob::compose_markov;

        // Chain: hidden U = X2, seen V = X1, reproduction through BSC(0.2).
        let n = 4;
        let joint = JointDistribution::dsbs(0.1);
        let triple =
            compose_markov(joint.swapped(), ConditionalKernel::bsc(0.2), n).unwrap();
        let accept = AcceptanceSet::full();
        let dist = BlockDistortion::per_letter(DistortionMeasure::hamming(2));
        let mut rng = RngStream::new(14, 0).rng();
        let codebook: Codebook = sample_codebook(triple.marginal_w(), n, 10, &mut rng);

        // Wrap the covering map as a system: encoder 1 sends the codeword
        // index, decoder outputs it as y1; terminal 2 is inert.
        let v_blocks = enumerate_blocks(2, n, 1 << 20).unwrap();
        let mut enc_map = Vec::new();
        let mut expected = 0.0;
        for v in &v_blocks {
            let choice = covering_map(&triple, &accept, &dist, &codebook, v, 0.0).unwrap();
            let p_v: f64 = v
                .symbols()
                .iter()
                .map(|&s| triple.marginal_v().prob(s))
                .product();
            let mut eta2 = 0.0;
            for u in &v_blocks {
                let p_u: f64 = u
                    .symbols()
                    .iter()
                    .zip(v.symbols())
                    .map(|(&us, &vs)| triple.u_given_v(vs).unwrap().prob(us))
                    .product();
                eta2 += p_u * DistortionMeasure::hamming(2).block(u, &choice.word);
            }
            expected += p_v * eta2;
            enc_map.push(choice.index);
        }
        let enc1 = Encoder::new(enc_map, codebook.len(), 2, n).unwrap();
        let enc2 = Encoder::constant(0, 1, 2, n).unwrap();
        let dec_map: Vec<(Block, Block)> = codebook
            .words()
            .iter()
            .map(|w| (w.clone(), Block(vec![0; n])))
            .collect();
        let dec = Decoder::new(dec_map, codebook.len(), 1).unwrap();
        // Distortion only compares the hidden coordinate X2 with y1.
        let d = PairDistortion::from_fn([2, 2, 2, 2], |_, x2, y1, _| (x2 != y1) as usize as f64);
        // The source here is (x1, x2) = (V, U).
        let r = simulate_system(&joint, &enc1, &enc2, &dec, &d, SimMode::Exact).unwrap();
        assert!((r.distortion - expected).abs() < 1e-10);
    }
}
