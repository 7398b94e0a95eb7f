//! Experiment orchestration: expand a config into sweep points, run each
//! in isolation, and render CSV / summary / manifest text.
//!
//! Output bytes depend only on the config (floats use Rust's shortest
//! round-trip formatting); wall-clock timings go to the manifest only.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::{AcceptSpec, DistortSpec, ExperimentConfig, RegionSpec};
use crate::covering::{
    monte_carlo_covering, AcceptanceSet, BlockDistortion, CoveringConfig, CoveringReport,
    DistortionMeasure, PairDistortion,
};
use crate::info::mutual_information;
use crate::prob::{compose_markov, JointDistribution, MarkovTriple};
use crate::region::{frontier_csv, region_sweep};

/// One sweep point: a (blocklength, gamma) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub gamma: f64,
}

/// Outcome of one sweep point; failures are isolated, not fatal.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: SweepPoint,
    pub result: Result<CoveringReport, String>,
}

/// Everything needed to reproduce a run, as rendered key-value text.
#[derive(Debug, Clone)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    fn push(&mut self, key: &str, value: impl Into<String>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub outcomes: Vec<PointOutcome>,
    pub manifest: RunManifest,
}

impl ExperimentRun {
    pub fn failed_points(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }
}

fn distortion_measure(
    spec: &DistortSpec,
    u_size: usize,
    w_size: usize,
) -> Result<DistortionMeasure, String> {
    match spec {
        DistortSpec::Hamming => {
            if u_size != w_size {
                return Err(format!(
                    "hamming distortion needs equal alphabets, got {u_size} and {w_size}"
                ));
            }
            Ok(DistortionMeasure::hamming(u_size))
        }
        DistortSpec::Table(rows) => {
            if rows.len() != u_size || rows[0].len() != w_size {
                return Err(format!(
                    "distortion table is {}x{}, model needs {u_size}x{w_size}",
                    rows.len(),
                    rows[0].len()
                ));
            }
            Ok(DistortionMeasure::new(rows.clone()))
        }
    }
}

fn acceptance_set(
    spec: &AcceptSpec,
    triple: &MarkovTriple,
    measure: &DistortionMeasure,
) -> AcceptanceSet {
    match spec {
        AcceptSpec::Full => AcceptanceSet::full(),
        AcceptSpec::DistortionThreshold { level } => {
            AcceptanceSet::distortion_threshold(measure.clone(), *level)
        }
        AcceptSpec::DensityTypical { offset } => {
            let base = mutual_information(&triple.joint_uw());
            AcceptanceSet::density_typical(triple, base + offset)
        }
    }
}

/// Run every sweep point of a covering experiment. Points run in parallel
/// but are reported in sweep order; a failed point carries its error
/// message in place of a report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun, String> {
    let joint = config.source.build()?;
    let kernel = config.kernel.build()?;
    if kernel.input_size() != joint.right_size() {
        return Err(format!(
            "kernel expects {} inputs, source provides {}",
            kernel.input_size(),
            joint.right_size()
        ));
    }
    let points: Vec<SweepPoint> = config
        .n_list
        .iter()
        .flat_map(|&n| config.gamma_list.iter().map(move |&gamma| SweepPoint { n, gamma }))
        .collect();

    let started = Instant::now();
    let outcomes: Vec<PointOutcome> = points
        .par_iter()
        .map(|&point| {
            let result = run_point(config, &joint, &kernel, point);
            PointOutcome { point, result }
        })
        .collect();
    let wall_ms = started.elapsed().as_millis();

    let mut manifest = RunManifest {
        entries: Vec::new(),
    };
    manifest.push("artifact", format!("covlab {}", env!("CARGO_PKG_VERSION")));
    manifest.push("scenario_id", config.scenario_id.clone());
    manifest.push("seed", config.seed.to_string());
    manifest.push("trials", config.trials.to_string());
    manifest.push(
        "n_list",
        config
            .n_list
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.push(
        "gamma_list",
        config
            .gamma_list
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.push(
        "rng",
        "chacha8; codebook for trial t reads stream t of the scenario seed",
    );
    manifest.push("sweep_points", points.len().to_string());
    manifest.push(
        "failed_points",
        outcomes
            .iter()
            .filter(|o| o.result.is_err())
            .count()
            .to_string(),
    );
    manifest.push("wall_ms", wall_ms.to_string());

    Ok(ExperimentRun { outcomes, manifest })
}

fn run_point(
    config: &ExperimentConfig,
    joint: &JointDistribution,
    kernel: &crate::prob::ConditionalKernel,
    point: SweepPoint,
) -> Result<CoveringReport, String> {
    let triple = compose_markov(joint.clone(), kernel.clone(), point.n)
        .map_err(|e| e.to_string())?;
    let measure =
        distortion_measure(&config.distortion, triple.u_size(), triple.w_size())?;
    let accept = acceptance_set(&config.acceptance, &triple, &measure);
    let distortion = BlockDistortion::per_letter(measure);
    let mut covering_config = CoveringConfig::new(point.gamma, config.trials, config.seed);
    covering_config.rho = config.rho;
    monte_carlo_covering(&triple, &accept, &distortion, &covering_config)
        .map_err(|e| e.to_string())
}

const CSV_HEADER: &str =
    "scenario_id,n,gamma,trial,m_n,miss_prob,baseline_d,achieved_d,fallback_rate,status";

/// Fixed-column CSV: one row per trial, one `error` row per failed point.
pub fn emit_csv(scenario_id: &str, outcomes: &[PointOutcome]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for outcome in outcomes {
        let SweepPoint { n, gamma } = outcome.point;
        match &outcome.result {
            Ok(report) => {
                for trial in &report.per_trial {
                    out.push_str(&format!(
                        "{scenario_id},{n},{gamma},{},{},{},{},{},{},ok\n",
                        trial.trial,
                        report.m_used,
                        trial.miss_prob,
                        report.baseline_distortion,
                        trial.achieved_distortion,
                        trial.fallback_rate,
                    ));
                }
            }
            Err(message) => {
                let clean = message.replace(',', ";").replace('\n', " ");
                out.push_str(&format!(
                    "{scenario_id},{n},{gamma},,,,,,,error: {clean}\n"
                ));
            }
        }
    }
    out
}

/// Human-readable verdicts: cardinality bound, covering trend, distortion
/// excess, per gamma across the blocklength sweep.
pub fn emit_summary(scenario_id: &str, outcomes: &[PointOutcome]) -> String {
    let mut out = format!("scenario {scenario_id}\n");
    let mut gammas: Vec<f64> = outcomes.iter().map(|o| o.point.gamma).collect();
    gammas.sort_by(|a, b| a.partial_cmp(b).expect("finite gamma"));
    gammas.dedup();

    for gamma in gammas {
        let mut rows: Vec<&PointOutcome> = outcomes
            .iter()
            .filter(|o| o.point.gamma == gamma)
            .collect();
        rows.sort_by_key(|o| o.point.n);
        out.push_str(&format!("gamma = {gamma}\n"));

        let mut cardinality_ok = true;
        let mut miss_means = Vec::new();
        let mut excess_means = Vec::new();
        for o in &rows {
            match &o.result {
                Ok(r) => {
                    let over = r.per_trial.iter().any(|t| t.distinct_words_used > r.m_used);
                    cardinality_ok &= !over;
                    miss_means.push((o.point.n, r.miss_prob));
                    excess_means.push((o.point.n, r.achieved_distortion - r.baseline_distortion));
                    out.push_str(&format!(
                        "  n={:<3} m={:<8} miss={:.6} baseline={:.6} achieved={:.6} fallback={:.6}\n",
                        o.point.n,
                        r.m_used,
                        r.miss_prob,
                        r.baseline_distortion,
                        r.achieved_distortion,
                        r.fallback_rate,
                    ));
                }
                Err(e) => out.push_str(&format!("  n={:<3} error: {e}\n", o.point.n)),
            }
        }

        let covering_trend = miss_means
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + 0.02);
        let excess_trend = excess_means
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + 0.01)
            && excess_means.last().map_or(true, |&(_, e)| e <= 0.05);
        out.push_str(&format!(
            "  cardinality_bound: {}\n  covering_trend: {}\n  distortion_excess: {}\n",
            verdict(cardinality_ok),
            verdict(covering_trend && !miss_means.is_empty()),
            verdict(excess_trend && !excess_means.is_empty()),
        ));
    }
    out
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "satisfied"
    } else {
        "violated"
    }
}

/// Run the `[region]` sweeps of a config and render the frontier CSV.
pub fn run_region(config: &ExperimentConfig) -> Result<(String, RunManifest), String> {
    let spec: &RegionSpec = config
        .region
        .as_ref()
        .ok_or("config has no [region] section")?;
    let joint = config.source.build()?;
    let (s1, s2) = (joint.left_size(), joint.right_size());
    let d = PairDistortion::from_fn([s1, s2, s1, s2], |x1, x2, y1, y2| {
        (x1 != y1) as usize as f64 + (x2 != y2) as usize as f64
    });

    let started = Instant::now();
    let mut csv = String::new();
    for (i, &target) in spec.targets.iter().enumerate() {
        let frontier = region_sweep(&joint, (spec.aux1, spec.aux2), spec.grid, &d, target)
            .map_err(|e| e.to_string())?;
        let text = frontier_csv(&frontier);
        if i == 0 {
            csv.push_str(&text);
        } else {
            // Skip the repeated header.
            csv.push_str(text.split_once('\n').map(|(_, rest)| rest).unwrap_or(""));
        }
    }

    let mut manifest = RunManifest {
        entries: Vec::new(),
    };
    manifest.push("artifact", format!("covlab {}", env!("CARGO_PKG_VERSION")));
    manifest.push("scenario_id", config.scenario_id.clone());
    manifest.push("mode", "region");
    manifest.push("aux", format!("{},{}", spec.aux1, spec.aux2));
    manifest.push("grid", spec.grid.to_string());
    manifest.push(
        "targets",
        spec.targets
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.push("wall_ms", started.elapsed().as_millis().to_string());
    Ok((csv, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const BASE: &str = "\
[scenario]
id = demo
seed = 7

[source]
family = dsbs
param = 0.1

[kernel]
family = bsc
param = 0.2

[acceptance]
kind = distortion_threshold
level = 0.35

[sweep]
n = 3, 4
gamma = 0.5
trials = 2
";

    #[test]
    fn single_point_run_produces_one_report() {
        let text = BASE.replace("n = 3, 4", "n = 4").replace("trials = 2", "trials = 1");
        let config = parse_config(&text).unwrap();
        let run = run_experiment(&config).unwrap();
        assert_eq!(run.outcomes.len(), 1);
        let report = run.outcomes[0].result.as_ref().unwrap();
        assert_eq!(report.per_trial.len(), 1);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let config = parse_config(BASE).unwrap();
        let a = emit_csv("demo", &run_experiment(&config).unwrap().outcomes);
        let b = emit_csv("demo", &run_experiment(&config).unwrap().outcomes);
        assert_eq!(a, b);
    }

    #[test]
    fn csv_rows_cover_every_trial() {
        let config = parse_config(BASE).unwrap();
        let run = run_experiment(&config).unwrap();
        let csv = emit_csv("demo", &run.outcomes);
        // Header + 2 points x 2 trials.
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")));
    }

    #[test]
    fn capacity_failure_is_isolated() {
        // n = 40 overflows the codebook cap; n = 4 must still succeed.
        let text = BASE.replace("n = 3, 4", "n = 4, 40");
        let config = parse_config(&text).unwrap();
        let run = run_experiment(&config).unwrap();
        assert_eq!(run.failed_points(), 1);
        let csv = emit_csv("demo", &run.outcomes);
        assert!(csv.lines().any(|l| l.contains("error:")));
        assert!(csv.lines().any(|l| l.ends_with(",ok")));
    }

    #[test]
    fn summary_reports_verdicts() {
        let config = parse_config(BASE).unwrap();
        let run = run_experiment(&config).unwrap();
        let summary = emit_summary("demo", &run.outcomes);
        assert!(summary.contains("cardinality_bound: satisfied"));
        assert!(summary.contains("covering_trend"));
        assert!(summary.contains("distortion_excess"));
    }

    #[test]
    fn manifest_echoes_reproduction_inputs() {
        let config = parse_config(BASE).unwrap();
        let run = run_experiment(&config).unwrap();
        let text = run.manifest.render();
        assert!(text.contains("seed = 7"));
        assert!(text.contains("trials = 2"));
        assert!(text.contains("stream"));
    }

    #[test]
    fn region_run_emits_frontier_csv() {
        let text = format!("{BASE}\n[region]\naux1 = 2\naux2 = 2\ngrid = 3\ntarget_d = 0.5, 1.0\n");
        let config = parse_config(&text).unwrap();
        let (csv, _) = run_region(&config).unwrap();
        assert!(csv.starts_with("D,R1,R2,sum_rate,channel_hash\n"));
        assert_eq!(csv.lines().filter(|l| l.starts_with("D,")).count(), 1);
        assert!(csv.lines().count() > 1);
    }
}
