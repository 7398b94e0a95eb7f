//! Plain-text experiment configuration: `[section]` headers, one
//! `key = value` per line, `#` comments. Hand-edited files are the norm,
//! so every validation failure carries a line number.

use std::fmt;

use crate::prob::{ConditionalKernel, JointDistribution};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Source joint specification.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Dsbs(f64),
    Table(Vec<Vec<f64>>),
}

impl SourceSpec {
    pub fn build(&self) -> Result<JointDistribution, String> {
        match self {
            SourceSpec::Dsbs(p) => Ok(JointDistribution::dsbs(*p)),
            SourceSpec::Table(rows) => {
                let left = rows.len();
                let right = rows.first().map_or(0, |r| r.len());
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                let total: f64 = flat.iter().sum();
                if total <= 0.0 {
                    return Err("source table has zero mass".to_string());
                }
                JointDistribution::new(flat.iter().map(|v| v / total).collect(), left, right)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

/// Reproduction-channel specification.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Bsc(f64),
    Identity(usize),
    Table(Vec<Vec<f64>>),
}

impl KernelSpec {
    pub fn build(&self) -> Result<ConditionalKernel, String> {
        match self {
            KernelSpec::Bsc(p) => Ok(ConditionalKernel::bsc(*p)),
            KernelSpec::Identity(size) => Ok(ConditionalKernel::identity(*size)),
            KernelSpec::Table(rows) => {
                let dists = rows
                    .iter()
                    .map(|r| crate::prob::FiniteDistribution::normalized(r.clone()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?;
                ConditionalKernel::new(dists).map_err(|e| e.to_string())
            }
        }
    }
}

/// Acceptance-set specification; `DensityTypical.offset` is added to the
/// single-letter dependence of the scenario's `(U, W)` pair.
#[derive(Debug, Clone, PartialEq)]
pub enum AcceptSpec {
    Full,
    DistortionThreshold { level: f64 },
    DensityTypical { offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistortSpec {
    Hamming,
    Table(Vec<Vec<f64>>),
}

/// Optional `[region]` section driving the frontier sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub aux1: usize,
    pub aux2: usize,
    pub grid: usize,
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario_id: String,
    pub seed: u64,
    pub source: SourceSpec,
    pub kernel: KernelSpec,
    pub acceptance: AcceptSpec,
    pub distortion: DistortSpec,
    pub n_list: Vec<usize>,
    pub gamma_list: Vec<f64>,
    pub trials: usize,
    pub rho: Option<f64>,
    pub region: Option<RegionSpec>,
}

struct RawEntry {
    line: usize,
    value: String,
    consumed: bool,
}

struct Raw {
    entries: Vec<((String, String), RawEntry)>,
    errors: Vec<ConfigError>,
}

impl Raw {
    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries
            .iter_mut()
            .find(|((s, k), _)| s == section && k == key)
            .map(|(_, e)| {
                e.consumed = true;
                (e.line, e.value.clone())
            })
    }

    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }
}

fn parse_raw(text: &str) -> Raw {
    let mut raw = Raw {
        entries: Vec::new(),
        errors: Vec::new(),
    };
    let mut section = String::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        match content.split_once('=') {
            Some((key, value)) => {
                let key = key.trim().to_string();
                if section.is_empty() {
                    raw.err(line_no, format!("key `{key}` before any [section] header"));
                    continue;
                }
                raw.entries.push((
                    (section.clone(), key),
                    RawEntry {
                        line: line_no,
                        value: value.trim().to_string(),
                        consumed: false,
                    },
                ));
            }
            None => raw.err(line_no, format!("expected `key = value`, got `{content}`")),
        }
    }
    raw
}

fn parse_f64(raw: &mut Raw, line: usize, key: &str, value: &str) -> Option<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(v),
        _ => {
            raw.err(line, format!("`{key}`: malformed number `{value}`"));
            None
        }
    }
}

fn parse_usize(raw: &mut Raw, line: usize, key: &str, value: &str) -> Option<usize> {
    match value.parse::<usize>() {
        Ok(v) => Some(v),
        Err(_) => {
            raw.err(line, format!("`{key}`: malformed integer `{value}`"));
            None
        }
    }
}

fn parse_f64_list(raw: &mut Raw, line: usize, key: &str, value: &str) -> Option<Vec<f64>> {
    let items: Option<Vec<f64>> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    match items {
        Some(v) if !v.is_empty() => Some(v),
        _ => {
            raw.err(line, format!("`{key}`: malformed number list `{value}`"));
            None
        }
    }
}

fn parse_usize_list(raw: &mut Raw, line: usize, key: &str, value: &str) -> Option<Vec<usize>> {
    let items: Option<Vec<usize>> = value
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok())
        .collect();
    match items {
        Some(v) if !v.is_empty() => Some(v),
        _ => {
            raw.err(line, format!("`{key}`: malformed integer list `{value}`"));
            None
        }
    }
}

/// Inline table: rows separated by `;`, entries by whitespace.
fn parse_table_value(raw: &mut Raw, line: usize, key: &str, value: &str) -> Option<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for row in value.split(';') {
        let entries: Option<Vec<f64>> = row
            .split_whitespace()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0))
            .collect();
        match entries {
            Some(e) if !e.is_empty() => rows.push(e),
            _ => {
                raw.err(line, format!("`{key}`: malformed table row `{row}`"));
                return None;
            }
        }
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        raw.err(line, format!("`{key}`: ragged table"));
        return None;
    }
    Some(rows)
}

/// Parse and validate an experiment configuration, collecting every error
/// with its line number rather than stopping at the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut raw = parse_raw(text);

    let scenario_id = match raw.take("scenario", "id") {
        Some((_, v)) => v,
        None => {
            raw.err(0, "missing required key `id` in [scenario]");
            String::new()
        }
    };
    let seed = match raw.take("scenario", "seed") {
        Some((line, v)) => match v.parse::<u64>() {
            Ok(s) => Some(s),
            Err(_) => {
                raw.err(line, format!("`seed`: malformed integer `{v}`"));
                None
            }
        },
        None => {
            raw.err(0, "missing required key `seed` in [scenario]; runs never draw implicit entropy");
            None
        }
    };

    let source = match (raw.take("source", "family"), raw.take("source", "table")) {
        (Some((line, family)), _) => match family.as_str() {
            "dsbs" => match raw.take("source", "param") {
                Some((pl, pv)) => parse_f64(&mut raw, pl, "param", &pv).and_then(|p| {
                    if (0.0..=1.0).contains(&p) {
                        Some(SourceSpec::Dsbs(p))
                    } else {
                        raw.err(pl, format!("`param`: {p} outside [0, 1]"));
                        None
                    }
                }),
                None => {
                    raw.err(line, "family `dsbs` requires `param`");
                    None
                }
            },
            other => {
                raw.err(line, format!("unknown source family `{other}`"));
                None
            }
        },
        (None, Some((line, table))) => {
            parse_table_value(&mut raw, line, "table", &table).map(SourceSpec::Table)
        }
        (None, None) => {
            raw.err(0, "missing [source]: need `family` or `table`");
            None
        }
    };

    let kernel = match (raw.take("kernel", "family"), raw.take("kernel", "table")) {
        (Some((line, family)), _) => match family.as_str() {
            "bsc" => match raw.take("kernel", "param") {
                Some((pl, pv)) => parse_f64(&mut raw, pl, "param", &pv).and_then(|p| {
                    if (0.0..=1.0).contains(&p) {
                        Some(KernelSpec::Bsc(p))
                    } else {
                        raw.err(pl, format!("`param`: {p} outside [0, 1]"));
                        None
                    }
                }),
                None => {
                    raw.err(line, "family `bsc` requires `param`");
                    None
                }
            },
            "identity" => match raw.take("kernel", "size") {
                Some((pl, pv)) => {
                    parse_usize(&mut raw, pl, "size", &pv).map(KernelSpec::Identity)
                }
                None => {
                    raw.err(line, "family `identity` requires `size`");
                    None
                }
            },
            other => {
                raw.err(line, format!("unknown kernel family `{other}`"));
                None
            }
        },
        (None, Some((line, table))) => {
            parse_table_value(&mut raw, line, "table", &table).map(KernelSpec::Table)
        }
        (None, None) => {
            raw.err(0, "missing [kernel]: need `family` or `table`");
            None
        }
    };

    let acceptance = match raw.take("acceptance", "kind") {
        Some((line, kind)) => match kind.as_str() {
            "full" => Some(AcceptSpec::Full),
            "distortion_threshold" => match raw.take("acceptance", "level") {
                Some((pl, pv)) => parse_f64(&mut raw, pl, "level", &pv)
                    .map(|level| AcceptSpec::DistortionThreshold { level }),
                None => {
                    raw.err(line, "kind `distortion_threshold` requires `level`");
                    None
                }
            },
            "density_typical" => match raw.take("acceptance", "offset") {
                Some((pl, pv)) => parse_f64(&mut raw, pl, "offset", &pv)
                    .map(|offset| AcceptSpec::DensityTypical { offset }),
                None => {
                    raw.err(line, "kind `density_typical` requires `offset`");
                    None
                }
            },
            other => {
                raw.err(line, format!("unknown acceptance kind `{other}`"));
                None
            }
        },
        None => Some(AcceptSpec::Full),
    };

    let distortion = match (
        raw.take("distortion", "kind"),
        raw.take("distortion", "table"),
    ) {
        (Some((line, kind)), _) => match kind.as_str() {
            "hamming" => Some(DistortSpec::Hamming),
            other => {
                raw.err(line, format!("unknown distortion kind `{other}`"));
                None
            }
        },
        (None, Some((line, table))) => {
            parse_table_value(&mut raw, line, "table", &table).map(DistortSpec::Table)
        }
        (None, None) => Some(DistortSpec::Hamming),
    };

    let n_list = match raw.take("sweep", "n") {
        Some((line, v)) => parse_usize_list(&mut raw, line, "n", &v).and_then(|l| {
            if l.iter().all(|&n| n >= 1) {
                Some(l)
            } else {
                raw.err(line, "`n`: blocklengths must be >= 1");
                None
            }
        }),
        None => {
            raw.err(0, "missing required key `n` in [sweep]");
            None
        }
    };
    let gamma_list = match raw.take("sweep", "gamma") {
        Some((line, v)) => parse_f64_list(&mut raw, line, "gamma", &v).and_then(|l| {
            if l.iter().all(|&g| g > 0.0) {
                Some(l)
            } else {
                raw.err(line, "`gamma`: entries must be > 0");
                None
            }
        }),
        None => {
            raw.err(0, "missing required key `gamma` in [sweep]");
            None
        }
    };
    let trials = match raw.take("sweep", "trials") {
        Some((line, v)) => parse_usize(&mut raw, line, "trials", &v).and_then(|t| {
            if t >= 1 {
                Some(t)
            } else {
                raw.err(line, "`trials` must be >= 1");
                None
            }
        }),
        None => Some(20),
    };
    let rho = match raw.take("sweep", "rho") {
        Some((line, v)) => parse_f64(&mut raw, line, "rho", &v).map(Some),
        None => Some(None),
    };

    let region = {
        let aux1 = raw.take("region", "aux1");
        let aux2 = raw.take("region", "aux2");
        let grid = raw.take("region", "grid");
        let targets = raw.take("region", "target_d");
        if aux1.is_none() && aux2.is_none() && grid.is_none() && targets.is_none() {
            Some(None)
        } else {
            let aux1 = aux1
                .and_then(|(l, v)| parse_usize(&mut raw, l, "aux1", &v))
                .unwrap_or(2);
            let aux2 = aux2
                .and_then(|(l, v)| parse_usize(&mut raw, l, "aux2", &v))
                .unwrap_or(2);
            let grid = grid
                .and_then(|(l, v)| parse_usize(&mut raw, l, "grid", &v))
                .unwrap_or(5);
            match targets {
                Some((l, v)) => parse_f64_list(&mut raw, l, "target_d", &v).map(|targets| {
                    Some(RegionSpec {
                        aux1,
                        aux2,
                        grid,
                        targets,
                    })
                }),
                None => {
                    raw.err(0, "[region] requires `target_d`");
                    None
                }
            }
        }
    };

    for ((section, key), entry) in &raw.entries {
        if !entry.consumed {
            raw.errors.push(ConfigError {
                line: entry.line,
                message: format!("unknown key `{key}` in [{section}]"),
            });
        }
    }

    let mut errors = raw.errors;
    errors.sort_by_key(|e| e.line);
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(ExperimentConfig {
        scenario_id,
        seed: seed.expect("validated"),
        source: source.expect("validated"),
        kernel: kernel.expect("validated"),
        acceptance: acceptance.expect("validated"),
        distortion: distortion.expect("validated"),
        n_list: n_list.expect("validated"),
        gamma_list: gamma_list.expect("validated"),
        trials: trials.expect("validated"),
        rho: rho.expect("validated"),
        region: region.expect("validated"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[scenario]
id = demo
seed = 7

[source]
family = dsbs
param = 0.1

[kernel]
family = bsc
param = 0.2

[sweep]
n = 4
gamma = 0.5
trials = 1
";

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.scenario_id, "demo");
        assert_eq!(c.seed, 7);
        assert_eq!(c.source, SourceSpec::Dsbs(0.1));
        assert_eq!(c.kernel, KernelSpec::Bsc(0.2));
        assert_eq!(c.acceptance, AcceptSpec::Full);
        assert_eq!(c.n_list, vec![4]);
        assert_eq!(c.trials, 1);
    }

    #[test]
    fn missing_seed_is_named() {
        let text = MINIMAL.replace("seed = 7\n", "");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("`seed`")), "{errs:?}");
    }

    #[test]
    fn sweep_lists_cross_product() {
        let text = MINIMAL.replace("n = 4", "n = 4, 8, 12").replace("gamma = 0.5", "gamma = 0.3, 0.5");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.n_list.len() * c.gamma_list.len(), 6);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{MINIMAL}\n[sweep]\nbogus = 1\n");
        let errs = parse_config(&text).unwrap_err();
        let e = errs.iter().find(|e| e.message.contains("bogus")).unwrap();
        assert!(e.line > 0);
        assert!(e.message.contains("[sweep]"));
    }

    #[test]
    fn malformed_number_reports_line() {
        let text = MINIMAL.replace("param = 0.2", "param = two");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("malformed")));
    }

    #[test]
    fn inline_tables_accepted() {
        let text = MINIMAL
            .replace("family = dsbs\nparam = 0.1", "table = 0.45 0.05 ; 0.05 0.45")
            .replace("family = bsc\nparam = 0.2", "table = 0.8 0.2 ; 0.2 0.8");
        let c = parse_config(&text).unwrap();
        let joint = match c.source {
            SourceSpec::Table(_) => c.source.build().unwrap(),
            _ => panic!("expected table source"),
        };
        assert!((joint.prob(0, 0) - 0.45).abs() < 1e-12);
    }

    #[test]
    fn acceptance_kinds_roundtrip() {
        let with = |extra: &str| format!("{MINIMAL}\n[acceptance]\n{extra}\n");
        assert_eq!(
            parse_config(&with("kind = full")).unwrap().acceptance,
            AcceptSpec::Full
        );
        assert_eq!(
            parse_config(&with("kind = distortion_threshold\nlevel = 0.35"))
                .unwrap()
                .acceptance,
            AcceptSpec::DistortionThreshold { level: 0.35 }
        );
        assert_eq!(
            parse_config(&with("kind = density_typical\noffset = 0.25"))
                .unwrap()
                .acceptance,
            AcceptSpec::DensityTypical { offset: 0.25 }
        );
    }

    #[test]
    fn region_section_parses() {
        let text = format!("{MINIMAL}\n[region]\naux1 = 2\naux2 = 2\ngrid = 5\ntarget_d = 0.0, 0.1\n");
        let c = parse_config(&text).unwrap();
        let r = c.region.unwrap();
        assert_eq!(r.targets, vec![0.0, 0.1]);
        assert_eq!(r.grid, 5);
    }

    #[test]
    fn multiple_errors_all_reported() {
        let text = MINIMAL
            .replace("seed = 7", "seed = x")
            .replace("param = 0.1", "param = 1.5");
        let errs = parse_config(&text).unwrap_err();
        assert!(errs.len() >= 2, "{errs:?}");
    }
}
