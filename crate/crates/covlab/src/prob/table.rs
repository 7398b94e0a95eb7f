use super::{
    ConditionalKernel, FiniteDistribution, JointDistribution, ProbError, Result,
};

/// Parse the plain-text table format: one row of whitespace-separated
/// decimal weights per line, `#` starts a comment, blank lines ignored.
pub fn parse_table(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split_whitespace() {
            let value: f64 = field.parse().map_err(|_| ProbError::TableParse {
                line: i + 1,
                message: format!("malformed number `{field}`"),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ProbError::TableParse {
            line: 0,
            message: "table contains no rows".to_string(),
        });
    }
    Ok(rows)
}

/// Load a distribution literal: a single row of weights (normalized).
pub fn distribution_from_text(text: &str) -> Result<FiniteDistribution> {
    let rows = parse_table(text)?;
    if rows.len() != 1 {
        return Err(ProbError::TableParse {
            line: 0,
            message: format!("expected 1 row for a distribution, got {}", rows.len()),
        });
    }
    FiniteDistribution::normalized(rows.into_iter().next().unwrap())
}

/// Load a kernel literal: one normalized row per conditioning symbol.
pub fn kernel_from_text(text: &str) -> Result<ConditionalKernel> {
    let rows = parse_table(text)?;
    let dists = rows
        .into_iter()
        .map(FiniteDistribution::normalized)
        .collect::<Result<Vec<_>>>()?;
    ConditionalKernel::new(dists)
}

/// Load a joint literal: rows index the left alphabet, columns the right
/// one; the whole table is normalized to sum 1.
pub fn joint_from_text(text: &str) -> Result<JointDistribution> {
    let rows = parse_table(text)?;
    let width = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(ProbError::TableParse {
                line: i + 1,
                message: format!("ragged row: expected {width} entries, got {}", row.len()),
            });
        }
    }
    let left = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    for (index, &value) in flat.iter().enumerate() {
        if !(value >= 0.0) {
            return Err(ProbError::NegativeWeight { index, value });
        }
    }
    let total: f64 = flat.iter().sum();
    if total <= 0.0 {
        return Err(ProbError::ZeroMass);
    }
    JointDistribution::new(flat.iter().map(|v| v / total).collect(), left, width)
}
