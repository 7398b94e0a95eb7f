use super::{FiniteDistribution, ProbError, Result};

/// A conditional distribution `P(output | input)` as one row per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel {
    rows: Vec<FiniteDistribution>,
    output_size: usize,
}

impl ConditionalKernel {
    pub fn new(rows: Vec<FiniteDistribution>) -> Result<Self> {
        if rows.is_empty() {
            return Err(ProbError::Empty);
        }
        let output_size = rows[0].alphabet_size();
        for (i, row) in rows.iter().enumerate() {
            if row.alphabet_size() != output_size {
                return Err(ProbError::DimensionMismatch {
                    expected: output_size,
                    got: row.alphabet_size(),
                    context: "kernel row width",
                });
            }
            let _ = i;
        }
        Ok(ConditionalKernel { rows, output_size })
    }

    /// Identity channel on an alphabet of the given size.
    pub fn identity(size: usize) -> Self {
        let rows = (0..size)
            .map(|i| FiniteDistribution::point_mass(i, size))
            .collect();
        ConditionalKernel {
            rows,
            output_size: size,
        }
    }

    /// Rows all equal to the given distribution (output independent of input).
    pub fn constant_rows(row: FiniteDistribution, input_size: usize) -> Self {
        let output_size = row.alphabet_size();
        ConditionalKernel {
            rows: vec![row; input_size],
            output_size,
        }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        let rows = vec![
            FiniteDistribution::new(vec![1.0 - p, p]).unwrap(),
            FiniteDistribution::new(vec![p, 1.0 - p]).unwrap(),
        ];
        ConditionalKernel {
            rows,
            output_size: 2,
        }
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, input: usize) -> &FiniteDistribution {
        &self.rows[input]
    }

    pub fn prob(&self, output: usize, input: usize) -> f64 {
        self.rows[input].prob(output)
    }

    pub fn rows(&self) -> &[FiniteDistribution] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_rows() {
        let k = ConditionalKernel::bsc(0.2);
        assert_eq!(k.prob(0, 0), 0.8);
        assert_eq!(k.prob(1, 0), 0.2);
        assert_eq!(k.prob(0, 1), 0.2);
    }

    #[test]
    fn identity_is_point_masses() {
        let k = ConditionalKernel::identity(3);
        assert_eq!(k.prob(1, 1), 1.0);
        assert_eq!(k.prob(2, 1), 0.0);
    }

    #[test]
    fn rejects_ragged_rows() {
        let rows = vec![
            FiniteDistribution::uniform(2),
            FiniteDistribution::uniform(3),
        ];
        assert!(ConditionalKernel::new(rows).is_err());
    }
}
