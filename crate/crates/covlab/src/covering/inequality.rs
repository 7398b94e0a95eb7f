//! The elementary bound `(1 - x y)^n <= 1 - x + e^{-y n}` for
//! `x, y in [0, 1]`, which drives the codebook-miss estimate.

use super::{CoveringError, Result};

const TOL: f64 = 1e-12;

/// Check the bound at one point, validating the domain first.
pub fn check_covering_inequality(x: f64, y: f64, n: u32) -> Result<bool> {
    for (name, value) in [("x", x), ("y", y)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(CoveringError::Domain {
                name,
                value,
                domain: "[0, 1]",
            });
        }
    }
    if n == 0 {
        return Err(CoveringError::Domain {
            name: "n",
            value: 0.0,
            domain: ">= 1",
        });
    }
    let lhs = (1.0 - x * y).powi(n as i32);
    let rhs = 1.0 - x + (-(y * n as f64)).exp();
    Ok(lhs <= rhs + TOL)
}

/// Verify the bound on the full `[0, 1]^2` grid with `points` samples per
/// axis and `n = 1..=max_n`.
pub fn inequality_grid_holds(points: usize, max_n: u32) -> Result<bool> {
    assert!(points >= 2);
    for i in 0..points {
        let x = i as f64 / (points - 1) as f64;
        for j in 0..points {
            let y = j as f64 / (points - 1) as f64;
            for n in 1..=max_n {
                if !check_covering_inequality(x, y, n)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holds_at_corners() {
        for &(x, y) in &[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            assert!(check_covering_inequality(x, y, 5).unwrap());
        }
    }

    #[test]
    fn holds_on_modest_grid() {
        assert!(inequality_grid_holds(26, 12).unwrap());
    }

    #[test]
    fn domain_violations_are_errors() {
        assert!(matches!(
            check_covering_inequality(-0.1, 0.5, 3),
            Err(CoveringError::Domain { name: "x", .. })
        ));
        assert!(matches!(
            check_covering_inequality(0.5, 1.5, 3),
            Err(CoveringError::Domain { name: "y", .. })
        ));
        assert!(matches!(
            check_covering_inequality(0.5, 0.5, 0),
            Err(CoveringError::Domain { name: "n", .. })
        ));
    }

    #[test]
    fn large_n_tightness() {
        // At x = 1 the bound reads (1 - y)^n <= e^{-y n}.
        for n in [1u32, 10, 50] {
            for j in 0..=20 {
                let y = j as f64 / 20.0;
                let lhs = (1.0 - y).powi(n as i32);
                let rhs = (-(y * n as f64)).exp();
                assert!(lhs <= rhs + 1e-12);
            }
        }
    }
}
