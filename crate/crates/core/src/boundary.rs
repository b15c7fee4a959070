//! Endpoint estimators.
//!
//! At the last index every candidate interval ends at `n`, so the inner
//! comparison only has two cases: `I = J` or `I` strictly shorter.

use serde::{Deserialize, Serialize};

use crate::dyadic::{build_tree_cache, DyadicProblem};
use crate::error::Result;
use crate::estimator::{check_inputs, FitConfig, PointRule, Variant};
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    pub lower: f64,
    pub upper: f64,
    pub point: f64,
}

impl BoundaryFit {
    pub fn new(lower: f64, upper: f64, rule: PointRule) -> Self {
        BoundaryFit {
            lower,
            upper,
            point: rule.pick(lower, upper),
        }
    }

    /// `values[k]` is the fitted endpoint value of the `k`-th candidate
    /// interval, ordered by increasing length `lens[k]`.
    pub(crate) fn from_values(values: &[f64], lens: &[usize], lambda: f64, rule: PointRule) -> Self {
        Self::new(
            -boundary_minmax(values, lens, lambda, -1.0),
            boundary_minmax(values, lens, lambda, 1.0),
            rule,
        )
    }
}

/// `min_J max_{I ⊆ J} [s·f_I − λ C_{I,J}/|I|]` for a nested chain of
/// intervals sharing one endpoint.
pub(crate) fn boundary_minmax(values: &[f64], lens: &[usize], lambda: f64, sign: f64) -> f64 {
    let mut best = f64::INFINITY;
    // max over strictly shorter I of f − λ/|I|
    let mut shorter = f64::NEG_INFINITY;
    for (&v, &len) in values.iter().zip(lens) {
        let f = sign * v;
        let w = lambda / len as f64;
        best = best.min((f + w).max(shorter));
        shorter = shorter.max(f - w);
    }
    best
}

fn check(y: &[f64], degree: usize, lambda: f64, variant: Variant) -> Result<FitConfig> {
    let config = FitConfig::new(degree, lambda, variant);
    check_inputs(y, &config)?;
    Ok(config)
}

/// Last-point estimator over all intervals `[l, n]`.
pub fn fit_boundary(y: &[f64], degree: usize, lambda: f64) -> Result<BoundaryFit> {
    let config = check(y, degree, lambda, Variant::Boundary)?;
    let n = y.len();
    let cache = build_tree_cache(y, degree)?;
    let values: Vec<f64> = (1..=n)
        .rev()
        .map(|l| cache.fit(&Interval::new_unchecked(l, n)).value_at(n, y))
        .collect();
    let lens: Vec<usize> = (1..=n).collect();
    Ok(BoundaryFit::from_values(&values, &lens, lambda, config.point_rule))
}

/// Last-point estimator restricted to `D_n`.
pub fn fit_boundary_dyadic(y: &[f64], degree: usize, lambda: f64) -> Result<BoundaryFit> {
    let config = check(y, degree, lambda, Variant::BoundaryDyadic)?;
    let problem = DyadicProblem::new(y, degree)?;
    Ok(problem.boundary_right(lambda, config.point_rule))
}

/// First-point estimator: the last-point estimator of the reversed series.
pub fn fit_left_boundary(y: &[f64], degree: usize, lambda: f64) -> Result<BoundaryFit> {
    let rev: Vec<f64> = y.iter().rev().copied().collect();
    fit_boundary(&rev, degree, lambda)
}

/// First-point estimator restricted to `D_1`.
pub fn fit_left_boundary_dyadic(y: &[f64], degree: usize, lambda: f64) -> Result<BoundaryFit> {
    let config = check(y, degree, lambda, Variant::BoundaryDyadic)?;
    let problem = DyadicProblem::new(y, degree)?;
    Ok(problem.boundary_left(lambda, config.point_rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::naive_boundary;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_example() {
        let fit = fit_boundary(&[0.0, 4.0], 0, 1.0).unwrap();
        assert_relative_eq!(fit.upper, 3.0);
        // Hand enumeration of the maxmin side.
        // J=[2,2]: 4 − 1 = 3. J=[1,2]: min(4 + 1, 2 − 1/2) = 1.5.
        assert_relative_eq!(fit.lower, 3.0);
        assert!(fit.lower <= fit.upper);
    }

    #[test]
    fn zero_penalty_gives_last_value() {
        let y = [0.3, -1.0, 2.0, 5.5, 4.0];
        for r in 0..3 {
            let f = fit_boundary(&y, r, 0.0).unwrap();
            assert_relative_eq!(f.lower, 4.0, epsilon = 1e-12);
            assert_relative_eq!(f.upper, 4.0, epsilon = 1e-12);
            let d = fit_boundary_dyadic(&y, r, 0.0).unwrap();
            assert_relative_eq!(d.point, 4.0, epsilon = 1e-12);
            let l = fit_left_boundary(&y, r, 0.0).unwrap();
            assert_relative_eq!(l.point, 0.3, epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_naive() {
        let y: Vec<f64> = (1..=29).map(|t| ((t * t) % 11) as f64 * 0.4 - (t as f64).sqrt()).collect();
        for r in 0..=2 {
            for lambda in [0.0, 0.5, 3.0, 40.0] {
                let a = fit_boundary(&y, r, lambda).unwrap();
                let b = naive_boundary(&y, r, lambda, PointRule::Midpoint, false).unwrap();
                assert_relative_eq!(a.lower, b.lower, epsilon = 1e-9);
                assert_relative_eq!(a.upper, b.upper, epsilon = 1e-9);
                let a = fit_boundary_dyadic(&y, r, lambda).unwrap();
                let b = naive_boundary(&y, r, lambda, PointRule::Midpoint, true).unwrap();
                assert_relative_eq!(a.lower, b.lower, epsilon = 1e-9);
                assert_relative_eq!(a.upper, b.upper, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn constant_series() {
        let y = [2.0; 9];
        let f = fit_left_boundary(&y, 0, 0.7).unwrap();
        assert!(f.point >= 2.0 - 0.7 - 1e-12 && f.point <= 2.0 + 0.7 + 1e-12);
    }
}
