//! Minmax trend filtering over all intervals.
//!
//! For each index the fitted values of every interval containing it are laid
//! out on a grid indexed by (left end, right end). Containment of intervals
//! is then a coordinate-wise comparison, so the inner maximum for every outer
//! interval comes from running prefix maxima, which gives `O(n³)` work for the
//! whole series.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryFit;
use crate::dyadic::{build_tree_cache, DyadicProblem, TreeGramCache};
use crate::error::{MtfError, Result};
use crate::interval::{
    boundary_penalty_coefficient, build_dyadified, coefficient_unchecked, Interval,
};
use crate::polyfit::{projection_fit_at, LocalFit, LocalFrame};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    Dyadic,
    /// Full estimator with both endpoints replaced by boundary fits.
    Boundary,
    /// Dyadic estimator with both endpoints replaced by dyadic boundary fits.
    BoundaryDyadic,
}

impl Variant {
    pub fn is_dyadic(self) -> bool {
        matches!(self, Variant::Dyadic | Variant::BoundaryDyadic)
    }

    pub fn uses_boundary(self) -> bool {
        matches!(self, Variant::Boundary | Variant::BoundaryDyadic)
    }
}

/// How a point estimate is picked inside the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointRule {
    #[default]
    Midpoint,
    Upper,
    Lower,
}

impl PointRule {
    #[inline]
    pub fn pick(self, lower: f64, upper: f64) -> f64 {
        match self {
            PointRule::Midpoint => 0.5 * (lower + upper),
            PointRule::Upper => upper,
            PointRule::Lower => lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub degree: usize,
    pub penalty: f64,
    pub variant: Variant,
    pub point_rule: PointRule,
}

impl FitConfig {
    pub fn new(degree: usize, penalty: f64, variant: Variant) -> Self {
        FitConfig {
            degree,
            penalty,
            variant,
            point_rule: PointRule::Midpoint,
        }
    }

    pub fn with_point_rule(mut self, rule: PointRule) -> Self {
        self.point_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.penalty.is_finite() || self.penalty < 0.0 {
            return Err(MtfError::invalid(format!(
                "penalty must be finite and non-negative, got {}",
                self.penalty
            )));
        }
        if self.degree > MAX_DEGREE {
            return Err(MtfError::invalid(format!(
                "degree {} exceeds the supported maximum {MAX_DEGREE}",
                self.degree
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_inputs(y: &[f64], config: &FitConfig) -> Result<()> {
    if y.is_empty() {
        return Err(MtfError::EmptySeries);
    }
    if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
        return Err(MtfError::invalid(format!(
            "observation {} is not finite",
            pos + 1
        )));
    }
    config.validate()
}

/// Maxmin (`lower`) and minmax (`upper`) values with a chosen point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBand {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub point: Vec<f64>,
}

impl FitBand {
    pub fn from_bounds(lower: Vec<f64>, upper: Vec<f64>, rule: PointRule) -> Self {
        let point = lower
            .iter()
            .zip(&upper)
            .map(|(&l, &u)| rule.pick(l, u))
            .collect();
        FitBand {
            lower,
            upper,
            point,
        }
    }

    pub fn len(&self) -> usize {
        self.point.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point.is_empty()
    }

    /// Overwrite index `i` (1-based) with a boundary fit.
    pub fn set_endpoint(&mut self, i: usize, fit: &BoundaryFit) {
        self.lower[i - 1] = fit.lower;
        self.upper[i - 1] = fit.upper;
        self.point[i - 1] = fit.point;
    }

    /// Largest `lower_i - upper_i`; non-positive for a well-posed band.
    pub fn max_inversion(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l - u)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `min_J max_{I ⊆ J} [s·f_I − λ C_{I,J}/|I|]` over a product family.
///
/// `values` is row-major over `(lefts[k], rights[j])`, with `lefts`
/// decreasing from `i` and `rights` increasing from `i`, so that
/// `[lefts[c], rights[d]] ⊆ [lefts[a], rights[b]]` iff `c ≤ a` and `d ≤ b`.
/// With `sign = -1` the result is `-maxmin`.
pub(crate) fn product_minmax(
    values: &[f64],
    lefts: &[usize],
    rights: &[usize],
    lambda: f64,
    sign: f64,
) -> f64 {
    let cols = rights.len();
    debug_assert_eq!(values.len(), lefts.len() * cols);
    // max over c < a of f[c][b]
    let mut col_max = vec![f64::NEG_INFINITY; cols];
    // max over c < a, d ≤ b of f[c][d] − λ/|I|
    let mut prev_q = vec![f64::NEG_INFINITY; cols];
    let mut cur_q = vec![f64::NEG_INFINITY; cols];
    let mut best = f64::INFINITY;
    for (a, &l) in lefts.iter().enumerate() {
        let row = &values[a * cols..(a + 1) * cols];
        let mut row_max = f64::NEG_INFINITY;
        let mut run_g = f64::NEG_INFINITY;
        for (b, &r) in rights.iter().enumerate() {
            let f = sign * row[b];
            let w = lambda / (r + 1 - l) as f64;
            let mut cand = (f + w).max(row_max).max(col_max[b]);
            if b > 0 {
                cand = cand.max(prev_q[b - 1]);
            }
            best = best.min(cand);
            row_max = row_max.max(f);
            run_g = run_g.max(f - w);
            cur_q[b] = prev_q[b].max(run_g);
        }
        for (m, v) in col_max.iter_mut().zip(row) {
            *m = m.max(sign * v);
        }
        std::mem::swap(&mut prev_q, &mut cur_q);
    }
    best
}

/// Per-interval polynomial fits for every `[a, b] ⊆ [1, n]`.
#[derive(Debug, Clone)]
pub struct FullProblem {
    y: Vec<f64>,
    degree: usize,
    /// Number of stored coefficients per interval; 0 means interpolating.
    dims: Vec<u8>,
    coeffs: Vec<f64>,
    offsets: Vec<usize>,
}

impl FullProblem {
    pub fn new(y: &[f64], degree: usize) -> Result<Self> {
        if y.is_empty() {
            return Err(MtfError::EmptySeries);
        }
        let n = y.len();
        let stride = degree + 1;
        let cache = build_tree_cache(y, degree)?;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for a in 1..=n {
            offsets.push(acc);
            acc += n + 1 - a;
        }
        offsets.push(acc);
        let rows: Vec<(Vec<u8>, Vec<f64>)> = (1..=n)
            .into_par_iter()
            .map(|a| {
                let mut dims = Vec::with_capacity(n + 1 - a);
                let mut coeffs = vec![0.0; (n + 1 - a) * stride];
                for b in a..=n {
                    let slot = (b - a) * stride;
                    match cache.fit(&Interval::new_unchecked(a, b)) {
                        LocalFit::Interpolating => dims.push(0),
                        LocalFit::Polynomial { coeffs: c, .. } => {
                            dims.push(c.len() as u8);
                            coeffs[slot..slot + c.len()].copy_from_slice(&c);
                        }
                    }
                }
                (dims, coeffs)
            })
            .collect();
        let mut dims = Vec::with_capacity(acc);
        let mut coeffs = Vec::with_capacity(acc * stride);
        for (d, c) in rows {
            dims.extend(d);
            coeffs.extend(c);
        }
        Ok(FullProblem {
            y: y.to_vec(),
            degree,
            dims,
            coeffs,
            offsets,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Fitted value at `i` of the projection over `[a, b]`.
    #[inline]
    pub fn value(&self, a: usize, b: usize, i: usize) -> f64 {
        let slot = self.offsets[a - 1] + (b - a);
        let dim = self.dims[slot] as usize;
        if dim == 0 {
            return self.y[i - 1];
        }
        let start = slot * (self.degree + 1);
        let u = LocalFrame::for_interval(&Interval::new_unchecked(a, b)).coord(i);
        self.coeffs[start..start + dim]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u + c)
    }

    fn table(&self, i: usize) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
        let n = self.n();
        let lefts: Vec<usize> = (1..=i).rev().collect();
        let rights: Vec<usize> = (i..=n).collect();
        let mut values = Vec::with_capacity(lefts.len() * rights.len());
        for &l in &lefts {
            for &r in &rights {
                values.push(self.value(l, r, i));
            }
        }
        (values, lefts, rights)
    }

    /// `(lower_i, upper_i)`.
    pub fn bounds_at(&self, i: usize, lambda: f64) -> (f64, f64) {
        let (values, lefts, rights) = self.table(i);
        (
            -product_minmax(&values, &lefts, &rights, lambda, -1.0),
            product_minmax(&values, &lefts, &rights, lambda, 1.0),
        )
    }

    pub fn band(&self, lambda: f64, rule: PointRule) -> FitBand {
        let (lower, upper): (Vec<f64>, Vec<f64>) = (1..=self.n())
            .into_par_iter()
            .map(|i| self.bounds_at(i, lambda))
            .unzip();
        FitBand::from_bounds(lower, upper, rule)
    }

    /// Last-point estimator over all `[l, n]`.
    pub fn boundary_right(&self, lambda: f64, rule: PointRule) -> BoundaryFit {
        let n = self.n();
        let values: Vec<f64> = (1..=n).rev().map(|l| self.value(l, n, n)).collect();
        let lens: Vec<usize> = (1..=n).collect();
        BoundaryFit::from_values(&values, &lens, lambda, rule)
    }

    /// First-point estimator over all `[1, r]`.
    pub fn boundary_left(&self, lambda: f64, rule: PointRule) -> BoundaryFit {
        let n = self.n();
        let values: Vec<f64> = (1..=n).map(|r| self.value(1, r, 1)).collect();
        let lens: Vec<usize> = (1..=n).collect();
        BoundaryFit::from_values(&values, &lens, lambda, rule)
    }
}

fn single_index_table(cache: &TreeGramCache, y: &[f64], i: usize) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let lefts: Vec<usize> = (1..=i).rev().collect();
    let rights: Vec<usize> = (i..=y.len()).collect();
    let mut values = Vec::with_capacity(lefts.len() * rights.len());
    for &l in &lefts {
        for &r in &rights {
            values.push(cache.fit(&Interval::new_unchecked(l, r)).value_at(i, y));
        }
    }
    (values, lefts, rights)
}

fn check_index(y: &[f64], i: usize) -> Result<()> {
    if i == 0 || i > y.len() {
        return Err(MtfError::IndexOutOfRange { index: i, n: y.len() });
    }
    Ok(())
}

/// Minmax value at a single index.
pub fn minmax_upper(y: &[f64], degree: usize, lambda: f64, i: usize) -> Result<f64> {
    check_inputs(y, &FitConfig::new(degree, lambda, Variant::Full))?;
    check_index(y, i)?;
    let cache = build_tree_cache(y, degree)?;
    let (values, lefts, rights) = single_index_table(&cache, y, i);
    Ok(product_minmax(&values, &lefts, &rights, lambda, 1.0))
}

/// Maxmin value at a single index.
pub fn maxmin_lower(y: &[f64], degree: usize, lambda: f64, i: usize) -> Result<f64> {
    check_inputs(y, &FitConfig::new(degree, lambda, Variant::Full))?;
    check_index(y, i)?;
    let cache = build_tree_cache(y, degree)?;
    let (values, lefts, rights) = single_index_table(&cache, y, i);
    Ok(-product_minmax(&values, &lefts, &rights, lambda, -1.0))
}

/// Fitted values precomputed for one series, reusable across penalties.
#[derive(Debug, Clone)]
pub enum PreparedFit {
    Full(FullProblem),
    Dyadic(DyadicProblem),
}

impl PreparedFit {
    pub fn new(y: &[f64], degree: usize, variant: Variant) -> Result<Self> {
        check_inputs(y, &FitConfig::new(degree, 0.0, variant))?;
        Ok(if variant.is_dyadic() {
            PreparedFit::Dyadic(DyadicProblem::new(y, degree)?)
        } else {
            PreparedFit::Full(FullProblem::new(y, degree)?)
        })
    }

    pub fn n(&self) -> usize {
        match self {
            PreparedFit::Full(p) => p.n(),
            PreparedFit::Dyadic(p) => p.n(),
        }
    }

    /// Band at `lambda`; with `endpoints` the first and last index use the
    /// boundary estimators.
    pub fn band(&self, lambda: f64, rule: PointRule, endpoints: bool) -> FitBand {
        let n = self.n();
        match self {
            PreparedFit::Full(p) => {
                let mut band = p.band(lambda, rule);
                if endpoints {
                    band.set_endpoint(1, &p.boundary_left(lambda, rule));
                    band.set_endpoint(n, &p.boundary_right(lambda, rule));
                }
                band
            }
            PreparedFit::Dyadic(p) => {
                let mut band = p.band(lambda, rule);
                if endpoints {
                    band.set_endpoint(1, &p.boundary_left(lambda, rule));
                    band.set_endpoint(n, &p.boundary_right(lambda, rule));
                }
                band
            }
        }
    }
}

/// Band at every index for any variant.
pub fn fit(y: &[f64], config: &FitConfig) -> Result<FitBand> {
    config.validate()?;
    let prepared = PreparedFit::new(y, config.degree, config.variant)?;
    Ok(prepared.band(
        config.penalty,
        config.point_rule,
        config.variant.uses_boundary(),
    ))
}

/// Direct enumeration of the defining min/max with one least-squares solve
/// per interval. Intended for small `n` only.
pub fn fit_naive(y: &[f64], config: &FitConfig) -> Result<FitBand> {
    check_inputs(y, config)?;
    let n = y.len();
    let r = config.degree;
    let lambda = config.penalty;
    let family = if config.variant.is_dyadic() {
        Some(build_dyadified(n)?)
    } else {
        None
    };
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 1..=n {
        let candidates: Vec<Interval> = match &family {
            Some(f) => f.intervals(i).collect(),
            None => (1..=i)
                .flat_map(|a| (i..=n).map(move |b| Interval::new_unchecked(a, b)))
                .collect(),
        };
        let mut fitted = HashMap::with_capacity(candidates.len());
        for iv in &candidates {
            fitted.insert(*iv, projection_fit_at(y, iv, r, i)?);
        }
        let mut up = f64::INFINITY;
        let mut lo = f64::NEG_INFINITY;
        for outer in &candidates {
            let mut inner_max = f64::NEG_INFINITY;
            let mut inner_min = f64::INFINITY;
            for inner in candidates.iter().filter(|iv| outer.contains_interval(iv)) {
                let c = coefficient_unchecked(inner, outer) as f64;
                let w = lambda * c / inner.len() as f64;
                let f = fitted[inner];
                inner_max = inner_max.max(f - w);
                inner_min = inner_min.min(f + w);
            }
            up = up.min(inner_max);
            lo = lo.max(inner_min);
        }
        lower.push(lo);
        upper.push(up);
    }
    let mut band = FitBand::from_bounds(lower, upper, config.point_rule);
    if config.variant.uses_boundary() {
        let right = naive_boundary(y, r, lambda, config.point_rule, family.is_some())?;
        let left = naive_left_boundary(y, r, lambda, config.point_rule, family.is_some())?;
        band.set_endpoint(1, &left);
        band.set_endpoint(n, &right);
    }
    Ok(band)
}

/// Direct enumeration of the last-point estimator. For the dyadic family the
/// candidate left ends are `L_n`.
pub(crate) fn naive_boundary(
    y: &[f64],
    degree: usize,
    lambda: f64,
    rule: PointRule,
    dyadic: bool,
) -> Result<BoundaryFit> {
    let n = y.len();
    let starts: Vec<usize> = if dyadic {
        build_dyadified(n)?.left_ends(n).to_vec()
    } else {
        (1..=n).rev().collect()
    };
    let ivs: Vec<Interval> = starts.iter().map(|&l| Interval::new_unchecked(l, n)).collect();
    naive_chain(y, degree, lambda, rule, &ivs, n)
}

/// First-point counterpart of [`naive_boundary`], over `R_1` when dyadic.
pub(crate) fn naive_left_boundary(
    y: &[f64],
    degree: usize,
    lambda: f64,
    rule: PointRule,
    dyadic: bool,
) -> Result<BoundaryFit> {
    let n = y.len();
    let ends: Vec<usize> = if dyadic {
        build_dyadified(n)?.right_ends(1).to_vec()
    } else {
        (1..=n).collect()
    };
    let ivs: Vec<Interval> = ends.iter().map(|&r| Interval::new_unchecked(1, r)).collect();
    naive_chain(y, degree, lambda, rule, &ivs, 1)
}

fn naive_chain(
    y: &[f64],
    degree: usize,
    lambda: f64,
    rule: PointRule,
    ivs: &[Interval],
    anchor: usize,
) -> Result<BoundaryFit> {
    let fitted: Vec<f64> = ivs
        .iter()
        .map(|iv| projection_fit_at(y, iv, degree, anchor))
        .collect::<Result<_>>()?;
    let mut up = f64::INFINITY;
    let mut lo = f64::NEG_INFINITY;
    for outer in ivs {
        let mut inner_max = f64::NEG_INFINITY;
        let mut inner_min = f64::INFINITY;
        for (inner, &f) in ivs.iter().zip(&fitted) {
            if !outer.contains_interval(inner) {
                continue;
            }
            let c = boundary_penalty_coefficient(inner, outer, anchor)? as f64;
            let w = lambda * c / inner.len() as f64;
            inner_max = inner_max.max(f - w);
            inner_min = inner_min.min(f + w);
        }
        up = up.min(inner_max);
        lo = lo.max(inner_min);
    }
    Ok(BoundaryFit::new(lo, up, rule))
}
