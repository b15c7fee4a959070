//! Bias/noise bound machinery: local bias, effective noise, standard error
//! terms, `TV^{(r)}` and the recursive partition for bounded variation
//! sequences, plus a per-index check of the deterministic error bound.

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicProblem;
use crate::error::{MtfError, Result};
use crate::estimator::{check_inputs, fit, FitConfig, FullProblem, Variant};
use crate::interval::{build_dyadified, dist_to_boundary, Interval};
use crate::polyfit::projection_fit_at;

/// Which subintervals enter a bias or noise maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalFamily {
    All,
    Dyadified,
}

/// Local positive and negative bias at `i` relative to the outer interval
/// `J`, by direct enumeration of admissible `I ⊆ J` with `i ∈ I`.
pub fn bias_terms(
    theta: &[f64],
    i: usize,
    outer: &Interval,
    degree: usize,
    family: IntervalFamily,
) -> Result<(f64, f64)> {
    outer.check_within(theta.len())?;
    if !outer.contains(i) {
        return Err(MtfError::IndexOutside {
            index: i,
            interval: *outer,
        });
    }
    let candidates: Vec<Interval> = match family {
        IntervalFamily::All => (outer.start()..=i)
            .flat_map(|a| (i..=outer.end()).map(move |b| Interval::new_unchecked(a, b)))
            .collect(),
        IntervalFamily::Dyadified => build_dyadified(theta.len())?
            .intervals(i)
            .filter(|iv| outer.contains_interval(iv))
            .collect(),
    };
    let truth = theta[i - 1];
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for iv in &candidates {
        let d = projection_fit_at(theta, iv, degree, i)? - truth;
        plus = plus.max(d);
        minus = minus.min(d);
    }
    Ok((plus, minus))
}

/// Interval family over which the effective noise is maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `max_I ‖P ε_I‖_∞ √|I|` over all intervals.
    GlobalSup,
    /// `max_{I ∈ D_i} |(P ε_I)_i| √|I|`.
    AtIndex(usize),
    /// `max_{I ∋ n} |(P ε_I)_n| √|I|`.
    Boundary,
    /// `max_{I ∈ D_n} |(P ε_I)_n| √|I|`.
    BoundaryDyadic,
}

pub fn effective_noise(eps: &[f64], degree: usize, mode: NoiseMode) -> Result<f64> {
    if eps.is_empty() {
        return Err(MtfError::EmptySeries);
    }
    let n = eps.len();
    match mode {
        NoiseMode::GlobalSup => {
            if degree == 0 {
                Ok(global_noise_mean(eps))
            } else {
                Ok(global_noise(&FullProblem::new(eps, degree)?))
            }
        }
        NoiseMode::AtIndex(i) => {
            if i == 0 || i > n {
                return Err(MtfError::IndexOutOfRange { index: i, n });
            }
            let p = DyadicProblem::new(eps, degree)?;
            Ok(dyadic_noise_at(&p, i))
        }
        NoiseMode::Boundary => {
            let p = FullProblem::new(eps, degree)?;
            Ok(chain_noise((1..=n).map(|l| (n - l + 1, p.value(l, n, n)))))
        }
        NoiseMode::BoundaryDyadic => {
            let p = DyadicProblem::new(eps, degree)?;
            let lefts = p.family().left_ends(n);
            Ok(chain_noise(
                lefts.iter().zip(p.fitted(n)).map(|(&l, &v)| (n - l + 1, v)),
            ))
        }
    }
}

/// Per-index dyadic effective noise `M_i` for every `i`.
pub fn dyadic_effective_noise(eps: &[f64], degree: usize) -> Result<Vec<f64>> {
    let p = DyadicProblem::new(eps, degree)?;
    Ok((1..=eps.len()).map(|i| dyadic_noise_at(&p, i)).collect())
}

fn chain_noise(items: impl Iterator<Item = (usize, f64)>) -> f64 {
    items
        .map(|(len, v)| v.abs() * (len as f64).sqrt())
        .fold(0.0, f64::max)
}

fn dyadic_noise_at(p: &DyadicProblem, i: usize) -> f64 {
    let fam = p.family();
    let rights = fam.right_ends(i);
    let values = p.fitted(i);
    let mut best: f64 = 0.0;
    for (k, &l) in fam.left_ends(i).iter().enumerate() {
        for (j, &r) in rights.iter().enumerate() {
            let len = (r + 1 - l) as f64;
            best = best.max(values[k * rights.len() + j].abs() * len.sqrt());
        }
    }
    best
}

fn global_noise_mean(eps: &[f64]) -> f64 {
    let mut prefix = Vec::with_capacity(eps.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in eps {
        acc += v;
        prefix.push(acc);
    }
    let n = eps.len();
    let mut best: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..=n {
            let len = (b - a) as f64;
            best = best.max((prefix[b] - prefix[a]).abs() / len.sqrt());
        }
    }
    best
}

fn global_noise(p: &FullProblem) -> f64 {
    let n = p.n();
    let mut best: f64 = 0.0;
    for a in 1..=n {
        for b in a..=n {
            let scale = ((b + 1 - a) as f64).sqrt();
            for t in a..=b {
                best = best.max(p.value(a, b, t).abs() * scale);
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMode {
    Interior,
    /// Endpoint bound: the distance term is dropped.
    Boundary,
}

/// Standard error term of the deterministic bound. With `λ = 0` and
/// `M > 0` the `M²/(4λ)` term, and so the result, is `+∞`.
pub fn se_term(i: usize, outer: &Interval, lambda: f64, m: f64, mode: SeMode) -> Result<f64> {
    let dist = dist_to_boundary(i, outer)? as f64;
    let len = outer.len() as f64;
    let quad = if m == 0.0 {
        0.0
    } else if lambda == 0.0 {
        f64::INFINITY
    } else {
        m * m / (4.0 * lambda)
    };
    let base = m / len.sqrt() + quad + lambda / len;
    Ok(match mode {
        SeMode::Interior => m / dist.sqrt() + base,
        SeMode::Boundary => base,
    })
}

/// Standard deviation term with the unspecified constant set to one.
/// `dyadic` swaps `log n` for `log log n` (with `n` floored at 3).
/// Reporting only.
pub fn sd_term(
    i: usize,
    outer: &Interval,
    lambda: f64,
    sigma: f64,
    n: usize,
    dyadic: bool,
    mode: SeMode,
) -> Result<f64> {
    let dist = dist_to_boundary(i, outer)? as f64;
    let len = outer.len() as f64;
    let log = if dyadic {
        (n.max(3) as f64).ln().ln()
    } else {
        (n.max(2) as f64).ln()
    };
    let width = match mode {
        SeMode::Interior => dist,
        SeMode::Boundary => len,
    };
    let quad = if lambda == 0.0 {
        f64::INFINITY
    } else {
        sigma * sigma * log / lambda
    };
    Ok(sigma * log.sqrt() / width.sqrt() + quad + lambda / len)
}

/// `max_{1 ≤ x ≤ N} (M/√x − λ/x)` in closed form.
pub fn opt_closed_form(m: f64, lambda: f64, big_n: usize) -> Result<f64> {
    if big_n == 0 {
        return Err(MtfError::invalid("N must be at least 1"));
    }
    if m < 0.0 || lambda < 0.0 || !m.is_finite() || !lambda.is_finite() {
        return Err(MtfError::invalid("M and lambda must be finite and non-negative"));
    }
    let root_n = (big_n as f64).sqrt();
    Ok(if lambda < m / 2.0 {
        m - lambda
    } else if lambda < m * root_n / 2.0 {
        m * m / (4.0 * lambda)
    } else {
        m / root_n - lambda / big_n as f64
    })
}

/// `n^{r−1} ‖D^{(r)} θ‖_1` with `n = θ.len()`.
pub fn tv_order(theta: &[f64], r: usize) -> Result<f64> {
    if r == 0 {
        return Err(MtfError::invalid("order must be at least 1"));
    }
    if theta.len() <= r {
        return Err(MtfError::invalid(format!(
            "need more than {r} points, got {}",
            theta.len()
        )));
    }
    Ok(tv_unchecked(theta, r))
}

fn tv_unchecked(theta: &[f64], r: usize) -> f64 {
    if theta.len() <= r {
        return 0.0;
    }
    let mut d = theta.to_vec();
    for _ in 0..r {
        d = d.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let l1: f64 = d.iter().map(|v| v.abs()).sum();
    (theta.len() as f64).powi(r as i32 - 1) * l1
}

/// Recursive halving of `[1, n]` until each piece `I` has
/// `TV^{(r)}(θ_I) ≤ V δ`, where `V = TV^{(r)}(θ)`. Pieces are returned left
/// to right.
pub fn bv_partition(theta: &[f64], r: usize, delta: f64) -> Result<Vec<Interval>> {
    if theta.is_empty() {
        return Err(MtfError::EmptySeries);
    }
    if r == 0 {
        return Err(MtfError::invalid("order must be at least 1"));
    }
    if !(delta > 0.0) {
        return Err(MtfError::invalid("delta must be positive"));
    }
    let budget = tv_unchecked(theta, r) * delta;
    let mut out = Vec::new();
    let mut stack = vec![Interval::full(theta.len())?];
    while let Some(iv) = stack.pop() {
        if iv.len() <= r || tv_unchecked(&theta[iv.range()], r) <= budget {
            out.push(iv);
            continue;
        }
        let (a, b) = (iv.start(), iv.end());
        let mid = a + (b - a) / 2;
        stack.push(Interval::new_unchecked(mid + 1, b));
        stack.push(Interval::new_unchecked(a, mid));
    }
    Ok(out)
}

/// Verdicts of the deterministic error bound at one index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostics {
    pub index: usize,
    /// Outer interval attaining the upper bound.
    pub interval: Interval,
    /// Outer interval attaining the lower bound.
    pub lower_interval: Interval,
    pub bias_plus: f64,
    pub bias_minus: f64,
    /// SE at `interval`.
    pub se: f64,
    /// SE at `lower_interval`.
    pub se_lower: f64,
    pub effective_noise: f64,
    /// `point_i − θ*_i`.
    pub error: f64,
    /// `min_J (Bias_+ + SE)`.
    pub upper_bound: f64,
    /// `max_J (Bias_- − SE)`.
    pub lower_bound: f64,
    pub lower_bound_ok: bool,
    pub upper_bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Set when `λ = 0`, where the bound is vacuous and nothing is checked.
    pub skipped: bool,
    pub diagnostics: Vec<BoundDiagnostics>,
}

impl BoundReport {
    pub fn all_ok(&self) -> bool {
        self.diagnostics
            .iter()
            .all(|d| d.lower_bound_ok && d.upper_bound_ok)
    }

    pub fn failures(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| !(d.lower_bound_ok && d.upper_bound_ok))
            .count()
    }
}

struct SideBounds {
    upper: f64,
    upper_j: (usize, usize),
    bias_plus: f64,
    se_plus: f64,
    lower: f64,
    lower_j: (usize, usize),
    bias_minus: f64,
    se_minus: f64,
}

/// Bias/SE optimization over a product family laid out as in the estimator:
/// `truth_fits` row-major over `(lefts, rights)`.
fn product_bounds(
    truth_fits: &[f64],
    lefts: &[usize],
    rights: &[usize],
    truth: f64,
    se: impl Fn(usize, usize) -> f64,
) -> SideBounds {
    let cols = rights.len();
    let mut col_max = vec![f64::NEG_INFINITY; cols];
    let mut col_min = vec![f64::INFINITY; cols];
    let mut out = SideBounds {
        upper: f64::INFINITY,
        upper_j: (lefts[0], rights[0]),
        bias_plus: 0.0,
        se_plus: 0.0,
        lower: f64::NEG_INFINITY,
        lower_j: (lefts[0], rights[0]),
        bias_minus: 0.0,
        se_minus: 0.0,
    };
    for (a, &l) in lefts.iter().enumerate() {
        let mut run_max = f64::NEG_INFINITY;
        let mut run_min = f64::INFINITY;
        for (b, &r) in rights.iter().enumerate() {
            let d = truth_fits[a * cols + b] - truth;
            run_max = run_max.max(d);
            run_min = run_min.min(d);
            col_max[b] = col_max[b].max(run_max);
            col_min[b] = col_min[b].min(run_min);
            let s = se(l, r);
            let (bp, bm) = (col_max[b], col_min[b]);
            if bp + s < out.upper {
                out.upper = bp + s;
                out.upper_j = (l, r);
                out.bias_plus = bp;
                out.se_plus = s;
            }
            if bm - s > out.lower {
                out.lower = bm - s;
                out.lower_j = (l, r);
                out.bias_minus = bm;
                out.se_minus = s;
            }
        }
    }
    out
}

/// Checks `max_J (Bias_- − SE) ≤ lower_i − θ*_i` and
/// `upper_i − θ*_i ≤ min_J (Bias_+ + SE)` at every index, with the interval
/// family, noise maximum and SE form matching `config.variant`.
pub fn verify_deterministic_bound(
    theta: &[f64],
    eps: &[f64],
    config: &FitConfig,
) -> Result<BoundReport> {
    if theta.len() != eps.len() {
        return Err(MtfError::invalid(format!(
            "length mismatch: truth has {}, noise has {}",
            theta.len(),
            eps.len()
        )));
    }
    let y: Vec<f64> = theta.iter().zip(eps).map(|(a, b)| a + b).collect();
    check_inputs(&y, config)?;
    let lambda = config.penalty;
    if lambda == 0.0 {
        return Ok(BoundReport {
            skipped: true,
            diagnostics: Vec::new(),
        });
    }
    let n = y.len();
    let r = config.degree;
    let band = fit(&y, config)?;
    let scale = 1.0 + y.iter().chain(theta).fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;

    let se_fn = |i: usize, m: f64, mode: SeMode| {
        move |l: usize, rr: usize| {
            se_term(i, &Interval::new_unchecked(l, rr), lambda, m, mode).expect("i lies in J")
        }
    };

    // (bounds, noise) per index.
    let mut per_index: Vec<(SideBounds, f64)> = Vec::with_capacity(n);
    if config.variant.is_dyadic() {
        let truth = DyadicProblem::new(theta, r)?;
        let noise = DyadicProblem::new(eps, r)?;
        let fam = truth.family();
        for i in 1..=n {
            let m = dyadic_noise_at(&noise, i);
            let sb = product_bounds(
                truth.fitted(i),
                fam.left_ends(i),
                fam.right_ends(i),
                theta[i - 1],
                se_fn(i, m, SeMode::Interior),
            );
            per_index.push((sb, m));
        }
        if config.variant == Variant::BoundaryDyadic {
            let lefts = fam.left_ends(n);
            let m = chain_noise(lefts.iter().zip(noise.fitted(n)).map(|(&l, &v)| (n - l + 1, v)));
            let right = product_bounds(truth.fitted(n), lefts, &[n], theta[n - 1], se_fn(n, m, SeMode::Boundary));
            let rights = fam.right_ends(1);
            let m1 = chain_noise(rights.iter().zip(noise.fitted(1)).map(|(&rr, &v)| (rr, v)));
            let left = product_bounds(truth.fitted(1), &[1], rights, theta[0], se_fn(1, m1, SeMode::Boundary));
            per_index[0] = (left, m1);
            per_index[n - 1] = (right, m);
        }
    } else {
        let truth = FullProblem::new(theta, r)?;
        let noise = FullProblem::new(eps, r)?;
        let m = if r == 0 {
            global_noise_mean(eps)
        } else {
            global_noise(&noise)
        };
        for i in 1..=n {
            let lefts: Vec<usize> = (1..=i).rev().collect();
            let rights: Vec<usize> = (i..=n).collect();
            let mut fits = Vec::with_capacity(lefts.len() * rights.len());
            for &l in &lefts {
                for &rr in &rights {
                    fits.push(truth.value(l, rr, i));
                }
            }
            let sb = product_bounds(&fits, &lefts, &rights, theta[i - 1], se_fn(i, m, SeMode::Interior));
            per_index.push((sb, m));
        }
        if config.variant == Variant::Boundary {
            let lefts: Vec<usize> = (1..=n).rev().collect();
            let fits: Vec<f64> = lefts.iter().map(|&l| truth.value(l, n, n)).collect();
            let m_right = chain_noise(lefts.iter().map(|&l| (n - l + 1, noise.value(l, n, n))));
            let right = product_bounds(&fits, &lefts, &[n], theta[n - 1], se_fn(n, m_right, SeMode::Boundary));
            let rights: Vec<usize> = (1..=n).collect();
            let fits: Vec<f64> = rights.iter().map(|&rr| truth.value(1, rr, 1)).collect();
            let m_left = chain_noise(rights.iter().map(|&rr| (rr, noise.value(1, rr, 1))));
            let left = product_bounds(&fits, &[1], &rights, theta[0], se_fn(1, m_left, SeMode::Boundary));
            per_index[0] = (left, m_left);
            per_index[n - 1] = (right, m_right);
        }
    }

    let diagnostics = per_index
        .into_iter()
        .enumerate()
        .map(|(k, (sb, m))| {
            let truth = theta[k];
            BoundDiagnostics {
                index: k + 1,
                interval: Interval::new_unchecked(sb.upper_j.0, sb.upper_j.1),
                lower_interval: Interval::new_unchecked(sb.lower_j.0, sb.lower_j.1),
                bias_plus: sb.bias_plus,
                bias_minus: sb.bias_minus,
                se: sb.se_plus,
                se_lower: sb.se_minus,
                effective_noise: m,
                error: band.point[k] - truth,
                upper_bound: sb.upper,
                lower_bound: sb.lower,
                lower_bound_ok: band.lower[k] - truth >= sb.lower - tol,
                upper_bound_ok: band.upper[k] - truth <= sb.upper + tol,
            }
        })
        .collect();
    Ok(BoundReport {
        skipped: false,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bias_vanishes_for_polynomials() {
        let theta: Vec<f64> = (1..=20).map(|t| 0.5 * (t * t) as f64 - t as f64).collect();
        let j = Interval::new(3, 17).unwrap();
        for fam in [IntervalFamily::All, IntervalFamily::Dyadified] {
            let (p, m) = bias_terms(&theta, 9, &j, 2, fam).unwrap();
            assert!(p.abs() < 1e-8 && m.abs() < 1e-8);
        }
        let (p, m) = bias_terms(&theta, 9, &Interval::singleton(9).unwrap(), 0, IntervalFamily::All).unwrap();
        assert_eq!((p, m), (0.0, 0.0));
        assert!(bias_terms(&theta, 2, &j, 0, IntervalFamily::All).is_err());
    }

    #[test]
    fn step_bias_is_positive() {
        let theta: Vec<f64> = (1..=10).map(|t| if t > 5 { 1.0 } else { 0.0 }).collect();
        let j = Interval::new(1, 10).unwrap();
        let (p, m) = bias_terms(&theta, 3, &j, 0, IntervalFamily::All).unwrap();
        // Largest mean over [a, b] ∋ 3 is [3, 10]: 5/8.
        assert_relative_eq!(p, 5.0 / 8.0);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn noise_examples() {
        assert_eq!(effective_noise(&[0.0; 5], 1, NoiseMode::GlobalSup).unwrap(), 0.0);
        assert_relative_eq!(effective_noise(&[1.0, -1.0], 0, NoiseMode::GlobalSup).unwrap(), 1.0);
        let eps = [0.3, -1.2, 0.7, 2.0, -0.4, 0.1, 0.9];
        let a = effective_noise(&eps, 0, NoiseMode::GlobalSup).unwrap();
        let b = global_noise(&FullProblem::new(&eps, 0).unwrap());
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn se_examples() {
        let j = Interval::new(1, 10).unwrap();
        assert_relative_eq!(se_term(5, &j, 1.0, 0.0, SeMode::Interior).unwrap(), 0.1);
        let j = Interval::new(1, 9).unwrap();
        assert_relative_eq!(
            se_term(5, &j, 1.0, 2.0, SeMode::Interior).unwrap(),
            2.0 / 5f64.sqrt() + 2.0 / 3.0 + 1.0 + 1.0 / 9.0,
            epsilon = 1e-14
        );
        let j = Interval::new(7, 10).unwrap();
        assert_relative_eq!(se_term(10, &j, 1.0, 2.0, SeMode::Boundary).unwrap(), 2.25);
        assert!(se_term(5, &Interval::new(1, 9).unwrap(), 0.0, 1.0, SeMode::Interior)
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn opt_examples() {
        assert_relative_eq!(opt_closed_form(2.0, 0.5, 100).unwrap(), 1.5);
        assert_relative_eq!(opt_closed_form(2.0, 3.0, 100).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(opt_closed_form(2.0, 50.0, 100).unwrap(), -0.3, epsilon = 1e-15);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_order(&[3.0; 6], 2).unwrap(), 0.0);
        let ramp: Vec<f64> = (1..=9).map(f64::from).collect();
        assert_relative_eq!(tv_order(&ramp, 1).unwrap(), 8.0);
        assert!(tv_order(&ramp, 2).unwrap().abs() < 1e-12);
        assert!(tv_order(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn partition_examples() {
        let flat = [1.0; 13];
        assert_eq!(bv_partition(&flat, 1, 0.1).unwrap(), vec![Interval::full(13).unwrap()]);
        let wig: Vec<f64> = (1..=40).map(|t| (t as f64).sin()).collect();
        assert_eq!(bv_partition(&wig, 1, 1.0).unwrap(), vec![Interval::full(40).unwrap()]);
        let parts = bv_partition(&wig, 1, 0.1).unwrap();
        assert!(parts.len() > 1);
        assert_eq!(parts.first().unwrap().start(), 1);
        assert_eq!(parts.last().unwrap().end(), 40);
        for w in parts.windows(2) {
            assert_eq!(w[0].end() + 1, w[1].start());
        }
    }

    #[test]
    fn noiseless_polynomial_bounds_hold() {
        let theta: Vec<f64> = (1..=30).map(|t| 0.1 * t as f64 + 1.0).collect();
        for variant in [Variant::Full, Variant::Dyadic, Variant::Boundary, Variant::BoundaryDyadic] {
            let cfg = FitConfig::new(1, 2.0, variant);
            let rep = verify_deterministic_bound(&theta, &[0.0; 30], &cfg).unwrap();
            assert!(rep.all_ok(), "{variant:?}");
            for d in &rep.diagnostics {
                assert!(d.upper_bound >= -1e-9 && d.lower_bound <= 1e-9);
            }
        }
        let rep = verify_deterministic_bound(&theta, &[0.0; 30], &FitConfig::new(1, 0.0, Variant::Full)).unwrap();
        assert!(rep.skipped);
    }
}
