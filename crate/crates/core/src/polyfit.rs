//! Discrete polynomial projection.
//!
//! The fitted value of a degree-`r` least-squares fit on an interval only
//! depends on the span of `{t^k : k <= r}` restricted to that interval, so all
//! solves happen in a local frame `u = (t - center) / scale` that maps the
//! interval onto `[-1, 1]`. Moments collected in one frame can be moved to
//! another with a binomial transform, which is what lets tree nodes be merged
//! without going through ill-conditioned global power sums.

use crate::error::{MtfError, Result};
use crate::interval::Interval;

/// Relative pivot threshold below which a Cholesky factorization is treated
/// as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// Affine coordinate `u = (t - center) / scale` on the index axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub center: f64,
    pub scale: f64,
}

impl LocalFrame {
    /// Frame mapping `interval` onto `[-1, 1]` (a singleton gets scale 1).
    pub fn for_interval(interval: &Interval) -> Self {
        let a = interval.start() as f64;
        let b = interval.end() as f64;
        let half = (b - a) / 2.0;
        LocalFrame {
            center: (a + b) / 2.0,
            scale: if half > 0.0 { half } else { 1.0 },
        }
    }

    /// The design-point coordinate `t / n`.
    pub fn global(n: usize) -> Self {
        LocalFrame {
            center: 0.0,
            scale: n as f64,
        }
    }

    #[inline]
    pub fn coord(&self, t: usize) -> f64 {
        (t as f64 - self.center) / self.scale
    }
}

fn binomial_rows(max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max + 1);
    for k in 0..=max {
        let mut row = vec![1.0; k + 1];
        for j in 1..k {
            row[j] = rows[k - 1][j - 1] + rows[k - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// Coordinate power sums `Σ u^k` (k ≤ 2r) and response moments `Σ u^k y`
/// (k ≤ r) of a set of samples, in a given frame.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMoments {
    frame: LocalFrame,
    power: Vec<f64>,
    response: Vec<f64>,
}

impl IntervalMoments {
    pub fn zeros(frame: LocalFrame, degree: usize) -> Self {
        IntervalMoments {
            frame,
            power: vec![0.0; 2 * degree + 1],
            response: vec![0.0; degree + 1],
        }
    }

    /// Moments of `y` over `interval` summed directly in `frame`.
    pub fn from_samples(y: &[f64], interval: &Interval, degree: usize, frame: LocalFrame) -> Self {
        let mut out = Self::zeros(frame, degree);
        for t in interval.start()..=interval.end() {
            out.push_sample(t, y[t - 1]);
        }
        out
    }

    pub fn push_sample(&mut self, t: usize, value: f64) {
        let u = self.frame.coord(t);
        let mut p = 1.0;
        for k in 0..self.power.len() {
            self.power[k] += p;
            if k < self.response.len() {
                self.response[k] += p * value;
            }
            p *= u;
        }
    }

    pub fn degree(&self) -> usize {
        self.response.len() - 1
    }

    pub fn frame(&self) -> LocalFrame {
        self.frame
    }

    pub fn power_sums(&self) -> &[f64] {
        &self.power
    }

    pub fn response_sums(&self) -> &[f64] {
        &self.response
    }

    /// Same sums expressed in another frame.
    pub fn recentered(&self, frame: LocalFrame) -> Self {
        let mut out = Self::zeros(frame, self.degree());
        out.add_recentered(self);
        out
    }

    /// Adds `other` (in any frame) into `self`.
    pub fn add_recentered(&mut self, other: &IntervalMoments) {
        debug_assert_eq!(self.degree(), other.degree());
        if other.frame == self.frame {
            for (a, b) in self.power.iter_mut().zip(&other.power) {
                *a += b;
            }
            for (a, b) in self.response.iter_mut().zip(&other.response) {
                *a += b;
            }
            return;
        }
        // u_self = alpha * u_other + beta
        let alpha = other.frame.scale / self.frame.scale;
        let beta = (other.frame.center - self.frame.center) / self.frame.scale;
        let kmax = self.power.len() - 1;
        let binom = binomial_rows(kmax);
        let mut alpha_pow = vec![1.0; kmax + 1];
        let mut beta_pow = vec![1.0; kmax + 1];
        for k in 1..=kmax {
            alpha_pow[k] = alpha_pow[k - 1] * alpha;
            beta_pow[k] = beta_pow[k - 1] * beta;
        }
        for k in 0..=kmax {
            let row = &binom[k];
            let mut p = 0.0;
            let mut q = 0.0;
            for j in 0..=k {
                let w = row[j] * alpha_pow[j] * beta_pow[k - j];
                p += w * other.power[j];
                if k < self.response.len() {
                    q += w * other.response[j];
                }
            }
            self.power[k] += p;
            if k < self.response.len() {
                self.response[k] += q;
            }
        }
    }
}

/// Normal equations `(BᵀB) β = Bᵀy` of a polynomial fit over one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    pub interval: Interval,
    pub degree: usize,
    pub frame: LocalFrame,
    /// Row-major `(degree + 1)²` matrix.
    pub gram: Vec<f64>,
    pub moment: Vec<f64>,
}

impl GramSystem {
    pub fn from_moments(interval: Interval, moments: &IntervalMoments) -> Self {
        let degree = moments.degree();
        let dim = degree + 1;
        let mut gram = vec![0.0; dim * dim];
        for j in 0..dim {
            for k in 0..dim {
                gram[j * dim + k] = moments.power[j + k];
            }
        }
        GramSystem {
            interval,
            degree,
            frame: moments.frame,
            gram,
            moment: moments.response.clone(),
        }
    }

    /// Direct summation over the interval in its own local frame.
    pub fn direct(y: &[f64], interval: &Interval, degree: usize) -> Self {
        let frame = LocalFrame::for_interval(interval);
        Self::from_moments(
            *interval,
            &IntervalMoments::from_samples(y, interval, degree, frame),
        )
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    /// Least-squares fit. Intervals with at most `degree + 1` points are
    /// interpolated exactly; a numerically singular system drops degree until
    /// it factorizes.
    pub fn solve(&self) -> LocalFit {
        if self.interval.len() <= self.degree + 1 {
            return LocalFit::Interpolating;
        }
        let dim = self.dim();
        for d in (1..=dim).rev() {
            let mut sub = vec![0.0; d * d];
            for j in 0..d {
                sub[j * d..(j + 1) * d].copy_from_slice(&self.gram[j * dim..j * dim + d]);
            }
            if let Some(coeffs) = cholesky_solve(&sub, &self.moment[..d], d) {
                return LocalFit::Polynomial {
                    frame: self.frame,
                    coeffs,
                };
            }
        }
        unreachable!("degree-0 system of a non-empty interval is positive")
    }
}

/// Solution of a [`GramSystem`].
#[derive(Debug, Clone, PartialEq)]
pub enum LocalFit {
    /// Projection is the identity; the fitted value is the observation.
    Interpolating,
    Polynomial {
        frame: LocalFrame,
        coeffs: Vec<f64>,
    },
}

impl LocalFit {
    /// Fitted value at index `i` (must lie in the fitted interval).
    #[inline]
    pub fn value_at(&self, i: usize, y: &[f64]) -> f64 {
        match self {
            LocalFit::Interpolating => y[i - 1],
            LocalFit::Polynomial { frame, coeffs } => horner(coeffs, frame.coord(i)),
        }
    }
}

#[inline]
fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

/// Lower Cholesky factor of a row-major SPD matrix, `None` when a pivot falls
/// below the relative tolerance.
fn cholesky(a: &[f64], dim: usize) -> Option<Vec<f64>> {
    let max_diag = (0..dim).map(|j| a[j * dim + j].abs()).fold(0.0, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            d -= l[j * dim + k] * l[j * dim + k];
        }
        if d <= PIVOT_TOLERANCE * max_diag {
            return None;
        }
        let d = d.sqrt();
        l[j * dim + j] = d;
        for i in j + 1..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = s / d;
        }
    }
    Some(l)
}

fn forward_solve(l: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    let mut z = b.to_vec();
    for i in 0..dim {
        for k in 0..i {
            z[i] -= l[i * dim + k] * z[k];
        }
        z[i] /= l[i * dim + i];
    }
    z
}

fn cholesky_solve(a: &[f64], b: &[f64], dim: usize) -> Option<Vec<f64>> {
    let l = cholesky(a, dim)?;
    let mut x = forward_solve(&l, b, dim);
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            x[i] -= l[k * dim + i] * x[k];
        }
        x[i] /= l[i * dim + i];
    }
    Some(x)
}

/// Prefix power sums in the design coordinate `x_t = t / n`:
/// `S_k[t] = Σ_{u≤t} x_u^k` for `k ≤ 2r` and `T_k[t] = Σ_{u≤t} x_u^k y_u`
/// for `k ≤ r`.
///
/// Differences of prefixes give any interval's normal equations in O(r²).
/// Global coordinates lose precision for high degrees on short intervals far
/// from the origin; the estimators use the tree of local-frame moments
/// instead and keep this as a reference.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    n: usize,
    degree: usize,
    power_sums: Vec<Vec<f64>>,
    response_sums: Vec<Vec<f64>>,
}

pub fn build_moments(y: &[f64], degree: usize) -> Result<MomentAccumulator> {
    if y.is_empty() {
        return Err(MtfError::EmptySeries);
    }
    let n = y.len();
    let mut power_sums = vec![vec![0.0; n + 1]; 2 * degree + 1];
    let mut response_sums = vec![vec![0.0; n + 1]; degree + 1];
    for t in 1..=n {
        let x = t as f64 / n as f64;
        let mut p = 1.0;
        for k in 0..=2 * degree {
            power_sums[k][t] = power_sums[k][t - 1] + p;
            if k <= degree {
                response_sums[k][t] = response_sums[k][t - 1] + p * y[t - 1];
            }
            p *= x;
        }
    }
    Ok(MomentAccumulator {
        n,
        degree,
        power_sums,
        response_sums,
    })
}

impl MomentAccumulator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `S_k[1..=n]`.
    pub fn power_prefix(&self, k: usize) -> &[f64] {
        &self.power_sums[k][1..]
    }

    /// `T_k[1..=n]`.
    pub fn response_prefix(&self, k: usize) -> &[f64] {
        &self.response_sums[k][1..]
    }

    /// Interval moments in the global frame.
    pub fn interval_moments(&self, interval: &Interval) -> Result<IntervalMoments> {
        interval.check_within(self.n)?;
        let (a, b) = (interval.start(), interval.end());
        let power = self
            .power_sums
            .iter()
            .map(|s| s[b] - s[a - 1])
            .collect();
        let response = self
            .response_sums
            .iter()
            .map(|s| s[b] - s[a - 1])
            .collect();
        Ok(IntervalMoments {
            frame: LocalFrame::global(self.n),
            power,
            response,
        })
    }

    pub fn gram_system(&self, interval: &Interval) -> Result<GramSystem> {
        Ok(GramSystem::from_moments(
            *interval,
            &self.interval_moments(interval)?,
        ))
    }
}

/// Fitted value at `i` of the degree-`degree` least-squares polynomial fit to
/// `y` restricted to `interval`.
pub fn projection_fit_at(y: &[f64], interval: &Interval, degree: usize, i: usize) -> Result<f64> {
    interval.check_within(y.len())?;
    if !interval.contains(i) {
        return Err(MtfError::IndexOutside {
            index: i,
            interval: *interval,
        });
    }
    Ok(GramSystem::direct(y, interval, degree).solve().value_at(i, y))
}

/// Orthogonal projection of `values` onto polynomials of degree `degree`
/// evaluated on `1..=values.len()`.
pub fn project_interval(values: &[f64], degree: usize) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let iv = Interval::new_unchecked(1, values.len());
    let fit = GramSystem::direct(values, &iv, degree).solve();
    (1..=values.len()).map(|t| fit.value_at(t, values)).collect()
}

/// Largest diagonal entry of the `m × m` projection onto degree-`degree`
/// polynomials.
pub fn projection_diag_max(m: usize, degree: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    if m <= degree + 1 {
        return 1.0;
    }
    let iv = Interval::new_unchecked(1, m);
    let frame = LocalFrame::for_interval(&iv);
    let mut moments = IntervalMoments::zeros(frame, degree);
    for t in 1..=m {
        moments.push_sample(t, 0.0);
    }
    let sys = GramSystem::from_moments(iv, &moments);
    let dim = degree + 1;
    let l = cholesky(&sys.gram, dim).expect("Gram of m > r + 1 distinct points is positive definite");
    let mut best: f64 = 0.0;
    let mut x = vec![0.0; dim];
    for t in 1..=m {
        let u = frame.coord(t);
        let mut p = 1.0;
        for xk in x.iter_mut() {
            *xk = p;
            p *= u;
        }
        let z = forward_solve(&l, &x, dim);
        best = best.max(z.iter().map(|v| v * v).sum());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn iv(a: usize, b: usize) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn prefix_sums_small_examples() {
        let acc = build_moments(&[1.0, 2.0, 3.0], 0).unwrap();
        assert_eq!(acc.power_prefix(0), &[1.0, 2.0, 3.0]);
        assert_eq!(acc.response_prefix(0), &[1.0, 3.0, 6.0]);

        let acc = build_moments(&[2.0, 2.0], 1).unwrap();
        assert_eq!(acc.power_prefix(1), &[0.5, 1.5]);
        assert_eq!(acc.response_prefix(1), &[1.0, 3.0]);
    }

    #[test]
    fn degree_zero_gram_is_length() {
        let y: Vec<f64> = (0..20).map(|t| (t as f64).sin()).collect();
        let acc = build_moments(&y, 0).unwrap();
        let sys = acc.gram_system(&iv(4, 13)).unwrap();
        assert_eq!(sys.gram, vec![10.0]);
    }

    #[test]
    fn degree_zero_fit_is_mean() {
        let y = [1.0, 5.0, -2.0, 4.0, 0.5];
        let v = projection_fit_at(&y, &iv(2, 4), 0, 3).unwrap();
        assert_relative_eq!(v, 7.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn line_through_three_points() {
        // Centered normal equations for the line through (1,1), (2,3), (3,2).
        let y = [1.0, 3.0, 2.0];
        let t_mean = 2.0;
        let y_mean = 2.0;
        let sxy: f64 = (1..=3).map(|t| (t as f64 - t_mean) * (y[t - 1] - y_mean)).sum();
        let sxx: f64 = (1..=3).map(|t| (t as f64 - t_mean).powi(2)).sum();
        let expected = y_mean + sxy / sxx * (2.0 - t_mean);
        assert_relative_eq!(expected, 2.0);
        let v = projection_fit_at(&y, &iv(1, 3), 1, 2).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn short_interval_interpolates() {
        let y = [3.0, -1.0, 7.0];
        assert_eq!(projection_fit_at(&y, &iv(1, 3), 2, 2).unwrap(), -1.0);
        assert_eq!(projection_fit_at(&y, &iv(2, 3), 4, 3).unwrap(), 7.0);
    }

    #[test]
    fn fit_rejects_outside_index() {
        let y = [1.0; 5];
        assert!(projection_fit_at(&y, &iv(2, 4), 1, 5).is_err());
        assert!(projection_fit_at(&y, &iv(2, 6), 1, 3).is_err());
    }

    #[test]
    fn diag_examples() {
        assert_relative_eq!(projection_diag_max(10, 0), 0.1, epsilon = 1e-15);
        assert_eq!(projection_diag_max(3, 2), 1.0);
        let m = 100.0;
        let hat_endpoint = (1.0 / m) * (1.0 + 3.0 * (m - 1.0) / (m + 1.0));
        let v = projection_diag_max(100, 1);
        assert_relative_eq!(v, hat_endpoint, epsilon = 1e-12);
        assert!(v <= 4.0 / 100.0);
    }

    #[test]
    fn recentering_matches_direct_sums() {
        let y: Vec<f64> = (1..=40).map(|t| (t as f64 * 0.37).cos() * 3.0).collect();
        let interval = iv(7, 31);
        let a = IntervalMoments::from_samples(&y, &interval, 3, LocalFrame::for_interval(&iv(7, 12)));
        let target = LocalFrame::for_interval(&interval);
        let b = a.recentered(target);
        let direct = IntervalMoments::from_samples(&y, &interval, 3, target);
        for (x, z) in b.power_sums().iter().zip(direct.power_sums()) {
            assert_relative_eq!(x, z, epsilon = 1e-9, max_relative = 1e-10);
        }
        for (x, z) in b.response_sums().iter().zip(direct.response_sums()) {
            assert_relative_eq!(x, z, epsilon = 1e-9, max_relative = 1e-10);
        }
    }
}
