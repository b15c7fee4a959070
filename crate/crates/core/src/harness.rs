//! Simulation, cross-validation and Monte-Carlo experiments, plus the CSV
//! and metadata writers used by the command line tool.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{tv_order, BoundDiagnostics};
use crate::boundary::fit_boundary;
use crate::error::{MtfError, Result};
use crate::estimator::{FitBand, PointRule, PreparedFit, Variant};

/// Description of the random number stream, recorded in output metadata.
pub const RNG_DESCRIPTION: &str =
    "ChaCha8Rng::seed_from_u64(seed), stream = replication index, N(0,1) via rand_distr::StandardNormal";

/// Description of the cross-validation scheme, recorded in output metadata.
pub const CV_DESCRIPTION: &str = "2 folds (odd / even positions); each fold is fit on its own grid \
     1..n/2 and a held-out point is predicted by the nearest training fit, averaging the two \
     neighbours when both exist; the penalty is not rescaled; ties go to the smaller penalty";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    Smooth,
    Doppler,
    Discont,
    /// `pieces` equal blocks, block `j` is `j mod 2 + (−1)^j ((x − j/k) k)^degree`.
    PiecewisePoly { pieces: usize, degree: u32 },
    /// One value per line; extra comma-separated columns are ignored.
    Custom { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub n: usize,
}

pub fn smooth(x: f64) -> f64 {
    (5.0 * PI * x).sin() + 0.5 * (4.0 * PI * x).cos() + 2.0
}

pub fn doppler(x: f64) -> f64 {
    (4.0 / x).sin() + 1.5
}

pub fn discont(x: f64) -> f64 {
    if x <= 0.5 {
        100.0 * x.powi(3)
    } else {
        100.0 * (x - 0.5).powi(3)
    }
}

impl SignalSpec {
    pub fn new(kind: SignalKind, n: usize) -> Self {
        SignalSpec { kind, n }
    }

    /// Truth on the grid `x_i = i / n`.
    pub fn evaluate(&self) -> Result<Vec<f64>> {
        let n = self.n;
        if n == 0 && !matches!(self.kind, SignalKind::Custom { .. }) {
            return Err(MtfError::EmptySeries);
        }
        let grid = (1..=n).map(|i| i as f64 / n as f64);
        Ok(match &self.kind {
            SignalKind::Smooth => grid.map(smooth).collect(),
            SignalKind::Doppler => grid.map(doppler).collect(),
            SignalKind::Discont => grid.map(discont).collect(),
            SignalKind::PiecewisePoly { pieces, degree } => {
                let k = *pieces;
                if k == 0 || k > n {
                    return Err(MtfError::invalid(format!(
                        "need 1 <= pieces <= n, got {k} pieces for n = {n}"
                    )));
                }
                (1..=n)
                    .map(|i| {
                        let j = (i - 1) * k / n;
                        let x = i as f64 / n as f64;
                        let local = (x - j as f64 / k as f64) * k as f64;
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        (j % 2) as f64 + sign * local.powi(*degree as i32)
                    })
                    .collect()
            }
            SignalKind::Custom { path } => {
                let values = read_column(path, "truth")?;
                if n != 0 && values.len() != n {
                    return Err(MtfError::invalid(format!(
                        "{} holds {} values but n = {n}",
                        path.display(),
                        values.len()
                    )));
                }
                values
            }
        })
    }
}

/// Observations from a text or CSV file. See [`read_column`].
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    read_column(path, "y")
}

/// Reads one number per line. Blank lines and `#` comments are skipped. A
/// non-numeric first line is a header: the column called `name` is used if
/// present, otherwise the first field.
pub fn read_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| MtfError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    let mut column = 0;
    let mut first = true;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if std::mem::take(&mut first) && fields[0].parse::<f64>().is_err() {
            column = fields.iter().position(|f| *f == name).unwrap_or(0);
            continue;
        }
        let parse_err = |message: String| MtfError::Parse {
            path: path.to_path_buf(),
            line: k + 1,
            message,
        };
        let field = fields
            .get(column)
            .ok_or_else(|| parse_err(format!("missing column {}", column + 1)))?;
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(parse_err(format!("non-finite value {field:?}"))),
            Err(e) => return Err(parse_err(format!("{field:?}: {e}"))),
        }
    }
    if out.is_empty() {
        return Err(MtfError::EmptySeries);
    }
    Ok(out)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn add_noise(truth: &[f64], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    truth
        .iter()
        .map(|t| t + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(MtfError::invalid(format!(
            "sigma must be finite and non-negative, got {sigma}"
        )));
    }
    Ok(())
}

/// `(θ*, y)` for replication 0.
pub fn simulate(spec: &SignalSpec, sigma: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    simulate_rep(spec, sigma, seed, 0)
}

/// `(θ*, y)` with noise from stream `rep` of `seed`.
pub fn simulate_rep(
    spec: &SignalSpec,
    sigma: f64,
    seed: u64,
    rep: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sigma(sigma)?;
    let truth = spec.evaluate()?;
    let y = add_noise(&truth, sigma, &mut rng_for(seed, rep));
    Ok((truth, y))
}

/// Parses `a:b:step` into `a, a + step, …` up to `b`, or a single number.
pub fn parse_lambda_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| MtfError::invalid(format!("bad number {s:?} in grid {text:?}: {e}")))
    };
    let grid = match parts.as_slice() {
        [one] => vec![num(one)?],
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(MtfError::invalid(format!(
                    "grid {text:?} needs step > 0 and end >= start"
                )));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| a + k as f64 * step).collect()
        }
        _ => {
            return Err(MtfError::invalid(format!(
                "grid {text:?} must be a number or start:end:step"
            )))
        }
    };
    validate_grid(&grid)?;
    Ok(grid)
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(MtfError::invalid("penalty grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MtfError::invalid("penalties must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MtfError::invalid("penalty grid must be strictly increasing"));
    }
    Ok(())
}

/// Estimator settings shared by CV, experiments and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub degree: usize,
    /// `Full` or `Dyadic`; endpoints are controlled separately.
    pub variant: Variant,
    pub boundary_endpoints: bool,
    pub point_rule: PointRule,
}

impl EstimatorSpec {
    pub fn new(degree: usize, variant: Variant, boundary_endpoints: bool) -> Self {
        EstimatorSpec {
            degree,
            variant,
            boundary_endpoints,
            point_rule: PointRule::Midpoint,
        }
    }

    /// The estimator variant including endpoint handling.
    pub fn effective_variant(&self) -> Variant {
        match (self.variant.is_dyadic(), self.boundary_endpoints) {
            (true, true) => Variant::BoundaryDyadic,
            (true, false) => Variant::Dyadic,
            (false, true) => Variant::Boundary,
            (false, false) => Variant::Full,
        }
    }

    pub fn prepare(&self, y: &[f64]) -> Result<PreparedFit> {
        PreparedFit::new(y, self.degree, self.effective_variant())
    }

    pub fn band(&self, prepared: &PreparedFit, lambda: f64) -> FitBand {
        prepared.band(
            lambda,
            self.point_rule,
            self.effective_variant().uses_boundary(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_lambda: f64,
    /// `(λ, summed held-out squared error)` in grid order.
    pub scores: Vec<(f64, f64)>,
}

/// Two-fold cross-validation over `grid`.
pub fn cross_validate(y: &[f64], estimator: &EstimatorSpec, grid: &[f64]) -> Result<CvResult> {
    validate_grid(grid)?;
    if grid.len() == 1 {
        return Ok(CvResult {
            best_lambda: grid[0],
            scores: vec![(grid[0], f64::NAN)],
        });
    }
    if y.len() < 2 {
        return Err(MtfError::invalid("cross-validation needs at least 2 points"));
    }
    let mut scores = vec![0.0; grid.len()];
    for held_parity in 0..2usize {
        // Positions are 0-based here; parity 0 is the odd 1-based indices.
        let train_pos: Vec<usize> = (0..y.len()).filter(|p| p % 2 != held_parity).collect();
        let test_pos: Vec<usize> = (0..y.len()).filter(|p| p % 2 == held_parity).collect();
        let train: Vec<f64> = train_pos.iter().map(|&p| y[p]).collect();
        let prepared = estimator.prepare(&train)?;
        let fold: Vec<f64> = grid
            .par_iter()
            .map(|&lambda| {
                let band = estimator.band(&prepared, lambda);
                test_pos
                    .iter()
                    .map(|&p| {
                        let pred = predict_held_out(p, held_parity, &band.point);
                        (y[p] - pred).powi(2)
                    })
                    .sum::<f64>()
            })
            .collect();
        for (s, f) in scores.iter_mut().zip(fold) {
            *s += f;
        }
    }
    let mut best = 0;
    for k in 1..grid.len() {
        if scores[k] < scores[best] {
            best = k;
        }
    }
    Ok(CvResult {
        best_lambda: grid[best],
        scores: grid.iter().copied().zip(scores).collect(),
    })
}

/// Prediction at 0-based position `p` from a fit on the other parity.
fn predict_held_out(p: usize, held_parity: usize, train_fit: &[f64]) -> f64 {
    // Training position q maps to train index (q - first) / 2.
    let first = 1 - held_parity;
    let mut acc = 0.0;
    let mut count = 0;
    if p > first {
        acc += train_fit[(p - 1 - first) / 2];
        count += 1;
    }
    let right = (p + 1).checked_sub(first).map(|d| d / 2);
    if let Some(k) = right {
        if k < train_fit.len() && (p + 1 - first) % 2 == 0 {
            acc += train_fit[k];
            count += 1;
        }
    }
    acc / count as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub signal: SignalSpec,
    pub sigma: f64,
    pub seed: u64,
    pub estimator: EstimatorSpec,
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    pub replications: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        validate_grid(&self.lambda_grid)?;
        if self.folds != 2 {
            return Err(MtfError::invalid(format!(
                "only 2-fold cross-validation is supported, got {}",
                self.folds
            )));
        }
        if self.replications == 0 {
            return Err(MtfError::invalid("replications must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepRow {
    pub rep: usize,
    pub lambda_selected: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (sorted.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Summary {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            median: q(0.5),
            q10: q(0.1),
            q90: q(0.9),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<RepRow>,
    pub summary: Summary,
}

pub fn mse(estimate: &[f64], truth: &[f64]) -> f64 {
    estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / truth.len() as f64
}

/// Replications of simulate → cross-validate → refit on all data.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let truth = config.signal.evaluate()?;
    let rows: Vec<RepRow> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let y = add_noise(&truth, config.sigma, &mut rng_for(config.seed, rep as u64));
            let cv = cross_validate(&y, &config.estimator, &config.lambda_grid)?;
            let prepared = config.estimator.prepare(&y)?;
            let band = config.estimator.band(&prepared, cv.best_lambda);
            Ok(RepRow {
                rep,
                lambda_selected: cv.best_lambda,
                mse: mse(&band.point, &truth),
            })
        })
        .collect::<Result<_>>()?;
    let summary = Summary::of(&rows.iter().map(|r| r.mse).collect::<Vec<_>>());
    Ok(ExperimentResult { rows, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// Four equal constant pieces, dyadic order 0 with
    /// `λ = (n σ² log log n / k)^{1/2}`.
    Fast,
    /// Bounded-variation Doppler-like truth, dyadic order 0 with
    /// `λ = n^{1/3} V^{-1/3} σ^{4/3} (log log n)^{5/6}`.
    Slow,
    /// Locally constant at the right end; last-point estimator of order 0
    /// with `λ = σ (n log n)^{1/2}`, error measured at `n` only.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub lambda: f64,
    /// Mean over replications of the MSE (or squared endpoint error).
    pub mean_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub kind: RateKind,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `ln(mean_error)` on `ln n`.
    pub slope: f64,
}

const FAST_PIECES: usize = 4;

fn slow_truth(x: f64) -> f64 {
    (4.0 / (x + 0.25)).sin() + 1.5
}

fn boundary_truth(x: f64) -> f64 {
    if x < 0.5 {
        2.0 + (2.0 * PI * x).cos()
    } else {
        1.0
    }
}

fn log_log(n: usize) -> f64 {
    (n.max(3) as f64).ln().ln()
}

pub fn rate_truth(kind: RateKind, n: usize) -> Result<Vec<f64>> {
    let grid = (1..=n).map(|i| i as f64 / n as f64);
    Ok(match kind {
        RateKind::Fast => SignalSpec::new(
            SignalKind::PiecewisePoly {
                pieces: FAST_PIECES,
                degree: 0,
            },
            n,
        )
        .evaluate()?,
        RateKind::Slow => grid.map(slow_truth).collect(),
        RateKind::Boundary => grid.map(boundary_truth).collect(),
    })
}

pub fn rate_lambda(kind: RateKind, n: usize, sigma: f64, truth: &[f64]) -> Result<f64> {
    let nf = n as f64;
    Ok(match kind {
        RateKind::Fast => (nf * sigma * sigma * log_log(n) / FAST_PIECES as f64).sqrt(),
        RateKind::Slow => {
            let v = tv_order(truth, 1)?;
            nf.cbrt() * v.powf(-1.0 / 3.0) * sigma.powf(4.0 / 3.0) * log_log(n).powf(5.0 / 6.0)
        }
        RateKind::Boundary => sigma * (nf * nf.ln()).sqrt(),
    })
}

/// Error against `n` with the prescribed penalties and a fitted log-log slope.
pub fn rate_experiment(
    kind: RateKind,
    sizes: &[usize],
    replications: usize,
    sigma: f64,
    seed: u64,
) -> Result<RateTable> {
    check_sigma(sigma)?;
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] < 4 {
        return Err(MtfError::invalid(
            "sizes must be at least two strictly increasing values >= 4",
        ));
    }
    if replications == 0 {
        return Err(MtfError::invalid("replications must be at least 1"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let truth = rate_truth(kind, n)?;
        let lambda = rate_lambda(kind, n, sigma, &truth)?;
        let errors: Vec<f64> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let y = add_noise(&truth, sigma, &mut rng_for(seed, ((n as u64) << 32) | rep as u64));
                match kind {
                    RateKind::Boundary => {
                        let fit = fit_boundary(&y, 0, lambda)?;
                        Ok((fit.point - truth[n - 1]).powi(2))
                    }
                    RateKind::Fast | RateKind::Slow => {
                        let est = EstimatorSpec::new(0, Variant::Dyadic, true);
                        let band = est.band(&est.prepare(&y)?, lambda);
                        Ok(mse(&band.point, &truth))
                    }
                }
            })
            .collect::<Result<_>>()?;
        rows.push(RateRow {
            n,
            lambda,
            mean_error: errors.iter().sum::<f64>() / errors.len() as f64,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_error.ln()).collect();
    Ok(RateTable {
        kind,
        slope: ls_slope(&xs, &ys),
        rows,
    })
}

pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub seconds: f64,
}

/// Wall time of one fit (precomputation plus one band) per size, best of
/// `repeats`.
pub fn bench(
    sizes: &[usize],
    estimator: &EstimatorSpec,
    lambda: f64,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let (_, y) = simulate(&SignalSpec::new(SignalKind::Smooth, n), 0.3, seed)?;
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            let band = estimator.band(&estimator.prepare(&y)?, lambda);
            std::hint::black_box(&band);
            best = best.min(start.elapsed().as_secs_f64());
        }
        out.push(BenchRow { n, seconds: best });
    }
    Ok(out)
}

/// 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| MtfError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn fit_csv(y: &[f64], band: &FitBand, truth: Option<&[f64]>) -> String {
    let mut s = String::from("index,y,lower,upper,point");
    if truth.is_some() {
        s.push_str(",truth");
    }
    s.push('\n');
    for i in 0..y.len() {
        let _ = write!(
            s,
            "{},{},{},{},{}",
            i + 1,
            fmt_float(y[i]),
            fmt_float(band.lower[i]),
            fmt_float(band.upper[i]),
            fmt_float(band.point[i])
        );
        if let Some(t) = truth {
            let _ = write!(s, ",{}", fmt_float(t[i]));
        }
        s.push('\n');
    }
    s
}

pub fn experiment_csv(rows: &[RepRow]) -> String {
    let mut s = String::from("rep,lambda_selected,mse\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.rep, fmt_float(r.lambda_selected), fmt_float(r.mse));
    }
    s
}

pub fn bounds_csv(diagnostics: &[BoundDiagnostics]) -> String {
    let mut s = String::from("index,bias_plus,bias_minus,se,error,lower_ok,upper_ok\n");
    for d in diagnostics {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            d.index,
            fmt_float(d.bias_plus),
            fmt_float(d.bias_minus),
            fmt_float(d.se),
            fmt_float(d.error),
            d.lower_bound_ok,
            d.upper_bound_ok
        );
    }
    s
}

pub fn series_csv(truth: &[f64], y: &[f64]) -> String {
    let mut s = String::from("index,truth,y\n");
    for (i, (t, v)) in truth.iter().zip(y).enumerate() {
        let _ = writeln!(s, "{},{},{}", i + 1, fmt_float(*t), fmt_float(*v));
    }
    s
}

pub fn cv_csv(result: &CvResult) -> String {
    let mut s = String::from("lambda,score\n");
    for (l, v) in &result.scores {
        let _ = writeln!(s, "{},{}", fmt_float(*l), fmt_float(*v));
    }
    s
}

pub fn rates_csv(table: &RateTable) -> String {
    let mut s = String::from("n,lambda,mean_error\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{},{}", r.n, fmt_float(r.lambda), fmt_float(r.mean_error));
    }
    s
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("n,seconds\n");
    for r in rows {
        let _ = writeln!(s, "{},{}", r.n, fmt_float(r.seconds));
    }
    s
}

/// `<out>.meta.json` next to `out`.
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `contents` to `out` and `meta` to its sidecar.
pub fn write_with_metadata(out: &Path, contents: &str, meta: &serde_json::Value) -> Result<()> {
    write_file(out, contents)?;
    let text = serde_json::to_string_pretty(meta)
        .map_err(|e| MtfError::invalid(format!("metadata serialization failed: {e}")))?;
    write_file(&metadata_path(out), &(text + "\n"))
}
