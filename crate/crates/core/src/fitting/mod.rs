//! Prefix-window estimation: multi-start damped least squares over
//! `(L, k, t0)`, error surfaces, and the remedy estimators for weakly
//! identified asymptotes.
//!
//! The fitted model for each family is the three-parameter form with the
//! shape parameter folded into the time shift (`alpha = 1`; for the error
//! function the slope takes the rate role). The least-squares surface before
//! the inflection point is a long curved trench, so single-start descent is
//! unreliable; `fit_ls` runs Levenberg-Marquardt from a Latin hypercube of
//! seeded starts inside the bounds and keeps the best local optimum.

pub mod bayes;

use crate::curves::{SigmoidFamily, SigmoidSpec};
use crate::error::{Error, Result};
use crate::numeric::golden_section_min;
use crate::series::TimeSeries;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

/// Bounds for the fitted parameters `(L, k, t0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitBounds {
    pub l: (f64, f64),
    pub rate: (f64, f64),
    pub t0: (f64, f64),
}

impl FitBounds {
    /// Data-driven defaults: `L` above the observed maximum (up to 50x),
    /// rate up to ten times a rough early log-slope, and a time-shift window
    /// extending one span back and three spans forward.
    pub fn default_for(series: &TimeSeries) -> FitBounds {
        let y_max = series
            .values()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
            .max(1e-12);
        let (t_first, _) = series.first().unwrap();
        let (t_last, _) = series.last().unwrap();
        let span = (t_last - t_first).max(1e-12);

        // rough early growth rate: median positive log-slope over the first
        // half of the window, with a fallback for degenerate data
        let n_half = (series.len() / 2).max(2);
        let t = series.times();
        let v = series.values();
        let mut slopes: Vec<f64> = (1..n_half)
            .filter(|&i| v[i - 1] > 0.0 && v[i] > 0.0 && v[i] > v[i - 1])
            .map(|i| (v[i].ln() - v[i - 1].ln()) / (t[i] - t[i - 1]))
            .filter(|s| s.is_finite() && *s > 0.0)
            .collect();
        slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rough = if slopes.is_empty() { 2.0 / span } else { slopes[slopes.len() / 2] };

        FitBounds {
            l: (y_max * (1.0 + 1e-9), 50.0 * y_max),
            rate: (1e-6 / span, 10.0 * rough),
            t0: (t_first - span, t_last + 3.0 * span),
        }
    }

    fn clamp(&self, theta: &mut [f64; 3]) {
        theta[0] = theta[0].clamp(self.l.0, self.l.1);
        theta[1] = theta[1].clamp(self.rate.0, self.rate.1);
        theta[2] = theta[2].clamp(self.t0.0, self.t0.1);
    }
}

/// Settings for [`fit_ls`] and the operations built on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub n_starts: usize,
    pub max_iterations: usize,
    /// Stop when the relative change of the objective between accepted steps
    /// falls below this.
    pub rel_tol: f64,
    pub seed: u64,
    /// Explicit bounds; data-driven defaults when absent.
    pub bounds: Option<FitBounds>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_starts: 16,
            max_iterations: 200,
            rel_tol: 1e-10,
            seed: 0,
            bounds: None,
        }
    }
}

impl FitConfig {
    pub fn with_seed(seed: u64) -> Self {
        FitConfig { seed, ..FitConfig::default() }
    }
}

/// A fitted sigmoid with fit quality and bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub spec: SigmoidSpec,
    /// Unweighted root mean squared residual on the fitted window.
    pub rmse: f64,
    pub converged: bool,
    pub n_starts_used: usize,
    /// Parameter names (`"L"`, `"k"`, `"t0"`) pinned at a bound.
    pub bounds_hit: Vec<&'static str>,
    /// The input window was not increasing (fit still attempted).
    pub degenerate_input: bool,
}

impl FitResult {
    /// The inflection time of the fitted curve.
    pub fn t0(&self) -> f64 {
        self.spec.inflection().0
    }

    pub fn asymptote(&self) -> f64 {
        self.spec.asymptote()
    }

    pub fn rate(&self) -> f64 {
        fit_rate(&self.spec)
    }
}

fn fit_rate(spec: &SigmoidSpec) -> f64 {
    match spec.family() {
        SigmoidFamily::ErrorFunction => spec.alpha(),
        _ => spec.beta(),
    }
}

/// The three-parameter model evaluated directly; must agree with
/// [`SigmoidSpec::eval`] under [`spec_from_params`].
#[inline]
fn eval_model(family: SigmoidFamily, l: f64, rate: f64, t0: f64, t: f64) -> f64 {
    let u = t - t0;
    match family {
        SigmoidFamily::Logistic => l / (1.0 + (-rate * u).exp()),
        SigmoidFamily::Algebraic => {
            let v = rate * u;
            0.5 * l * (1.0 + v / (1.0 + v * v).sqrt())
        }
        SigmoidFamily::ErrorFunction => 0.5 * l * (1.0 + crate::curves::erf(rate * u)),
        SigmoidFamily::Gompertz => l * (-(-rate * u).exp()).exp(),
    }
}

/// Maps fitted `(L, rate, t0)` onto the uniform curve parameterization.
pub fn spec_from_params(family: SigmoidFamily, l: f64, rate: f64, t0: f64) -> Result<SigmoidSpec> {
    match family {
        SigmoidFamily::ErrorFunction => SigmoidSpec::new(family, l, rate, 1.0, t0),
        _ => SigmoidSpec::new(family, l, 1.0, rate, t0),
    }
}

/// Weighted sum of squared residuals.
fn objective(
    series: &TimeSeries,
    weights: Option<&[f64]>,
    family: SigmoidFamily,
    theta: &[f64; 3],
) -> f64 {
    let mut sse = 0.0;
    for (i, (t, y)) in series.iter().enumerate() {
        let r = y - eval_model(family, theta[0], theta[1], theta[2], t);
        let w = weights.map_or(1.0, |w| w[i]);
        sse += w * r * r;
    }
    sse
}

/// Solves a 3x3 linear system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for k in row + 1..3 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// One Levenberg-Marquardt descent from a single start.
#[allow(clippy::needless_range_loop)]
fn lm_descend(
    series: &TimeSeries,
    weights: Option<&[f64]>,
    family: SigmoidFamily,
    start: [f64; 3],
    bounds: &FitBounds,
    cfg: &FitConfig,
) -> ([f64; 3], f64, bool) {
    let n = series.len();
    let mut theta = start;
    bounds.clamp(&mut theta);
    let mut sse = objective(series, weights, family, &theta);
    let mut lambda = 1e-3;
    let mut converged = false;

    for _iter in 0..cfg.max_iterations {
        // residuals and finite-difference Jacobian of the model
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        let mut h = [0.0f64; 3];
        for (j, hj) in h.iter_mut().enumerate() {
            *hj = (1e-6 * theta[j].abs()).max(1e-9);
        }
        for i in 0..n {
            let t = series.times()[i];
            let w = weights.map_or(1.0, |w| w[i]);
            let f0 = eval_model(family, theta[0], theta[1], theta[2], t);
            let r = series.values()[i] - f0;
            let mut row = [0.0f64; 3];
            for j in 0..3 {
                let mut plus = theta;
                let mut minus = theta;
                plus[j] += h[j];
                minus[j] -= h[j];
                let fp = eval_model(family, plus[0], plus[1], plus[2], t);
                let fm = eval_model(family, minus[0], minus[1], minus[2], t);
                row[j] = (fp - fm) / (2.0 * h[j]);
            }
            for j in 0..3 {
                jtr[j] += w * row[j] * r;
                for k in j..3 {
                    jtj[j][k] += w * row[j] * row[k];
                }
            }
        }
        for j in 1..3 {
            for k in 0..j {
                jtj[j][k] = jtj[k][j];
            }
        }

        // damped normal equations with Marquardt diagonal scaling
        let mut improved = false;
        for _try in 0..25 {
            let mut a = jtj;
            for (j, row) in a.iter_mut().enumerate() {
                let d = if jtj[j][j] > 1e-300 { jtj[j][j] } else { 1e-12 };
                row[j] = jtj[j][j] + lambda * d;
            }
            let Some(delta) = solve3(a, jtr) else {
                lambda = (lambda * 10.0).min(1e12);
                continue;
            };
            let mut candidate = [
                theta[0] + delta[0],
                theta[1] + delta[1],
                theta[2] + delta[2],
            ];
            bounds.clamp(&mut candidate);
            let candidate_sse = objective(series, weights, family, &candidate);
            if candidate_sse < sse {
                let rel_change = (sse - candidate_sse) / sse.max(1e-300);
                theta = candidate;
                sse = candidate_sse;
                lambda = (lambda * 0.1).max(1e-12);
                improved = true;
                if rel_change < cfg.rel_tol {
                    converged = true;
                }
                break;
            }
            lambda = (lambda * 10.0).min(1e12);
            if lambda >= 1e12 {
                break;
            }
        }
        if converged || !improved {
            converged = converged || sse <= 1e-30;
            break;
        }
    }
    (theta, sse, converged)
}

/// Latin hypercube starts: log-uniform strata in `L` and rate, linear in
/// `t0`, plus one heuristic start at twice the observed maximum.
#[allow(clippy::needless_range_loop)]
fn make_starts(series: &TimeSeries, bounds: &FitBounds, n: usize, rng: &mut StdRng) -> Vec<[f64; 3]> {
    let n = n.max(1);
    let mut starts = Vec::with_capacity(n);

    let y_max = series.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (t_last, _) = series.last().unwrap();
    let mut heuristic = [
        (2.0 * y_max).max(bounds.l.0),
        (0.5 * (bounds.rate.0.ln() + bounds.rate.1.ln())).exp(),
        t_last,
    ];
    bounds.clamp(&mut heuristic);
    starts.push(heuristic);

    let m = n - 1;
    if m == 0 {
        return starts;
    }
    let mut strata: [Vec<usize>; 3] = [
        (0..m).collect(),
        (0..m).collect(),
        (0..m).collect(),
    ];
    for s in strata.iter_mut() {
        s.shuffle(rng);
    }
    for j in 0..m {
        let pick = |stratum: usize, lo: f64, hi: f64, log: bool, rng: &mut StdRng| -> f64 {
            let u = (stratum as f64 + rng.random::<f64>()) / m as f64;
            if log {
                (lo.ln() + u * (hi.ln() - lo.ln())).exp()
            } else {
                lo + u * (hi - lo)
            }
        };
        let l = pick(strata[0][j], bounds.l.0, bounds.l.1, true, rng);
        let rate = pick(strata[1][j], bounds.rate.0, bounds.rate.1, true, rng);
        let t0 = pick(strata[2][j], bounds.t0.0, bounds.t0.1, false, rng);
        starts.push([l, rate, t0]);
    }
    starts
}

/// Multi-start nonlinear least squares of a sigmoid family on a data prefix.
///
/// Deterministic for a fixed `cfg.seed`. Needs at least 4 samples.
pub fn fit_ls(prefix: &TimeSeries, family: SigmoidFamily, cfg: &FitConfig) -> Result<FitResult> {
    fit_weighted(prefix, None, family, cfg)
}

/// Weighted variant: `weights` multiply the squared residuals.
pub fn fit_weighted(
    prefix: &TimeSeries,
    weights: Option<&[f64]>,
    family: SigmoidFamily,
    cfg: &FitConfig,
) -> Result<FitResult> {
    if prefix.len() < 4 {
        return Err(Error::invalid(format!(
            "fitting needs at least 4 samples, got {}",
            prefix.len()
        )));
    }
    if let Some(w) = weights {
        if w.len() != prefix.len() {
            return Err(Error::invalid("weight vector length mismatch"));
        }
        if w.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::invalid("weights must be positive and finite"));
        }
    }
    let degenerate = !prefix
        .values()
        .windows(2)
        .any(|w| w[1] > w[0]);

    let bounds = cfg.bounds.unwrap_or_else(|| FitBounds::default_for(prefix));
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let starts = make_starts(prefix, &bounds, cfg.n_starts, &mut rng);

    let y_scale = prefix
        .values()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-12);

    let mut best: Option<([f64; 3], f64, bool)> = None;
    let mut n_used = 0usize;
    for start in &starts {
        n_used += 1;
        let (theta, sse, conv) = lm_descend(prefix, weights, family, *start, &bounds, cfg);
        if best.as_ref().is_none_or(|(_, s, _)| sse < *s) {
            best = Some((theta, sse, conv));
        }
        // an essentially perfect fit cannot be improved by more starts
        if sse <= 1e-24 * y_scale * y_scale * prefix.len() as f64 {
            break;
        }
    }
    let (theta, _sse, converged) = best.unwrap();

    let mut bounds_hit = Vec::new();
    let near = |v: f64, b: (f64, f64)| -> bool {
        let width = (b.1 - b.0).max(1e-300);
        (v - b.0).abs() <= 1e-8 * width || (b.1 - v).abs() <= 1e-8 * width
    };
    if near(theta[0], bounds.l) {
        bounds_hit.push("L");
    }
    if near(theta[1], bounds.rate) {
        bounds_hit.push("k");
    }
    if near(theta[2], bounds.t0) {
        bounds_hit.push("t0");
    }

    let spec = spec_from_params(family, theta[0], theta[1], theta[2])?;
    let rmse = rmse_of(&spec, prefix);
    Ok(FitResult {
        spec,
        rmse,
        converged,
        n_starts_used: n_used,
        bounds_hit,
        degenerate_input: degenerate,
    })
}

/// Plain (unweighted) RMSE of a curve against a series.
pub fn rmse_of(spec: &SigmoidSpec, series: &TimeSeries) -> f64 {
    let n = series.len().max(1);
    let sse: f64 = series
        .iter()
        .map(|(t, y)| {
            let r = y - spec.eval_raw(t);
            r * r
        })
        .sum();
    (sse / n as f64).sqrt()
}

/// How the growth rate is handled when scanning an error surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RatePolicy {
    /// Use this fixed rate in every cell.
    Fixed(f64),
    /// Minimize the cell error over the rate within a bracket.
    Optimize { lo: f64, hi: f64 },
}

/// The mean-square-error landscape over a grid of `(L, t0)` candidates.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorSurface {
    pub l_values: Vec<f64>,
    pub t0_values: Vec<f64>,
    /// Row-major: `rmse[i * t0_values.len() + j]` for `(l_values[i], t0_values[j])`.
    pub rmse: Vec<f64>,
}

impl ErrorSurface {
    pub fn rmse_at(&self, i: usize, j: usize) -> f64 {
        self.rmse[i * self.t0_values.len() + j]
    }

    pub fn min_rmse(&self) -> f64 {
        self.rmse.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn min_cell(&self) -> (usize, usize, f64) {
        let (idx, &v) = self
            .rmse
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        (idx / self.t0_values.len(), idx % self.t0_values.len(), v)
    }

    /// Cells with `rmse <= factor * min_rmse`: the near-minimum basin.
    pub fn near_min_cells(&self, factor: f64) -> Vec<(usize, usize)> {
        let cut = factor * self.min_rmse();
        let nt = self.t0_values.len();
        self.rmse
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= cut)
            .map(|(idx, _)| (idx / nt, idx % nt))
            .collect()
    }

    /// Fraction of the L-axis range spanned by the near-minimum basin.
    pub fn near_min_l_span(&self, factor: f64) -> f64 {
        let cells = self.near_min_cells(factor);
        let ls: Vec<f64> = cells.iter().map(|&(i, _)| self.l_values[i]).collect();
        let lo = ls.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let range = self.l_values.last().unwrap() - self.l_values[0];
        ((hi - lo) / range.max(1e-300)).clamp(0.0, 1.0)
    }

    /// Fraction of the t0-axis range spanned by the near-minimum basin.
    pub fn near_min_t0_span(&self, factor: f64) -> f64 {
        let cells = self.near_min_cells(factor);
        let ts: Vec<f64> = cells.iter().map(|&(_, j)| self.t0_values[j]).collect();
        let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let range = self.t0_values.last().unwrap() - self.t0_values[0];
        ((hi - lo) / range.max(1e-300)).clamp(0.0, 1.0)
    }

    /// True when the cell nearest to `(l, t0)` lies in the near-minimum basin.
    pub fn contains(&self, l: f64, t0: f64, factor: f64) -> bool {
        let i = nearest_index(&self.l_values, l);
        let j = nearest_index(&self.t0_values, t0);
        self.rmse_at(i, j) <= factor * self.min_rmse()
    }

    /// Bounding-box anisotropy (t0 cells over L cells) of the basin.
    pub fn near_min_anisotropy(&self, factor: f64) -> f64 {
        let cells = self.near_min_cells(factor);
        let (mut i_lo, mut i_hi, mut j_lo, mut j_hi) = (usize::MAX, 0usize, usize::MAX, 0usize);
        for &(i, j) in &cells {
            i_lo = i_lo.min(i);
            i_hi = i_hi.max(i);
            j_lo = j_lo.min(j);
            j_hi = j_hi.max(j);
        }
        let di = (i_hi - i_lo + 1) as f64;
        let dj = (j_hi - j_lo + 1) as f64;
        (di / dj).max(dj / di)
    }
}

fn nearest_index(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().partial_cmp(&(b.1 - x).abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

/// Scans the logistic fitting error over `(L, t0)` candidates.
pub fn error_surface(
    prefix: &TimeSeries,
    l_grid: &[f64],
    t0_grid: &[f64],
    policy: RatePolicy,
) -> Result<ErrorSurface> {
    if l_grid.is_empty() || t0_grid.is_empty() {
        return Err(Error::invalid("error surface grids must be non-empty"));
    }
    if prefix.is_empty() {
        return Err(Error::invalid("error surface needs data"));
    }
    let mut rmse = Vec::with_capacity(l_grid.len() * t0_grid.len());
    for &l in l_grid {
        for &t0 in t0_grid {
            let cell = match policy {
                RatePolicy::Fixed(k) => cell_rmse(prefix, l, k, t0),
                RatePolicy::Optimize { lo, hi } => {
                    let (_, v) =
                        golden_section_min(|k| cell_rmse(prefix, l, k, t0), lo, hi, 1e-7 * (hi - lo));
                    v
                }
            };
            rmse.push(cell);
        }
    }
    Ok(ErrorSurface {
        l_values: l_grid.to_vec(),
        t0_values: t0_grid.to_vec(),
        rmse,
    })
}

fn cell_rmse(series: &TimeSeries, l: f64, k: f64, t0: f64) -> f64 {
    let n = series.len() as f64;
    let sse: f64 = series
        .iter()
        .map(|(t, y)| {
            let r = y - l / (1.0 + (-k * (t - t0)).exp());
            r * r
        })
        .sum();
    (sse / n).sqrt()
}

/// Weighting schemes for [`modis_weighted_fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    Uniform,
    /// Weight grows linearly with sample position.
    LinearRecency,
    /// Weight doubles every `half_life` time units toward the window end
    /// (`None`: a quarter of the window span).
    ExponentialRecency { half_life: Option<f64> },
}

impl WeightScheme {
    pub const DEFAULT: [WeightScheme; 3] = [
        WeightScheme::Uniform,
        WeightScheme::LinearRecency,
        WeightScheme::ExponentialRecency { half_life: None },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Uniform => "uniform",
            WeightScheme::LinearRecency => "linear-recency",
            WeightScheme::ExponentialRecency { .. } => "exponential-recency",
        }
    }

    fn weights(&self, series: &TimeSeries) -> Vec<f64> {
        let n = series.len();
        match *self {
            WeightScheme::Uniform => vec![1.0; n],
            WeightScheme::LinearRecency => {
                (0..n).map(|i| 2.0 * (i + 1) as f64 / (n + 1) as f64).collect()
            }
            WeightScheme::ExponentialRecency { half_life } => {
                let (t_first, _) = series.first().unwrap();
                let (t_last, _) = series.last().unwrap();
                let hl = half_life.unwrap_or((t_last - t_first) / 4.0).max(1e-12);
                series
                    .times()
                    .iter()
                    .map(|&t| 2.0f64.powf((t - t_last) / hl))
                    .collect()
            }
        }
    }
}

/// Outcome of the several-weightings refit.
#[derive(Debug, Clone, Serialize)]
pub struct ModisFit {
    /// The fit with the largest asymptote across schemes.
    pub chosen: FitResult,
    pub chosen_scheme: &'static str,
    /// `(scheme name, fitted asymptote)` for every scheme.
    pub per_scheme: Vec<(String, f64)>,
}

/// Fits under several data-point weightings and keeps the answer with the
/// highest asymptote (recent points carry the most damping information, so
/// recency weighting usually produces it).
pub fn modis_weighted_fit(
    prefix: &TimeSeries,
    schemes: &[WeightScheme],
    family: SigmoidFamily,
    cfg: &FitConfig,
) -> Result<ModisFit> {
    if schemes.len() < 2 {
        return Err(Error::invalid("need at least two weighting schemes"));
    }
    let mut chosen: Option<(FitResult, &'static str)> = None;
    let mut per_scheme = Vec::new();
    for scheme in schemes {
        let w = scheme.weights(prefix);
        let fit = fit_weighted(prefix, Some(&w), family, cfg)?;
        per_scheme.push((scheme.name().to_string(), fit.asymptote()));
        if chosen
            .as_ref()
            .is_none_or(|(best, _)| fit.asymptote() > best.asymptote())
        {
            chosen = Some((fit, scheme.name()));
        }
    }
    let (chosen, chosen_scheme) = chosen.unwrap();
    Ok(ModisFit { chosen, chosen_scheme, per_scheme })
}

/// A mirrored continuation around the inflection point.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetricCompletion {
    /// Predicted samples after `t0`, on the reflected prefix grid.
    pub continuation: TimeSeries,
    /// `2 * y0`, the implied asymptote under symmetry.
    pub l_estimate: f64,
}

/// Completes a prefix under the symmetry assumption: the curve after the
/// inflection is the point rotation of the early part around `(t0, y0)`.
pub fn symmetric_completion(
    prefix: &TimeSeries,
    t0: f64,
    y0: f64,
) -> Result<SymmetricCompletion> {
    let (t_first, _) = prefix
        .first()
        .ok_or_else(|| Error::invalid("empty prefix"))?;
    let (t_last, _) = prefix.last().unwrap();
    if !(t_first <= t0 && t0 <= t_last) {
        return Err(Error::invalid(format!(
            "prefix [{t_first}, {t_last}] does not cover the inflection time {t0}"
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (t, v) in prefix.iter() {
        if t < t0 {
            times.push(2.0 * t0 - t);
            values.push(2.0 * y0 - v);
        }
    }
    times.reverse();
    values.reverse();
    Ok(SymmetricCompletion {
        continuation: TimeSeries::new(times, values)?,
        l_estimate: 2.0 * y0,
    })
}

/// Convenience: interpolates `y0` from the prefix at `t0`.
pub fn symmetric_completion_at(prefix: &TimeSeries, t0: f64) -> Result<SymmetricCompletion> {
    let y0 = prefix
        .interpolate(t0)
        .ok_or_else(|| Error::invalid("inflection time outside the prefix"))?;
    symmetric_completion(prefix, t0, y0)
}

/// The herd-immunity plateau `P * (1 - 1/R0)` for a well-mixed epidemic.
pub fn herd_immunity_limit(population: f64, r0: f64) -> Result<f64> {
    if !(population.is_finite() && population > 0.0) {
        return Err(Error::invalid(format!("population must be positive, got {population}")));
    }
    if !(r0.is_finite() && r0 > 1.0) {
        return Err(Error::domain(format!(
            "herd immunity needs R0 > 1, got {r0} (no outbreak-driven plateau)"
        )));
    }
    Ok(population * (1.0 - 1.0 / r0))
}

/// Prior belief about how the damping grows with `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DampingBelief {
    /// Damping grows linearly or faster: treat the estimate as a lower bound.
    LinearOrFaster,
    /// Damping kicks in early and hard: treat the estimate as an upper bound.
    FastEarlyDamping,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymptoteLabel {
    LowerBound,
    UpperBound,
    Unlabeled,
}

/// Caveats attached to a fitted asymptote.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub label: AsymptoteLabel,
    /// The fitted asymptote sits suspiciously close to twice the last
    /// observation, the generic no-information guess.
    pub doubling_artifact: bool,
    /// The data has not yet reached a third of the fitted asymptote, below
    /// the usual reliability rule of thumb.
    pub below_third_rule: bool,
    pub l_hat: f64,
    pub y_last: f64,
}

/// Annotates a fit with the asymptote-bound heuristics.
pub fn bound_report(fit: &FitResult, prefix: &TimeSeries, belief: DampingBelief) -> BoundReport {
    let l_hat = fit.asymptote();
    let y_last = prefix.last().map(|(_, v)| v).unwrap_or(f64::NAN);
    BoundReport {
        label: match belief {
            DampingBelief::LinearOrFaster => AsymptoteLabel::LowerBound,
            DampingBelief::FastEarlyDamping => AsymptoteLabel::UpperBound,
            DampingBelief::Unknown => AsymptoteLabel::Unlabeled,
        },
        doubling_artifact: ((l_hat - 2.0 * y_last) / l_hat).abs() < 0.25,
        below_third_rule: y_last < l_hat / 3.0,
        l_hat,
        y_last,
    }
}
