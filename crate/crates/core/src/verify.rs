//! Checks whether a curve or a sampled series actually behaves like a
//! sigmoid: bounded and positive, monotone, a single growth-rate maximum,
//! vanishing rate in both limits, and (when a finite rate is claimed) early
//! exponential growth at that rate.
//!
//! Every clause reports `Pass`, `Fail`, or `Indeterminate`; a clause that the
//! sampled window cannot resolve is *indeterminate, never a pass*. The
//! damping recovery helper `recover_damping` inverts the growth law
//! `H(y) = y' / (k y)` from sampled data.

use crate::curves::SigmoidSpec;
use crate::error::{Error, Result};
use crate::ode::OdeSigmoid;
use crate::series::{linspace, TimeSeries};
use serde::Serialize;

/// The numerically checkable sigmoid properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    /// `0 < y < L` throughout (a terminal plateau at `L` is tolerated for
    /// processes that arrive in finite time).
    Bounds,
    /// `y -> 0` toward the start of the window.
    LimitZero,
    /// `y -> L` toward the end of the window.
    LimitAsymptote,
    /// strictly increasing values.
    StrictIncrease,
    /// the growth rate `y'` has exactly one local maximum.
    UniqueRateMax,
    /// `y' -> 0` at both ends of the window.
    RateLimitsZero,
    /// `y'/y` approaches the claimed growth rate early on (within 1%).
    EarlyGrowthRate,
}

impl Clause {
    pub const ALL: [Clause; 7] = [
        Clause::Bounds,
        Clause::LimitZero,
        Clause::LimitAsymptote,
        Clause::StrictIncrease,
        Clause::UniqueRateMax,
        Clause::RateLimitsZero,
        Clause::EarlyGrowthRate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Clause::Bounds => "bounds",
            Clause::LimitZero => "limit-zero",
            Clause::LimitAsymptote => "limit-asymptote",
            Clause::StrictIncrease => "strict-increase",
            Clause::UniqueRateMax => "unique-rate-max",
            Clause::RateLimitsZero => "rate-limits-zero",
            Clause::EarlyGrowthRate => "early-growth-rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseStatus {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClauseReport {
    pub clause: Clause,
    pub status: ClauseStatus,
    pub detail: String,
}

/// What the series is claimed to be: asymptote, optional finite early growth
/// rate, optional inflection time.
#[derive(Debug, Clone, Copy)]
pub struct SigmoidClaim {
    pub asymptote: f64,
    pub growth_rate: Option<f64>,
    pub inflection_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub clauses: Vec<ClauseReport>,
}

impl PropertyReport {
    pub fn status(&self, clause: Clause) -> ClauseStatus {
        self.clauses
            .iter()
            .find(|c| c.clause == clause)
            .map(|c| c.status)
            .unwrap_or(ClauseStatus::Indeterminate)
    }

    /// No clause failed, and the core clauses (bounds, strict increase) were
    /// actually resolvable and passed.
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.status != ClauseStatus::Fail)
            && self.status(Clause::Bounds) == ClauseStatus::Pass
            && self.status(Clause::StrictIncrease) == ClauseStatus::Pass
    }

    pub fn failures(&self) -> Vec<Clause> {
        self.clauses
            .iter()
            .filter(|c| c.status == ClauseStatus::Fail)
            .map(|c| c.clause)
            .collect()
    }
}

/// Tolerances used by the clause checks. The defaults suit dense, noise-free
/// grids spanning well past the inflection point.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Fraction of `L` within which the window ends must sit for the limit
    /// clauses to pass.
    pub limit_tol: f64,
    /// Relative tolerance on the early growth rate.
    pub early_rate_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { limit_tol: 0.02, early_rate_tol: 0.01 }
    }
}

/// Numeric time derivative: central differences inside, one-sided at the ends.
pub fn numeric_derivative(series: &TimeSeries) -> Vec<f64> {
    let t = series.times();
    let v = series.values();
    let n = t.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (v[1] - v[0]) / (t[1] - t[0]);
    d[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    d
}

/// Recovers the damping function from samples by inverting `y' = k H(y) y`.
///
/// Returns `(y, H_estimate)` pairs. Values must be strictly positive.
pub fn recover_damping(series: &TimeSeries, k: f64) -> Result<Vec<(f64, f64)>> {
    if series.len() < 3 {
        return Err(Error::invalid("damping recovery needs at least 3 samples"));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid("growth rate k must be positive"));
    }
    if let Some((t, v)) = series.iter().find(|&(_, v)| v <= 0.0) {
        return Err(Error::domain(format!(
            "damping recovery requires positive values; got {v} at t = {t}"
        )));
    }
    let d = numeric_derivative(series);
    Ok(series
        .values()
        .iter()
        .zip(d.iter())
        .map(|(&y, &dy)| (y, dy / (k * y)))
        .collect())
}

/// Runs the full clause suite against a sampled series.
pub fn verify_series(
    series: &TimeSeries,
    claim: &SigmoidClaim,
    opts: &VerifyOptions,
) -> PropertyReport {
    let mut clauses = Vec::new();
    let n = series.len();
    let l = claim.asymptote;
    let v = series.values();
    let t = series.times();

    if n < 5 {
        for clause in Clause::ALL {
            clauses.push(ClauseReport {
                clause,
                status: ClauseStatus::Indeterminate,
                detail: "series too short".into(),
            });
        }
        return PropertyReport { clauses };
    }

    let d = numeric_derivative(series);
    let d_max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    // bounds: positive throughout, below L except a terminal plateau
    let plateau_from = v
        .iter()
        .rposition(|&x| x < l * (1.0 - 1e-12))
        .map(|i| i + 1)
        .unwrap_or(0);
    let bounds_ok = v.iter().all(|&x| x > 0.0)
        && v.iter().all(|&x| x <= l * (1.0 + 1e-12))
        && v[..plateau_from].iter().all(|&x| x < l * (1.0 + 1e-12));
    clauses.push(ClauseReport {
        clause: Clause::Bounds,
        status: if bounds_ok { ClauseStatus::Pass } else { ClauseStatus::Fail },
        detail: format!("range [{:.6e}, {:.6e}] vs L = {:.6e}", v[0], v[n - 1], l),
    });

    // limit at zero
    let status = if v[0] <= opts.limit_tol * l && v[0] > -opts.limit_tol * l {
        ClauseStatus::Pass
    } else {
        ClauseStatus::Indeterminate
    };
    clauses.push(ClauseReport {
        clause: Clause::LimitZero,
        status,
        detail: format!("first value {:.6e} ({:.3}% of L)", v[0], 100.0 * v[0] / l),
    });

    // limit at the asymptote
    let gap = l - v[n - 1];
    let tail_start = n - (n / 10).max(2);
    let tail_rate_max = d[tail_start..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let limit_l_status = if gap.abs() <= opts.limit_tol * l {
        ClauseStatus::Pass
    } else if d_max > 0.0 && tail_rate_max <= 1e-6 * d_max && gap > 0.05 * l {
        // plateaued visibly below the claimed asymptote
        ClauseStatus::Fail
    } else {
        ClauseStatus::Indeterminate
    };
    clauses.push(ClauseReport {
        clause: Clause::LimitAsymptote,
        status: limit_l_status,
        detail: format!("final gap {:.6e} ({:.3}% of L)", gap, 100.0 * gap / l),
    });

    // strict increase (terminal plateau at L tolerated)
    let mut increase_ok = true;
    for i in 1..n {
        if v[i] <= v[i - 1] && !(i >= plateau_from && v[i] >= l * (1.0 - 1e-12)) {
            increase_ok = false;
            break;
        }
    }
    clauses.push(ClauseReport {
        clause: Clause::StrictIncrease,
        status: if increase_ok { ClauseStatus::Pass } else { ClauseStatus::Fail },
        detail: String::new(),
    });

    // unique rate maximum: count significant sign changes of the rate slope
    let mut peaks = 0usize;
    let mut argmax_t = t[0];
    let mut best = f64::NEG_INFINITY;
    let mut rising = true;
    let threshold = 1e-10 * d_max.abs().max(1e-300);
    for i in 1..n {
        let dd = d[i] - d[i - 1];
        if rising && dd < -threshold {
            peaks += 1;
            rising = false;
        } else if !rising && dd > threshold {
            rising = true;
        }
        if d[i] > best {
            best = d[i];
            argmax_t = t[i];
        }
    }
    let unique_status = if peaks == 1 {
        match claim.inflection_time {
            Some(t0) => {
                let spacing = (t[n - 1] - t[0]) / (n - 1) as f64;
                let tol = 0.02 * (t[n - 1] - t[0]) + 2.0 * spacing;
                if (argmax_t - t0).abs() <= tol {
                    ClauseStatus::Pass
                } else {
                    ClauseStatus::Fail
                }
            }
            None => ClauseStatus::Pass,
        }
    } else if peaks == 0 {
        ClauseStatus::Indeterminate
    } else {
        ClauseStatus::Fail
    };
    clauses.push(ClauseReport {
        clause: Clause::UniqueRateMax,
        status: unique_status,
        detail: format!("{peaks} rate maxima; argmax at t = {argmax_t:.6}"),
    });

    // rate limits: both window ends well below the peak rate
    let head_rate_max = d[..(n / 10).max(2)].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let rate_limits = if d_max <= 0.0 {
        ClauseStatus::Indeterminate
    } else if head_rate_max <= 0.05 * d_max && tail_rate_max <= 0.05 * d_max {
        ClauseStatus::Pass
    } else {
        ClauseStatus::Indeterminate
    };
    clauses.push(ClauseReport {
        clause: Clause::RateLimitsZero,
        status: rate_limits,
        detail: format!(
            "head/peak = {:.3e}, tail/peak = {:.3e}",
            head_rate_max / d_max.abs().max(1e-300),
            tail_rate_max / d_max.abs().max(1e-300)
        ),
    });

    // early growth rate
    let early = match claim.growth_rate {
        None => ClauseReport {
            clause: Clause::EarlyGrowthRate,
            status: ClauseStatus::Indeterminate,
            detail: "no finite growth rate claimed".into(),
        },
        Some(k) => {
            let m = (n / 10).max(3).min(n);
            let decade_end = v[m - 1];
            let spacing = (t[m - 1] - t[0]) / (m - 1) as f64;
            let truncation = (k * spacing) * (k * spacing) / 6.0;
            if decade_end > 0.05 * l {
                ClauseReport {
                    clause: Clause::EarlyGrowthRate,
                    status: ClauseStatus::Indeterminate,
                    detail: "window starts too late to observe the early rate".into(),
                }
            } else if truncation > 0.002 {
                ClauseReport {
                    clause: Clause::EarlyGrowthRate,
                    status: ClauseStatus::Indeterminate,
                    detail: "grid too coarse to resolve the early rate to 1%".into(),
                }
            } else if v[..m].iter().any(|&x| x <= 0.0) {
                ClauseReport {
                    clause: Clause::EarlyGrowthRate,
                    status: ClauseStatus::Indeterminate,
                    detail: "non-positive early values".into(),
                }
            } else {
                let mut rates: Vec<f64> = (1..m)
                    .map(|i| d[i] / v[i])
                    .collect();
                rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let median = rates[rates.len() / 2];
                let rel = (median - k).abs() / k;
                ClauseReport {
                    clause: Clause::EarlyGrowthRate,
                    status: if rel <= opts.early_rate_tol {
                        ClauseStatus::Pass
                    } else {
                        ClauseStatus::Fail
                    },
                    detail: format!("median early rate {median:.6} vs claimed {k:.6}"),
                }
            }
        }
    };
    clauses.push(early);

    PropertyReport { clauses }
}

/// Verifies a closed-form curve by dense sampling around its inflection.
///
/// The window half-width is family-specific: wide enough to expose both
/// limits, narrow enough that the tails neither underflow to exactly zero
/// nor saturate at the asymptote in double precision.
pub fn verify_curve(spec: &SigmoidSpec, n_points: usize) -> Result<PropertyReport> {
    use crate::curves::SigmoidFamily;
    let (t0, _) = spec.inflection();
    let halfwidth = match spec.family() {
        SigmoidFamily::Logistic => 14.0 / spec.beta(),
        SigmoidFamily::Algebraic => 14.0 / spec.beta(),
        SigmoidFamily::ErrorFunction => 5.0 / spec.alpha(),
        SigmoidFamily::Gompertz => 6.0 / spec.beta(),
    };
    let grid = linspace(t0 - halfwidth, t0 + halfwidth, n_points.max(501))?;
    let series = TimeSeries::new(grid.clone(), grid.iter().map(|&t| spec.eval_raw(t)).collect())?;
    let claim = SigmoidClaim {
        asymptote: spec.asymptote(),
        growth_rate: spec.growth_rate(),
        inflection_time: Some(t0),
    };
    Ok(verify_series(&series, &claim, &VerifyOptions::default()))
}

/// Verifies an ODE-defined process by integrating it over a window that
/// starts deep in the exponential regime and runs well past the inflection.
///
/// The first third of the samples covers only the early (near-exponential)
/// segment so that the early-rate clause sees resolvable data; the rest spans
/// the transition and tail.
pub fn verify_ode(ode: &OdeSigmoid, n_points: usize) -> Result<PropertyReport> {
    let l = ode.asymptote();
    let k = ode.growth_rate();
    let y0 = ode.y_at_zero();
    let n = n_points.max(2001);
    let early_level = (0.002 * l).min(0.5 * y0);
    let early_top = (0.04 * l).min(0.8 * y0).max(early_level * 2.0);
    let t_back = -ode.time_to_reach(early_level, y0)?;
    let t_early_end = -ode.time_to_reach(early_top, y0)?;
    let (t0, _) = ode.inflection()?;
    let t_escape = ode.time_to_reach(y0, 0.98 * l)?;
    let t_fwd = if t_escape.is_finite() {
        t_escape.min(t0 + 40.0 / k)
    } else {
        t0 + 40.0 / k
    };
    let t_fwd = t_fwd.max(t_early_end + 10.0 / k);

    let n_early = n / 3;
    let mut grid = linspace(t_back, t_early_end, n_early)?;
    grid.extend_from_slice(&linspace(t_early_end, t_fwd, n - n_early + 1)?[1..]);

    let sol = ode.integrate(&grid)?;
    let claim = SigmoidClaim {
        asymptote: l,
        growth_rate: Some(k),
        inflection_time: Some(t0),
    };
    Ok(verify_series(&sol.series, &claim, &VerifyOptions::default()))
}
