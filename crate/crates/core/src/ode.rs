//! Sigmoids defined by the autonomous growth law `y' = k * H(y) * y`.
//!
//! Solutions are anchored by the value at `t = 0`, integrated with an
//! adaptive Dormand-Prince 4(5) scheme (default tolerances: absolute 1e-10,
//! relative 1e-9), and sampled on caller-supplied grids. Steps are split at
//! damping kinks so the integrator never straddles one, and elapsed times
//! between levels come from the separable form `t = integral dy / (k H(y) y)`
//! evaluated by adaptive quadrature with endpoint handling.

use crate::damping::DampingSpec;
use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, integrate_singular_lower};
use crate::series::TimeSeries;
use serde::{Deserialize, Serialize};

/// Default absolute tolerance of the integrator.
pub const DEFAULT_ATOL: f64 = 1e-10;
/// Default relative tolerance of the integrator.
pub const DEFAULT_RTOL: f64 = 1e-9;

/// A sigmoid growth process `y' = k * H(y) * y`, anchored at `y(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSigmoid {
    damping: DampingSpec,
    k: f64,
    y_at_zero: f64,
}

/// The result of integrating an [`OdeSigmoid`] over a grid.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub series: TimeSeries,
    /// True when the solution hit the asymptote within floating-point
    /// resolution before the end of the grid; the remaining samples are
    /// clamped to the asymptote.
    pub reached_asymptote: bool,
}

impl OdeSigmoid {
    /// Validates the damping parameters, `k > 0`, and
    /// `0 < y_at_zero < asymptote`.
    pub fn new(damping: DampingSpec, k: f64, y_at_zero: f64) -> Result<Self> {
        damping.validate()?;
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::invalid(format!("growth rate k must be positive, got {k}")));
        }
        let l = damping.asymptote();
        if !(y_at_zero.is_finite() && y_at_zero > 0.0 && y_at_zero < l) {
            return Err(Error::invalid(format!(
                "anchor y(0) = {y_at_zero} must lie strictly inside (0, {l})"
            )));
        }
        Ok(OdeSigmoid { damping, k, y_at_zero })
    }

    pub fn damping(&self) -> &DampingSpec {
        &self.damping
    }

    pub fn growth_rate(&self) -> f64 {
        self.k
    }

    pub fn y_at_zero(&self) -> f64 {
        self.y_at_zero
    }

    pub fn asymptote(&self) -> f64 {
        self.damping.asymptote()
    }

    /// Right-hand side of the growth law.
    #[inline]
    fn rhs(&self, y: f64) -> f64 {
        self.k * self.damping.eval_unchecked(y) * y
    }

    /// Integrates the process over `t_grid` (strictly increasing, finite).
    ///
    /// The solution is anchored at `y(0) = y_at_zero`; grids may extend to
    /// negative times, in which case the integrator also marches backward
    /// from the anchor.
    pub fn integrate(&self, t_grid: &[f64]) -> Result<OdeSolution> {
        if t_grid.is_empty() {
            return Err(Error::invalid("integration grid is empty"));
        }
        for (i, &t) in t_grid.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::invalid(format!("non-finite grid time at index {i}")));
            }
            if i > 0 && t <= t_grid[i - 1] {
                return Err(Error::invalid("grid times must be strictly increasing"));
            }
        }

        let split = t_grid.partition_point(|&t| t < 0.0);
        let mut values = vec![0.0; t_grid.len()];
        let mut reached = false;

        // Backward sweep over negative times, nearest first.
        if split > 0 {
            let targets: Vec<f64> = t_grid[..split].iter().rev().copied().collect();
            let (vals, _) = self.march(&targets)?;
            for (j, v) in vals.into_iter().enumerate() {
                values[split - 1 - j] = v;
            }
        }
        // Forward sweep over non-negative times.
        if split < t_grid.len() {
            let targets: Vec<f64> = t_grid[split..].to_vec();
            let (vals, r) = self.march(&targets)?;
            reached = r;
            for (j, v) in vals.into_iter().enumerate() {
                values[split + j] = v;
            }
        }

        Ok(OdeSolution {
            series: TimeSeries::new(t_grid.to_vec(), values)?,
            reached_asymptote: reached,
        })
    }

    /// Marches from the anchor `(0, y_at_zero)` through `targets`, which must
    /// be sorted monotonically away from zero (all >= 0 or all <= 0).
    fn march(&self, targets: &[f64]) -> Result<(Vec<f64>, bool)> {
        let l = self.asymptote();
        let kink = self.damping.breakpoint();
        let dir = if targets.last().copied().unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };

        let mut t = 0.0;
        let mut y = self.y_at_zero;
        let mut out = Vec::with_capacity(targets.len());
        let mut reached = false;

        // Initial step from the local rate timescale; independent of the
        // asymptote while the damping is flat (exact unidentifiability below
        // the kink depends on this).
        let mut h = dir * 0.01 / (self.k * self.damping.eval_unchecked(y).max(1e-3));

        for &target in targets {
            if reached {
                out.push(l);
                continue;
            }
            if (target - t) * dir <= 0.0 {
                // Target at (or numerically behind) the current position.
                out.push(if target == 0.0 { self.y_at_zero } else { y });
                continue;
            }
            loop {
                let remaining = target - t;
                let mut step = h;
                let mut landing = false;
                if (step - remaining) * dir >= 0.0 {
                    step = remaining;
                    landing = true;
                }
                let (mut y_new, err) = dopri_step(|y| self.rhs(y), y, step);

                // Split the step at a damping kink instead of straddling it.
                if let Some(yb) = kink {
                    if (y - yb) * (y_new - yb) < 0.0 {
                        let (h_cross, y_cross) = self.locate_crossing(y, step, yb);
                        t += h_cross;
                        y = y_cross;
                        continue;
                    }
                }

                let tol = DEFAULT_ATOL + DEFAULT_RTOL * y.abs().max(y_new.abs());
                let ratio = err / tol;
                if ratio <= 1.0 {
                    t += step;
                    if landing {
                        t = target;
                    }
                    if y_new > l {
                        y_new = l;
                    }
                    y = y_new;
                    if l - y <= 1e-14 * l {
                        reached = true;
                        y = l;
                    }
                    // Standard fifth-order controller with growth clamps.
                    let factor = if ratio > 0.0 { 0.9 * ratio.powf(-0.2) } else { 5.0 };
                    h = step * factor.clamp(0.2, 5.0);
                    if landing || reached {
                        break;
                    }
                } else {
                    let factor = (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                    h = step * factor;
                    if h.abs() < 1e-14 * t.abs().max(1.0) {
                        return Err(Error::numeric(format!(
                            "step size underflow at t = {t}, y = {y}"
                        )));
                    }
                }
            }
            out.push(if reached { l } else { y });
        }
        Ok((out, reached))
    }

    /// Finds the sub-step landing exactly on the kink level `yb` by bisection
    /// over the step size. Returns `(h, yb)`; the state is snapped onto the
    /// kink so subsequent stages evaluate a single smooth branch.
    fn locate_crossing(&self, y: f64, h: f64, yb: f64) -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = h;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let (y_mid, _) = dopri_step(|y| self.rhs(y), y, mid);
            if (y_mid - yb) * (y - yb) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo).abs() <= 1e-16 * h.abs().max(1e-300) {
                break;
            }
        }
        (hi, yb)
    }

    /// Elapsed time for the solution to move from `y_from` up to `y_to`,
    /// via the separable integral of `1 / (k H(y) y)`.
    ///
    /// `y_to` may equal the asymptote: if the damping vanishes at least
    /// linearly there the passage time diverges and `f64::INFINITY` is
    /// returned; a sublinear (integrable) tail yields the finite arrival
    /// time.
    pub fn time_to_reach(&self, y_from: f64, y_to: f64) -> Result<f64> {
        let d = self.damping;
        let kinks: Vec<f64> = self.damping.breakpoint().into_iter().collect();
        passage_time(
            move |y| d.eval_unchecked(y),
            self.asymptote(),
            &kinks,
            self.k,
            y_from,
            y_to,
        )
    }

    /// The inflection point `(t0, y0)`: `y0` maximizes `H(y) * y`, and `t0`
    /// is the (signed) passage time from the anchor to `y0`.
    pub fn inflection(&self) -> Result<(f64, f64)> {
        let (y0, _) = self.damping.rate_peak();
        let t0 = if self.y_at_zero < y0 {
            self.time_to_reach(self.y_at_zero, y0)?
        } else if self.y_at_zero > y0 {
            -self.time_to_reach(y0, self.y_at_zero)?
        } else {
            0.0
        };
        Ok((t0, y0))
    }
}

/// One Dormand-Prince 4(5) step for an autonomous scalar ODE.
/// Returns the fifth-order solution and the embedded error estimate.
fn dopri_step(f: impl Fn(f64) -> f64, y: f64, h: f64) -> (f64, f64) {
    let k1 = f(y);
    let k2 = f(y + h * (0.2 * k1));
    let k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    let k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    let k5 = f(y
        + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
            - 212.0 / 729.0 * k4));
    let k6 = f(y
        + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
            + 49.0 / 176.0 * k4
            - 5103.0 / 18656.0 * k5));
    let y5 = y
        + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
            - 2187.0 / 6784.0 * k5
            + 11.0 / 84.0 * k6);
    let k7 = f(y5);
    let y4 = y
        + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4
            - 92097.0 / 339200.0 * k5
            + 187.0 / 2100.0 * k6
            + 1.0 / 40.0 * k7);
    (y5, (y5 - y4).abs())
}

/// Passage time under an arbitrary damping function: the extension point
/// for damping shapes beyond the built-in [`DampingSpec`] kinds.
///
/// Integrates `1 / (k h(y) y)` from `y_from` to `y_to`, splitting at the
/// supplied `kinks`. When `y_to` equals `asymptote`, the endpoint behavior
/// of `h` is probed: tails vanishing at least linearly make the integral
/// diverge (`f64::INFINITY`); integrable tails are handled with
/// double-exponential quadrature.
pub fn passage_time(
    h: impl Fn(f64) -> f64,
    asymptote: f64,
    kinks: &[f64],
    k: f64,
    y_from: f64,
    y_to: f64,
) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::invalid("growth rate k must be positive"));
    }
    if !(y_from.is_finite() && y_to.is_finite()) || y_from <= 0.0 {
        return Err(Error::domain(format!(
            "passage levels must be finite and positive, got {y_from} -> {y_to}"
        )));
    }
    if y_to > asymptote {
        return Err(Error::domain(format!(
            "target level {y_to} exceeds the asymptote {asymptote}"
        )));
    }
    if y_from > y_to {
        return Err(Error::domain(format!(
            "levels must be ordered, got {y_from} > {y_to}"
        )));
    }
    if y_from == y_to {
        return Ok(0.0);
    }

    let integrand = |y: f64| 1.0 / (k * h(y) * y);
    let at_asymptote = y_to == asymptote;
    let smooth_upper = if at_asymptote {
        // Probe the tail exponent q in h(L - e) ~ e^q. q >= 1 means the
        // passage time diverges; q < 1 leaves an integrable singularity.
        let e1 = 1e-6 * asymptote;
        let e2 = 1e-8 * asymptote;
        let h1 = h(asymptote - e1);
        let h2 = h(asymptote - e2);
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::numeric("damping vanished before the asymptote"));
        }
        let q = (h1 / h2).ln() / (e1 / e2).ln();
        if q >= 0.98 {
            return Ok(f64::INFINITY);
        }
        (asymptote * (1.0 - 1e-3)).max(y_from)
    } else {
        y_to
    };

    let mut total = 0.0;
    if smooth_upper > y_from {
        // Split at the kinks so each Simpson panel sees a smooth integrand.
        let mut cuts = vec![y_from];
        for &b in kinks {
            if b > y_from && b < smooth_upper {
                cuts.push(b);
            }
        }
        cuts.push(smooth_upper);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        for w in cuts.windows(2) {
            total += adaptive_simpson(&integrand, w[0], w[1], 1e-12)?;
        }
    }
    if at_asymptote {
        // Substitute u = L - y: the tail becomes a power singularity at
        // u = 0, integrated with sub-resolution handling.
        let tail = |u: f64| 1.0 / (k * h(asymptote - u) * (asymptote - u));
        let u1 = asymptote - smooth_upper;
        total += integrate_singular_lower(&tail, u1, 1e-12 * asymptote, 1e-11)?;
    }
    Ok(total)
}
