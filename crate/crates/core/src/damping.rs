//! Damping-function families for the growth law `y' = k * H(y) * y`.
//!
//! A damping function `H` satisfies `H(0) = 1`, decreases, stays positive
//! below its zero `L`, and vanishes at `L`; `H(y) * y` has exactly one local
//! maximum on `(0, L)`. Four families are built in:
//!
//! - `linear`: `H(y) = 1 - y/L` (the logistic damping)
//! - `piecewise-linear`: `H(y) = min(1, 2 - 2y/L)`, constant 1 below `L/2`,
//!   so every member with the same growth rate is *identical* there
//! - `power-tail`: `H(y) = 1` below `L/2`, then `(2 (1 - y/L))^p`: same
//!   prefix, tail convergence of order `p`
//! - `slope-tail`: `H(y) = 1` below `scale/2`, then a straight line of slope
//!   `s < 0` (per unit of `scale`); the zero, and hence the asymptote,
//!   is `scale * (1/2 - 1/s)` and depends on the tail slope alone
//!
//! Kinks sit at half the reference level; the ODE solver splits steps there.

use crate::error::{Error, Result};
use crate::numeric::golden_section_max;
use serde::{Deserialize, Serialize};

/// A damping function `H` with its family parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DampingSpec {
    /// `H(y) = 1 - y/L`.
    Linear { l: f64 },
    /// `H(y) = min(1, 2 - 2y/L)`.
    PiecewiseLinear { l: f64 },
    /// `H(y) = 1` for `y <= L/2`, `(2(1 - y/L))^p` above.
    PowerTail { l: f64, p: u32 },
    /// `H(y) = 1` for `y <= scale/2`, `1 + slope * (y/scale - 1/2)` above.
    SlopeTail { scale: f64, slope: f64 },
}

impl DampingSpec {
    /// Checks the family parameters: positive reference levels, `p >= 1`,
    /// strictly negative slope.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DampingSpec::Linear { l } | DampingSpec::PiecewiseLinear { l } => {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::invalid(format!("damping level must be positive, got {l}")));
                }
            }
            DampingSpec::PowerTail { l, p } => {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::invalid(format!("damping level must be positive, got {l}")));
                }
                if p < 1 {
                    return Err(Error::invalid("power-tail exponent must be >= 1"));
                }
            }
            DampingSpec::SlopeTail { scale, slope } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::invalid(format!("slope-tail scale must be positive, got {scale}")));
                }
                if !(slope.is_finite() && slope < 0.0) {
                    return Err(Error::invalid(format!(
                        "slope-tail slope must be negative, got {slope}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The zero of `H`: the asymptote of the induced sigmoid.
    ///
    /// For `slope-tail` the zero is implied by the tail slope:
    /// `1 + s*(y/scale - 1/2) = 0` at `y = scale * (1/2 - 1/s)`.
    pub fn asymptote(&self) -> f64 {
        match *self {
            DampingSpec::Linear { l }
            | DampingSpec::PiecewiseLinear { l }
            | DampingSpec::PowerTail { l, .. } => l,
            DampingSpec::SlopeTail { scale, slope } => scale * (0.5 - 1.0 / slope),
        }
    }

    /// The interior kink of `H`, if the family has one.
    pub fn breakpoint(&self) -> Option<f64> {
        match *self {
            DampingSpec::Linear { .. } => None,
            DampingSpec::PiecewiseLinear { l } | DampingSpec::PowerTail { l, .. } => Some(0.5 * l),
            DampingSpec::SlopeTail { scale, .. } => Some(0.5 * scale),
        }
    }

    /// `H(y)` with a domain check: `y` must lie in `[0, asymptote]`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        let l = self.asymptote();
        if !y.is_finite() || y < 0.0 || y > l {
            return Err(Error::domain(format!(
                "damping argument {y} outside [0, {l}]"
            )));
        }
        Ok(self.eval_unchecked(y))
    }

    /// `H(y)` without the domain check, clamped to 0 past the zero.
    #[inline]
    pub fn eval_unchecked(&self, y: f64) -> f64 {
        match *self {
            DampingSpec::Linear { l } => 1.0 - y / l,
            DampingSpec::PiecewiseLinear { l } => (2.0 - 2.0 * y / l).min(1.0),
            DampingSpec::PowerTail { l, p } => {
                if y <= 0.5 * l {
                    1.0
                } else {
                    (2.0 * (1.0 - y / l)).max(0.0).powi(p as i32)
                }
            }
            DampingSpec::SlopeTail { scale, slope } => {
                let u = y / scale;
                if u <= 0.5 {
                    1.0
                } else {
                    (1.0 + slope * (u - 0.5)).max(0.0)
                }
            }
        }
    }

    /// The maximizer of `H(y) * y` on `(0, asymptote)` and its value,
    /// i.e. the level at which the induced sigmoid inflects.
    ///
    /// Located by golden-section search to `1e-10 * asymptote`; `H(y) * y`
    /// is unimodal by construction for all four families.
    pub fn rate_peak(&self) -> (f64, f64) {
        let l = self.asymptote();
        golden_section_max(|y| self.eval_unchecked(y) * y, 0.0, l, 1e-10 * l)
    }

    /// Same family with all level parameters multiplied by `factor`.
    /// Scales the asymptote by `factor` for every kind.
    pub fn with_scaled_level(&self, factor: f64) -> DampingSpec {
        match *self {
            DampingSpec::Linear { l } => DampingSpec::Linear { l: l * factor },
            DampingSpec::PiecewiseLinear { l } => DampingSpec::PiecewiseLinear { l: l * factor },
            DampingSpec::PowerTail { l, p } => DampingSpec::PowerTail { l: l * factor, p },
            DampingSpec::SlopeTail { scale, slope } => DampingSpec::SlopeTail {
                scale: scale * factor,
                slope,
            },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DampingSpec::Linear { .. } => "linear",
            DampingSpec::PiecewiseLinear { .. } => "piecewise-linear",
            DampingSpec::PowerTail { .. } => "power-tail",
            DampingSpec::SlopeTail { .. } => "slope-tail",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validation() {
        assert!(DampingSpec::Linear { l: 1.0 }.validate().is_ok());
        assert!(DampingSpec::Linear { l: 0.0 }.validate().is_err());
        assert!(DampingSpec::PowerTail { l: 1.0, p: 0 }.validate().is_err());
        assert!(DampingSpec::SlopeTail { scale: 1.0, slope: 0.5 }.validate().is_err());
        assert!(DampingSpec::SlopeTail { scale: 1.0, slope: -2.0 }.validate().is_ok());
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(DampingSpec::Linear { l: 1.0 }.eval(0.5).unwrap(), 0.5);
        // constant 1 below half the level...
        assert_eq!(DampingSpec::PiecewiseLinear { l: 2.0 }.eval(0.9).unwrap(), 1.0);
        // ...then linear to zero
        assert_eq!(DampingSpec::PiecewiseLinear { l: 2.0 }.eval(1.5).unwrap(), 0.5);
        for d in [
            DampingSpec::Linear { l: 3.0 },
            DampingSpec::PiecewiseLinear { l: 3.0 },
            DampingSpec::PowerTail { l: 3.0, p: 4 },
            DampingSpec::SlopeTail { scale: 3.0, slope: -1.5 },
        ] {
            assert_eq!(d.eval(0.0).unwrap(), 1.0, "{d:?}");
            assert_abs_diff_eq!(d.eval(d.asymptote()).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        let d = DampingSpec::Linear { l: 1.0 };
        assert!(d.eval(-0.1).is_err());
        assert!(d.eval(1.1).is_err());
        assert!(d.eval(f64::NAN).is_err());
    }

    #[test]
    fn power_tail_matches_piecewise_at_p1() {
        let pt = DampingSpec::PowerTail { l: 2.0, p: 1 };
        let pw = DampingSpec::PiecewiseLinear { l: 2.0 };
        for i in 0..=40 {
            let y = i as f64 * 0.05;
            assert_abs_diff_eq!(
                pt.eval_unchecked(y),
                pw.eval_unchecked(y),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn slope_tail_asymptotes() {
        // zero of H at scale * (1/2 - 1/s)
        let cases = [(-1.0, 1.5), (-1.5, 7.0 / 6.0), (-2.0, 1.0), (-3.0, 5.0 / 6.0)];
        for (slope, expected) in cases {
            let d = DampingSpec::SlopeTail { scale: 1.0, slope };
            assert_abs_diff_eq!(d.asymptote(), expected, epsilon = 1e-12);
            assert_abs_diff_eq!(d.eval(d.asymptote()).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn monotone_non_increasing_and_positive_inside() {
        for d in [
            DampingSpec::Linear { l: 2.5 },
            DampingSpec::PiecewiseLinear { l: 2.5 },
            DampingSpec::PowerTail { l: 2.5, p: 10 },
            DampingSpec::SlopeTail { scale: 2.5, slope: -0.7 },
        ] {
            let l = d.asymptote();
            let mut prev = f64::INFINITY;
            for i in 0..=1000 {
                let y = l * i as f64 / 1000.0;
                let h = d.eval(y).unwrap();
                assert!(h <= prev + 1e-15, "{d:?} increases at y={y}");
                if y < l {
                    assert!(h > 0.0, "{d:?} hit zero early at y={y}");
                }
                prev = h;
            }
        }
    }

    #[test]
    fn rate_peak_locations() {
        // smooth peaks locate to ~sqrt(eps), kinked peaks to full precision
        let (y0, _) = DampingSpec::Linear { l: 1.0 }.rate_peak();
        assert_abs_diff_eq!(y0, 0.5, epsilon = 2e-8);
        let (y0, _) = DampingSpec::PiecewiseLinear { l: 1.0 }.rate_peak();
        assert_abs_diff_eq!(y0, 0.5, epsilon = 1e-10);
        let (y0, _) = DampingSpec::PiecewiseLinear { l: 4.0 }.rate_peak();
        assert_abs_diff_eq!(y0, 2.0, epsilon = 4e-10);
        // slope-tail with gentle slope peaks past the kink:
        // max of (1 + s(u - 1/2)) u at u = 1/4 + 1/(2|s|) for s = -1 -> 0.75
        let (y0, _) = DampingSpec::SlopeTail { scale: 1.0, slope: -1.0 }.rate_peak();
        assert_abs_diff_eq!(y0, 0.75, epsilon = 2e-8);
    }

    #[test]
    fn serde_kind_tags() {
        let d: DampingSpec = serde_json::from_str(r#"{"kind":"piecewise-linear","l":2.0}"#).unwrap();
        assert_eq!(d, DampingSpec::PiecewiseLinear { l: 2.0 });
        let d: DampingSpec =
            serde_json::from_str(r#"{"kind":"slope-tail","scale":1.0,"slope":-2.0}"#).unwrap();
        assert_eq!(d, DampingSpec::SlopeTail { scale: 1.0, slope: -2.0 });
        assert!(serde_json::from_str::<DampingSpec>(r#"{"kind":"mystery","l":1.0}"#).is_err());
    }
}
