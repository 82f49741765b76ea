//! Closed-form sigmoid families: evaluation, analytic derivatives,
//! inflection points, and asymptotes.
//!
//! All four families share one parameter layout `(L, alpha, beta, shift)`:
//!
//! - `Logistic`:       `y(t) = L / (1 + alpha * exp(-beta * u))`
//! - `Algebraic`:      `y(t) = (L/2) * (1 + v / sqrt(1 + v^2))`, `v = beta * u`
//! - `ErrorFunction`:  `y(t) = (L/2) * (1 + erf(alpha * u))`
//! - `Gompertz`:       `y(t) = L * exp(-alpha * exp(-beta * u))`
//!
//! with `u = t - shift`. The role of `alpha`/`beta` is family-specific: the
//! logistic and Gompertz use `alpha` as a dimensionless shape and `beta` as
//! the rate; the error function takes its slope from `alpha`; the algebraic
//! curve takes its time scale from `beta`. Unused parameters are ignored but
//! still validated. For the logistic family the early growth rate `k` equals
//! `beta` and is exposed as [`SigmoidSpec::growth_rate`].

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The supported closed-form sigmoid families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmoidFamily {
    Logistic,
    Algebraic,
    ErrorFunction,
    Gompertz,
}

impl SigmoidFamily {
    pub const ALL: [SigmoidFamily; 4] = [
        SigmoidFamily::Logistic,
        SigmoidFamily::Algebraic,
        SigmoidFamily::ErrorFunction,
        SigmoidFamily::Gompertz,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SigmoidFamily::Logistic => "logistic",
            SigmoidFamily::Algebraic => "algebraic",
            SigmoidFamily::ErrorFunction => "error-function",
            SigmoidFamily::Gompertz => "gompertz",
        }
    }
}

impl std::str::FromStr for SigmoidFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(SigmoidFamily::Logistic),
            "algebraic" => Ok(SigmoidFamily::Algebraic),
            "error-function" => Ok(SigmoidFamily::ErrorFunction),
            "gompertz" => Ok(SigmoidFamily::Gompertz),
            other => Err(Error::invalid(format!(
                "unknown sigmoid family `{other}` (expected one of: logistic, algebraic, error-function, gompertz)"
            ))),
        }
    }
}

/// A parameterized closed-form sigmoid. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidSpec {
    family: SigmoidFamily,
    l: f64,
    alpha: f64,
    beta: f64,
    shift: f64,
}

impl SigmoidSpec {
    /// Validates `L > 0`, `alpha > 0`, `beta > 0`, finite `shift`.
    pub fn new(family: SigmoidFamily, l: f64, alpha: f64, beta: f64, shift: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::invalid(format!("asymptote L must be positive, got {l}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        if !shift.is_finite() {
            return Err(Error::invalid("shift must be finite"));
        }
        Ok(SigmoidSpec { family, l, alpha, beta, shift })
    }

    /// The standard logistic `y = L / (1 + exp(-k (t - t0)))`.
    pub fn logistic(l: f64, k: f64, t0: f64) -> Result<Self> {
        SigmoidSpec::new(SigmoidFamily::Logistic, l, 1.0, k, t0)
    }

    pub fn family(&self) -> SigmoidFamily {
        self.family
    }

    pub fn asymptote(&self) -> f64 {
        self.l
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// The early exponential growth rate, where the family has one.
    ///
    /// Only the logistic has a finite positive limit of `y'/y` as
    /// `t -> -infinity`; it equals `beta`. The other families either grow
    /// slower (algebraic) or faster (error function, Gompertz) than any
    /// exponential in the far past.
    pub fn growth_rate(&self) -> Option<f64> {
        match self.family {
            SigmoidFamily::Logistic => Some(self.beta),
            _ => None,
        }
    }

    /// Evaluates the curve. Errors on non-finite `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain(format!("eval requires finite t, got {t}")));
        }
        Ok(self.eval_raw(t))
    }

    /// Evaluation without the finiteness check, for hot loops over known grids.
    #[inline]
    pub fn eval_raw(&self, t: f64) -> f64 {
        let u = t - self.shift;
        match self.family {
            SigmoidFamily::Logistic => self.l / (1.0 + self.alpha * (-self.beta * u).exp()),
            SigmoidFamily::Algebraic => {
                let v = self.beta * u;
                0.5 * self.l * (1.0 + v / (1.0 + v * v).sqrt())
            }
            SigmoidFamily::ErrorFunction => 0.5 * self.l * (1.0 + erf(self.alpha * u)),
            SigmoidFamily::Gompertz => self.l * (-self.alpha * (-self.beta * u).exp()).exp(),
        }
    }

    /// Analytic `dy/dt`. Strictly positive for finite `t`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain(format!("derivative requires finite t, got {t}")));
        }
        Ok(self.derivative_raw(t))
    }

    #[inline]
    pub fn derivative_raw(&self, t: f64) -> f64 {
        let u = t - self.shift;
        match self.family {
            SigmoidFamily::Logistic => {
                let y = self.eval_raw(t);
                self.beta * y * (1.0 - y / self.l)
            }
            SigmoidFamily::Algebraic => {
                let v = self.beta * u;
                0.5 * self.l * self.beta * (1.0 + v * v).powf(-1.5)
            }
            SigmoidFamily::ErrorFunction => {
                let v = self.alpha * u;
                0.5 * self.l * self.alpha * TWO_OVER_SQRT_PI * (-v * v).exp()
            }
            SigmoidFamily::Gompertz => {
                let e = self.alpha * (-self.beta * u).exp();
                self.l * (-e).exp() * self.beta * e
            }
        }
    }

    /// The inflection point `(t0, y0)`: the unique maximizer of `dy/dt` and
    /// the curve value there. Closed form per family:
    ///
    /// - logistic: `t0 = shift + ln(alpha)/beta`, `y0 = L/2`
    /// - algebraic: `t0 = shift`, `y0 = L/2`
    /// - error function: `t0 = shift`, `y0 = L/2`
    /// - Gompertz: `t0 = shift + ln(alpha)/beta`, `y0 = L/e`
    pub fn inflection(&self) -> (f64, f64) {
        match self.family {
            SigmoidFamily::Logistic => {
                (self.shift + self.alpha.ln() / self.beta, 0.5 * self.l)
            }
            SigmoidFamily::Algebraic => (self.shift, 0.5 * self.l),
            SigmoidFamily::ErrorFunction => (self.shift, 0.5 * self.l),
            SigmoidFamily::Gompertz => (
                self.shift + self.alpha.ln() / self.beta,
                self.l * (-1.0f64).exp(),
            ),
        }
    }

    /// Copy with a different asymptote, keeping the shape parameters.
    pub fn with_asymptote(&self, l: f64) -> Result<Self> {
        SigmoidSpec::new(self.family, l, self.alpha, self.beta, self.shift)
    }
}

/// The error function, accurate to better than 1e-13 absolute everywhere.
///
/// Uses the alternating Maclaurin series for |x| <= 2.5 and the standard
/// continued fraction for the complementary function above that. Exposed so
/// other modules (and bindings) can reuse it.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax <= 2.5 { erf_series(ax) } else { 1.0 - erfc_cf(ax) };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// erf via its Maclaurin series; reliable for |x| <= ~3.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // (-1)^n x^(2n+1) / n!
    let mut sum = x;
    for n in 1..200 {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 * sum.abs() + 1e-300 {
            break;
        }
    }
    TWO_OVER_SQRT_PI * sum
}

/// erfc via the Laplace continued fraction; reliable for x >= ~2.
fn erfc_cf(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = 0.0;
    for n in (1..=80).rev() {
        f = (n as f64 * 0.5) / (x + f);
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
}
