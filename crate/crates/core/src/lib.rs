//! # scurve-core
//!
//! A numerical toolkit for sigmoid (S-curve) growth processes and for
//! quantifying how much (or how little) a data prefix can tell you about
//! where such a process is heading.
//!
//! The crate is organized around a small set of building blocks:
//!
//! - [`curves`]: closed-form sigmoid families (logistic, algebraic, error
//!   function, Gompertz) with evaluation, derivatives, and inflection points.
//! - [`damping`] and [`ode`]: the general growth law `y' = k * H(y) * y` for a
//!   damping function `H` that falls from 1 to 0, with an adaptive integrator
//!   and the separable-integral time-of-passage solver.
//! - [`verify`]: a property suite that checks whether a curve or sampled
//!   series actually behaves like a sigmoid (bounds, monotonicity, unique
//!   rate maximum, limit behavior, early growth rate).
//! - [`contagion`]: a two-population agent-based contagion simulator and its
//!   deterministic mean-field counterpart, producing cumulative-case curves
//!   whose damping is emergent rather than prescribed.
//! - [`fitting`]: multi-start Levenberg-Marquardt prefix fitting, error
//!   surfaces over `(L, t0)`, grid-based Bayesian posteriors, and remedy
//!   estimators (symmetric completion, weighted refits, asymptote bounds).
//! - [`diagnostics`]: finite-difference sensitivity matrices, Fisher
//!   information, and rolling-forecast trajectories.
//! - [`scenario`]: a file-driven experiment harness backing the `scurve`
//!   command-line binary; emits CSV/JSON artifacts deterministically.
//!
//! All stochastic operations take explicit 64-bit seeds and are reproducible
//! byte-for-byte for a fixed seed and build.

pub mod contagion;
pub mod curves;
pub mod damping;
pub mod diagnostics;
pub mod error;
pub mod fitting;
pub mod numeric;
pub mod ode;
pub mod scenario;
pub mod series;
pub mod verify;

pub use curves::{SigmoidFamily, SigmoidSpec};
pub use damping::DampingSpec;
pub use error::{Error, Result};
pub use ode::{OdeSigmoid, OdeSolution};
pub use series::TimeSeries;
