//! Ordered `(time, value)` samples: the data currency shared by the
//! simulators, fitters, and diagnostics.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An ordered time series with strictly increasing times and finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series, validating that times are finite and strictly
    /// increasing, that lengths match, and that all values are finite.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(format!(
                "time series length mismatch: {} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::invalid(format!("non-finite time at index {i}")));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::invalid(format!(
                    "times must be strictly increasing (index {i}: {} after {})",
                    t,
                    times[i - 1]
                )));
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        Ok(TimeSeries { times, values })
    }

    /// Samples `f` on an evenly spaced grid of `n` points over `[t_min, t_max]`.
    pub fn from_fn(t_min: f64, t_max: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let times = linspace(t_min, t_max, n)?;
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries::new(times, values)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn first(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.values.first()?))
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// The samples with `t <= t_max`, as a new series.
    pub fn prefix(&self, t_max: f64) -> TimeSeries {
        let n = self.times.partition_point(|&t| t <= t_max);
        TimeSeries {
            times: self.times[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }

    /// The samples with `value <= y_max` up to the first exceedance.
    pub fn prefix_below(&self, y_max: f64) -> TimeSeries {
        let n = self
            .values
            .iter()
            .position(|&v| v > y_max)
            .unwrap_or(self.values.len());
        TimeSeries {
            times: self.times[..n].to_vec(),
            values: self.values[..n].to_vec(),
        }
    }

    /// Linear interpolation at `t`. `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        if self.is_empty() || t < self.times[0] || t > *self.times.last().unwrap() {
            return None;
        }
        let i = self.times.partition_point(|&x| x < t);
        if i == 0 {
            return Some(self.values[0]);
        }
        if (self.times[i] - t).abs() == 0.0 {
            return Some(self.values[i]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// True if values never decrease.
    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Applies `f` to every value, keeping times.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        TimeSeries::new(self.times.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("linspace needs at least 2 points"));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!("bad linspace range [{a}, {b}]")));
    }
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    // Exact endpoint, so prefix/grid logic can rely on it.
    out[n - 1] = b;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing_times() {
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(vec![0.0, -1.0], vec![1.0, 2.0]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn prefix_and_interpolate() {
        let s = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 10.0, 20.0, 30.0]).unwrap();
        assert_eq!(s.prefix(1.5).len(), 2);
        assert_eq!(s.prefix(3.0).len(), 4);
        assert_eq!(s.interpolate(1.5), Some(15.0));
        assert_eq!(s.interpolate(0.0), Some(0.0));
        assert_eq!(s.interpolate(-0.1), None);
        let below = s.prefix_below(20.0);
        assert_eq!(below.len(), 3);
    }

    #[test]
    fn linspace_hits_endpoints() {
        let g = linspace(-1.0, 2.0, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[6], 2.0);
    }
}
