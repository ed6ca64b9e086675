use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples `v(t)` on strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries")]
pub struct TimeSeries {
    t: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSeries {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl TryFrom<RawSeries> for TimeSeries {
    type Error = Error;
    fn try_from(r: RawSeries) -> Result<Self> {
        TimeSeries::new(r.t, r.v)
    }
}

impl TimeSeries {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::input("time series is empty"));
        }
        if t.len() != v.len() {
            return Err(Error::input(format!(
                "time series has {} times but {} values",
                t.len(),
                v.len()
            )));
        }
        if let Some(i) = t.iter().chain(&v).position(|x| !x.is_finite()) {
            return Err(Error::input(format!("non-finite entry at position {i}")));
        }
        if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::input(format!(
                "timestamps must increase strictly (t[{}] = {} then {})",
                i,
                t[i],
                t[i + 1]
            )));
        }
        Ok(TimeSeries { t, v })
    }

    /// Uniform samples of `f` on `[t0, t1]` with `intervals` steps.
    pub fn sample<F: Fn(f64) -> f64>(f: F, t0: f64, t1: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::input("need at least one interval"));
        }
        let h = (t1 - t0) / intervals as f64;
        let t: Vec<f64> = (0..=intervals).map(|k| t0 + h * k as f64).collect();
        let v = t.iter().map(|&x| f(x)).collect();
        TimeSeries::new(t, v)
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Trapezoidal integral over the sampled span; zero for a single sample.
    pub fn trapezoid(&self) -> f64 {
        self.t
            .windows(2)
            .zip(self.v.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Piecewise-linear interpolation, clamped to the end values outside the span.
    pub fn interpolate(&self, at: f64) -> f64 {
        let n = self.t.len();
        if at <= self.t[0] {
            return self.v[0];
        }
        if at >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let i = self.t.partition_point(|&x| x <= at) - 1;
        let w = (at - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + w * (self.v[i + 1] - self.v[i])
    }
}
