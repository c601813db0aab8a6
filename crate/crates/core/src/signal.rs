//! Sampled piecewise-linear signals.
//!
//! A [`Signal`] stores strictly increasing sample times and the values at
//! those times; between samples the signal is the linear interpolant.
//! Relay operators consume signals as inputs and produce signals as
//! outputs (outputs are additionally sampled at every switching instant).

use crate::error::{Error, Result};

/// A continuous piecewise-linear function of time, stored by its samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Signal {
    /// Build a signal from samples.
    ///
    /// Times must be strictly increasing and all entries finite; at least
    /// one sample is required.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Validation("signal needs at least one sample".into()));
        }
        if times.len() != values.len() {
            return Err(Error::Validation(format!(
                "signal has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("signal samples must be finite".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("signal times must be strictly increasing".into()));
        }
        Ok(Signal { times, values })
    }

    /// Sample a closure on a uniform grid of `n ≥ 2` points over `[t0, t1]`.
    pub fn from_fn<F: FnMut(f64) -> f64>(mut f: F, t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n < 2 || !(t1 > t0) {
            return Err(Error::Validation(
                "sampling needs n >= 2 points and t1 > t0".into(),
            ));
        }
        let times: Vec<f64> =
            (0..n).map(|i| t0 + (t1 - t0) * (i as f64) / (n as f64 - 1.0)).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Signal::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one sample
    }

    /// First sample time.
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    /// Last sample time.
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Value of the linear interpolant at `t` (clamped to the time range).
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= *self.times.last().unwrap() {
            return *self.values.last().unwrap();
        }
        // partition_point returns the first index with times[i] > t.
        let hi = self.times.partition_point(|&s| s <= t);
        let lo = hi - 1;
        let (t0, t1) = (self.times[lo], self.times[hi]);
        let (v0, v1) = (self.values[lo], self.values[hi]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Split into the part up to sample index `k` (inclusive) and the part
    /// from sample index `k` on; the sample at `k` belongs to both halves.
    pub fn split_at_sample(&self, k: usize) -> Result<(Signal, Signal)> {
        if k + 1 >= self.times.len() || k == 0 && self.times.len() == 1 {
            return Err(Error::Validation(format!(
                "split index {k} out of range for {} samples",
                self.times.len()
            )));
        }
        let head = Signal::new(self.times[..=k].to_vec(), self.values[..=k].to_vec())?;
        let tail = Signal::new(self.times[k..].to_vec(), self.values[k..].to_vec())?;
        Ok((head, tail))
    }
}
