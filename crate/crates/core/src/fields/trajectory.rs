use crate::error::{NskError, Result};

/// Frames sampled on a uniform time grid `t0 + k dt`.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    t0: f64,
    dt: f64,
    frames: Vec<T>,
}

impl<T> Trajectory<T> {
    pub fn new(t0: f64, dt: f64, frames: Vec<T>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NskError::InvalidParameter(format!(
                "trajectory step must be positive (got {dt})"
            )));
        }
        Ok(Self { t0, dt, frames })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn frames(&self) -> &[T] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &T {
        &self.frames[k]
    }

    pub fn push(&mut self, frame: T) {
        self.frames.push(frame);
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Trajectory<U> {
        Trajectory {
            t0: self.t0,
            dt: self.dt,
            frames: self.frames.iter().map(f).collect(),
        }
    }

    /// Final time covered by the frames.
    pub fn duration(&self) -> f64 {
        self.dt * self.len().saturating_sub(1) as f64
    }
}
