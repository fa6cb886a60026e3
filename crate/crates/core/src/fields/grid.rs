use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{NskError, Result};

/// Default cap on the total number of grid points.
pub const DEFAULT_MAX_POINTS: usize = 1 << 20;

/// Largest per-axis resolution accepted in three dimensions unless a
/// larger budget is requested explicitly.
pub const DEFAULT_MAX_N_3D: usize = 32;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on the unit torus `[0,1)^d`.
///
/// Samples are stored row-major with axis 0 varying slowest. The FFT plans
/// are built once per grid and shared by every clone.
#[derive(Clone)]
pub struct Grid {
    dim: usize,
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}D, n={})", self.dim, self.n)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D n={}", self.dim, self.n)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

impl Eq for Grid {}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        let max_points = if dim == 3 {
            DEFAULT_MAX_N_3D.pow(3)
        } else {
            DEFAULT_MAX_POINTS
        };
        Self::with_budget(dim, n, max_points)
    }

    /// Build a grid with an explicit cap on `n^dim`.
    pub fn with_budget(dim: usize, n: usize, max_points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(NskError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3 (got {dim})"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(NskError::InvalidGrid(format!(
                "points per axis must be a power of two >= 8 (got {n})"
            )));
        }
        let total = n
            .checked_pow(dim as u32)
            .ok_or_else(|| NskError::InvalidGrid("point count overflows".into()))?;
        if total > max_points {
            return Err(NskError::InvalidGrid(format!(
                "{total} points exceed the memory budget of {max_points}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            dim,
            n,
            plans: Arc::new(plans),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `spacing^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Multi-index of a flat index; unused trailing axes are zero.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.dim)
            .fold(0, |acc, &i| acc * self.n + (i % self.n))
    }

    /// Physical coordinates of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h, idx[2] as f64 * h]
    }

    /// Signed integer frequency of a one-dimensional index.
    pub fn frequency(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Integer frequency vector of a flat spectral index.
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0i64; 3];
        for axis in 0..self.dim {
            k[axis] = self.frequency(idx[axis]);
        }
        k
    }

    /// Angular wavenumber used by first-order (odd) derivatives; the
    /// Nyquist mode has no real odd derivative and maps to zero.
    pub fn odd_wavenumber(&self, i: usize) -> f64 {
        if self.is_nyquist(i) {
            0.0
        } else {
            2.0 * PI * self.frequency(i) as f64
        }
    }

    /// Angular wavenumber for even derivatives (Nyquist kept).
    pub fn even_wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.frequency(i) as f64
    }

    /// Largest retained frequency under the 2/3 rule: `3 K < n`.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// Whether a spectral index survives the 2/3 truncation.
    pub fn retained(&self, flat: usize) -> bool {
        let cut = self.dealias_cutoff();
        let idx = self.multi_index(flat);
        (0..self.dim).all(|a| self.frequency(idx[a]).abs() <= cut)
    }

    /// Forward transform of real samples (unnormalized).
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, true);
        data
    }

    /// Inverse transform, normalized, returning the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, false);
        let scale = 1.0 / self.len() as f64;
        spectrum.iter().map(|c| c.re * scale).collect()
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let fft = if forward {
            &self.plans.forward
        } else {
            &self.plans.inverse
        };
        let n = self.n;
        let total = data.len();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for base in (0..total).step_by(block) {
                for offset in 0..stride {
                    let start = base + offset;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[start + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[start + j * stride] = *value;
                    }
                }
            }
        }
    }
}
