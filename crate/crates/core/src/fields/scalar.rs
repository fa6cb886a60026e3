use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::Grid;
use super::vector::{TensorField, VectorField};
use crate::error::{NskError, Result};

/// Real samples of a scalar function on a [`Grid`].
///
/// Every public constructor rejects NaN/Inf, so a `ScalarField` in hand is
/// finite.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    name: String,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if values.len() != grid.len() {
            return Err(NskError::LengthMismatch {
                field: name,
                got: values.len(),
                expected: grid.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(NskError::NonFinite { field: name, index });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            name,
        })
    }

    /// Internal constructor for values produced by finite arithmetic.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>, name: impl Into<String>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
            name: name.into(),
        }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self::from_raw(grid, vec![value; grid.len()], "const")
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Sample `f(x)` at every grid point; `x` has `grid.dim()` entries.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..dim])
            })
            .collect();
        Self::from_raw(grid, values, "f")
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Re-validate finiteness, e.g. after a solver stage.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(NskError::NonFinite {
                field: self.name.clone(),
                index,
            }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(NskError::GridMismatch {
                left: self.grid.to_string(),
                right: other.grid.to_string(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(
            &self.grid,
            self.values.iter().map(|&v| f(v)).collect(),
            self.name.clone(),
        )
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            self.name.clone(),
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Riemann sum times `spacing^d`.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Mean over the unit torus (equal to the integral).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives `max |f|`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of(&self.values, p, self.grid.cell_volume())
    }

    /// Discrete `L^2` inner product.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn from_spectrum(grid: &Grid, spectrum: Vec<Complex64>, name: impl Into<String>) -> Self {
        Self::from_raw(grid, grid.inverse(spectrum), name)
    }

    fn apply_multiplier(&self, name: String, m: impl Fn(usize) -> Complex64) -> Self {
        let mut spec = self.spectrum();
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= m(i);
        }
        Self::from_spectrum(&self.grid, spec, name)
    }

    /// Spectral partial derivative along `axis`.
    pub fn partial(&self, axis: usize) -> Self {
        let g = &self.grid;
        self.apply_multiplier(format!("d{axis}({})", self.name), |i| {
            let idx = g.multi_index(i);
            Complex64::new(0.0, g.odd_wavenumber(idx[axis]))
        })
    }

    pub fn grad(&self) -> VectorField {
        let g = &self.grid;
        let spec = self.spectrum();
        let components = (0..g.dim())
            .map(|axis| {
                let mut s = spec.clone();
                for (i, c) in s.iter_mut().enumerate() {
                    let idx = g.multi_index(i);
                    *c *= Complex64::new(0.0, g.odd_wavenumber(idx[axis]));
                }
                ScalarField::from_spectrum(g, s, format!("grad({})_{axis}", self.name))
            })
            .collect();
        VectorField::from_components(components)
    }

    pub fn laplacian(&self) -> Self {
        let g = &self.grid;
        self.apply_multiplier(format!("lap({})", self.name), |i| {
            let idx = g.multi_index(i);
            let k2: f64 = (0..g.dim())
                .map(|a| g.even_wavenumber(idx[a]).powi(2))
                .sum();
            Complex64::new(-k2, 0.0)
        })
    }

    /// Symmetric matrix of second derivatives.
    pub fn hessian(&self) -> TensorField {
        let g = &self.grid;
        let d = g.dim();
        let spec = self.spectrum();
        let mut comps: Vec<Option<ScalarField>> = vec![None; d * d];
        for a in 0..d {
            for b in a..d {
                let mut s = spec.clone();
                for (i, c) in s.iter_mut().enumerate() {
                    let idx = g.multi_index(i);
                    let m = if a == b {
                        -g.even_wavenumber(idx[a]).powi(2)
                    } else {
                        -g.odd_wavenumber(idx[a]) * g.odd_wavenumber(idx[b])
                    };
                    *c *= m;
                }
                let f = ScalarField::from_spectrum(g, s, format!("hess({})_{a}{b}", self.name));
                comps[b * d + a] = Some(f.clone());
                comps[a * d + b] = Some(f);
            }
        }
        TensorField::from_components(d, comps.into_iter().map(Option::unwrap).collect())
    }

    /// Zero every mode outside the 2/3-rule band.
    pub fn dealiased(&self) -> Self {
        let g = &self.grid;
        self.apply_multiplier(self.name.clone(), |i| {
            if g.retained(i) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Pointwise product computed with 2/3-rule dealiasing: both factors
    /// and the result are truncated to the retained band.
    pub fn mul_dealiased(&self, other: &ScalarField) -> Self {
        let a = self.dealiased();
        let b = other.dealiased();
        (&a * &b).dealiased()
    }

    /// Shift by `offset` (physical units) along each axis, spectrally.
    pub fn translated(&self, offset: &[f64]) -> Self {
        let g = &self.grid;
        self.apply_multiplier(self.name.clone(), |i| {
            let idx = g.multi_index(i);
            let phase: f64 = (0..g.dim())
                .map(|a| -g.odd_wavenumber(idx[a]) * offset.get(a).copied().unwrap_or(0.0))
                .sum();
            Complex64::from_polar(1.0, phase)
        })
    }
}

pub(crate) fn lp_norm_of(values: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        let s: f64 = values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell;
        s.powf(1.0 / p)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
        impl $trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                (&self).$method(&rhs)
            }
        }
        impl $trait<f64> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                self.map(|a| a $op rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
        (a - b).lp_norm(2.0) / b.lp_norm(2.0).max(1e-300)
    }

    #[test]
    fn rejects_non_finite_with_name() {
        let g = Grid::new(1, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        let err = ScalarField::new(&g, v, "rho").unwrap_err();
        assert!(err.to_string().contains("rho"));
        assert!(ScalarField::new(&g, vec![0.0; 7], "rho").is_err());
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid::new(1, 32).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let exact = ScalarField::from_fn(&g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
        assert!(rel(&f.partial(0), &exact) < 1e-10);
        let lap_exact = f.scaled(-4.0 * PI * PI);
        assert!(rel(&f.laplacian(), &lap_exact) < 1e-10);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = Grid::new(2, 16).unwrap();
        let f = ScalarField::constant(&g, 3.7);
        for c in f.grad().components() {
            assert!(c.max_abs() < 1e-13);
        }
        assert!(f.laplacian().max_abs() < 1e-12);
    }

    #[test]
    fn integrals_and_norms() {
        let g = Grid::new(2, 16).unwrap();
        assert!((ScalarField::constant(&g, 1.0).integrate() - 1.0).abs() < 1e-14);
        let s = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        assert!((s.lp_norm(2.0) - 0.5f64.sqrt()).abs() < 1e-13);
        assert!((s.lp_norm(f64::INFINITY) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn translation_matches_shifted_samples() {
        let g = Grid::new(1, 32).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).cos() + 0.2 * (6.0 * PI * x[0]).sin());
        let shifted = f.translated(&[0.125]);
        let exact = ScalarField::from_fn(&g, |x| {
            let y = x[0] - 0.125;
            (2.0 * PI * y).cos() + 0.2 * (6.0 * PI * y).sin()
        });
        assert!(rel(&shifted, &exact) < 1e-12);
    }
}
