use num_complex::Complex64;

use super::grid::Grid;
use super::scalar::{lp_norm_of, ScalarField};
use crate::error::{NskError, Result};

/// `d` scalar components on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    /// Build from components, checking the count and the common grid.
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| NskError::InvalidParameter("vector field needs components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(NskError::InvalidParameter(format!(
                "expected {} components, got {}",
                first.grid().dim(),
                components.len()
            )));
        }
        for c in &components {
            first.same_grid(c)?;
        }
        Ok(Self { components })
    }

    pub(crate) fn from_components(components: Vec<ScalarField>) -> Self {
        debug_assert!(!components.is_empty());
        Self { components }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_components((0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect())
    }

    pub fn constant(grid: &Grid, value: &[f64]) -> Self {
        Self::from_components(
            (0..grid.dim())
                .map(|a| ScalarField::constant(grid, value.get(a).copied().unwrap_or(0.0)))
                .collect(),
        )
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let d = grid.dim();
        let mut comps = vec![Vec::with_capacity(grid.len()); d];
        for i in 0..grid.len() {
            let x = grid.coords(i);
            let v = f(&x[..d]);
            for (a, c) in comps.iter_mut().enumerate() {
                c.push(v[a]);
            }
        }
        Self::from_components(
            comps
                .into_iter()
                .map(|v| ScalarField::from_raw(grid, v, "v"))
                .collect(),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.components[axis]
    }

    pub fn check_finite(&self) -> Result<()> {
        self.components.iter().try_for_each(ScalarField::check_finite)
    }

    pub fn map_components(&self, f: impl Fn(usize, &ScalarField) -> ScalarField) -> Self {
        Self::from_components(
            self.components
                .iter()
                .enumerate()
                .map(|(a, c)| f(a, c))
                .collect(),
        )
    }

    pub fn zip_with(&self, other: &VectorField, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self::from_components(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &VectorField) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map_components(|_, f| f.scaled(c))
    }

    /// Multiply every component pointwise by a scalar field.
    pub fn times(&self, s: &ScalarField) -> Self {
        self.map_components(|_, f| f * s)
    }

    /// Pointwise Euclidean norm squared.
    pub fn norm_sq(&self) -> ScalarField {
        let mut acc = vec![0.0; self.grid().len()];
        for c in &self.components {
            for (a, v) in acc.iter_mut().zip(c.values()) {
                *a += v * v;
            }
        }
        ScalarField::from_raw(self.grid(), acc, "|v|^2")
    }

    pub fn norm(&self) -> ScalarField {
        self.norm_sq().map(f64::sqrt)
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let mut acc = vec![0.0; self.grid().len()];
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((s, x), y) in acc.iter_mut().zip(a.values()).zip(b.values()) {
                *s += x * y;
            }
        }
        ScalarField::from_raw(self.grid(), acc, "v.w")
    }

    /// Componentwise integrals.
    pub fn integrate(&self) -> Vec<f64> {
        self.components.iter().map(ScalarField::integrate).collect()
    }

    /// `L^p` norm of the pointwise Euclidean magnitude.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of(self.norm().values(), p, self.grid().cell_volume())
    }

    pub fn max_abs(&self) -> f64 {
        self.norm().max_abs()
    }

    pub fn div(&self) -> ScalarField {
        let g = self.grid();
        let mut spec = vec![Complex64::new(0.0, 0.0); g.len()];
        for (axis, c) in self.components.iter().enumerate() {
            let s = c.spectrum();
            for (i, (acc, v)) in spec.iter_mut().zip(s).enumerate() {
                let idx = g.multi_index(i);
                *acc += v * Complex64::new(0.0, g.odd_wavenumber(idx[axis]));
            }
        }
        ScalarField::from_spectrum(g, spec, "div")
    }

    /// Full gradient tensor `G_ij = d_j v_i`.
    pub fn gradient(&self) -> TensorField {
        let d = self.dim();
        let mut comps = Vec::with_capacity(d * d);
        for c in &self.components {
            comps.extend(c.grad().components);
        }
        TensorField::from_components(d, comps)
    }

    /// `Du = (grad u + grad u^T) / 2`.
    pub fn sym_grad(&self) -> TensorField {
        self.gradient().symmetric_part()
    }

    /// `Au = (grad u - grad u^T) / 2`.
    pub fn antisym_grad(&self) -> TensorField {
        self.gradient().antisymmetric_part()
    }

    pub fn dealiased(&self) -> Self {
        self.map_components(|_, c| c.dealiased())
    }

    pub fn translated(&self, offset: &[f64]) -> Self {
        self.map_components(|_, c| c.translated(offset))
    }

    /// Outer product `v (x) w` as a tensor `T_ij = v_i w_j`.
    pub fn outer(&self, other: &VectorField) -> TensorField {
        let d = self.dim();
        let mut comps = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                comps.push(&self.components[i] * &other.components[j]);
            }
        }
        TensorField::from_components(d, comps)
    }
}

/// `d x d` scalar components stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    dim: usize,
    components: Vec<ScalarField>,
}

impl TensorField {
    pub(crate) fn from_components(dim: usize, components: Vec<ScalarField>) -> Self {
        debug_assert_eq!(components.len(), dim * dim);
        Self { dim, components }
    }

    pub fn new(dim: usize, components: Vec<ScalarField>) -> Result<Self> {
        if components.len() != dim * dim || components.is_empty() {
            return Err(NskError::InvalidParameter(format!(
                "tensor field needs {} components, got {}",
                dim * dim,
                components.len()
            )));
        }
        for c in &components {
            components[0].same_grid(c)?;
        }
        Ok(Self { dim, components })
    }

    pub fn zeros(grid: &Grid) -> Self {
        let d = grid.dim();
        Self::from_components(d, (0..d * d).map(|_| ScalarField::zeros(grid)).collect())
    }

    /// Diagonal tensor `s I`.
    pub fn isotropic(s: &ScalarField) -> Self {
        let d = s.grid().dim();
        let zero = ScalarField::zeros(s.grid());
        let comps = (0..d * d)
            .map(|k| if k / d == k % d { s.clone() } else { zero.clone() })
            .collect();
        Self::from_components(d, comps)
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.components[i * self.dim + j]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self::from_components(self.dim, self.components.iter().map(f).collect())
    }

    pub fn zip_with(&self, other: &TensorField, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self::from_components(
            self.dim,
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &TensorField) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TensorField) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|f| f.scaled(c))
    }

    pub fn times(&self, s: &ScalarField) -> Self {
        self.map(|f| f * s)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        Self::from_components(
            d,
            (0..d * d)
                .map(|k| self.get(k % d, k / d).clone())
                .collect(),
        )
    }

    pub fn symmetric_part(&self) -> Self {
        let t = self.transpose();
        self.zip_with(&t, |a, b| (a + b).scaled(0.5))
    }

    pub fn antisymmetric_part(&self) -> Self {
        let t = self.transpose();
        self.zip_with(&t, |a, b| (a - b).scaled(0.5))
    }

    pub fn trace(&self) -> ScalarField {
        let mut acc = ScalarField::zeros(self.grid());
        for i in 0..self.dim {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    /// Pointwise Frobenius norm squared.
    pub fn frobenius_sq(&self) -> ScalarField {
        let mut acc = vec![0.0; self.grid().len()];
        for c in &self.components {
            for (a, v) in acc.iter_mut().zip(c.values()) {
                *a += v * v;
            }
        }
        ScalarField::from_raw(self.grid(), acc, "|T|^2")
    }

    /// Pointwise contraction `A : B = sum_ij A_ij B_ij`.
    pub fn contract(&self, other: &TensorField) -> ScalarField {
        let mut acc = vec![0.0; self.grid().len()];
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((s, x), y) in acc.iter_mut().zip(a.values()).zip(b.values()) {
                *s += x * y;
            }
        }
        ScalarField::from_raw(self.grid(), acc, "A:B")
    }

    /// `L^p` norm of the pointwise Frobenius magnitude.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mag = self.frobenius_sq().map(f64::sqrt);
        mag.lp_norm(p)
    }

    /// Row-wise divergence `(div T)_i = sum_j d_j T_ij`.
    pub fn div(&self) -> VectorField {
        let d = self.dim;
        VectorField::from_components(
            (0..d)
                .map(|i| {
                    let row = VectorField::from_components(
                        (0..d).map(|j| self.get(i, j).clone()).collect(),
                    );
                    row.div()
                })
                .collect(),
        )
    }

    /// Apply to a vector pointwise: `(T v)_i = sum_j T_ij v_j`.
    pub fn apply(&self, v: &VectorField) -> VectorField {
        let d = self.dim;
        VectorField::from_components(
            (0..d)
                .map(|i| {
                    let row = VectorField::from_components(
                        (0..d).map(|j| self.get(i, j).clone()).collect(),
                    );
                    row.dot(v)
                })
                .collect(),
        )
    }

    pub fn check_finite(&self) -> Result<()> {
        self.components.iter().try_for_each(ScalarField::check_finite)
    }
}
