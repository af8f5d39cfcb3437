//! Uniform-grid field containers.
//!
//! Pixel `(i, j)` is column `i`, row `j`; values are stored row-major so the flat index is
//! `j * width + i`. The physical position of pixel `(i, j)` is `(i * spacing, j * spacing)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    width: usize,
    height: usize,
    spacing: f64,
}

impl GridSpec {
    /// Stencils need one interior ring, so both dimensions must be at least 3.
    pub fn new(width: usize, height: usize, spacing: f64) -> Result<Self> {
        if width < 3 || height < 3 || !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid { width, height, spacing });
        }
        Ok(GridSpec { width, height, spacing })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.width && j < self.height);
        j * self.width + i
    }

    /// Physical coordinates of pixel `(i, j)`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Largest physical coordinates, i.e. the far corner of the bounding box.
    pub fn extent(&self) -> (f64, f64) {
        self.position(self.width - 1, self.height - 1)
    }

    /// Clamped column index: the ghost cell left of column 0 repeats column 0.
    #[inline]
    pub(crate) fn clamp_i(&self, i: isize) -> usize {
        i.clamp(0, self.width as isize - 1) as usize
    }

    #[inline]
    pub(crate) fn clamp_j(&self, j: isize) -> usize {
        j.clamp(0, self.height as isize - 1) as usize
    }
}

/// Real values sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "field values" });
        }
        Ok(ScalarField { grid, values })
    }

    pub fn filled(grid: GridSpec, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::filled(grid, 0.0)
    }

    /// Builds a field from a function of the pixel indices `(i, j)`.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.height() {
            for i in 0..grid.width() {
                values.push(f(i, j));
            }
        }
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.grid.index(i, j);
        self.values[k] = value;
    }

    /// Value with mirror ghost cells: any index outside the grid reads the nearest edge value,
    /// so the outward difference `ghost − edge` is exactly zero.
    #[inline]
    pub fn get_ghost(&self, i: isize, j: isize) -> f64 {
        self.values[self.grid.index(self.grid.clamp_i(i), self.grid.clamp_j(j))]
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, mut f: impl FnMut(f64, f64) -> f64) -> Result<ScalarField> {
        self.same_grid(other)?;
        Ok(ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when the field takes both signs (`< 0` somewhere and `>= 0` somewhere).
    pub fn has_sign_change(&self) -> bool {
        let neg = self.values.iter().any(|&v| v < 0.0);
        let nonneg = self.values.iter().any(|&v| v >= 0.0);
        neg && nonneg
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    #[cfg(test)]
    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A pair of scalar fields `(u, v)` on one grid: the x and y components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl VectorField {
    pub fn new(u: ScalarField, v: ScalarField) -> Result<Self> {
        u.same_grid(&v)?;
        Ok(VectorField { u, v })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        VectorField { u: ScalarField::zeros(grid), v: ScalarField::zeros(grid) }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    /// Pointwise Euclidean norm.
    pub fn magnitude(&self) -> ScalarField {
        let values = self.u.values().iter().zip(self.v.values()).map(|(&a, &b)| libm::hypot(a, b)).collect();
        ScalarField::from_raw(*self.grid(), values)
    }

    /// Largest pointwise norm.
    pub fn max_norm(&self) -> f64 {
        self.u.values().iter().zip(self.v.values()).fold(0.0, |m, (&a, &b)| m.max(libm::hypot(a, b)))
    }

    /// Largest absolute component, `max(‖u‖∞, ‖v‖∞)`.
    pub fn max_abs_component(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }
}
