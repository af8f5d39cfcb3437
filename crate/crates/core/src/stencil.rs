//! Finite-difference stencils with mirror ghost cells.
//!
//! A ghost cell outside the grid repeats the adjacent edge value. The outward difference at
//! every side is therefore zero, which is the discrete form of `∂/∂ν = 0`.

use alloc::vec::Vec;

use crate::grid::{ScalarField, VectorField};

/// Central differences `(f(i+1) − f(i−1)) / (2h)` in x and y.
pub fn gradient(field: &ScalarField) -> VectorField {
    let grid = *field.grid();
    let (w, h) = (grid.width(), grid.height());
    let inv = 0.5 / grid.spacing();
    let f = field.values();
    let mut gx = Vec::with_capacity(grid.len());
    let mut gy = Vec::with_capacity(grid.len());
    for j in 0..h {
        let up = if j == 0 { 0 } else { j - 1 };
        let down = if j + 1 == h { j } else { j + 1 };
        for i in 0..w {
            let left = if i == 0 { 0 } else { i - 1 };
            let right = if i + 1 == w { i } else { i + 1 };
            gx.push((f[j * w + right] - f[j * w + left]) * inv);
            gy.push((f[down * w + i] - f[up * w + i]) * inv);
        }
    }
    VectorField { u: ScalarField::from_raw(grid, gx), v: ScalarField::from_raw(grid, gy) }
}

/// Five-point Laplacian `(f(i+1,j) + f(i−1,j) + f(i,j+1) + f(i,j−1) − 4f(i,j)) / h²`.
pub fn laplacian(field: &ScalarField) -> ScalarField {
    let grid = *field.grid();
    let mut out = Vec::with_capacity(grid.len());
    laplacian_into(field.values(), grid.width(), grid.height(), grid.spacing(), &mut out);
    ScalarField::from_raw(grid, out)
}

pub(crate) fn laplacian_into(f: &[f64], w: usize, h: usize, spacing: f64, out: &mut Vec<f64>) {
    out.clear();
    let inv2 = 1.0 / (spacing * spacing);
    for j in 0..h {
        let up = if j == 0 { 0 } else { j - 1 };
        let down = if j + 1 == h { j } else { j + 1 };
        for i in 0..w {
            let left = if i == 0 { 0 } else { i - 1 };
            let right = if i + 1 == w { i } else { i + 1 };
            let c = f[j * w + i];
            let s = f[j * w + left] + f[j * w + right] + f[up * w + i] + f[down * w + i];
            out.push((s - 4.0 * c) * inv2);
        }
    }
}

/// One-sided differences at every pixel: backward and forward in x, backward and forward in y.
/// At the frame the difference toward the ghost cell is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct OneSided {
    pub dxm: f64,
    pub dxp: f64,
    pub dym: f64,
    pub dyp: f64,
}

#[inline]
pub(crate) fn one_sided(field: &ScalarField, i: usize, j: usize) -> OneSided {
    let inv = 1.0 / field.grid().spacing();
    let (ii, jj) = (i as isize, j as isize);
    let c = field.get(i, j);
    OneSided {
        dxm: (c - field.get_ghost(ii - 1, jj)) * inv,
        dxp: (field.get_ghost(ii + 1, jj) - c) * inv,
        dym: (c - field.get_ghost(ii, jj - 1)) * inv,
        dyp: (field.get_ghost(ii, jj + 1) - c) * inv,
    }
}

/// Central first and second derivatives at a pixel, used by the curvature operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Hessian2 {
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fyy: f64,
    pub fxy: f64,
}

#[inline]
pub(crate) fn central_second_order(field: &ScalarField, i: usize, j: usize) -> Hessian2 {
    let h = field.grid().spacing();
    let (ii, jj) = (i as isize, j as isize);
    let g = |di: isize, dj: isize| field.get_ghost(ii + di, jj + dj);
    let c = g(0, 0);
    Hessian2 {
        fx: (g(1, 0) - g(-1, 0)) / (2.0 * h),
        fy: (g(0, 1) - g(0, -1)) / (2.0 * h),
        fxx: (g(1, 0) - 2.0 * c + g(-1, 0)) / (h * h),
        fyy: (g(0, 1) - 2.0 * c + g(0, -1)) / (h * h),
        fxy: (g(1, 1) - g(-1, 1) - g(1, -1) + g(-1, -1)) / (4.0 * h * h),
    }
}
