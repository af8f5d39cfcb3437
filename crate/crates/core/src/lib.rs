//! Gradient Vector Flow (GVF) and the GVF / geodesic active contour level-set model on
//! uniform 2D grids.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerics:
//!
//! * [`grid`] and [`stencil`]: field containers and mirror-boundary finite differences,
//! * [`edge`]: Gaussian smoothing, the Deriche–Faugeras detector `f` and the boundary
//!   indicator `g̃ = 1 − f`,
//! * [`gvf`]: the two decoupled parabolic equations evolved to steady state, the GVF energy
//!   and the normalized field `V̂`,
//! * [`levelset`]: signed distances, curvature, the upwind Hamilton–Jacobi step,
//!   reinitialization, zero-level extraction and the full segmentation loop,
//! * [`viscosity`]: pointwise checks of the Hamiltonian structure (projection matrix,
//!   properness, direction lemma).
//!
//! IO, configuration and the command line live in the `gvf-cli` crate.
//!
//! ```
//! use gvf_core::edge::{build_edge_maps, EdgeParams};
//! use gvf_core::grid::{GridSpec, ScalarField};
//!
//! let grid = GridSpec::new(32, 32, 1.0).unwrap();
//! let image = ScalarField::from_fn(grid, |i, j| {
//!     let (x, y) = (i as f64 - 15.5, j as f64 - 15.5);
//!     if x * x + y * y < 64.0 { 1.0 } else { 0.0 }
//! });
//! let maps = build_edge_maps(&image, &EdgeParams::with_sigma(1.0, grid.spacing()).unwrap()).unwrap();
//! assert!(maps.coeff.values().iter().all(|&c| c >= 0.0));
//! ```
#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod edge;
pub mod error;
pub mod grid;
pub mod gvf;
pub mod levelset;
pub mod stencil;
pub mod viscosity;

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField, VectorField};
