//! Gradient Vector Flow: the two decoupled parabolic equations
//!
//! ```text
//! ∂u/∂t = μ Δu − f|∇f|² (u − f_x),   ∂u/∂ν = 0,   u(0) = f_x
//! ∂v/∂t = μ Δv − f|∇f|² (v − f_y),   ∂v/∂ν = 0,   v(0) = f_y
//! ```
//!
//! integrated with explicit Euler until the update rate is small compared to the forcing.

use alloc::format;
use alloc::vec::Vec;

use crate::edge::EdgeMaps;
use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, ScalarField, VectorField};
use crate::stencil::laplacian_into;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GvfParams {
    /// Regularization weight `μ > 0`.
    pub mu: f64,
    /// Time step; `None` picks 0.9 of the stability limit for the given edge maps.
    pub dt: Option<f64>,
    pub max_steps: usize,
    /// Stop once `‖Vⁿ⁺¹ − Vⁿ‖∞ / dt <= steady_tol · max(coeff) · (1 + ‖∇f‖∞)`.
    pub steady_tol: f64,
    /// Below this magnitude the normalized field is set to zero.
    pub normalize_eps: f64,
    /// Record the energy every `energy_stride` steps (step 0 is always recorded).
    pub energy_stride: usize,
}

impl Default for GvfParams {
    fn default() -> Self {
        GvfParams { mu: 1e-4, dt: None, max_steps: 50_000, steady_tol: 1e-6, normalize_eps: 1e-8, energy_stride: 1 }
    }
}

/// Fraction of the stability limit used when `dt` is not given.
pub const DEFAULT_DT_FRACTION: f64 = 0.9;

impl GvfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(invalid("gvf.mu", format!("must be > 0, got {}", self.mu)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(invalid("gvf.dt", format!("must be > 0, got {dt}")));
            }
        }
        if self.max_steps == 0 {
            return Err(invalid("gvf.max_steps", "must be >= 1"));
        }
        if !(self.steady_tol > 0.0) {
            return Err(invalid("gvf.steady_tol", format!("must be > 0, got {}", self.steady_tol)));
        }
        if !(self.normalize_eps > 0.0) {
            return Err(invalid("gvf.normalize_eps", format!("must be > 0, got {}", self.normalize_eps)));
        }
        if self.energy_stride == 0 {
            return Err(invalid("gvf.energy_stride", "must be >= 1"));
        }
        Ok(())
    }

    /// The step actually used with these maps, after the CFL check.
    pub fn resolve_dt(&self, maps: &EdgeMaps) -> Result<f64> {
        self.validate()?;
        let limit = cfl_limit(self.mu, maps.coeff.grid().spacing(), maps.coeff.max());
        match self.dt {
            None => Ok(DEFAULT_DT_FRACTION * limit),
            Some(dt) if dt <= limit * (1.0 + 1e-12) => Ok(dt),
            Some(dt) => Err(Error::Cfl { dt, limit }),
        }
    }
}

/// `h² / (4μ + h² max(coeff))`.
pub fn cfl_limit(mu: f64, spacing: f64, coeff_max: f64) -> f64 {
    let h2 = spacing * spacing;
    h2 / (4.0 * mu + h2 * coeff_max.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvfResult {
    pub v: VectorField,
    pub v_hat: VectorField,
    pub steps_taken: usize,
    pub converged: bool,
    /// Max-norm of the steady-state (Euler) residual at the returned field.
    pub final_residual: f64,
    /// `(step, energy)` pairs.
    pub energy_trace: Vec<(usize, f64)>,
    pub dt: f64,
}

fn check_maps(maps: &EdgeMaps) -> Result<GridSpec> {
    let grid = *maps.f.grid();
    maps.f.same_grid(&maps.coeff)?;
    maps.f.same_grid(&maps.g_tilde)?;
    maps.f.same_grid(&maps.grad_f.u)?;
    maps.f.same_grid(&maps.grad_f.v)?;
    Ok(grid)
}

/// `out = u + dt (μ Δu − coeff (u − target))`, one component.
#[allow(clippy::too_many_arguments)]
fn step_component(
    u: &[f64],
    target: &[f64],
    coeff: &[f64],
    grid: &GridSpec,
    mu: f64,
    dt: f64,
    lap: &mut Vec<f64>,
    out: &mut Vec<f64>,
) {
    laplacian_into(u, grid.width(), grid.height(), grid.spacing(), lap);
    out.clear();
    out.extend(
        u.iter()
            .zip(lap.iter())
            .zip(coeff.iter().zip(target))
            .map(|((&u, &l), (&c, &t))| u + dt * (mu * l - c * (u - t))),
    );
}

/// One explicit Euler step of both equations.
pub fn gvf_step(field: &VectorField, maps: &EdgeMaps, params: &GvfParams) -> Result<VectorField> {
    let grid = check_maps(maps)?;
    if *field.grid() != grid || field.u.same_grid(&field.v).is_err() {
        return Err(Error::GridMismatch);
    }
    let dt = params.resolve_dt(maps)?;
    let mut lap = Vec::with_capacity(grid.len());
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    step_component(
        field.u.values(),
        maps.grad_f.u.values(),
        maps.coeff.values(),
        &grid,
        params.mu,
        dt,
        &mut lap,
        &mut u,
    );
    step_component(
        field.v.values(),
        maps.grad_f.v.values(),
        maps.coeff.values(),
        &grid,
        params.mu,
        dt,
        &mut lap,
        &mut v,
    );
    Ok(VectorField { u: ScalarField::from_raw(grid, u), v: ScalarField::from_raw(grid, v) })
}

/// Discrete GVF energy
/// `h² Σ [ μ (|D⁺u|² + |D⁺v|²) + f|∇f|² |V − ∇f|² ]`.
///
/// `D⁺` is the forward difference with mirror ghosts (zero across the frame). With this
/// choice the gradient of the energy is exactly `−2h² (μ Δ₅ V − coeff (V − ∇f))`, so the
/// explicit step is a discrete gradient flow of this functional.
pub fn gvf_energy(field: &VectorField, maps: &EdgeMaps, mu: f64) -> Result<f64> {
    let grid = check_maps(maps)?;
    if *field.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let (w, h) = (grid.width(), grid.height());
    let inv = 1.0 / grid.spacing();
    let dirichlet = |f: &[f64]| -> f64 {
        let mut acc = 0.0;
        for j in 0..h {
            for i in 0..w {
                let c = f[j * w + i];
                if i + 1 < w {
                    let d = (f[j * w + i + 1] - c) * inv;
                    acc += d * d;
                }
                if j + 1 < h {
                    let d = (f[(j + 1) * w + i] - c) * inv;
                    acc += d * d;
                }
            }
        }
        acc
    };
    let smooth = dirichlet(field.u.values()) + dirichlet(field.v.values());
    let data: f64 = maps
        .coeff
        .values()
        .iter()
        .zip(field.u.values().iter().zip(field.v.values()))
        .zip(maps.grad_f.u.values().iter().zip(maps.grad_f.v.values()))
        .map(|((&c, (&u, &v)), (&fx, &fy))| c * ((u - fx) * (u - fx) + (v - fy) * (v - fy)))
        .sum();
    let h2 = grid.spacing() * grid.spacing();
    Ok(h2 * (mu * smooth + data))
}

/// `max |−μ Δu + coeff (u − f_x)|` over pixels and both components.
pub fn euler_residual(field: &VectorField, maps: &EdgeMaps, mu: f64) -> Result<f64> {
    let grid = check_maps(maps)?;
    if *field.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let mut lap = Vec::with_capacity(grid.len());
    let mut worst: f64 = 0.0;
    for (comp, target) in [(&field.u, &maps.grad_f.u), (&field.v, &maps.grad_f.v)] {
        laplacian_into(comp.values(), grid.width(), grid.height(), grid.spacing(), &mut lap);
        for (((&l, &u), &c), &t) in lap.iter().zip(comp.values()).zip(maps.coeff.values()).zip(target.values()) {
            worst = worst.max((-mu * l + c * (u - t)).abs());
        }
    }
    Ok(worst)
}

/// The forcing scale `max(coeff) · (1 + ‖∇f‖∞)` the stopping rule is measured against.
pub fn forcing_scale(maps: &EdgeMaps) -> f64 {
    maps.coeff.max().max(0.0) * (1.0 + maps.grad_f.max_abs_component())
}

/// Evolve from `V₀ = ∇f` until the relative update rate drops below `steady_tol` or
/// `max_steps` is reached. Non-convergence is reported through `converged`, not an error.
pub fn solve_gvf(maps: &EdgeMaps, params: &GvfParams) -> Result<GvfResult> {
    let grid = check_maps(maps)?;
    let dt = params.resolve_dt(maps)?;
    let threshold = params.steady_tol * forcing_scale(maps);

    let mut u = maps.grad_f.u.values().to_vec();
    let mut v = maps.grad_f.v.values().to_vec();
    let mut u_next = Vec::with_capacity(grid.len());
    let mut v_next = Vec::with_capacity(grid.len());
    let mut lap = Vec::with_capacity(grid.len());

    let mut energy_trace = Vec::new();
    let energy_of = |u: &[f64], v: &[f64]| {
        let field =
            VectorField { u: ScalarField::from_raw(grid, u.to_vec()), v: ScalarField::from_raw(grid, v.to_vec()) };
        gvf_energy(&field, maps, params.mu)
    };
    energy_trace.push((0, energy_of(&u, &v)?));

    let mut steps_taken = 0;
    let mut converged = false;
    for step in 1..=params.max_steps {
        step_component(&u, maps.grad_f.u.values(), maps.coeff.values(), &grid, params.mu, dt, &mut lap, &mut u_next);
        step_component(&v, maps.grad_f.v.values(), maps.coeff.values(), &grid, params.mu, dt, &mut lap, &mut v_next);
        let delta = max_abs_diff(&u, &u_next).max(max_abs_diff(&v, &v_next));
        core::mem::swap(&mut u, &mut u_next);
        core::mem::swap(&mut v, &mut v_next);
        steps_taken = step;
        if !delta.is_finite() {
            return Err(Error::NonFinite { what: "gvf iteration" });
        }
        let done = delta / dt <= threshold;
        if step % params.energy_stride == 0 || done || step == params.max_steps {
            energy_trace.push((step, energy_of(&u, &v)?));
        }
        if done {
            converged = true;
            break;
        }
    }

    let field = VectorField { u: ScalarField::from_raw(grid, u), v: ScalarField::from_raw(grid, v) };
    let final_residual = euler_residual(&field, maps, params.mu)?;
    let v_hat = normalize(&field, params.normalize_eps);
    Ok(GvfResult { v: field, v_hat, steps_taken, converged, final_residual, energy_trace, dt })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (&x, &y)| m.max((x - y).abs()))
}

/// `V / |V|` where `|V| >= eps`, zero elsewhere.
pub fn normalize(field: &VectorField, eps: f64) -> VectorField {
    let grid = *field.grid();
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    for (&a, &b) in field.u.values().iter().zip(field.v.values()) {
        let n = libm::hypot(a, b);
        if n >= eps && n > 0.0 {
            u.push(a / n);
            v.push(b / n);
        } else {
            u.push(0.0);
            v.push(0.0);
        }
    }
    VectorField { u: ScalarField::from_raw(grid, u), v: ScalarField::from_raw(grid, v) }
}
