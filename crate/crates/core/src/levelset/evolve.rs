use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::edge::EdgeMaps;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::levelset::{LevelSetParams, LevelSetState};
use crate::stencil::{central_second_order, one_sided, Hessian2};

/// `h² / (max g̃ · (4β + h(1 + √2)))`, the combined parabolic and hyperbolic limit.
/// Infinite when `max g̃ = 0`.
pub fn cfl_limit(spacing: f64, g_max: f64, beta: f64) -> f64 {
    if !(g_max > 0.0) {
        return f64::INFINITY;
    }
    spacing * spacing / (g_max * (4.0 * beta + spacing * (1.0 + SQRT_2)))
}

#[inline]
fn kappa_of(d: &Hessian2, eps: f64) -> f64 {
    let den = d.fx * d.fx + d.fy * d.fy + eps * eps;
    (d.fxx * d.fy * d.fy - 2.0 * d.fx * d.fy * d.fxy + d.fyy * d.fx * d.fx) / (den * libm::sqrt(den))
}

/// Mean curvature `div(∇Φ/|∇Φ|)` from central differences,
/// `(Φxx Φy² − 2 Φx Φy Φxy + Φyy Φx²) / (Φx² + Φy² + ε²)^{3/2}`.
pub fn curvature(phi: &ScalarField, eps: f64) -> ScalarField {
    let grid = *phi.grid();
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.height() {
        for i in 0..grid.width() {
            out.push(kappa_of(&central_second_order(phi, i, j), eps));
        }
    }
    ScalarField::from_raw(grid, out)
}

pub(crate) struct StepInputs<'a> {
    pub g_tilde: &'a ScalarField,
    pub g_max: f64,
    pub v_hat: &'a VectorField,
    pub v_max: f64,
    pub beta: f64,
    pub h0: f64,
    pub eps: f64,
    pub dt: f64,
}

/// One explicit step; returns the new field and `‖ΔΦ‖∞`.
pub(crate) fn step_phi(phi: &ScalarField, inp: &StepInputs<'_>) -> Result<(ScalarField, f64)> {
    let grid = *phi.grid();
    let (w, h) = (grid.width(), grid.height());
    let g = inp.g_tilde.values();
    let (vx, vy) = (inp.v_hat.u.values(), inp.v_hat.v.values());
    let adv_weight = 1.0 - inp.h0.abs();

    let mut out = Vec::with_capacity(grid.len());
    let mut update_max: f64 = 0.0;
    let mut diff_max: f64 = 0.0;
    let mut kappa_max: f64 = 0.0;
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            let c = phi.values()[k];
            let o = one_sided(phi, i, j);
            diff_max = diff_max.max(o.dxm.abs()).max(o.dxp.abs()).max(o.dym.abs()).max(o.dyp.abs());

            let mut speed = 0.0;
            if inp.beta != 0.0 {
                let d = central_second_order(phi, i, j);
                let kappa = kappa_of(&d, inp.eps);
                kappa_max = kappa_max.max(kappa.abs());
                speed += inp.beta * kappa * libm::hypot(d.fx, d.fy);
            }
            if inp.h0 != 0.0 {
                // Rouy–Tourin norm, upwinded for the front speed g̃H.
                let (gx, gy) = if inp.h0 > 0.0 {
                    (o.dxm.max(0.0).max(-o.dxp.min(0.0)), o.dym.max(0.0).max(-o.dyp.min(0.0)))
                } else {
                    (o.dxp.max(0.0).max(-o.dxm.min(0.0)), o.dyp.max(0.0).max(-o.dym.min(0.0)))
                };
                speed -= inp.h0 * libm::hypot(gx, gy);
            }
            if adv_weight != 0.0 {
                let ax = if vx[k] > 0.0 { vx[k] * o.dxm } else { vx[k] * o.dxp };
                let ay = if vy[k] > 0.0 { vy[k] * o.dym } else { vy[k] * o.dyp };
                speed -= adv_weight * (ax + ay);
            }
            let delta = inp.dt * g[k] * speed;
            update_max = update_max.max(delta.abs());
            out.push(c + delta);
        }
    }

    let bound = SQRT_2 * inp.dt * inp.g_max * diff_max * (inp.beta * kappa_max + inp.h0.abs() + adv_weight * inp.v_max);
    if !update_max.is_finite() || update_max > bound * (1.0 + 1e-9) + 1e-300 {
        let limit = cfl_limit(grid.spacing(), inp.g_max, inp.beta);
        return Err(Error::Cfl { dt: inp.dt, limit });
    }
    Ok((ScalarField::from_raw(grid, out), update_max))
}

pub(crate) fn check_grids(phi: &ScalarField, maps: &EdgeMaps, v_hat: &VectorField) -> Result<()> {
    phi.same_grid(&maps.g_tilde)?;
    phi.same_grid(&v_hat.u)?;
    phi.same_grid(&v_hat.v)
}

/// One explicit step of the level-set equation:
///
/// `Φ ← Φ + dt g̃ (β κ |∇Φ| − H |∇Φ|_G − (1 − |H|) ⟨V̂, ∇Φ⟩_up)`
///
/// with central differences in the curvature term, the Rouy–Tourin upwind norm for the
/// balloon term and per-component upwinding for the advection term.
///
/// The update is checked against the a-priori bound
/// `√2 dt max g̃ ‖DΦ‖∞ (β κ_max + |H| + (1 − |H|) ‖V̂‖∞)`; a violation is reported as a
/// CFL error.
pub fn evolve_step(
    state: &LevelSetState,
    maps: &EdgeMaps,
    v_hat: &VectorField,
    params: &LevelSetParams,
) -> Result<LevelSetState> {
    check_grids(&state.phi, maps, v_hat)?;
    let spacing = state.phi.grid().spacing();
    let g_max = maps.g_tilde.max();
    let dt = params.resolve_dt(spacing, g_max)?;
    let inputs = StepInputs {
        g_tilde: &maps.g_tilde,
        g_max,
        v_hat,
        v_max: v_hat.max_norm(),
        beta: params.beta,
        h0: params.balloon_h0,
        eps: params.eps(spacing),
        dt,
    };
    let (phi, norm) = step_phi(&state.phi, &inputs)?;
    Ok(LevelSetState { phi, step: state.step + 1, last_update_norm: norm })
}

#[inline]
fn crossing(a: f64, b: f64) -> Option<f64> {
    if (a < 0.0) != (b < 0.0) {
        Some(a / (a - b))
    } else {
        None
    }
}

/// Largest displacement of the zero crossings along grid lines between two fields.
///
/// On every horizontal and vertical pixel edge crossed in both fields the crossing moved by
/// `|θ_new − θ_old| h`; where a crossing exists in only one field it is counted as
/// `min(θ, 1 − θ) h`, the distance to the nearer pixel it must have passed.
pub fn interface_displacement(old: &ScalarField, new: &ScalarField) -> Result<f64> {
    old.same_grid(new)?;
    let grid = *old.grid();
    let (w, h) = (grid.width(), grid.height());
    let (a, b) = (old.values(), new.values());
    let mut worst: f64 = 0.0;
    let mut visit = |p: usize, q: usize| {
        let d = match (crossing(a[p], a[q]), crossing(b[p], b[q])) {
            (Some(t0), Some(t1)) => (t1 - t0).abs(),
            (Some(t), None) | (None, Some(t)) => t.min(1.0 - t),
            (None, None) => 0.0,
        };
        worst = worst.max(d);
    };
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            if i + 1 < w {
                visit(k, k + 1);
            }
            if j + 1 < h {
                visit(k, k + w);
            }
        }
    }
    Ok(worst * grid.spacing())
}
