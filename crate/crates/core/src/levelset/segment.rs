use alloc::collections::VecDeque;

use crate::edge::{build_edge_maps, EdgeMaps, EdgeParams};
use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::gvf::{solve_gvf, GvfParams, GvfResult};
use crate::levelset::contour::{extract_zero_level, ContourSet};
use crate::levelset::distance::reinitialize;
use crate::levelset::evolve::{check_grids, interface_displacement, step_phi, StepInputs};
use crate::levelset::{LevelSetParams, LevelSetState, CALM_STEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentStatus {
    /// The interface speed stayed below the tolerance for the required number of steps.
    Converged,
    /// `max_steps` was reached first; the last state is returned.
    MaxSteps,
    /// The zero level set vanished (no sign change left).
    Collapsed,
}

#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub contours: ContourSet,
    pub state: LevelSetState,
    pub maps: EdgeMaps,
    pub gvf: GvfResult,
    pub status: SegmentStatus,
    /// Level-set time step actually used.
    pub dt: f64,
}

/// Evolve `init` until the interface stops moving, the contour collapses or `max_steps` is
/// reached. `observer` sees every state after its step (and reinitialization, if any).
///
/// Convergence compares the current field with the one `reinit_every` steps earlier, so both
/// are at the same reinitialization phase: the largest zero-crossing displacement between
/// them, divided by the elapsed time and by `max g̃`, must stay below `steady_tol` for
/// [`CALM_STEPS`] consecutive steps. The max-norm of `ΔΦ` is not used because advection keeps
/// steepening `Φ` away from the interface even after the contour has stopped.
pub fn evolve_until_steady(
    init: LevelSetState,
    maps: &EdgeMaps,
    v_hat: &VectorField,
    params: &LevelSetParams,
    mut observer: impl FnMut(&LevelSetState),
) -> Result<(LevelSetState, SegmentStatus, f64)> {
    check_grids(&init.phi, maps, v_hat)?;
    if !init.phi.has_sign_change() {
        return Err(Error::NoInterface);
    }
    let spacing = init.phi.grid().spacing();
    let g_max = maps.g_tilde.max();
    let dt = params.resolve_dt(spacing, g_max)?;
    if !(g_max > 0.0) {
        return Ok((init, SegmentStatus::Converged, dt));
    }
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
    let lag = params.reinit_every;
    let mut history: VecDeque<ScalarField> = VecDeque::with_capacity(lag + 1);
    history.push_back(init.phi.clone());

    let mut state = init;
    let mut calm = 0;
    for _ in 0..params.max_steps {
        let (mut phi, norm) = step_phi(&state.phi, &inputs)?;
        let step = state.step + 1;
        if !phi.has_sign_change() {
            state = LevelSetState { phi, step, last_update_norm: norm };
            observer(&state);
            return Ok((state, SegmentStatus::Collapsed, dt));
        }
        if step.is_multiple_of(lag) {
            phi = reinitialize(&phi)?;
        }
        state = LevelSetState { phi, step, last_update_norm: norm };
        observer(&state);

        if history.len() == lag + 1 {
            history.pop_front();
        }
        history.push_back(state.phi.clone());
        if history.len() == lag + 1 {
            let moved = interface_displacement(&history[0], &state.phi)?;
            let rate = moved / (lag as f64 * dt) / g_max;
            calm = if rate <= params.steady_tol { calm + 1 } else { 0 };
            if calm >= CALM_STEPS {
                return Ok((state, SegmentStatus::Converged, dt));
            }
        }
    }
    Ok((state, SegmentStatus::MaxSteps, dt))
}

/// The full pipeline: edge maps, GVF, normalization, level-set evolution with periodic
/// reinitialization, and zero-level extraction. A collapsed contour yields an empty set.
pub fn segment(
    image: &ScalarField,
    init: LevelSetState,
    edge: &EdgeParams,
    gvf: &GvfParams,
    ls: &LevelSetParams,
) -> Result<SegmentOutput> {
    image.same_grid(&init.phi)?;
    edge.validate(image.grid().spacing())?;
    gvf.validate()?;
    ls.validate()?;
    let maps = build_edge_maps(image, edge)?;
    let gvf_result = solve_gvf(&maps, gvf)?;
    let (state, status, dt) = evolve_until_steady(init, &maps, &gvf_result.v_hat, ls, |_| {})?;
    let contours = match status {
        SegmentStatus::Collapsed => ContourSet::default(),
        _ => extract_zero_level(&state.phi),
    };
    Ok(SegmentOutput { contours, state, maps, gvf: gvf_result, status, dt })
}
