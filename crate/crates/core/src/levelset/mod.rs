//! Level-set evolution of the GVF / geodesic active contour:
//!
//! ```text
//! Φ_t = g̃ ((βκ − H) |∇Φ| − (1 − |H|) ⟨V̂, ∇Φ⟩),   ∂Φ/∂ν = 0
//! ```
//!
//! with `Φ < 0` inside the contour and `Φ > 0` outside.

mod contour;
mod distance;
mod evolve;
mod segment;

pub use contour::{extract_zero_level, hausdorff_distance, ContourSet, Polyline};
pub use distance::{reinitialize, signed_distance_circle, signed_distance_from_mask};
pub use evolve::{cfl_limit, curvature, evolve_step, interface_displacement};
pub use segment::{evolve_until_steady, segment, SegmentOutput, SegmentStatus};

use alloc::format;

use crate::error::{invalid, Error, Result};
use crate::grid::ScalarField;

/// Fraction of the stability limit used when `dt` is not given.
pub const DEFAULT_DT_FRACTION: f64 = 0.4;

/// Number of consecutive calm steps required before the loop reports convergence.
pub const CALM_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetParams {
    /// Curvature weight `β >= 0`.
    pub beta: f64,
    /// Constant balloon force `H ≡ h₀ ∈ [−1, 1]`.
    pub balloon_h0: f64,
    /// Time step; `None` uses [`DEFAULT_DT_FRACTION`] of [`cfl_limit`].
    pub dt: Option<f64>,
    pub max_steps: usize,
    /// Convergence threshold on the interface speed, relative to `max g̃`.
    pub steady_tol: f64,
    /// Regularization of `1/|∇Φ|` in the curvature; `None` means `1e-6 · spacing`.
    pub curvature_eps: Option<f64>,
    pub reinit_every: usize,
}

impl Default for LevelSetParams {
    fn default() -> Self {
        LevelSetParams {
            beta: 0.5,
            balloon_h0: 0.0,
            dt: None,
            max_steps: 5000,
            steady_tol: 1e-3,
            curvature_eps: None,
            reinit_every: 20,
        }
    }
}

impl LevelSetParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("levelset.beta", format!("must be >= 0, got {}", self.beta)));
        }
        if !(self.balloon_h0.abs() <= 1.0) {
            return Err(invalid(
                "levelset.balloon_h0",
                format!("must lie in [-1, 1] so that 1 - |H| >= 0, got {}", self.balloon_h0),
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(invalid("levelset.dt", format!("must be > 0, got {dt}")));
            }
        }
        if self.max_steps == 0 {
            return Err(invalid("levelset.max_steps", "must be >= 1"));
        }
        if !(self.steady_tol > 0.0) {
            return Err(invalid("levelset.steady_tol", format!("must be > 0, got {}", self.steady_tol)));
        }
        if let Some(eps) = self.curvature_eps {
            if !(eps > 0.0) || !eps.is_finite() {
                return Err(invalid("levelset.curvature_eps", format!("must be > 0, got {eps}")));
            }
        }
        if self.reinit_every == 0 {
            return Err(invalid("levelset.reinit_every", "must be >= 1"));
        }
        Ok(())
    }

    pub fn eps(&self, spacing: f64) -> f64 {
        self.curvature_eps.unwrap_or(1e-6 * spacing)
    }

    /// The step used with a boundary indicator whose maximum is `g_max`.
    ///
    /// When `g_max` is zero nothing moves; the explicit `dt` (or `spacing`) is returned.
    pub fn resolve_dt(&self, spacing: f64, g_max: f64) -> Result<f64> {
        self.validate()?;
        let limit = cfl_limit(spacing, g_max, self.beta);
        match self.dt {
            None if limit.is_finite() => Ok(DEFAULT_DT_FRACTION * limit),
            None => Ok(spacing),
            Some(dt) if dt <= limit * (1.0 + 1e-12) => Ok(dt),
            Some(dt) => Err(Error::Cfl { dt, limit }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetState {
    pub phi: ScalarField,
    pub step: usize,
    /// `‖Φⁿ⁺¹ − Φⁿ‖∞` of the last step.
    pub last_update_norm: f64,
}

impl LevelSetState {
    pub fn new(phi: ScalarField) -> Self {
        LevelSetState { phi, step: 0, last_update_norm: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_validation() {
        assert!(LevelSetParams::default().validate().is_ok());
        assert!(LevelSetParams { beta: -0.1, ..Default::default() }.validate().is_err());
        assert!(LevelSetParams { balloon_h0: 1.5, ..Default::default() }.validate().is_err());
        assert!(LevelSetParams { reinit_every: 0, ..Default::default() }.validate().is_err());
        let e = LevelSetParams { balloon_h0: -1.01, ..Default::default() }.validate().unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { key: "levelset.balloon_h0", .. }));
    }

    #[test]
    fn dt_resolution() {
        let p = LevelSetParams { beta: 1.0, ..Default::default() };
        let limit = cfl_limit(1.0, 0.5, 1.0);
        assert!((limit - 1.0 / (0.5 * (4.0 + 1.0 + core::f64::consts::SQRT_2))).abs() < 1e-15);
        assert_eq!(p.resolve_dt(1.0, 0.5).unwrap(), 0.4 * limit);
        let p = LevelSetParams { dt: Some(limit * 1.01), ..p };
        assert!(matches!(p.resolve_dt(1.0, 0.5), Err(Error::Cfl { .. })));
        let p = LevelSetParams { dt: None, ..p };
        assert_eq!(p.resolve_dt(2.0, 0.0).unwrap(), 2.0);
    }
}
