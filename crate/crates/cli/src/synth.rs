//! Synthetic binary images with known boundaries.
//!
//! Geometry is given in pixel units; the ground-truth contour is returned in physical units.

use gvf_core::levelset::{ContourSet, Polyline};
use gvf_core::{GridSpec, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

/// Vertices of the polygon used as the disk ground truth.
pub const DISK_POLYGON_SIDES: usize = 360;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Disk,
    Rectangle,
    /// A square with a rectangular notch cut into its top side.
    UShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticShape {
    pub kind: ShapeKind,
    /// Shape center in pixel units; `None` is the grid center.
    pub center: (Option<f64>, Option<f64>),
    pub radius: f64,
    pub rect_size: (f64, f64),
    /// Side of the outer square of the U.
    pub box_size: f64,
    pub arm_width: f64,
    /// Depth of the notch measured from the open side.
    pub depth: f64,
    pub foreground: f64,
    pub background: f64,
    /// Amplitude of the uniform noise added after the ground truth is taken.
    pub noise: f64,
}

impl Default for SyntheticShape {
    fn default() -> Self {
        SyntheticShape {
            kind: ShapeKind::Disk,
            center: (None, None),
            radius: 30.0,
            rect_size: (60.0, 40.0),
            box_size: 80.0,
            arm_width: 20.0,
            depth: 50.0,
            foreground: 1.0,
            background: 0.0,
            noise: 0.0,
        }
    }
}

impl SyntheticShape {
    pub fn disk(radius: f64) -> Self {
        SyntheticShape { kind: ShapeKind::Disk, radius, ..Default::default() }
    }

    pub fn u_shape() -> Self {
        SyntheticShape { kind: ShapeKind::UShape, ..Default::default() }
    }

    fn center_on(&self, grid: &GridSpec) -> (f64, f64) {
        (
            self.center.0.unwrap_or((grid.width() - 1) as f64 / 2.0),
            self.center.1.unwrap_or((grid.height() - 1) as f64 / 2.0),
        )
    }

    /// Axis-aligned bounds `(x0, y0, x1, y1)` in pixel units.
    fn bounds(&self, c: (f64, f64)) -> (f64, f64, f64, f64) {
        let (hx, hy) = match self.kind {
            ShapeKind::Disk => (self.radius, self.radius),
            ShapeKind::Rectangle => (self.rect_size.0 / 2.0, self.rect_size.1 / 2.0),
            ShapeKind::UShape => (self.box_size / 2.0, self.box_size / 2.0),
        };
        (c.0 - hx, c.1 - hy, c.0 + hx, c.1 + hy)
    }

    fn inside(&self, c: (f64, f64), x: f64, y: f64) -> bool {
        let (x0, y0, x1, y1) = self.bounds(c);
        match self.kind {
            ShapeKind::Disk => (x - c.0).hypot(y - c.1) < self.radius,
            ShapeKind::Rectangle => x >= x0 && x < x1 && y >= y0 && y < y1,
            ShapeKind::UShape => {
                let in_box = x >= x0 && x < x1 && y >= y0 && y < y1;
                let in_notch = x >= x0 + self.arm_width && x < x1 - self.arm_width && y < y0 + self.depth;
                in_box && !in_notch
            }
        }
    }

    fn outline(&self, c: (f64, f64)) -> Vec<(f64, f64)> {
        let (x0, y0, x1, y1) = self.bounds(c);
        match self.kind {
            ShapeKind::Disk => (0..DISK_POLYGON_SIDES)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / DISK_POLYGON_SIDES as f64;
                    (c.0 + self.radius * t.cos(), c.1 + self.radius * t.sin())
                })
                .collect(),
            ShapeKind::Rectangle => vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)],
            ShapeKind::UShape => {
                let (a, d) = (self.arm_width, self.depth);
                vec![
                    (x0, y0),
                    (x0 + a, y0),
                    (x0 + a, y0 + d),
                    (x1 - a, y0 + d),
                    (x1 - a, y0),
                    (x1, y0),
                    (x1, y1),
                    (x0, y1),
                ]
            }
        }
    }

    fn check(&self, grid: &GridSpec, margin: usize) -> Result<(f64, f64), CliError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(key, "must be > 0"))
            }
        };
        match self.kind {
            ShapeKind::Disk => positive("synth.radius", self.radius)?,
            ShapeKind::Rectangle => {
                positive("synth.rect_width", self.rect_size.0)?;
                positive("synth.rect_height", self.rect_size.1)?;
            }
            ShapeKind::UShape => {
                positive("synth.box", self.box_size)?;
                positive("synth.arm", self.arm_width)?;
                positive("synth.depth", self.depth)?;
                if 2.0 * self.arm_width >= self.box_size {
                    return Err(CliError::config("synth.arm", "two arms must be narrower than the box"));
                }
                if self.depth >= self.box_size {
                    return Err(CliError::config("synth.depth", "must be smaller than the box"));
                }
            }
        }
        for (key, v) in [("synth.foreground", self.foreground), ("synth.background", self.background)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::config(key, "must lie in [0, 1]"));
            }
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(CliError::config("synth.noise", "must be >= 0"));
        }
        let c = self.center_on(grid);
        let (x0, y0, x1, y1) = self.bounds(c);
        let m = margin as f64;
        let fits = x0 >= m && y0 >= m && x1 <= (grid.width() - 1) as f64 - m && y1 <= (grid.height() - 1) as f64 - m;
        if !fits {
            return Err(CliError::config(
                "synth.kind",
                format!("shape does not fit inside the grid with a margin of {margin} pixels"),
            ));
        }
        Ok(c)
    }
}

/// Render `shape` on `grid`. A pixel is foreground when its center lies inside the shape.
/// `margin` is the minimum distance in pixels between the shape and the frame.
pub fn synthesize(
    shape: &SyntheticShape,
    grid: GridSpec,
    margin: usize,
    seed: u64,
) -> Result<(ScalarField, ContourSet), CliError> {
    let c = shape.check(&grid, margin)?;
    let mut image = ScalarField::from_fn(grid, |i, j| {
        if shape.inside(c, i as f64, j as f64) {
            shape.foreground
        } else {
            shape.background
        }
    });
    let h = grid.spacing();
    let truth = ContourSet {
        polylines: vec![Polyline {
            points: shape.outline(c).into_iter().map(|(x, y)| (x * h, y * h)).collect(),
            closed: true,
        }],
    };
    if shape.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amp = shape.noise;
        image = image.map(|v| v + rng.random_range(-amp..=amp));
    }
    Ok((image, truth))
}
