//! Flat `key = value` configuration with dotted section names.
//!
//! Lines starting with `#` and blank lines are ignored. `auto` selects the derived default of
//! optional numeric keys; an empty value clears an optional path.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use gvf_core::edge::EdgeParams;
use gvf_core::gvf::GvfParams;
use gvf_core::levelset::LevelSetParams;
use gvf_core::GridSpec;

use crate::error::CliError;
use crate::synth::{ShapeKind, SyntheticShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Circle,
    Mask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    pub spacing: f64,
    pub sigma: f64,
    pub truncation_radius: Option<usize>,
    pub gvf: GvfParams,
    pub levelset: LevelSetParams,
    pub init_kind: InitKind,
    /// Circle center in physical units; `None` is the grid center.
    pub init_center: (Option<f64>, Option<f64>),
    /// Circle radius in physical units; `None` is 0.45 of the smaller grid side.
    pub init_radius: Option<f64>,
    pub init_mask: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Write a `Φ` snapshot every this many level-set steps; 0 disables snapshots.
    pub snapshot_stride: usize,
    pub synth: SyntheticShape,
    pub synth_width: usize,
    pub synth_height: usize,
    pub diagnose_draws: usize,
    pub seed: u64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            spacing: 1.0,
            sigma: 1.0,
            truncation_radius: None,
            gvf: GvfParams::default(),
            levelset: LevelSetParams::default(),
            init_kind: InitKind::Circle,
            init_center: (None, None),
            init_radius: None,
            init_mask: None,
            input: None,
            out_dir: PathBuf::from("out"),
            snapshot_stride: 0,
            synth: SyntheticShape::default(),
            synth_width: 128,
            synth_height: 128,
            diagnose_draws: 100_000,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::config(key, format!("cannot parse {value:?}")))
}

fn parse_opt<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, CliError> {
    if value == "auto" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn show_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_string(), |x| x.to_string())
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(String::new, |p| p.display().to_string())
}

impl SegmentationConfig {
    /// Defaults overridden by the lines of `text`.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = SegmentationConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}", n + 1), "expected `key = value`"))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Apply a `key=value` override as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) =
            assignment.split_once('=').ok_or_else(|| CliError::config(assignment, "expected `key=value`"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let s = &mut self.synth;
        match key {
            "grid.spacing" => self.spacing = parse(key, value)?,
            "edge.sigma" => self.sigma = parse(key, value)?,
            "edge.truncation_radius" => self.truncation_radius = parse_opt(key, value)?,
            "gvf.mu" => self.gvf.mu = parse(key, value)?,
            "gvf.dt" => self.gvf.dt = parse_opt(key, value)?,
            "gvf.max_steps" => self.gvf.max_steps = parse(key, value)?,
            "gvf.steady_tol" => self.gvf.steady_tol = parse(key, value)?,
            "gvf.normalize_eps" => self.gvf.normalize_eps = parse(key, value)?,
            "gvf.energy_stride" => self.gvf.energy_stride = parse(key, value)?,
            "levelset.beta" => self.levelset.beta = parse(key, value)?,
            "levelset.balloon_h0" => self.levelset.balloon_h0 = parse(key, value)?,
            "levelset.dt" => self.levelset.dt = parse_opt(key, value)?,
            "levelset.max_steps" => self.levelset.max_steps = parse(key, value)?,
            "levelset.steady_tol" => self.levelset.steady_tol = parse(key, value)?,
            "levelset.curvature_eps" => self.levelset.curvature_eps = parse_opt(key, value)?,
            "levelset.reinit_every" => self.levelset.reinit_every = parse(key, value)?,
            "init.kind" => {
                self.init_kind = match value {
                    "circle" => InitKind::Circle,
                    "mask" => InitKind::Mask,
                    _ => return Err(CliError::config(key, format!("expected circle or mask, got {value:?}"))),
                }
            }
            "init.center_x" => self.init_center.0 = parse_opt(key, value)?,
            "init.center_y" => self.init_center.1 = parse_opt(key, value)?,
            "init.radius" => self.init_radius = parse_opt(key, value)?,
            "init.mask" => self.init_mask = opt_path(value),
            "io.input" => self.input = opt_path(value),
            "io.out" => self.out_dir = PathBuf::from(value),
            "io.snapshot_stride" => self.snapshot_stride = parse(key, value)?,
            "synth.kind" => {
                s.kind = match value {
                    "disk" => ShapeKind::Disk,
                    "rectangle" => ShapeKind::Rectangle,
                    "u_shape" => ShapeKind::UShape,
                    _ => {
                        return Err(CliError::config(
                            key,
                            format!("expected disk, rectangle or u_shape, got {value:?}"),
                        ))
                    }
                }
            }
            "synth.width" => self.synth_width = parse(key, value)?,
            "synth.height" => self.synth_height = parse(key, value)?,
            "synth.center_x" => s.center.0 = parse_opt(key, value)?,
            "synth.center_y" => s.center.1 = parse_opt(key, value)?,
            "synth.radius" => s.radius = parse(key, value)?,
            "synth.rect_width" => s.rect_size.0 = parse(key, value)?,
            "synth.rect_height" => s.rect_size.1 = parse(key, value)?,
            "synth.box" => s.box_size = parse(key, value)?,
            "synth.arm" => s.arm_width = parse(key, value)?,
            "synth.depth" => s.depth = parse(key, value)?,
            "synth.foreground" => s.foreground = parse(key, value)?,
            "synth.background" => s.background = parse(key, value)?,
            "synth.noise" => s.noise = parse(key, value)?,
            "diagnose.draws" => self.diagnose_draws = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            _ => return Err(CliError::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order. Parsing the result with
    /// [`SegmentationConfig::from_text`] gives back an equal configuration.
    pub fn to_text(&self) -> String {
        let s = &self.synth;
        let kind = match s.kind {
            ShapeKind::Disk => "disk",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::UShape => "u_shape",
        };
        let init_kind = match self.init_kind {
            InitKind::Circle => "circle",
            InitKind::Mask => "mask",
        };
        let rows: Vec<(&str, String)> = vec![
            ("grid.spacing", self.spacing.to_string()),
            ("edge.sigma", self.sigma.to_string()),
            ("edge.truncation_radius", show_opt(&self.truncation_radius)),
            ("gvf.mu", self.gvf.mu.to_string()),
            ("gvf.dt", show_opt(&self.gvf.dt)),
            ("gvf.max_steps", self.gvf.max_steps.to_string()),
            ("gvf.steady_tol", self.gvf.steady_tol.to_string()),
            ("gvf.normalize_eps", self.gvf.normalize_eps.to_string()),
            ("gvf.energy_stride", self.gvf.energy_stride.to_string()),
            ("levelset.beta", self.levelset.beta.to_string()),
            ("levelset.balloon_h0", self.levelset.balloon_h0.to_string()),
            ("levelset.dt", show_opt(&self.levelset.dt)),
            ("levelset.max_steps", self.levelset.max_steps.to_string()),
            ("levelset.steady_tol", self.levelset.steady_tol.to_string()),
            ("levelset.curvature_eps", show_opt(&self.levelset.curvature_eps)),
            ("levelset.reinit_every", self.levelset.reinit_every.to_string()),
            ("init.kind", init_kind.to_string()),
            ("init.center_x", show_opt(&self.init_center.0)),
            ("init.center_y", show_opt(&self.init_center.1)),
            ("init.radius", show_opt(&self.init_radius)),
            ("init.mask", show_path(&self.init_mask)),
            ("io.input", show_path(&self.input)),
            ("io.out", self.out_dir.display().to_string()),
            ("io.snapshot_stride", self.snapshot_stride.to_string()),
            ("synth.kind", kind.to_string()),
            ("synth.width", self.synth_width.to_string()),
            ("synth.height", self.synth_height.to_string()),
            ("synth.center_x", show_opt(&s.center.0)),
            ("synth.center_y", show_opt(&s.center.1)),
            ("synth.radius", s.radius.to_string()),
            ("synth.rect_width", s.rect_size.0.to_string()),
            ("synth.rect_height", s.rect_size.1.to_string()),
            ("synth.box", s.box_size.to_string()),
            ("synth.arm", s.arm_width.to_string()),
            ("synth.depth", s.depth.to_string()),
            ("synth.foreground", s.foreground.to_string()),
            ("synth.background", s.background.to_string()),
            ("synth.noise", s.noise.to_string()),
            ("diagnose.draws", self.diagnose_draws.to_string()),
            ("seed", self.seed.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn edge_params(&self) -> Result<EdgeParams, CliError> {
        let mut params = EdgeParams::with_sigma(self.sigma, self.spacing)?;
        if let Some(r) = self.truncation_radius {
            params.truncation_radius = r;
        }
        params.validate(self.spacing)?;
        Ok(params)
    }

    /// Check every parameter group that does not depend on the input image.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(CliError::config("grid.spacing", "must be > 0"));
        }
        self.edge_params()?;
        self.gvf.validate()?;
        self.levelset.validate()?;
        if let Some(r) = self.init_radius {
            if !(r > 0.0) {
                return Err(CliError::config("init.radius", "must be > 0"));
            }
        }
        if self.init_kind == InitKind::Mask && self.init_mask.is_none() {
            return Err(CliError::config("init.mask", "required when init.kind = mask"));
        }
        if self.diagnose_draws == 0 {
            return Err(CliError::config("diagnose.draws", "must be >= 1"));
        }
        Ok(())
    }

    pub fn synth_grid(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.synth_width, self.synth_height, self.spacing)?)
    }

    /// Center and radius of the initial circle on `grid`, in physical units.
    pub fn init_circle(&self, grid: &GridSpec) -> ((f64, f64), f64) {
        let (ex, ey) = grid.extent();
        let center = (self.init_center.0.unwrap_or(ex / 2.0), self.init_center.1.unwrap_or(ey / 2.0));
        let side = (grid.width().min(grid.height())) as f64 * grid.spacing();
        (center, self.init_radius.unwrap_or(0.45 * side))
    }
}
