use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gvf_core::edge::build_edge_maps;
use gvf_core::gvf::solve_gvf;
use gvf_core::levelset::{
    evolve_until_steady, extract_zero_level, signed_distance_circle, signed_distance_from_mask, ContourSet,
    LevelSetState, SegmentStatus,
};
use gvf_core::{ScalarField, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InitKind, SegmentationConfig};
use crate::diagnostics::{diagnostics_csv, direction_suite, projection_suite, properness_suite};
use crate::error::{CliError, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VALIDATION};
use crate::io::{contours_csv, energy_csv, read_image, write_bytes, write_field, write_pgm};
use crate::synth::synthesize;

pub const EFFECTIVE_CONFIG: &str = "effective_config.txt";
pub const CONTOURS_CSV: &str = "contours.csv";
pub const ENERGY_CSV: &str = "energy.csv";
pub const DIAGNOSTICS_CSV: &str = "diagnostics.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Parser)]
#[command(name = "gvf", version, about = "Gradient vector flow and GVF-driven level-set segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic image and its ground-truth contour.
    Synth(CommonArgs),
    /// Compute the edge maps and the gradient vector flow of an image.
    Gvf(CommonArgs),
    /// Run the full segmentation pipeline on an image.
    Segment(CommonArgs),
    /// Run the randomized checks of the Hamiltonian and sample the Lipschitz constant of √g̃.
    Diagnose(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `io.out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for noise and randomized checks (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Input image, PGM or field binary (overrides `io.input`).
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Result of a subcommand that ran to the end.
struct Outcome {
    converged: bool,
}

/// Parse `argv` (program name first), run the subcommand and return the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Synth(args) => load(&args).and_then(|cfg| run_synth(&cfg)),
        Command::Gvf(args) => load(&args).and_then(|cfg| run_gvf(&cfg)),
        Command::Segment(args) => load(&args).and_then(|cfg| run_segment(&cfg)),
        Command::Diagnose(args) => load(&args).and_then(|cfg| run_diagnose(&cfg)),
    };
    match result {
        Ok(Outcome { converged: true }) => EXIT_OK,
        Ok(Outcome { converged: false }) => EXIT_NOT_CONVERGED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(args: &CommonArgs) -> Result<SegmentationConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            SegmentationConfig::from_text(&text)?
        }
        None => SegmentationConfig::default(),
    };
    for s in &args.set {
        cfg.apply_override(s)?;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(input) = &args.input {
        cfg.input = Some(input.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(cfg: &SegmentationConfig) -> Result<&Path, CliError> {
    let out = cfg.out_dir.as_path();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_bytes(&out.join(EFFECTIVE_CONFIG), cfg.to_text().as_bytes())?;
    Ok(out)
}

fn input_image(cfg: &SegmentationConfig) -> Result<ScalarField, CliError> {
    let path = cfg.input.as_ref().ok_or_else(|| CliError::config("io.input", "an input image is required"))?;
    read_image(path, cfg.spacing)
}

fn write_vector(field: &VectorField, out: &Path, stem: &str) -> Result<(), CliError> {
    write_field(&field.u, &out.join(format!("{stem}_u.field")))?;
    write_field(&field.v, &out.join(format!("{stem}_v.field")))
}

fn run_synth(cfg: &SegmentationConfig) -> Result<Outcome, CliError> {
    let grid = cfg.synth_grid()?;
    let margin = cfg.edge_params()?.truncation_radius;
    let (image, truth) = synthesize(&cfg.synth, grid, margin, cfg.seed)?;
    let out = prepare_out(cfg)?;
    write_pgm(&image, &out.join("image.pgm"))?;
    write_field(&image, &out.join("image.field"))?;
    write_bytes(&out.join("ground_truth.csv"), contours_csv(&truth).as_bytes())?;
    println!("image: {}", out.join("image.field").display());
    Ok(Outcome { converged: true })
}

fn run_gvf(cfg: &SegmentationConfig) -> Result<Outcome, CliError> {
    let image = input_image(cfg)?;
    let maps = build_edge_maps(&image, &cfg.edge_params()?)?;
    let result = solve_gvf(&maps, &cfg.gvf)?;
    let out = prepare_out(cfg)?;
    write_field(&maps.f, &out.join("f.field"))?;
    write_field(&maps.g_tilde, &out.join("g_tilde.field"))?;
    write_pgm(&maps.f, &out.join("f.pgm"))?;
    write_vector(&result.v, out, "gvf")?;
    write_vector(&result.v_hat, out, "gvf_hat")?;
    write_bytes(&out.join(ENERGY_CSV), energy_csv(&result.energy_trace).as_bytes())?;
    println!(
        "gvf: steps={} converged={} residual={:e} dt={}",
        result.steps_taken, result.converged, result.final_residual, result.dt
    );
    Ok(Outcome { converged: result.converged })
}

fn initial_phi(cfg: &SegmentationConfig, image: &ScalarField) -> Result<ScalarField, CliError> {
    let grid = *image.grid();
    match cfg.init_kind {
        InitKind::Circle => {
            let (center, radius) = cfg.init_circle(&grid);
            Ok(signed_distance_circle(grid, center, radius)?)
        }
        InitKind::Mask => {
            let path = cfg.init_mask.as_ref().ok_or_else(|| CliError::config("init.mask", "missing"))?;
            let mask = read_image(path, cfg.spacing)?;
            if mask.grid().width() != grid.width() || mask.grid().height() != grid.height() {
                return Err(CliError::config("init.mask", "mask and image sizes differ"));
            }
            let binary = ScalarField::from_fn(grid, |i, j| if mask.get(i, j) >= 0.5 { 1.0 } else { 0.0 });
            Ok(signed_distance_from_mask(&binary)?)
        }
    }
}

fn run_segment(cfg: &SegmentationConfig) -> Result<Outcome, CliError> {
    let image = input_image(cfg)?;
    let phi0 = initial_phi(cfg, &image)?;
    let maps = build_edge_maps(&image, &cfg.edge_params()?)?;
    let gvf = solve_gvf(&maps, &cfg.gvf)?;
    let out = prepare_out(cfg)?;
    write_bytes(&out.join(ENERGY_CSV), energy_csv(&gvf.energy_trace).as_bytes())?;

    let snapshots = out.join(SNAPSHOT_DIR);
    let stride = cfg.snapshot_stride;
    if stride > 0 {
        fs::create_dir_all(&snapshots).map_err(|e| CliError::io(&snapshots, e))?;
        write_field(&phi0, &snapshots.join("phi_000000.field"))?;
    }
    let mut snapshot_error = None;
    let (state, status, dt) = evolve_until_steady(LevelSetState::new(phi0), &maps, &gvf.v_hat, &cfg.levelset, |s| {
        if stride > 0 && s.step % stride == 0 && snapshot_error.is_none() {
            let path = snapshots.join(format!("phi_{:06}.field", s.step));
            snapshot_error = write_field(&s.phi, &path).err();
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e);
    }
    let contours = match status {
        SegmentStatus::Collapsed => ContourSet::default(),
        _ => extract_zero_level(&state.phi),
    };
    write_field(&state.phi, &out.join("phi.field"))?;
    write_bytes(&out.join(CONTOURS_CSV), contours_csv(&contours).as_bytes())?;
    println!("gvf: steps={} converged={} residual={:e}", gvf.steps_taken, gvf.converged, gvf.final_residual);
    println!(
        "levelset: steps={} status={:?} dt={} contours={} vertices={}",
        state.step,
        status,
        dt,
        contours.polylines.len(),
        contours.vertex_count()
    );
    Ok(Outcome { converged: gvf.converged && status != SegmentStatus::MaxSteps })
}

fn run_diagnose(cfg: &SegmentationConfig) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws = cfg.diagnose_draws;
    let reports = vec![
        properness_suite(&mut rng, draws),
        direction_suite(&mut rng, draws),
        projection_suite(&mut rng, (draws / 10).max(1)),
    ];
    let edge = cfg.edge_params()?;
    let (name, image) = match &cfg.input {
        Some(path) => (path.display().to_string(), read_image(path, cfg.spacing)?),
        None => {
            let grid = cfg.synth_grid()?;
            ("synth".to_string(), synthesize(&cfg.synth, grid, edge.truncation_radius, cfg.seed)?.0)
        }
    };
    let maps = build_edge_maps(&image, &edge)?;
    let lipschitz = vec![(name, gvf_core::edge::sqrt_g_lipschitz(&maps))];
    let out = prepare_out(cfg)?;
    write_bytes(&out.join(DIAGNOSTICS_CSV), diagnostics_csv(&reports, &lipschitz).as_bytes())?;
    let mut failed = false;
    for r in &reports {
        println!(
            "{} {}: {} draws, {} failures, max slack {:e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.draws,
            r.failures,
            r.max_slack
        );
        failed |= !r.passed();
    }
    for (name, l) in &lipschitz {
        println!("lipschitz sqrt(g) on {name}: {l:e}");
    }
    if failed {
        return Err(CliError::Usage("diagnostic checks failed".into()));
    }
    Ok(Outcome { converged: true })
}
