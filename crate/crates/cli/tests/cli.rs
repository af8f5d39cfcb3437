use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gvf_cli::io::{parse_contours_csv, read_field};
use gvf_cli::SegmentationConfig;
use gvf_core::levelset::hausdorff_distance;

fn gvf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gvf")).args(args).output().expect("spawn gvf")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_disk(dir: &Path, radius: u32) -> std::path::PathBuf {
    let out = dir.join("synth");
    let r = format!("synth.radius={radius}");
    let o = gvf(&["synth", "--set", "synth.width=64", "--set", "synth.height=64", "--set", &r, "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn segment_on_synthesized_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = synth_disk(tmp.path(), 14);
    for f in ["image.pgm", "image.field", "ground_truth.csv", "effective_config.txt"] {
        assert!(synth.join(f).exists(), "{f}");
    }
    let out = tmp.path().join("seg");
    let o = gvf(&["segment", "--input", s(&synth.join("image.pgm")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let contours = parse_contours_csv(&fs::read_to_string(out.join("contours.csv")).unwrap()).unwrap();
    let truth = parse_contours_csv(&fs::read_to_string(synth.join("ground_truth.csv")).unwrap()).unwrap();
    assert!(!contours.is_empty());
    assert!(hausdorff_distance(&contours, &truth, 0.05) <= 2.0);
    assert!(out.join("phi.field").exists());
    assert!(out.join("energy.csv").exists());
    assert!(out.join("effective_config.txt").exists());
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nowhere.pgm");
    let o = gvf(&["segment", "--input", s(&missing), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(s(&missing)));
}

#[test]
fn small_sigma_is_rejected() {
    let o = gvf(&["gvf", "--set", "edge.sigma=0.1", "--input", "unused.pgm"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("edge.sigma") && err.contains("H1"), "{err}");
}

#[test]
fn unknown_key_and_flag_are_validation_errors() {
    let o = gvf(&["synth", "--set", "edge.sigmaa=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("edge.sigmaa"));
    let o = gvf(&["synth", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--frobnicate"));
}

#[test]
fn step_limit_exits_with_not_converged() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = synth_disk(tmp.path(), 14);
    let out = tmp.path().join("seg");
    let o =
        gvf(&["segment", "--input", s(&synth.join("image.field")), "--set", "levelset.max_steps=5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("contours.csv").exists());
}

#[test]
fn effective_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = synth_disk(tmp.path(), 12);
    let first = tmp.path().join("first");
    let o = gvf(&[
        "segment",
        "--input",
        s(&synth.join("image.field")),
        "--set",
        "levelset.beta=0.75",
        "--set",
        "io.snapshot_stride=50",
        "--out",
        s(&first),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(first.join("effective_config.txt")).unwrap();
    let cfg = SegmentationConfig::from_text(&text).unwrap();
    assert_eq!(cfg.levelset.beta, 0.75);

    let second = tmp.path().join("second");
    let o = gvf(&["segment", "--config", s(&first.join("effective_config.txt")), "--out", s(&second)]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["contours.csv", "phi.field", "energy.csv", "snapshots/phi_000050.field"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn gvf_subcommand_writes_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = synth_disk(tmp.path(), 12);
    let out = tmp.path().join("gvf");
    let o = gvf(&["gvf", "--input", s(&synth.join("image.field")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["gvf_u.field", "gvf_v.field", "gvf_hat_u.field", "gvf_hat_v.field", "f.field", "g_tilde.field", "f.pgm"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let u = read_field(&out.join("gvf_hat_u.field")).unwrap();
    let v = read_field(&out.join("gvf_hat_v.field")).unwrap();
    // stored as f32
    for (a, b) in u.values().iter().zip(v.values()) {
        assert!(a.hypot(*b) <= 1.0 + 1e-6);
    }
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(energy.starts_with("step,energy\n0,"));

    let o = gvf(&["gvf", "--input", s(&synth.join("image.field")), "--set", "gvf.max_steps=3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mask_initialization() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = synth_disk(tmp.path(), 12);
    let mask_dir = tmp.path().join("mask");
    let o = gvf(&[
        "synth",
        "--set",
        "synth.width=64",
        "--set",
        "synth.height=64",
        "--set",
        "synth.kind=rectangle",
        "--set",
        "synth.rect_width=44",
        "--set",
        "synth.rect_height=44",
        "--out",
        s(&mask_dir),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = tmp.path().join("seg");
    let mask = format!("init.mask={}", s(&mask_dir.join("image.pgm")));
    let o = gvf(&[
        "segment",
        "--input",
        s(&synth.join("image.field")),
        "--set",
        "init.kind=mask",
        "--set",
        &mask,
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let contours = parse_contours_csv(&fs::read_to_string(out.join("contours.csv")).unwrap()).unwrap();
    let truth = parse_contours_csv(&fs::read_to_string(synth.join("ground_truth.csv")).unwrap()).unwrap();
    assert!(hausdorff_distance(&contours, &truth, 0.05) <= 2.0);

    let o = gvf(&["segment", "--input", s(&synth.join("image.field")), "--set", "init.kind=mask"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn diagnose_reports_every_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("diag");
    let o = gvf(&["diagnose", "--set", "diagnose.draws=2000", "--seed", "5", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("properness,2000,0,"));
    assert!(rows[2].starts_with("direction_lemma,2000,0,"));
    assert!(rows[3].starts_with("projection,200,0,"));
    assert!(rows[4].starts_with("lipschitz_sqrt_g[synth]"));
    assert!(rows.iter().skip(1).all(|r| r.ends_with(",true")));
    let cfg = fs::read_to_string(out.join("effective_config.txt")).unwrap();
    assert!(cfg.contains("seed = 5"));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(gvf(&["--help"]).status.code(), Some(0));
    assert_eq!(gvf(&[]).status.code(), Some(1));
}
