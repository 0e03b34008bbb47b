//! End-to-end tests of the `gnlm` binary: simulate -> despeckle -> metrics
//! round trips, manifest emission, reproducibility and exit codes.

mod common;

use gnlm::sim::{Region, RegionShape, SceneSpec};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gnlm"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn scene_json(dir: &Path) -> PathBuf {
    let spec = SceneSpec {
        width: 48,
        height: 48,
        regions: vec![
            Region {
                shape: RegionShape::Rect { x: 0, y: 0, width: 48, height: 48 },
                intensity: 1.0,
                guide: vec![0.2, 0.7],
            },
            Region {
                shape: RegionShape::HalfPlaneCols { from: 24 },
                intensity: 4.0,
                guide: vec![0.8, 0.3],
            },
        ],
        reflectors: vec![],
        mismatch_regions: vec![],
        guide_texture: None,
    };
    let path = dir.join("scene.json");
    std::fs::write(&path, serde_json::to_vec_pretty(&spec).unwrap()).unwrap();
    path
}

fn simulate(dir: &Path) -> (PathBuf, PathBuf) {
    let scene = scene_json(dir);
    let sim_dir = dir.join("sim");
    run_ok(bin()
        .args(["simulate", "--looks", "1", "--seed", "5"])
        .arg("--scene")
        .arg(&scene)
        .arg("--out-dir")
        .arg(&sim_dir));
    for name in ["clean.f32", "noisy.f32", "guide.f32", "manifest.json"] {
        assert!(sim_dir.join(name).exists(), "missing {name}");
    }
    (sim_dir.join("noisy.f32"), sim_dir.join("guide.f32"))
}

#[test]
fn simulate_despeckle_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (noisy, guide) = simulate(dir.path());

    // small, fast configuration
    let out = dir.path().join("filtered.f32");
    run_ok(bin()
        .args(["despeckle", "--patch", "4", "--search", "9", "--s0", "64", "--emit-diagnostics"])
        .arg("--sar")
        .arg(&noisy)
        .arg("--guide")
        .arg(&guide)
        .arg("--out")
        .arg(&out));
    for suffix in ["", ".json", ".manifest.json", ".counts.f32", ".counts.png", ".mask.f32", ".ratio.f32"] {
        let mut p = out.as_os_str().to_os_string();
        p.push(suffix);
        assert!(PathBuf::from(&p).exists(), "missing output {suffix:?}");
    }

    // manifest records config and input hashes
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(format!("{}.manifest.json", out.display())).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "despeckle");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert!(manifest["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
    assert!(manifest["config"]["resolved_threshold"].as_f64().unwrap() > 1.0);

    // metrics on the filtered image: ENL over a homogeneous block + RIS
    let metrics_out = run_ok(bin()
        .args(["metrics", "--region", "2,2,18,40"])
        .arg("--image")
        .arg(&out)
        .arg("--original")
        .arg(&noisy)
        .arg("--count-map")
        .arg(format!("{}.counts.f32", out.display()))
        .arg("--ratio-out")
        .arg(dir.path().join("ratio.f32")));
    let report: serde_json::Value = serde_json::from_slice(&metrics_out.stdout).unwrap();
    let enl_filtered = report["enl"][0]["enl"].as_f64().unwrap();
    assert!(enl_filtered > 10.0, "filtered ENL {enl_filtered}");
    assert!(report["ris"].as_f64().is_some());
    assert!(report["count_map"]["anchors"].as_u64().unwrap() > 0);
    assert!(dir.path().join("ratio.f32").exists());

    // metrics on the raw simulation: ENL near the nominal look count
    let metrics_raw = run_ok(bin()
        .args(["metrics", "--region", "2,2,18,40"])
        .arg("--image")
        .arg(&noisy));
    let report: serde_json::Value = serde_json::from_slice(&metrics_raw.stdout).unwrap();
    let enl_raw = report["enl"][0]["enl"].as_f64().unwrap();
    assert!((enl_raw - 1.0).abs() < 0.35, "raw ENL {enl_raw}");
}

#[test]
fn despeckle_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (noisy, guide) = simulate(dir.path());
    let out1 = dir.path().join("a.f32");
    let out2 = dir.path().join("b.f32");
    for (out, threads) in [(&out1, "1"), (&out2, "3")] {
        run_ok(bin()
            .args(["despeckle", "--patch", "4", "--search", "9", "--s0", "64", "--threads", threads])
            .arg("--sar")
            .arg(&noisy)
            .arg("--guide")
            .arg(&guide)
            .arg("--out")
            .arg(out));
    }
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn gamma_one_ignores_the_guide() {
    let dir = tempfile::tempdir().unwrap();
    let (noisy, guide) = simulate(dir.path());

    // a second, different guide
    let other_guide = dir.path().join("other_guide.f32");
    let constant = gnlm::OpticalGuide::constant(48, 48, 2, 0.5).unwrap();
    gnlm::io::write_guide(&other_guide, &constant).unwrap();

    let out1 = dir.path().join("g1.f32");
    let out2 = dir.path().join("g2.f32");
    for (out, g) in [(&out1, &guide), (&out2, &other_guide)] {
        run_ok(bin()
            .args([
                "despeckle",
                "--patch",
                "4",
                "--search",
                "9",
                "--gamma",
                "1.0",
                "--s0",
                "unlimited",
            ])
            .arg("--sar")
            .arg(&noisy)
            .arg("--guide")
            .arg(g)
            .arg("--out")
            .arg(out));
    }
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn plain_nlm_flags_match_brute_force() {
    // --threshold inf --s0 unlimited reduces to plain patch-wise NLM
    let dir = tempfile::tempdir().unwrap();
    let (noisy_path, guide_path) = simulate(dir.path());
    let out = dir.path().join("plain.f32");
    run_ok(bin()
        .args(["despeckle", "--patch", "4", "--search", "9", "--threshold", "inf", "--s0", "unlimited"])
        .arg("--sar")
        .arg(&noisy_path)
        .arg("--guide")
        .arg(&guide_path)
        .arg("--out")
        .arg(&out));
    let (header, data) = gnlm::io::read_raster(&out).unwrap();

    let noisy = gnlm::io::read_sar(&noisy_path, None).unwrap();
    let guide = gnlm::io::read_guide(&guide_path).unwrap();
    let config = gnlm::FilterConfig {
        patch_side: 4,
        search_side: 9,
        threshold: gnlm::ThresholdSpec::Absolute(f64::INFINITY),
        s0: None,
        ..gnlm::FilterConfig::sharp()
    };
    let reference = common::filter_reference(&noisy, &guide, &config);
    assert_eq!(header.width, 48);
    for (&got, &want) in data.iter().zip(&reference.out) {
        assert!((got as f64 - want).abs() <= want.abs().max(1.0) * 1e-6, "{got} vs {want}");
    }
}

#[test]
fn stats_reports_default_threshold() {
    let out = run_ok(bin().args(["stats", "--looks", "1", "--patch", "8", "--k", "2"]));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let t = report["threshold"].as_f64().unwrap();
    assert!((1.33..=1.35).contains(&t), "threshold {t}");
    assert!((report["mu_d"].as_f64().unwrap() - 0.306_852_8).abs() < 1e-6);
    assert!((report["tails"][0]["probability"].as_f64().unwrap() - 0.4258).abs() < 1e-3);
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let (noisy, guide) = simulate(dir.path());
    let csv_path = dir.path().join("sweep.csv");
    run_ok(bin()
        .args([
            "sweep", "--patch", "4", "--search", "9", "--s0-list", "64", "--region", "2,2,18,40",
        ])
        .arg("--sar")
        .arg(&noisy)
        .arg("--guide")
        .arg(&guide)
        .arg("--out")
        .arg(&csv_path));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.trim().lines().collect();
    assert_eq!(lines.len(), 6, "header + five threshold rows:\n{csv}");
    assert!(lines[0].starts_with("k_sigma,threshold,s0,"));
    assert!(lines[1].starts_with("inf,inf,64,"));
    assert!(lines[5].starts_with("0,1.000000,64,"));
    assert!(csv_path.with_file_name("sweep.csv.manifest.json").exists());
}

#[test]
fn gbf_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let (noisy, guide) = simulate(dir.path());
    let out = dir.path().join("gbf.f32");
    run_ok(bin()
        .args(["gbf", "--window", "9"])
        .arg("--sar")
        .arg(&noisy)
        .arg("--guide")
        .arg(&guide)
        .arg("--out")
        .arg(&out));
    let (_, data) = gnlm::io::read_raster(&out).unwrap();
    let noisy_img = gnlm::io::read_sar(&noisy, None).unwrap();
    let var = |v: &[f64]| {
        let m: f64 = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|&p| (p - m) * (p - m)).sum::<f64>() / (v.len() - 1) as f64
    };
    let data_f64: Vec<f64> = data.iter().map(|&v| v as f64).collect();
    // smoother than the input but the scene edge keeps variance finite
    assert!(var(&data_f64) < var(noisy_img.pixels()));
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let (noisy, guide) = simulate(dir.path());

    // usage error: unknown flag
    let out = bin().args(["despeckle", "--no-such-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // usage error: invalid configuration (even search window)
    let out = bin()
        .args(["despeckle", "--search", "8"])
        .arg("--sar")
        .arg(&noisy)
        .arg("--guide")
        .arg(&guide)
        .arg("--out")
        .arg(dir.path().join("x.f32"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // data error: missing input file
    let out = bin()
        .args(["despeckle"])
        .arg("--sar")
        .arg(dir.path().join("missing.f32"))
        .arg("--guide")
        .arg(&guide)
        .arg("--out")
        .arg(dir.path().join("y.f32"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // numeric error: ENL of a constant region is degenerate
    let clean = dir.path().join("sim/clean.f32");
    let out = bin()
        .args(["metrics", "--region", "0,0,8,8"])
        .arg("--image")
        .arg(&clean)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // --help exits 0
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
