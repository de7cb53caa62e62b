use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_latticefringe"));
    c.env_remove("LATTICEFRINGE_WORKERS");
    c
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn ok(args: &[&str], out: &Path) -> Output {
    let o = run(args, out);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["simulate", "--seed", "42"], &a);
    ok(&["simulate", "--seed", "42"], &b);
    for f in ["profile.csv", "spectrum.csv", "shot.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let m = json(a.join("manifest.json"));
    assert_eq!(m["seed"], 42);
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["config"]["site_count"], 30);
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(m["version"].is_string());
    let shot = json(a.join("shot.json"));
    assert_eq!(shot["shot"]["phases"].as_array().unwrap().len(), 30);
    let a1 = shot["fit"]["amplitude"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&a1));

    ok(&["simulate", "--seed", "43"], &b);
    assert_ne!(fs::read(a.join("profile.csv")).unwrap(), fs::read(b.join("profile.csv")).unwrap());
}

#[test]
fn fit_of_exported_profile_matches_in_process_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--seed", "7"], &sim);
    let in_process = json(sim.join("shot.json"))["fit"]["amplitude"].as_f64().unwrap();
    let input = sim.join("profile.csv");

    let fit_dir = tmp.path().join("fit");
    ok(&["fit", "--input", input.to_str().unwrap(), "--format", "json"], &fit_dir);
    let cli = json(fit_dir.join("fit.json"))["amplitude"].as_f64().unwrap();
    assert!((cli - in_process).abs() < 1e-9, "{cli} vs {in_process}");

    let csv_dir = tmp.path().join("fitcsv");
    ok(&["fit", "--input", input.to_str().unwrap()], &csv_dir);
    let text = fs::read_to_string(csv_dir.join("fit.csv")).unwrap();
    assert!(text.starts_with("A1,B1,"));
    let first: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((first - in_process).abs() < 1e-9);
}

#[test]
fn fit_accepts_images() {
    let tmp = tempfile::tempdir().unwrap();
    let period = 37.4e-6;
    let z: Vec<f64> = (0..801).map(|i| -200e-6 + i as f64 * 0.5e-6).collect();
    let r: Vec<f64> = (0..11).map(|i| -25e-6 + i as f64 * 5e-6).collect();
    let mut values = Vec::new();
    for rr in &r {
        for zz in &z {
            let g = (-zz * zz / (2.0 * 60e-6 * 60e-6) - rr * rr / (2.0 * 40e-6 * 40e-6)).exp();
            values.push(g * (1.0 + 0.4 * (0.8 + std::f64::consts::TAU * zz / period).cos()));
        }
    }
    let image = serde_json::json!({ "r_grid": r, "z_grid": z, "values": values });
    let input = write_config(tmp.path(), "image.json", &image.to_string());
    let cfg = write_config(tmp.path(), "fit.json", r#"{"expected_period": 3.74e-5}"#);
    let out = tmp.path().join("out");
    ok(
        &["fit", "--input", input.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--format", "json"],
        &out,
    );
    let fit = json(out.join("fit.json"));
    assert!((fit["amplitude"].as_f64().unwrap() - 0.4).abs() < 1e-6);
}

#[test]
fn scaling_rows_are_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.json", r#"{"site_counts": [10, 100, 1000], "trials": 200}"#);
    let out = tmp.path().join("out");
    ok(&["scaling", "--config", cfg.to_str().unwrap(), "--seed", "5"], &out);
    let text = fs::read_to_string(out.join("scaling.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("N,Fmax_mean,Fmin_mean,A1sq_mean"));
    let fmax: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(fmax.len(), 3);
    assert!(fmax.windows(2).all(|w| w[1] > w[0]), "{fmax:?}");
}

#[test]
fn zero_phases_put_peaks_on_the_fringe_lattice() {
    let tmp = tempfile::tempdir().unwrap();
    // far field: long expansion, no blur
    let period = 6.626_070_15e-34 * 200.0 / (1.443_16e-25 * 2.7e-6);
    let cfg = serde_json::json!({
        "site_count": 8,
        "amplitude_profile": "uniform",
        "phases": vec![0.0; 8],
        "apply_convolution": false,
        "params": {"mass": 1.443_16e-25, "lattice_period": 2.7e-6, "expansion_time": 200.0,
                   "onsite_width": 20e-9, "imaging_resolution": 0.0},
        "grid": {"z_min": -2.5 * period, "z_max": 2.5 * period, "point_count": 5001},
    });
    let path = write_config(tmp.path(), "sim.json", &cfg.to_string());
    let out = tmp.path().join("out");
    ok(&["simulate", "--config", path.to_str().unwrap(), "--format", "json"], &out);
    let profile = json(out.join("profile.json"));
    let z: Vec<f64> = serde_json::from_value(profile["z_grid"].clone()).unwrap();
    let v: Vec<f64> = serde_json::from_value(profile["values"].clone()).unwrap();
    let peak = v.iter().cloned().fold(0.0, f64::max);
    let maxima: Vec<f64> = (1..v.len() - 1)
        .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > 0.5 * peak)
        .map(|i| z[i])
        .collect();
    assert_eq!(maxima.len(), 5, "{maxima:?}");
    for (k, zk) in maxima.iter().enumerate() {
        assert!((zk / period - (k as f64 - 2.0)).abs() < 1e-3, "{zk}");
    }
}

#[test]
fn ensemble_reference_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    ok(&["ensemble"], &out);
    let s = json(out.join("summary.json"));
    assert!((s["mean_A1"].as_f64().unwrap() - 0.31).abs() < 0.02);
    assert_eq!(s["requested_trials"], 1000);
    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    assert!(trials.starts_with("trial,A1,B1,Fmax,Fmin\n"));
    assert_eq!(trials.lines().count(), 1001);
}

#[test]
fn worker_count_from_env_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "e.json", r#"{"trials": 40, "seed": 11}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["ensemble", "--config", cfg.to_str().unwrap(), "--workers", "1"], &a);
    let o = bin()
        .args(["ensemble", "--config", cfg.to_str().unwrap(), "--out"])
        .arg(&b)
        .env("LATTICEFRINGE_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json(b.join("manifest.json"))["workers"], 3);
    for f in ["trials.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn lattice3d_and_scales_write_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "l.json", r#"{"dims": [4, 4, 3], "draws": 5, "field_points": 8}"#);
    let out = tmp.path().join("l3");
    ok(&["lattice3d", "--config", cfg.to_str().unwrap()], &out);
    let s = json(out.join("summary.json"));
    assert!(s["mean_Fmax"].as_f64().unwrap() > 1.0);
    assert_eq!(fs::read_to_string(out.join("draws.csv")).unwrap().lines().count(), 6);
    assert_eq!(fs::read_to_string(out.join("line_of_sight.csv")).unwrap().lines().count(), 65);

    let sc = tmp.path().join("sc");
    let o = ok(&["scales", "--format", "json"], &sc);
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("fringe period D") && table.contains("37.411 um"));
    let r = json(sc.join("scales.json"));
    assert!((r["recoil_energy"]["hertz"].as_f64().unwrap() - 78.7).abs() < 0.1);
    assert!(sc.join("manifest.json").exists());
}

#[test]
fn exit_codes_follow_failure_class() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let typo = write_config(tmp.path(), "typo.json", r#"{"site_cont": 30}"#);
    assert_eq!(run(&["simulate", "--config", typo.to_str().unwrap()], &out).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--bogus"], &out).status.code(), Some(1));
    let bad = write_config(tmp.path(), "bad.json", r#"{"site_count": 1}"#);
    assert_eq!(run(&["simulate", "--config", bad.to_str().unwrap()], &out).status.code(), Some(1));

    let missing = tmp.path().join("nope.csv");
    assert_eq!(run(&["fit", "--input", missing.to_str().unwrap()], &out).status.code(), Some(3));
    assert_eq!(run(&["simulate", "--config", missing.to_str().unwrap()], &out).status.code(), Some(3));

    let flat: String = std::iter::once("z,value".to_string())
        .chain((0..400).map(|i| format!("{},1", -100e-6 + i as f64 * 0.5e-6)))
        .collect::<Vec<_>>()
        .join("\n");
    let flat = write_config(tmp.path(), "flat.csv", &flat);
    assert_eq!(run(&["fit", "--input", flat.to_str().unwrap()], &out).status.code(), Some(2));

    let blocker = write_config(tmp.path(), "file", "x");
    assert_eq!(run(&["scales"], &blocker.join("sub")).status.code(), Some(3));
}
