//! Behavioral tests of the binary: exit codes, field-naming diagnostics,
//! manifest contents, and byte-level determinism of data files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iho"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut map = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        map.insert(
            entry.file_name().to_string_lossy().into_owned(),
            fs::read(entry.path()).unwrap(),
        );
    }
    map
}

#[test]
fn help_exits_zero() {
    assert_eq!(iho(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_flag_is_a_validation_failure() {
    let out = iho(&["classical", "--grid", "1:2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("--grid"));
}

#[test]
fn inverted_window_names_the_grid_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\nlo = 5.0\nhi = -5.0\n");
    let out = iho(&["classical", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("grid.hi"), "{}", stderr_of(&out));
}

#[test]
fn unknown_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\nspacing = 0.1\n");
    let out = iho(&["classical", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("spacing"), "{}", stderr_of(&out));
}

#[test]
fn negative_half_width_names_the_packet_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[packets.minus]\nfamily = \"bump\"\ncenter = 0.0\nhalf_width = -1.0\n",
    );
    let out = iho(&["survival", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("packets.minus.half_width"),
        "{}",
        stderr_of(&out)
    );
}

#[test]
fn survival_with_odd_plus_records_the_steeper_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[packets.plus]\nfamily = \"gauss-hermite\"\ncenter = 0.0\nwidth = 1.0\ndegree = 1\n",
    );
    let out_dir = tmp.path().join("run");
    let out = iho(&["survival", "--config", &cfg, "-o", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("metadata.json")).unwrap()).unwrap();
    let slope = meta["log_slope"].as_f64().unwrap();
    assert!((slope + 1.5).abs() < 1e-3, "slope {slope}");
}

#[test]
fn identical_specs_produce_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[time]\nt0 = 0.0\nt1 = 6.0\nsteps = 13\n");
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&d1, &d2] {
        let out = iho(&["survival", "--config", &cfg, "-o", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }
    assert_eq!(dir_bytes(&d1), dir_bytes(&d2));
}

#[test]
fn manifest_echoes_resolved_overrides_and_lists_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = iho(&[
        "coeffs",
        "--order",
        "12",
        "--seed",
        "7",
        "-o",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "coeffs");
    assert_eq!(manifest["spec"]["truncation"]["order"], 12);
    assert_eq!(manifest["spec"]["run"]["seed"], 7);
    // The destination is not part of the experiment identity.
    assert!(manifest["spec"]["run"].get("output").is_none());
    let mut listed: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let mut present: Vec<String> = dir_bytes(&dir).into_keys().collect();
    listed.sort();
    present.sort();
    assert_eq!(listed, present);
}

#[test]
fn transform_output_round_trips_through_the_pinned_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = iho(&["transform", "-o", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = fs::read_to_string(dir.join("output.csv")).unwrap();
    let g = iho_core::grid::GridFunction1D::from_csv(&text).unwrap();
    assert_eq!(g.rep, iho_core::grid::Representation::Q);
    assert!((g.norm() - 1.0).abs() < 1e-9, "norm {}", g.norm());
}

#[test]
fn classical_table_has_one_row_per_point_and_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[classical]\npoints = [[1.0, 0.5], [-0.4, 2.0]]\n\n[time]\nt0 = 0.0\nt1 = 1.0\nsteps = 5\n",
    );
    let dir = tmp.path().join("run");
    let out = iho(&["classical", "--config", &cfg, "-o", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = fs::read_to_string(dir.join("trajectories.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 5);
}

#[test]
fn output_root_env_var_supplies_the_default_destination() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_iho"))
        .args(["classical"])
        .env("IHO_OUTPUT_ROOT", tmp.path())
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(tmp.path().join("classical").join("trajectories.csv").exists());
}

#[test]
fn liouville_metadata_reports_exact_mass_conservation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[liouville]\nlo = -8.0\nhi = 8.0\nn = 64\nt = 0.4\nmc_check = false\n",
    );
    let dir = tmp.path().join("run");
    let out = iho(&["liouville", "--config", &cfg, "-o", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap();
    let m0 = meta["mass_exact_initial"].as_f64().unwrap();
    let m1 = meta["mass_exact_final"].as_f64().unwrap();
    assert!((m0 - m1).abs() <= 1e-12 * m0.abs(), "{m0} vs {m1}");
    assert!(meta.get("monte_carlo").is_none());
}
