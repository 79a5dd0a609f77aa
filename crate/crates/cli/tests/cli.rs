use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn subchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subchain")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Parse a CSV written by the tool: comment, header, numeric rows.
fn read_csv(text: &str) -> (String, Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (comment, header, rows)
}

#[test]
fn single_atom_spectrum_is_flat() {
    let out = subchain(&["spectrum", "--n", "1", "--a", "1", "--grid-points", "64"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (comment, header, rows) = read_csv(&stdout(&out));
    assert!(comment.starts_with("# subchain "));
    assert_eq!(header[1], "gamma_exact");
    assert_eq!(rows.len(), 64);
    for r in &rows {
        assert!((r[1] - 1.0).abs() < 1e-15, "{r:?}");
        assert_eq!(r[4], 0.0);
    }
}

#[test]
fn three_model_spectrum_has_fifteen_curves() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = subchain(&[
        "spectrum",
        "--n",
        "10",
        "--a",
        "1.5707963",
        "--model",
        "scalar,vector:0,vector:90",
        "--degrees",
        "--grid-points",
        "257",
        "--out",
        path.to_str().unwrap(),
        "--validate",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("vector:0: max |gamma_exact - gamma_sinc|"));
    let (_, header, rows) = read_csv(&fs::read_to_string(&path).unwrap());
    assert_eq!(header.len(), 16);
    assert_eq!(header[1], "scalar.gamma_exact");
    assert!(header.iter().any(|h| h.ends_with(".omega_infinite")));
    assert_eq!(rows.len(), 257);
    assert!(rows.iter().all(|r| r.len() == 16));
}

#[test]
fn outputs_are_deterministic_with_lf_endings() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("run{k}.csv"));
        let out = subchain(&["spectrum", "--n", "25", "--a", "2", "--model", "scalar,vector:magic", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        texts.push(fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert!(!texts[0].contains(&b'\r'));
    assert_eq!(texts[0].last(), Some(&b'\n'));
}

#[test]
fn bad_flags_exit_with_usage_code() {
    for args in [
        &["spectrum", "--n", "10"][..],
        &["spectrum", "--n", "10", "--a", "1", "--bogus"],
        &["spectrum", "--n", "10", "--a", "1", "--model", "tensor"],
        &["spectrum", "--n", "0", "--a", "1"],
        &["intensity", "--n", "5", "--a", "1", "--state", "single:x"],
        &["intensity", "--n", "5", "--a", "1", "--normal", "w"],
        &["frobnicate"],
    ] {
        let out = subchain(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn scenario_syntax_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(
        &path,
        "{\n  \"version\": 1,\n  \"scenarios\": [\n    { \"name\": \"x\",\n      \"dynamics\": { \"chain\": { \"n_atoms\": 4 }, }\n    }\n  ]\n}\n",
    )
    .unwrap();
    let out = subchain(&["dynamics", path.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("broken.json:5:"), "{msg}");
}

#[test]
fn scenario_of_the_wrong_kind_is_rejected() {
    let fig01 = scenario_dir().join("fig01.json");
    let out = subchain(&["dynamics", "--check", fig01.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not a dynamics task"));
}

#[test]
fn dynamics_scenario_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    fs::write(&state, "[[0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [0, 0]]").unwrap();
    let scenario = dir.path().join("small.json");
    fs::write(
        &scenario,
        r#"{
  "version": 1,
  "scenarios": [
    {
      "name": "small",
      "dynamics": {
        "chain": { "n_atoms": 6, "a": 1.0, "model": { "vectorial": { "delta": 1.5707963267948966 } } },
        "initial_state": { "explicit": "state.json" },
        "integration": { "dt": 0.01, "t_end": 2.0, "snapshot_times": [0.0, 1.0, 2.0] },
        "outputs": [
          { "spectral_density_series": { "grid_points": 32 } },
          { "mean_excitation": { "stride": 10 } },
          { "beta_snapshots": {} },
          { "field_map": { "plane": { "normal_axis": "x", "offset": 3.0, "u_range": [-4.0, 4.0], "v_range": [-6.0, 6.0], "resolution": 8 } } }
        ]
      }
    }
  ]
}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = subchain(&["dynamics", scenario.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in ["small.density.csv", "small.mean_excitation.csv", "small.beta.csv", "small.field.csv", "small.field.pgm"] {
        assert!(out_dir.join(f).is_file(), "{f} missing");
    }

    let (_, header, rows) = read_csv(&fs::read_to_string(out_dir.join("small.density.csv")).unwrap());
    assert_eq!(header.len(), 4);
    assert_eq!(rows.len(), 32);

    let (_, _, rows) = read_csv(&fs::read_to_string(out_dir.join("small.mean_excitation.csv")).unwrap());
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 1.0 / 6.0).abs() < 1e-15);
    assert!((rows[20][0] - 2.0).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));

    let (_, header, rows) = read_csv(&fs::read_to_string(out_dir.join("small.beta.csv")).unwrap());
    assert_eq!(header.len(), 7);
    assert_eq!(rows[1][1], 1.0);
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn zero_state_gives_a_black_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = subchain(&[
        "intensity",
        "--n",
        "10",
        "--a",
        "1",
        "--state",
        "zero",
        "--resolution",
        "12",
        "--out-prefix",
        "dark.map",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("evanescence ratio"));
    let pgm = fs::read_to_string(dir.path().join("dark.map.pgm")).unwrap();
    let mut words = pgm.split_whitespace();
    assert_eq!(words.next(), Some("P2"));
    assert_eq!(words.next(), Some("12"));
    assert_eq!(words.next(), Some("12"));
    assert_eq!(words.next(), Some("65535"));
    let levels: Vec<&str> = words.collect();
    assert_eq!(levels.len(), 144);
    assert!(levels.iter().all(|w| *w == "0"));
    assert!(pgm.lines().all(|l| l.len() <= 70));

    let (_, header, rows) = read_csv(&fs::read_to_string(dir.path().join("dark.map.csv")).unwrap());
    assert_eq!(header.len(), 13);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| *v == 0.0)));
}

#[test]
fn intensity_refuses_planes_through_atoms() {
    let out = subchain(&["intensity", "--n", "10", "--a", "1", "--offset", "0", "--resolution", "4"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn quick_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let out = subchain(&["validate", "--quick", "--json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
    assert!(text.contains("energy_balance"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().len() >= 6);
}

#[test]
fn sign_error_fails_validation() {
    let out = subchain(&["validate", "--quick", "--inject-kernel-sign-error"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).lines().any(|l| l.starts_with("FAIL energy_balance")), "{}", stdout(&out));
}

#[test]
fn shipped_scenarios_cover_every_figure() {
    let dir = scenario_dir();
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    let expected: Vec<String> = [1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12, 13].iter().map(|k| format!("fig{k:02}.json")).collect();
    assert_eq!(names, expected);

    let path = |n: &str| dir.join(n).to_str().unwrap().to_string();
    let dynamics: Vec<String> = ["03", "04", "05", "07", "08", "09", "10", "11"].iter().map(|k| path(&format!("fig{k}.json"))).collect();
    let mut args = vec!["dynamics", "--check"];
    args.extend(dynamics.iter().map(String::as_str));
    let out = subchain(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 8);

    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().to_str().unwrap();
    for f in ["fig01.json", "fig02.json"] {
        let out = subchain(&["spectrum", "--scenario", &path(f), "--out-dir", out_dir]);
        assert!(out.status.success(), "{f}: {}", stderr(&out));
    }
    let out = subchain(&["intensity", "--scenario", &path("fig12.json"), "--out-dir", out_dir]);
    assert!(out.status.success(), "{}", stderr(&out));
    let ratio: f64 = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("evanescence ratio "))
        .expect("ratio reported")
        .parse()
        .unwrap();
    assert!(ratio > 20.0, "{ratio}");
    assert!(tmp.path().join("fig12.intensity.pgm").is_file());
}
