use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eitbragg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitbragg")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Every CSV starts with the manifest hash and names a unit for each column.
fn check_csv(path: &Path, hash: &str) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().ends_with(hash), "{}", path.display());
    let header = lines.by_ref().find(|l| !l.starts_with('#')).unwrap();
    for col in header.split(',') {
        assert!(col.ends_with(']') && col.contains('['), "column without unit: {col}");
    }
    lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn lists_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = eitbragg(&["presets"], tmp.path());
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    for p in ["fig2", "fig3", "fig4", "soliton-demo"] {
        assert!(names.lines().any(|l| l == p));
    }
}

#[test]
fn fig2_writes_susceptibility_with_transparency_dip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = eitbragg(&["run", "--preset", "fig2", "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o");
    let m = manifest(&dir);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "susceptibility");
    let rows = check_csv(&dir.join("susceptibility.csv"), m["manifest_hash"].as_str().unwrap());
    assert_eq!(rows.len(), 601);
    assert_eq!((rows[0][0], rows[600][0]), (-3.0, 3.0));
    let min = m["results"]["im_chi_a_minimum"]["delta1_gamma_a"].as_f64().unwrap();
    assert!(min.abs() < 0.5);
    assert_eq!(m["results"]["variant_selection"]["winner"], "three_minus_nu_sq");
}

#[test]
fn identical_config_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    for (dir, threads) in [("a", "1"), ("b", "4")] {
        let out = eitbragg(&["susceptibility", "--preset", "fig2", "--out", dir, "--threads", threads], tmp.path());
        assert!(out.status.success());
    }
    let read = |d: &str| fs::read(tmp.path().join(d).join("susceptibility.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    let (mut a, mut b) = (manifest(&tmp.path().join("a")), manifest(&tmp.path().join("b")));
    for m in [&mut a, &mut b] {
        m.as_object_mut().unwrap().remove("created_unix_s");
    }
    assert_eq!(a, b);
}

#[test]
fn fig3_band_is_reflective_with_absorption() {
    let tmp = tempfile::tempdir().unwrap();
    let out = eitbragg(&["run", "--preset", "fig3", "--out", "o"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o");
    let m = manifest(&dir);
    let hash = m["manifest_hash"].as_str().unwrap();
    let lossy = check_csv(&dir.join("band_absorbing.csv"), hash);
    let clean = check_csv(&dir.join("band_lossless.csv"), hash);
    assert!(lossy[200][1] > 0.8 && clean[200][1] > lossy[200][1]);
    let w = m["results"]["band_absorbing"]["gap_imk_half_max"]["width_gamma_a"].as_f64().unwrap();
    assert!((w - 0.6).abs() < 0.12, "{w}");
    assert!((m["derived"]["kappa_per_m"][0].as_f64().unwrap() + 2600.0).abs() < 1e-6);
}

#[test]
fn fig4_regions_follow_calibration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = eitbragg(&["run", "--preset", "fig4", "--out", "o"], tmp.path());
    assert!(out.status.success());
    let dir = tmp.path().join("o");
    let m = manifest(&dir);
    let regions = m["results"]["workable_regions"].as_array().unwrap();
    let interval = |k: usize| {
        let i = &regions[k]["intervals"][0];
        (i["lower"].as_f64().unwrap(), i["upper"].as_f64().unwrap())
    };
    let (lo2, hi2) = interval(0);
    assert!((lo2 - 0.05).abs() < 1e-9 && (hi2 - 0.25).abs() < 1e-9);
    let (lo10, hi10) = interval(1);
    assert!((hi10 / 0.05 - 1.0).abs() < 0.05);
    assert!((lo10 / 0.0005).log10().abs() <= 1.0);
    let hash = m["manifest_hash"].as_str().unwrap();
    for t0 in ["2", "10"] {
        let rows = check_csv(&dir.join(format!("design_t0_{t0}us.csv")), hash);
        assert_eq!(rows.len(), 400);
        // P_in falls and z0 grows with nu.
        assert!(rows.windows(2).all(|w| w[1][1] < w[0][1] && w[1][2] > w[0][2]));
    }
}

#[test]
fn soliton_profile_and_small_propagation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.toml",
        "[scenario]\ncalibrate_kappa_per_m = -2600.0\n\
         [soliton]\nnu = 0.6\npsi_rad = 2.0\npoints = 301\n\
         [propagate]\ndz_kappa = 0.1\nmargin_widths = 15.0\nperiods = 0.5\nsnapshots = 4\nformat = \"both\"\n",
    );
    let out = eitbragg(&["soliton", "--config", &cfg, "--out", "s"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&tmp.path().join("s"));
    assert!(m["results"]["soliton"]["residual"].as_f64().unwrap() < 1e-3);
    let rows = check_csv(&tmp.path().join("s/soliton_profile.csv"), m["manifest_hash"].as_str().unwrap());
    assert_eq!(rows.len(), 301);

    let out = eitbragg(&["propagate", "--config", &cfg, "--out", "p"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("p");
    let m = manifest(&dir);
    let prop = &m["results"]["propagation"];
    assert_eq!(prop["complete"], true);
    assert!(prop["max_relative_energy_change"].as_f64().unwrap() < 1e-3);
    assert!(prop["shape_error_vs_analytic"].as_f64().unwrap() < 0.02);
    let bytes = fs::read(dir.join("trajectory.ebtr")).unwrap();
    let (header, snaps) = eitbragg_core::propagator::read_binary(&bytes[..]).unwrap();
    assert_eq!(header.n_z as u64, prop["grid"]["n_z"].as_u64().unwrap());
    assert!(snaps.len() >= 2 && snaps.windows(2).all(|w| w[1].t > w[0].t));
    let diag = check_csv(&dir.join("diagnostics.csv"), m["manifest_hash"].as_str().unwrap());
    assert_eq!(diag.len(), snaps.len());
}

#[test]
fn validate_previews_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = eitbragg(&["validate", "--preset", "fig3"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["k0_rad_per_s", "n_bar", "kappa_per_m", "v_g_m_per_s"] {
        assert!(text.contains(key), "{text}");
    }
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("[fields]\nomega_c_gamma_a = 0.0\n", "EIT condition"),
        ("[geometry]\nk_s_per_m = 1000.0\n", "k_s = 1e3"),
        ("[geometry]\nlenght_m = 1.0\n", "line 2"),
        ("[geometry]\nlength_m = -1.0\n", "length_m"),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let cfg = write(tmp.path(), &format!("bad{i}.toml"), body);
        let out = eitbragg(&["validate", "--config", &cfg], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{body}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(needle), "{err}");
    }
    assert_eq!(eitbragg(&["validate"], tmp.path()).status.code(), Some(2));
    assert_eq!(eitbragg(&["run", "--preset", "nope"], tmp.path()).status.code(), Some(2));
    let cfg = write(tmp.path(), "nokind.toml", "");
    assert_eq!(eitbragg(&["run", "--config", &cfg], tmp.path()).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three_and_keeps_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    // Reversing Δ₄ flips the sign of the Kerr term: κγ < 0 has no soliton family.
    let cfg = write(tmp.path(), "flip.toml", "[fields]\ndelta4_gamma_a = -5.0\n");
    let out = eitbragg(&["design-map", "--preset", "fig4", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(&tmp.path().join("o"));
    assert!(m["status"].as_str().unwrap().starts_with("failed"));
}
