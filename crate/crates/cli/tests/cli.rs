use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn scene(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenes")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn pldos(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pldos"));
    cmd.args(args).env_remove("PLDOS_SOLVER_TOL").env_remove("PLDOS_QUAD_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn pldos")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Column `name` of the first data row.
fn column(csv: &str, name: &str) -> f64 {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn vacuum_decay_rate_row() {
    let out = pldos(&["decay", &scene("vacuum.scene")], &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    let gamma = column(&text, "gamma");
    assert!((gamma - 1.0 / (3.0 * PI)).abs() <= 1e-12, "gamma = {gamma}");
    assert_eq!(column(&text, "delta"), 0.0);
    assert!(text.starts_with(&format!("# pldos {}\n", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("# scene_sha256 = "));
}

#[test]
fn homogeneous_rate_scales_with_index() {
    let out = pldos(&["decay", &scene("homogeneous.scene")], &[]);
    let gamma = column(&stdout(&out), "gamma");
    assert!((gamma - 1.5 / (3.0 * PI)).abs() <= 1e-12);
}

#[test]
fn empty_ldos_map_is_header_only() {
    let out = pldos(&["ldos-map", &scene("vacuum.scene"), "--x", "0,1,0"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data, vec!["x,y,z,omega,ldos_total,ldos_bulk,ldos_ref"]);
}

#[test]
fn ldos_map_skips_points_inside_voxels() {
    let out = pldos(&["ldos-map", &scene("nanoparticle.scene"), "--x=-0.1,0.1,3"], &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    // (0,0,0) lies inside the cube, (+-0.1,0,0) outside
    assert!(text.contains("# skipped_inside_voxels = 1\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let p = path.to_string_lossy();
    let to_file = pldos(&["bloch", &scene("vacuum.scene"), "--stride", "100", "-o", &p], &[]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let direct = pldos(&["bloch", &scene("vacuum.scene"), "--stride", "100"], &[]);
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn decay_series_pole_starts_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let p = path.to_string_lossy();
    let out = pldos(&["decay", &scene("vacuum.scene"), "--series", &p, "--t-points", "11"], &[]);
    assert!(out.status.success());
    let series = std::fs::read_to_string(&path).unwrap();
    assert_eq!(column(&series, "abs_s_pole"), 1.0);
    assert_eq!(series.lines().filter(|l| !l.starts_with('#')).count(), 12);
}

#[test]
fn parse_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scene");
    std::fs::write(&path, "[emitter]\nposition = 0 0 0\ndipole = 0 0 1\nomega0 = 1\n").unwrap();
    let out = pldos(&["decay", &path.to_string_lossy()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("units.length required"));

    std::fs::write(&path, "[units]\nlength = 1\n[emitter]\nposition = 0 0\n").unwrap();
    let out = pldos(&["decay", &path.to_string_lossy()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4, column 12"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pldos(&["decay"], &[]).status.code(), Some(2));
    assert_eq!(pldos(&["frobnicate"], &[]).status.code(), Some(2));
    let bad_pol = pldos(&["scatter", &scene("vacuum.scene"), "--k", "0,0,1", "--pol", "0,0,1"], &[]);
    assert_eq!(bad_pol.status.code(), Some(2));
    let oversized_step = pldos(&["bloch", &scene("vacuum.scene"), "--dt", "1e3"], &[]);
    assert_eq!(oversized_step.status.code(), Some(2));
}

#[test]
fn environment_overrides_are_recorded_and_checked() {
    let out = pldos(&["decay", &scene("vacuum.scene")], &[("PLDOS_SOLVER_TOL", "1e-12")]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# config.solver_tol = 1e-12\n"));
    let out = pldos(&["decay", &scene("vacuum.scene")], &[("PLDOS_QUAD_TOL", "2")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quadrature_failure_exits_4() {
    // Gamma/w0 = 0.1 is far outside the weak-coupling window of the inversion.
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let out = pldos(&["decay", &scene("vacuum.scene"), "--series", &p.to_string_lossy(), "--numeric"], &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bloch_reaches_steady_state() {
    let out = pldos(&["bloch", &scene("vacuum.scene")], &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    let note = |key: &str| -> f64 {
        let prefix = format!("# {key} = ");
        text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().parse().unwrap()
    };
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    // 30/Gamma' leaves e^{-15} of the transient
    assert!((last[3] - note("steady_w")).abs() < 1e-5);
    assert!((last[2] - note("steady_im_s")).abs() < 1e-5);
}

#[test]
fn validate_reports_every_check() {
    let out = pldos(&["validate", &scene("vacuum.scene")], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 13);
    assert!(text.contains("# result = pass\n"));
}
