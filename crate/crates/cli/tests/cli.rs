use std::process::Command;

fn timemap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_timemap"))
}

fn stdout(args: &[&str]) -> String {
    let out = timemap().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// `F` on the figure row `(gamma, rho)`.
fn figure_value(csv: &str, gamma: &str, rho: &str) -> f64 {
    csv.lines()
        .find_map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0] == gamma && c[1] == rho).then(|| c[2].parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no row {gamma},{rho}"))
}

#[test]
fn figure_rows() {
    let one = stdout(&["curve", "--figure", "1"]);
    assert_eq!(one.lines().next(), Some("gamma,rho,F,limit"));
    assert!((figure_value(&one, "0.8", "0.2") - 1.03488).abs() < 5e-4);
    assert_eq!(one.lines().count(), 1 + 5 * 60);
    let two = stdout(&["curve", "--figure", "2"]);
    assert!((figure_value(&two, "-1.5", "5") - 13.4742).abs() < 5e-3);
    assert!((figure_value(&two, "-3", "20") - 20.0).abs() < 1e-8);
}

#[test]
fn figure_boundary_rows_carry_limits() {
    let one = stdout(&["curve", "--figure", "1"]);
    let row = one.lines().find(|l| l.starts_with("-0.4,0,")).unwrap();
    assert!(row.ends_with(",far_end"));
    let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 8.14276).abs() < 5e-4);
    assert!(one
        .lines()
        .filter(|l| l.ends_with(",ratio"))
        .all(|l| l.split(',').nth(2) == Some("2")));
}

#[test]
fn plain_curve_reports_out_of_domain_rows() {
    let out = timemap()
        .args([
            "curve",
            "--gamma",
            "3",
            "--rho-min",
            "0",
            "--rho-max",
            "2",
            "--n",
            "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("rho,F"));
    assert_eq!(text.lines().count(), 1 + 3);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().filter(|l| l.contains("[domain]")).count(), 2);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        stdout(&["curve", "--figure", "2", "--output", p.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn solve_report() {
    let text = stdout(&["solve", "--gamma", "3", "--tau", "1", "-T", "3"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["verdict"]["status"], "unique_exists");
    assert!(v["oracle"]["alpha_relative_delta"].as_f64().unwrap() < 1e-6);
    assert!(v["error"].is_null());
}

#[test]
fn solve_reports_machine_readable_errors() {
    let text = stdout(&["solve", "--gamma", "-3", "--tau", "1", "-T", "3"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["verdict"]["status"], "none_exists");
    assert_eq!(v["error"]["code"], "no_solution");
    let text = stdout(&["solve", "--gamma", "0", "--tau", "2", "-T", "3"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["error"]["code"], "degenerate_family");
}

#[test]
fn solve_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    stdout(&[
        "solve",
        "--gamma",
        "3",
        "--tau",
        "1",
        "-T",
        "3",
        "--bc",
        "periodic",
        "--no-oracle",
        "--points",
        "101",
        "--profile-out",
        path.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,y"));
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("3.0000000000000000e0,"));
}

#[test]
fn verify_subset_passes() {
    let out = timemap()
        .args(["verify", "--only", "1,3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = timemap().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameters_fail() {
    let out = timemap()
        .args(["solve", "--gamma", "-1", "--tau", "1", "-T", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = timemap()
        .args(["solve", "--gamma", "2", "--tau", "4", "-T", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
