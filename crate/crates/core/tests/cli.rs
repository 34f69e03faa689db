use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besselsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn tabulate_log_grid() {
    let o = run(&["tabulate", "--x-min", "0.5", "--x-max", "20", "--count", "10", "--spacing", "log"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with("x,p_direct,p_direct_err,p_closed,p_closed_err,q,q_err,"));
    let direct = column(&text, "p_direct");
    let closed = column(&text, "p_closed");
    let worst = direct.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
    // 17 significant digits in scientific notation
    let first = text.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(first, "5.0000000000000000e-1");
}

#[test]
fn tabulate_single_point() {
    let o = run(&["tabulate", "--x-min", "100", "--x-max", "100", "--count", "1", "--spacing", "linear"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let q = column(&text, "q")[0];
    let quoted = column(&text, "q_asymptotic")[0];
    let leading = column(&text, "q_leading")[0];
    assert_eq!(quoted, -(200f64).cos() / 100.0);
    assert!((q - leading).abs() <= 5e-4);
    assert!((q - quoted).abs() > 2e-3);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["tabulate", "--x-min", "5", "--x-max", "1", "--count", "3"],
        vec!["tabulate", "--x-min", "0", "--x-max", "1"],
        vec!["tabulate", "--tol", "bogus=1"],
        vec!["verify", "--tol", "quadrature_budget=1e-10"],
        vec!["coeffs", "--l-max", "9"],
        vec!["coeffs", "--l-max", "-1"],
        vec!["greens", "--r", "1e-9", "--m", "1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn budget_failure_exit_3_keeps_rows() {
    let o = run(&["tabulate", "--x-min", "1", "--x-max", "2", "--count", "2", "--tol", "quadrature_budget=1e-18"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("error budget exceeded"));
}

#[test]
fn coeffs_listing() {
    assert_eq!(stdout(&run(&["coeffs", "--l-max", "0"])), "B[0,0,0] = 1\n");
    assert!(stdout(&run(&["coeffs", "--l-max", "2"])).lines().any(|l| l == "B[0,0,2] = f"));
    let three = stdout(&run(&["coeffs", "--l-max", "3"]));
    assert!(three.lines().any(|l| l == "B[1,0,3] = 2*f(0,1)"));
    assert!(three.lines().any(|l| l == "B[0,1,3] = 2*f(1,0)"));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["coeffs", "--l-max", "2", "--format", "json"]))).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["command"], "coeffs");
    assert_eq!(json["rows"][1]["text"], "B[0,0,2] = f");
    assert_eq!(json["rows"][1]["terms"][0]["coefficient"], 1);
}

#[test]
fn greens_record() {
    let o = run(&["greens", "--r", "1", "--m", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    let row = &v["rows"][0];
    assert!(row["abs_diff"]["value"].as_f64().unwrap() <= 1e-6);
    assert!(row["radial"].is_null());
    let a = stdout(&run(&["greens", "--r", "2", "--m", "0.5"]));
    let b = stdout(&run(&["greens", "--r", "4", "--m", "0.25"]));
    assert_eq!(column(&a, "closed"), column(&b, "closed"));
}

#[test]
fn verify_forced_failure() {
    let o = run(&["verify", "--tol", "main_theorem=1e-15", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let main = v["rows"].as_array().unwrap().iter().find(|c| c["id"] == "main_theorem").unwrap();
    assert_eq!(main["passed"], false);
    assert!(main["residual"].as_f64().unwrap() > 1e-15);
    assert!(String::from_utf8_lossy(&o.stderr).contains("main_theorem"));
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("besselsum-cli-{}.csv", std::process::id()));
    let o = run(&["coeffs", "--l-max", "3", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("i,j,l,coefficient\n"));
    assert!(text.contains("1,0,3,\"2*f(0,1)\""));
}
