use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paratower"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(format!("{name}.json"))
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn pair_value(file: &str, monomial: &str) -> String {
    let out = bin().args(["pair", "--monomial", monomial]).arg(scenario(file)).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    json(&out)["results"]["pairings"][0]["value"].as_str().unwrap().to_string()
}

#[test]
fn pair_examples() {
    assert_eq!(pair_value("curve_point", "t1^2"), "-1");
    assert_eq!(pair_value("curve_point", "d1^2"), "0");
    assert_eq!(pair_value("curve_rank_two", "d1 d2 w"), "1");
}

#[test]
fn pair_trace_names_the_descent() {
    let out = bin().args(["pair", "--monomial", "t1^2"]).arg(scenario("curve_point")).output().unwrap();
    let trace = json(&out)["results"]["pairings"][0]["trace"].to_string();
    assert!(trace.contains("Delta-descent") && trace.contains("[D1]"), "{trace}");
}

#[test]
fn stdin_is_accepted() {
    let text = std::fs::read(scenario("curve_point")).unwrap();
    let mut child = bin().args(["slope", "-"]).stdout(Stdio::piped()).stdin(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(&text).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["par_slope"], "7/4");
}

#[test]
fn jobs_keep_input_order() {
    let files = ["plane_line", "curve_point", "plane_line_r2", "curve_two_points"];
    let run = |jobs: &str| {
        let mut cmd = bin();
        cmd.args(["weights", "--jobs", jobs]);
        for f in files {
            cmd.arg(scenario(f));
        }
        cmd.output().unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(four.stdout).unwrap();
    let reports: Vec<serde_json::Value> =
        serde_json::Deserializer::from_str(&text).into_iter().collect::<Result<_, _>>().unwrap();
    assert_eq!(reports.len(), files.len());
}

#[test]
fn mode_flag_switches_the_weight_convention() {
    let out = bin().args(["slope", "--mode", "last-weight-zero"]).arg(scenario("plane_last_weight_zero")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["options"]["mode"], "last-weight-zero");
}

#[test]
fn input_errors_exit_with_two() {
    let out = bin().args(["slope", "no/such/file.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["cone", "--epsilon", "0.1"]).arg(scenario("plane_line")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p/q"));
}

#[test]
fn rank_cap_comes_from_the_environment() {
    let out = bin().env("PARATOWER_MAX_RANK", "1").args(["weights"]).arg(scenario("plane_line_r2")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().env("PARATOWER_MAX_RANK", "65").args(["weights"]).arg(scenario("plane_line")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verdict_failures_exit_with_one() {
    // epsilon far outside the Kähler cone
    let out = bin().args(["cone", "--epsilon", "3"]).arg(scenario("plane_line_r2")).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["ok"], false);
}

#[test]
fn selftest_is_reproducible() {
    let a = bin().arg("selftest").output().unwrap();
    let b = bin().arg("selftest").output().unwrap();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["ok"], true);
}
