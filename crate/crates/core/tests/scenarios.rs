use paratower_core::report::{free_of_floats, run, Command, RunOptions};
use paratower_core::selftest::BUILTIN_SCENARIOS;
use paratower_core::{Error, Rational};
use serde_json::Value;

fn scenario(name: &str) -> &'static str {
    BUILTIN_SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).unwrap()
}

fn results(cmd: Command, name: &str, opts: &RunOptions) -> Value {
    run(cmd, scenario(name), opts).unwrap().value["results"].clone()
}

#[test]
fn plane_line_pairings() {
    let res = results(Command::Pair, "plane_line", &RunOptions::default());
    let values: Vec<&str> = res["pairings"].as_array().unwrap().iter().map(|p| p["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["1", "-1", "-1", "0"]);
}

#[test]
fn command_line_monomials_override_the_file() {
    let opts = RunOptions { monomials: vec!["w t1^2".into()], ..Default::default() };
    let res = results(Command::Pair, "plane_line", &opts);
    assert_eq!(res["pairings"].as_array().unwrap().len(), 1);
}

#[test]
fn plane_line_slope_and_stability() {
    let slope = run(Command::Slope, scenario("plane_line"), &RunOptions::default()).unwrap();
    assert!(slope.ok);
    let stab = results(Command::Stability, "plane_line", &RunOptions::default());
    assert_eq!(stab["parabolic"]["parent_slope"], "7/4");
    assert_eq!(stab["parabolic"]["verdict"], "unstable");
    assert_eq!(stab["near_zero"]["verdict"], "unstable");
    assert!(stab["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn plane_threshold_is_one() {
    let res = results(Command::Cone, "plane_line_r2", &RunOptions::default());
    let eps: Rational = paratower_core::rational::parse_rational(res["threshold"].as_str().unwrap()).unwrap();
    let gap = &eps - Rational::from_integer(1.into());
    assert!(gap <= Rational::new(1.into(), 1000.into()) && -gap <= Rational::new(1.into(), 1000.into()));
}

#[test]
fn every_scenario_runs_every_command_without_floats() {
    for (name, text) in BUILTIN_SCENARIOS {
        for cmd in [Command::Pair, Command::Slope, Command::Cone, Command::Stability, Command::Weights] {
            match run(cmd, text, &RunOptions::default()) {
                Ok(report) => assert!(free_of_floats(&report.value), "{name} {}", cmd.name()),
                Err(e) => assert!(matches!(e, Error::Parse(_) | Error::Unsupported(_)), "{name} {}: {e}", cmd.name()),
            }
        }
    }
}

#[test]
fn floats_in_input_are_rejected() {
    let text = scenario("curve_point").replacen("\"1/2\"", "0.5", 1);
    assert_ne!(text, scenario("curve_point"));
    let err = run(Command::Slope, &text, &RunOptions::default()).unwrap_err();
    assert!(err.to_string().contains("p/q"), "{err}");
}

#[test]
fn unknown_fields_are_rejected() {
    let text = scenario("curve_point").replacen("\"tower\"", "\"towr\"", 1);
    let err = run(Command::Weights, &text, &RunOptions::default()).unwrap_err();
    assert!(err.to_string().contains("towr"), "{err}");
}

#[test]
fn rank_cap_is_enforced() {
    let opts = RunOptions { max_rank: 1, ..Default::default() };
    assert!(run(Command::Weights, scenario("plane_line_r2"), &opts).is_err());
}
