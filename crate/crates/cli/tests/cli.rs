use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const POINT_IN_TWO_COSETS: &str = "setting = torus
n = 2
variety = x1*x2 - 2
ambient = [x1*x2 = 2]
gamma = (1, 2)
against = [x1^2*x2 = 4]
";

const COSET: &str = "setting = torus
n = 2
variety = x1 - 2*x2
gamma = (2, 1)
";

const MODULAR_DIAGONAL: &str = "setting = modular
n = 3
variety = x1 - x2
variety = x3 - 5
xi = 5
bounds.modular_complexity = 1
";

const FAMILY: &str = "setting = torus
n = 2
variety = x1 - t1*x2
gamma = (2, 1)
family.params = 1
family.sample = 2
family.sample = 4
family.sample = 8
";

fn atypical(input: Option<&str>, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_atypical"));
    cmd.args(args).envs(envs.iter().copied()).stdout(Stdio::piped()).stderr(Stdio::piped());
    if input.is_some() {
        cmd.args(["--input", "-"]).stdin(Stdio::piped());
    }
    let mut child = cmd.spawn().expect("binary starts");
    if let Some(text) = input {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn json(input: &str, command: &str) -> Value {
    let out = atypical(Some(input), &["--command", command, "--format", "compact"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("compact output is JSON")
}

#[test]
fn closure_of_a_coset_is_itself() {
    let doc = json(COSET, "closure");
    assert_eq!(doc["schema"], "atypical-result/1");
    assert_eq!(doc["command"], "closure");
    assert_eq!(doc["results"]["ws_closure"], "[x1*x2^-1 = 2^1]");
    assert_eq!(doc["results"]["gamma_defect"], 0);
    assert_eq!(doc["bounds"]["subgroup_entry"], 2);
}

#[test]
fn point_in_two_cosets_is_not_gamma_special() {
    let doc = json(POINT_IN_TWO_COSETS, "enumerate");
    let hit = &doc["results"]["intersections"][0];
    assert_eq!(hit["special"], "[x1^2*x2 = 2^2]");
    assert_eq!(hit["gamma_special"], true);
    let point = &hit["components"][0];
    assert_eq!(point["component"], "<x1 - 2, x2 - 1>");
    assert_eq!(point["atypical"], false);
    assert_eq!(point["ws_closure"], "[x1 = 2^1, x2 = 1]");
    assert_eq!(point["ws_closure_gamma_special"], false);
}

#[test]
fn modular_oracle_agrees() {
    let doc = json(MODULAR_DIAGONAL, "oracle-check");
    assert_eq!(doc["results"]["agree"], true);
}

#[test]
fn family_has_one_shape() {
    let doc = json(FAMILY, "family");
    assert_eq!(doc["results"]["m"], 1);
    assert_eq!(doc["results"]["sigma"], serde_json::json!(["[x1*x2^-1 = 1]"]));
}

#[test]
fn every_command_runs() {
    for (input, command) in [
        (COSET, "closure"),
        (COSET, "enumerate"),
        (COSET, "optimal"),
        (COSET, "oracle-check"),
        ("setting = modular\nn = 2\nvariety = x1*x2 - 1\nprojection = 1\n", "atypical-locus"),
        (FAMILY, "family"),
    ] {
        let out = atypical(Some(input), &["--command", command], &[]);
        assert!(out.status.success(), "{command}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8(out.stdout).unwrap().starts_with("schema: atypical-result/1\n"));
    }
    let out = atypical(None, &["--command", "data-check"], &[]);
    assert!(out.status.success());
}

#[test]
fn output_is_deterministic() {
    for format in ["text", "compact"] {
        let a = atypical(Some(POINT_IN_TWO_COSETS), &["--command", "enumerate", "--format", format], &[]);
        let b = atypical(Some(POINT_IN_TWO_COSETS), &["--command", "enumerate", "--format", format], &[]);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn compact_output_is_one_line() {
    let out = atypical(Some(COSET), &["--command", "closure", "--format", "compact"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn parse_errors_exit_with_2() {
    let out = atypical(Some("setting = torus\nn = 2\nvariety = x3 - 1\n"), &["--command", "closure"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3:11"));
    let out = atypical(Some("setting = torus\nn = 2\ncolour = red\n"), &["--command", "closure"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precondition_failures_exit_with_3() {
    let input = "setting = torus\nn = 2\nvariety = x1 - 2*x2\nambient = [x1 = 3]\n";
    let out = atypical(Some(input), &["--command", "enumerate"], &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn budget_exhaustion_exits_with_4() {
    let input = "setting = torus\nn = 3\nvariety = x1^3 + x2^3 + x3^3 - 7\nvariety = x1*x2 - x3^2 + 1\n";
    let out = atypical(Some(input), &["--command", "closure", "--bounds-max-degree", "2"], &[]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn missing_data_directory_is_reported() {
    let out = atypical(None, &["--command", "data-check"], &[("ATYPICAL_DATA_DIR", "/nonexistent/atypical-data")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("No such file"));
}
