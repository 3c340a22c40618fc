use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use leibniz_core::numeric::parse_rational;
use leibniz_core::reconstruction::FunctionTable;
use leibniz_core::spec::LAdditiveSpec;
use tempfile::TempDir;

const D_SPEC: &str = r#"{"x": {"default": {"kind": "const", "value": "1"}}, "y": {"default": {"kind": "prime"}}}"#;
const D2_SPEC: &str =
    r#"{"x": {"overrides": {"2": "1"}, "default": {"kind": "const", "value": "0"}}, "y": {"default": {"kind": "prime"}}}"#;

fn leibniz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leibniz")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn d_table(limit: u64) -> FunctionTable {
    FunctionTable::from_spec(&LAdditiveSpec::from_json(D_SPEC).unwrap(), limit).unwrap()
}

fn corrupted_table(limit: u64) -> FunctionTable {
    let mut t = d_table(limit);
    t.set(4, parse_rational("3").unwrap());
    t.set(8, parse_rational("5").unwrap());
    t
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn derivatives() {
    for (args, expected) in [
        (vec!["deriv", "60", "--all"], "92\n"),
        (vec!["deriv", "60"], "92\n"),
        (vec!["deriv", "60", "--set", "2,5"], "72\n"),
        (vec!["deriv", "60", "--complement", "2"], "32\n"),
        (vec!["ld", "8", "--all"], "3/2\n"),
        (vec!["ld", "8", "--float"], "3/2\t1.5\n"),
        (vec!["factor", "360"], "2^3 * 3^2 * 5\n"),
        (vec!["factor", "1"], "1\n"),
        (vec!["factor", "2305843009213693951"], "2305843009213693951\n"),
    ] {
        let out = leibniz(&args);
        assert_eq!(code(&out), 0, "{args:?}");
        assert_eq!(stdout(&out), expected, "{args:?}");
    }
}

#[test]
fn eval_and_decompose() {
    let dir = TempDir::new().unwrap();
    let d = write(dir.path(), "d-spec.json", D_SPEC);
    let out = leibniz(&["eval", s(&d), "12"]);
    assert_eq!((code(&out), stdout(&out)), (0, "16\n".to_string()));
    let out = leibniz(&["eval", "builtin:D_S:2,5", "60", "--with-h"]);
    assert_eq!(stdout(&out), "72\n60\n");
    assert_eq!(stdout(&leibniz(&["eval", "builtin:ld", "8"])), "3/2\n");

    let out = leibniz(&["decompose", s(&d)]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["g"]["x"]["default"]["kind"], "reciprocal-prime");
    assert_eq!(v["h"]["y"]["default"]["kind"], "prime");
}

#[test]
fn reconstruct_and_check() {
    let dir = TempDir::new().unwrap();
    let good = write(dir.path(), "d-table.csv", &d_table(10_000).to_csv());
    let bad = write(dir.path(), "corrupted-table.csv", &corrupted_table(1000).to_csv());

    let out = leibniz(&["reconstruct", s(&good), "--primes", "11"]);
    assert_eq!(stdout(&out), "{\"2\":\"2\",\"3\":\"3\",\"5\":\"5\",\"7\":\"7\",\"11\":\"11\"}\n");

    let out = leibniz(&["check", s(&good)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("accepted"));

    let out = leibniz(&["check", s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("rejected: g(8) \u{2260} g(2)+g(4)"), "{}", stdout(&out));

    let out = leibniz(&["check", "--spec", "builtin:D_S:2,5", "--max", "2000", "--conditions"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("(iii)\tholds on range"));

    let out = leibniz(&["check", "--spec", "builtin:theta", "--max", "100"]);
    assert_eq!((code(&out), stdout(&out)), (0, "accepted (zero function; every h applies)\n".to_string()));
}

#[test]
fn bounds() {
    let out = leibniz(&["bounds", "8"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.ends_with("\tequal")), "{text}");

    let dir = TempDir::new().unwrap();
    let d2 = write(dir.path(), "d2-spec.json", D2_SPEC);
    let out = leibniz(&["bounds", "6", "--spec", s(&d2)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("\t3\t1\tprecondition-violated(s<r)"), "{text}");
    assert!(text.contains("f(n) <= s*M*h(n)/2\t3\t3\tequal"), "{text}");

    let out = leibniz(&["bounds", "9"]);
    assert!(stdout(&out).contains("r*n^((r-1)/r) <= D(n)\t36\t36\tequal"));
}

#[test]
fn sweeps() {
    let out = leibniz(&["sweep", "--max", "10000", "--builtin", "D", "--props", "leibniz,chain-eq10"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["chain-eq10"]["violation_count"], 0);
    assert_eq!(v["chain-eq10"]["deviations"][0]["examples"][0], 9);
    assert!(v.get("conditions").is_none());

    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "corrupted.csv", &corrupted_table(1000).to_csv());
    let report = dir.path().join("report.json");
    let out = leibniz(&[
        "sweep", "--max", "1000", "--table", s(&bad), "--props", "reconstruction-roundtrip", "--out", s(&report),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let witnesses = v["reconstruction-roundtrip"]["violations"].as_array().unwrap();
    assert!(witnesses.iter().any(|w| w["n"] == 8));
    assert_eq!(witnesses[0]["recheck"], format!("leibniz check {}", s(&bad)));

    let run = |w: &str| stdout(&leibniz(&["sweep", "--max", "3000", "--builtin", "D_S:2", "--workers", w]));
    assert_eq!(run("1"), run("4"));
}

#[test]
fn rejected_subjects_do_not_fail_the_sweep() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"x\": 3}");
    let out = leibniz(&["sweep", "--max", "100", "--builtin", "D", "--spec", s(&bad), "--props", "leibniz"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rejected_subjects"][0]["subject"], s(&bad));
}

#[test]
fn bad_input_exits_2_without_panicking() {
    let dir = TempDir::new().unwrap();
    let not_lowest = write(dir.path(), "t.csv", "n,f\n1,0\n2,2/4\n");
    let missing_row = write(dir.path(), "m.csv", "n,f\n1,0\n3,1\n");
    let bad_spec = write(dir.path(), "s.json", "{\"x\": {\"default\": {\"kind\": \"const\"}}, \"y\": {\"default\": {\"kind\": \"prime\"}}}");
    let zero_y = write(dir.path(), "z.json", r#"{"x": {"default": {"kind": "const", "value": "1"}}, "y": {"default": {"kind": "const", "value": "0"}}}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["deriv", "0"],
        vec!["deriv", "-3"],
        vec!["deriv", "12abc"],
        vec!["deriv", "6", "--set", ""],
        vec!["deriv", "6", "--set", "2,4"],
        vec!["deriv", "6", "--set", "2", "--all"],
        vec!["ld", "6", "--complement", "x"],
        vec!["factor", ""],
        vec!["eval", "builtin:Q", "5"],
        vec!["eval", "builtin:D_S", "5"],
        vec!["eval", "/nonexistent/spec.json", "5"],
        vec!["eval", s(&bad_spec), "5"],
        vec!["eval", s(&zero_y), "5"],
        vec!["decompose", "builtin:N"],
        vec!["check", s(&not_lowest)],
        vec!["check", s(&missing_row)],
        vec!["check"],
        vec!["reconstruct", s(&missing_row)],
        vec!["bounds", "1"],
        vec!["bounds", "0"],
        vec!["sweep", "--max", "1"],
        vec!["sweep", "--max", "5000000"],
        vec!["sweep", "--max", "100", "--props", "nope"],
        vec!["sweep", "--max", "100", "--workers", "0"],
        vec!["sweep", "--max", "100", "--builtin", "D_S:9"],
        vec!["nonsense"],
    ];
    for args in cases {
        let out = leibniz(&args);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(code(&out), 2, "{args:?}: {err}");
        assert!(!err.contains("panicked"), "{args:?}: {err}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn reconstruct_zero_function_is_rejected() {
    let dir = TempDir::new().unwrap();
    let zero = write(dir.path(), "zero.csv", "n,f\n1,0\n2,0\n3,0\n4,0\n");
    let out = leibniz(&["reconstruct", s(&zero)]);
    assert_eq!(code(&out), 1);
}
