//! End-to-end tests of the binary: exit codes, output schemas, and
//! byte-level determinism, driven through std::process::Command.

use std::process::{Command, Output};

fn hilsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilsym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("stdout is utf-8")
}

fn err(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("stderr is utf-8")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal exit")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&out(o)).expect("stdout is one json object")
}

// ==================================================================
// symbol
// ==================================================================

#[test]
fn symbol_emits_the_frozen_value_with_a_stable_schema() {
    let o = hilsym(&[
        "symbol", "--d", "1", "--n", "2", "--x", "5", "--y", "1+t", "--emit", "json",
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let v = json(&o);
    // 1 + t is the canonical 4th root of unity, and [5, zeta] = 2 mod 4
    assert_eq!(v["symbol"], 2);
    assert_eq!(v["modulus"], 4);
    assert_eq!(v["n"], 2);
    assert_eq!(v["d"], 1);
    assert_eq!(v["paths_agreed"], true);
    assert!(v["seed"].is_null());
    assert!(v["guard_consumed"].is_u64());
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["d", "guard_consumed", "modulus", "n", "paths_agreed", "seed", "symbol"]
    );
}

#[test]
fn symbol_of_one_is_zero() {
    let o = hilsym(&["symbol", "--d", "1", "--n", "2", "--x", "1", "--y", "1+t"]);
    assert_eq!(code(&o), 0);
    assert!(out(&o).contains("[x, y] = 0 mod 4"), "stdout: {}", out(&o));
}

#[test]
fn single_routes_skip_the_cross_check_but_not_the_guard_recheck() {
    for (route, expected) in [("main", 2u64), ("cup", 2)] {
        let o = hilsym(&[
            "symbol", "--d", "1", "--n", "2", "--x", "5", "--y", "1+t", "--paths", route,
            "--emit", "json",
        ]);
        assert_eq!(code(&o), 0, "route {route}: {}", err(&o));
        let v = json(&o);
        assert_eq!(v["symbol"], expected, "route {route}");
        assert!(v["paths_agreed"].is_null(), "route {route}");
    }
}

#[test]
fn non_principal_units_are_usage_errors_with_valuations() {
    let o = hilsym(&["symbol", "--d", "1", "--n", "2", "--x", "t", "--y", "1+t"]);
    assert_eq!(code(&o), 1);
    assert!(
        err(&o).contains("not a principal unit (valuation 1)"),
        "stderr: {}",
        err(&o)
    );
}

#[test]
fn parse_errors_carry_positions_and_exit_one() {
    let o = hilsym(&["symbol", "--d", "1", "--n", "2", "--x", "1 + (t", "--y", "5"]);
    assert_eq!(code(&o), 1);
    assert!(err(&o).contains("--x: syntax error at position"), "stderr: {}", err(&o));

    let o = hilsym(&["symbol", "--d", "1", "--n", "2", "--x", "1+w", "--y", "5"]);
    assert_eq!(code(&o), 1);
    assert!(err(&o).contains("w is only admissible when d > 1"), "stderr: {}", err(&o));
}

#[test]
fn flag_misuse_exits_one_and_help_exits_zero() {
    assert_eq!(code(&hilsym(&["symbol", "--d", "1", "--n", "2", "--x", "5"])), 1);
    assert_eq!(code(&hilsym(&["frobnicate"])), 1);
    assert_eq!(code(&hilsym(&[])), 1);
    assert_eq!(code(&hilsym(&["--help"])), 0);
    assert_eq!(code(&hilsym(&["--version"])), 0);
    assert_eq!(code(&hilsym(&["symbol", "--help"])), 0);
}

#[test]
fn out_of_range_configurations_exit_one() {
    let o = hilsym(&["symbol", "--d", "9", "--n", "2", "--x", "5", "--y", "1+t"]);
    assert_eq!(code(&o), 1);
    assert!(err(&o).contains("out of range"), "stderr: {}", err(&o));
    let o = hilsym(&["symbol", "--d", "1", "--n", "7", "--x", "5", "--y", "1+t"]);
    assert_eq!(code(&o), 1);
    let o = hilsym(&["symbol", "--d", "1", "--n", "2", "--x", "5", "--y", "1+t", "--guard", "4"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn lift_out_prints_the_lifts_on_stderr_only() {
    let o = hilsym(&[
        "symbol", "--d", "1", "--n", "2", "--x", "1+t^2", "--y", "5", "--lift-out",
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    // the canonical lift is algorithm-defined, so only its shape is
    // frozen: both lifts start at the constant term 1
    let e = err(&o);
    assert!(e.starts_with("f = 1"), "stderr: {e}");
    assert!(e.contains("\ng = 1"), "stderr: {e}");
    assert!(out(&o).starts_with("[x, y] = "), "stdout: {}", out(&o));
}

// ==================================================================
// selfcheck
// ==================================================================

#[test]
fn selfcheck_fast_passes_and_is_byte_identical_per_seed() {
    let a = hilsym(&["selfcheck", "--level", "fast", "--seed", "7"]);
    assert_eq!(code(&a), 0, "stdout: {}", out(&a));
    assert!(out(&a).contains("13/13 checks passed"), "stdout: {}", out(&a));
    let b = hilsym(&["selfcheck", "--level", "fast", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&b), 0);

    let c = hilsym(&["selfcheck", "--level", "fast", "--seed", "8", "--emit", "json"]);
    assert_eq!(code(&c), 0);
    let v = json(&c);
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["seed"], 8);
    assert_eq!(v["checks"].as_array().unwrap().len(), 13);
}

// ==================================================================
// table
// ==================================================================

#[test]
fn table_is_antisymmetric_and_matches_the_frozen_cell() {
    let o = hilsym(&[
        "table", "--d", "1", "--n", "2", "--gens", "5, 1+t", "--emit", "json",
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", err(&o));
    let v = json(&o);
    assert_eq!(v["modulus"], 4);
    assert_eq!(v["gens"], serde_json::json!(["5", "1+t"]));
    let m = v["matrix"].as_array().unwrap();
    assert_eq!(m.len(), 2);
    for i in 0..2 {
        for j in 0..2 {
            let a = m[i][j].as_u64().unwrap();
            let b = m[j][i].as_u64().unwrap();
            assert_eq!((a + b) % 4, 0, "antisymmetry at ({i},{j})");
        }
    }
    assert_eq!(m[0][1].as_u64().unwrap(), 2);
}

#[test]
fn table_accepts_a_single_generator() {
    let o = hilsym(&["table", "--d", "1", "--n", "2", "--gens", "5", "--emit", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["matrix"], serde_json::json!([[0]]));
}

#[test]
fn empty_generator_lists_are_usage_errors() {
    let o = hilsym(&["table", "--d", "1", "--n", "2", "--gens", ""]);
    assert_eq!(code(&o), 1);
    let o = hilsym(&["table", "--d", "1", "--n", "2", "--gens", "5,,7"]);
    assert_eq!(code(&o), 1);
    assert!(err(&o).contains("empty generator"), "stderr: {}", err(&o));
}
