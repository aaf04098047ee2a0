use std::process::{Command, Output};

use serde_json::Value;

fn hilok(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilok")).args(args).env_remove("HILOK_DEFAULT_PREC").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn ok(args: &[&str]) -> Value {
    let out = hilok(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v = json_of(&out);
    assert_eq!(v["schema"], "hilok/1");
    v
}

#[test]
fn pair_example() {
    let v = ok(&["pair", "-F", "F(2)((t))", "-w", "1/t", "-x", "1+t"]);
    assert_eq!(v["value"], 1);
}

#[test]
fn graded_example() {
    let v = ok(&["k", "graded", "-F", "F(2)((t))((u))", "-s", "{t,u}"]);
    assert_eq!(v["graded"]["gr0"]["second"], "{t}");
}

#[test]
fn missing_arguments_exit_2() {
    assert_eq!(hilok(&["pair", "-F", "F(2)((t))"]).status.code(), Some(2));
    assert_eq!(hilok(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hilok(&["eval", "-F", "F(2)((t))", "1+"]).status.code(), Some(2));
}

#[test]
fn precision_exit_3() {
    let out = hilok(&["pair", "-F", "F(2)((t))@prec=2", "-w", "t^-5", "-x", "1/(1+t)"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["error"]["kind"], "precision");
}

#[test]
fn domain_exit_4() {
    let out = hilok(&["existence", "-F", "F(2)((t))", "-a", "t", "-N", "4"]);
    assert_eq!(out.status.code(), Some(4));
    let v = json_of(&out);
    assert_eq!(v["error"]["operation"], "existence");
    assert_eq!(v["error"]["argument"], "t");
    assert_eq!(hilok(&["eval", "-F", "F(4)((t))", "t"]).status.code(), Some(4));
}

#[test]
fn precision_flag_and_env() {
    let v = ok(&["eval", "-F", "F(2)((t))", "-p", "5", "1/(1+t)"]);
    assert!(v["field"].as_str().unwrap().ends_with("@prec=5"));
    let out = Command::new(env!("CARGO_BIN_EXE_hilok"))
        .args(["eval", "-F", "F(2)((t))((u))", "1+t"])
        .env("HILOK_DEFAULT_PREC", "7")
        .output()
        .unwrap();
    let v = json_of(&out);
    assert!(v["field"].as_str().unwrap().ends_with("@prec=7,7"), "{v}");
}

#[test]
fn deterministic_output() {
    let args = ["selftest", "--cases", "10", "--seed", "3"];
    let a = hilok(&args);
    let b = hilok(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = hilok(&["normcheck", "-F", "F(2)((t))", "-a", "t^-3", "--family", "2", "--samples", "5", "--seed", "9"]);
    let d = hilok(&["normcheck", "-F", "F(2)((t))", "-a", "t^-3", "--family", "2", "--samples", "5", "--seed", "9"]);
    assert_eq!(c.stdout, d.stdout);
    assert_eq!(json_of(&c)["samples"]["all_hold"], true);
}

#[test]
fn k_output_round_trips() {
    let v = ok(&["k", "symbol", "-F", "F(3)((t))((u))", "-s", "{1+t, u} - {t, u}"]);
    let class = serde_json::to_string(&v["class"]).unwrap();
    let w = ok(&["k", "symbol", "-F", "F(3)((t))((u))", "-s", &class]);
    assert_eq!(v["class"], w["class"]);
    let x = ok(&["k", "u-level", "-F", "F(3)((t))((u))", "-s", &class]);
    assert_eq!(x["u_level"], 0);
}

#[test]
fn h_output_round_trips() {
    let v = ok(&["h", "reduce", "-F", "F(2)((t))((u))", "-w", "(t^-2*u^-3) dlog t"]);
    let class = serde_json::to_string(&v["class"]).unwrap();
    let w = ok(&["h", "class", "-F", "F(2)((t))((u))", "-w", &class]);
    assert_eq!(v["class"], w["class"]);
    let t = ok(&["h", "t-level", "-F", "F(2)((t))((u))", "-w", &class]);
    assert_eq!(t["t_level"], 3);
    // the text rendering parses back as well
    let text = v["text"].as_str().unwrap().trim_start_matches('[').trim_end_matches(']').to_string();
    let u = ok(&["h", "class", "-F", "F(2)((t))((u))", "-w", &text]);
    assert_eq!(u["class"], v["class"]);
}

#[test]
fn other_subcommands() {
    let v = ok(&["form", "delta", "-F", "F(2)((t))((u))", "(1+t) dlog t^dlog u"]);
    assert_eq!(v["value"], 1);
    let v = ok(&["form", "d", "-F", "F(2)((t))((u))", "(t+u) dlog u"]);
    assert_eq!(v["result"]["text"], "(t) dlog t^dlog u");
    let v = ok(&["val", "-F", "F(3)((t))", "t^-2*(1+t)"]);
    assert_eq!(v["valuation"], serde_json::json!([-2]));
    let v = ok(&["character", "-F", "F(2)((t))", "-w", "t^-1", "-N", "3"]);
    assert_eq!(v["kernel_index"], 2);
    let v = ok(&["grmatrix", "-F", "F(2)((t))((u))", "-i", "1", "-r", "2"]);
    assert_eq!(v["full_rank"], true);
    let v = ok(&["existence", "-F", "F(2)((t))", "-a", "t^-1", "-N", "4"]);
    assert_eq!(v["report"]["passed"], true);
    let v = ok(&["normcheck", "-F", "F(3)((t))", "-a", "t^-4", "--family", "1", "-x", "0; t^2", "-i", "1"]);
    assert_eq!(v["report"]["holds"], true);
    let out = hilok(&["eval", "-F", "F(2)((t))", "--format", "text", "t + t^2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("schema"));
}
