use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn mlwb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlwb")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    mlwb(args).status.code().expect("exit code")
}

fn scratch(name: &str, text: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const CHAIN: &str = "frame t\nworlds a b c\nroot a\nedges a->b b->c\nval p = {c}\n";

#[test]
fn eval_exit_codes() {
    let m = scratch("chain.kr", CHAIN);
    assert_eq!(code(&["eval", "--model", &m, "--at", "a", "--formula", "box box p"]), 0);
    assert_eq!(code(&["eval", "--model", &m, "--at", "a", "--formula", "box p"]), 1);
    assert_eq!(code(&["eval", "--model", &m, "--at", "zz", "--formula", "p"]), 2);
    assert_eq!(code(&["eval", "--model", &m, "--at", "a", "--formula", "box ("]), 2);
    assert_eq!(code(&["eval", "--model", "/nonexistent", "--at", "a", "--formula", "p"]), 2);
}

#[test]
fn predicate_eval() {
    let m = scratch(
        "pred.kr",
        "worlds u v\nroot u\nedges u->v\ndomain u = {d}\ndomain v = {d,e}\nval P @ u = {(d)}\nval P @ v = {(d)}\n",
    );
    assert_eq!(code(&["eval", "--model", &m, "--at", "u", "--formula", "forall x. box P(x)"]), 0);
    assert_eq!(code(&["eval", "--model", &m, "--at", "u", "--formula", "box forall x. P(x)"]), 1);
}

#[test]
fn close_adds_transitive_edges() {
    let f = scratch("close.kr", CHAIN);
    let h = scratch("trans.horn", "x R z & z R y => x R y\n");
    let out = mlwb(&["close", "--frame", &f, "--horn", &h]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("a->c"));
    let bad = scratch("bad.horn", "x R z => z R x\n");
    assert_eq!(code(&["close", "--frame", &f, "--horn", &bad]), 2);
}

#[test]
fn unravel_prints_projection() {
    let f = scratch("unravel.kr", CHAIN);
    let out = mlwb(&["unravel", "--depth", "3", "--frame", &f]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("map a.b.c -> c"));
    assert_eq!(code(&["unravel", "--depth", "0", "--frame", &f]), 2);
}

#[test]
fn pmorph_files_and_suite() {
    let s = scratch("src.kr", "worlds a b c\nroot a\nedges a->b a->c\n");
    let t = scratch("tgt.kr", "worlds u v\nroot u\nedges u->v\n");
    let good = scratch("good.map", "map a -> u\nmap b -> v\nmap c -> v\n");
    let bad = scratch("bad.map", "map a -> u\nmap b -> u\nmap c -> v\n");
    assert_eq!(code(&["pmorph", "--kind", "kripke", "--source", &s, "--target", &t, "--map", &good]), 0);
    assert_eq!(code(&["pmorph", "--kind", "kripke", "--source", &s, "--target", &t, "--map", &bad]), 1);
    for kind in ["kripke", "nframe", "kk", "nk"] {
        assert_eq!(code(&["pmorph", "--kind", kind, "--samples", "40"]), 0, "{kind}");
    }
    assert_eq!(code(&["pmorph", "--kind", "bogus"]), 2);
}

#[test]
fn dense_counterexample_and_pipeline() {
    let out = mlwb(&["dense", "counterexample", "--kmax", "5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("false (certified)"));
    let out = mlwb(&["pipeline", "barcan_chain"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("status=refutation-reproduced"));
    assert_eq!(code(&["pipeline", "no_such_scenario"]), 2);
}

#[test]
fn parse_detects_file_kinds() {
    let f = scratch("parse.kr", CHAIN);
    assert_eq!(code(&["parse", &f]), 0);
    let g = scratch("parse.f", "box p -> p\n");
    assert_eq!(String::from_utf8_lossy(&mlwb(&["parse", &g]).stdout).trim(), "box p -> p");
    let bad = scratch("parse_bad.kr", "worlds a a\n");
    assert_eq!(code(&["parse", &bad]), 2);
}
