use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn aggrelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggrelab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, body: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn worked_script(dir: &TempDir) -> String {
    let mut body = String::from("7 15 7\n");
    for c in [2, 7, 7, 2, 6, 3, 4, 4, 4, 5, 6, 3, 2, 6, 2] {
        body.push_str(&format!("{c} DDDDDDD\n"));
    }
    file(dir, "s.txt", &body)
}

#[test]
fn predict_worked_example() {
    let dir = TempDir::new().unwrap();
    let s = worked_script(&dir);
    let yes = aggrelab(&["predict", "--script", &s, "--k", "1", "--site", "5 2"]);
    assert_eq!((stdout(&yes).as_str(), yes.status.code()), ("YES\n", Some(0)));
    let no = aggrelab(&["predict", "--script", &s, "--k", "1", "--site", "3 2"]);
    assert_eq!((stdout(&no).as_str(), no.status.code()), ("NO\n", Some(1)));
    let rows = aggrelab(&["predict", "--script", &s, "--k", "1", "--site", "3 2", "--row-convention"]);
    assert_eq!(stdout(&rows), "YES\n");
}

#[test]
fn simulate_renders_and_writes_out() {
    let dir = TempDir::new().unwrap();
    let s = worked_script(&dir);
    let out = dir.path().join("fig.txt");
    let o = aggrelab(&["simulate", "--script", &s, "--k", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches('#').count(), 15 + 7);
    let pbm = aggrelab(&["simulate", "--script", &s, "--k", "1", "--format", "pbm"]);
    assert!(stdout(&pbm).starts_with("P1\n7 8\n"));
}

#[test]
fn random_simulation_is_deterministic() {
    let args = ["simulate", "--random", "8 20 12", "--seed", "9"];
    let (a, b) = (aggrelab(&args), aggrelab(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(aggrelab(&["simulate", "--random", "8 20 12", "--seed", "10"]).stdout, a.stdout);
}

#[test]
fn bead_sort_command() {
    let o = aggrelab(&["bead-sort", "7", "4", "1", "10"]);
    assert_eq!(stdout(&o), "10 7 4 1\n");
    assert_eq!(aggrelab(&["bead-sort", "3", "-1"]).status.code(), Some(3));
}

#[test]
fn realize_verdicts() {
    let dir = TempDir::new().unwrap();
    let floating = file(&dir, "float.txt", "...\n.#.\n...\n");
    let o = aggrelab(&["realize", "--k", "1", "--figure", &floating]);
    assert_eq!((stdout(&o).as_str(), o.status.code()), ("NO\n", Some(1)));
    let f = file(&dir, "f.txt", "....\n....\n.#..\n##..\n");
    let seq = aggrelab(&["realize", "--k", "1", "--figure", &f, "--emit-sequence"]);
    assert_eq!(stdout(&seq), "YES\n1 2 2\n");
    let order = aggrelab(&["realize", "--k", "2", "--figure", &f, "--emit-order"]);
    assert!(stdout(&order).starts_with("YES\n"));
    assert_eq!(stdout(&order).lines().count(), 4);
    let oracle = aggrelab(&["realize", "--k", "2", "--figure", &f, "--oracle"]);
    assert_eq!(stdout(&oracle), "YES\n");
    assert_eq!(aggrelab(&["realize", "--k", "3", "--figure", &f]).status.code(), Some(2));
}

#[test]
fn bd_predict_with_certificate() {
    let dir = TempDir::new().unwrap();
    let g = file(&dir, "g.txt", "7 6\n1 2\n2 3\n3 4\n4 5\n5 6\n6 7\n");
    let s = file(&dir, "s.txt", "2 7 7 2 6 3 4 4 4 5 6 3 2 6 2\n");
    let o = aggrelab(&["bd-predict", "--graph", &g, "--seq", &s, "--site", "5 2", "--certificate"]);
    let text = stdout(&o);
    assert!(text.starts_with("YES\n"), "{text}");
    let weights: usize = text.lines().skip(1).map(|l| l.split(' ').nth(3).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(weights, 5);
    assert_eq!(aggrelab(&["bd-predict", "--graph", &g, "--seq", &s, "--site", "3 2"]).status.code(), Some(1));
}

#[test]
fn circuit_commands() {
    let dir = TempDir::new().unwrap();
    let c = file(&dir, "c.txt", "input a\ninput b\nnor g a b\noutput g\n");
    for (asg, value) in [("a=0,b=0", "1"), ("a=1,b=0", "0")] {
        let check = aggrelab(&["compile-circuit", "--circuit", &c, "--assign", asg, "--check"]);
        assert_eq!(stdout(&check), "YES\n");
        let probes = aggrelab(&["compile-circuit", "--circuit", &c, "--assign", asg]);
        let g = stdout(&probes).lines().find(|l| l.starts_with("g ")).unwrap().to_string();
        assert!(g.ends_with(value), "{g}");
    }
    let script = aggrelab(&["compile-circuit", "--circuit", &c, "--assign", "a=1,b=1", "--emit-script"]);
    assert!(stdout(&script).lines().skip(1).all(|l| l.split(' ').nth(1).unwrap().chars().all(|m| "DR".contains(m))));
    assert_eq!(aggrelab(&["compile-circuit", "--circuit", &c, "--assign", "a=1"]).status.code(), Some(3));
    let bad = file(&dir, "bad.txt", "input a\nnor g a z\n");
    assert_eq!(aggrelab(&["compile-circuit", "--circuit", &bad, "--assign", "a=1"]).status.code(), Some(3));
}

#[test]
fn reduction_pipeline() {
    let dir = TempDir::new().unwrap();
    let g = file(&dir, "g.txt", "3 3\n1 2\n2 3\n3 1\n");
    let layered = aggrelab(&["reduce", "exact", "--digraph", &g, "--from", "1", "--to", "3", "--k", "2"]);
    assert_eq!(layered.status.code(), Some(0));
    let inst = file(&dir, "l.txt", &stdout(&layered));
    let yes = aggrelab(&["reduce", "ldereach", "--instance", &inst, "--predict"]);
    assert_eq!((stdout(&yes).as_str(), yes.status.code()), ("YES\n", Some(0)));
    let layered = aggrelab(&["reduce", "exact", "--digraph", &g, "--from", "1", "--to", "3", "--k", "3"]);
    let inst = file(&dir, "l3.txt", &stdout(&layered));
    assert_eq!(aggrelab(&["reduce", "ldereach", "--instance", &inst, "--predict"]).status.code(), Some(1));
    let printed = aggrelab(&["reduce", "ldereach", "--instance", &inst]);
    assert!(stdout(&printed).contains("# site\n5 12\n"), "{}", stdout(&printed));
}

#[test]
fn oracle_check_reports() {
    let o = aggrelab(&["oracle-check", "--kind", "bdrows", "--budget", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "bdrows: 100 instances, 0 mismatches\n");
    let seq = aggrelab(&["oracle-check", "--kind", "bdrows", "--budget", "100", "--sequential"]);
    assert_eq!(seq.stdout, o.stdout);
    assert_eq!(aggrelab(&["oracle-check", "--kind", "nope"]).status.code(), Some(2));
}

#[test]
fn render_pads() {
    let dir = TempDir::new().unwrap();
    let f = file(&dir, "f.txt", "..\n#.\n");
    let o = aggrelab(&["render", "--figure", &f, "--pad", "1"]);
    assert_eq!(stdout(&o), "....\n....\n....\n.#..\n####\n");
}

#[test]
fn error_exit_codes() {
    assert_eq!(aggrelab(&["predict", "--script", "/nonexistent", "--site", "1 1"]).status.code(), Some(3));
    assert_eq!(aggrelab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(aggrelab(&["predict"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.txt", "3 1 2\n1 DX\n");
    assert_eq!(aggrelab(&["predict", "--script", &bad, "--site", "1 1"]).status.code(), Some(3));
    let s = worked_script(&dir);
    assert_eq!(aggrelab(&["predict", "--script", &s, "--site", "9 2"]).status.code(), Some(3));
}
