use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copsrobbers")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_family(dir: &Path, family: &str, file: &str) {
    let o = run(dir, &["generate", "--family", family, "--out", file]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn clique_capture_time() {
    let dir = tempfile::tempdir().unwrap();
    write_family(dir.path(), "clique:6", "k6.json");
    let o = run(dir.path(), &["solve", "--variant", "av", "--graph", "k6.json", "--cops", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("ct = 1\n"));
}

#[test]
fn generated_graph_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["generate", "--family", "cycle:3"]);
    assert_eq!(stdout(&o).trim(), r#"{"n":3,"edges":[[1,2],[1,3],[2,3]]}"#);
    let o = run(dir.path(), &["generate", "--floorplan", "5x6", "--p0", "0", "--seed", "3"]);
    assert_eq!(stdout(&o).matches("],[").count() + 1, 29);
}

#[test]
fn edge_cov_of_star_is_clique_cov() {
    let dir = tempfile::tempdir().unwrap();
    write_family(dir.path(), "star:6", "s61.json");
    let o = run(dir.path(), &["cov", "--graph", "s61.json", "--mode", "edge"]);
    let out = stdout(&o);
    assert!(out.contains("edge_dct = 0.833333333"), "{out}");
    assert!(out.contains("edge_dct_i = 2.16666"), "{out}");
    assert!(out.contains("edge_H_d = "));
}

#[test]
fn cop_number_and_line_graph() {
    let dir = tempfile::tempdir().unwrap();
    write_family(dir.path(), "cycle:5", "c5.json");
    assert_eq!(stdout(&run(dir.path(), &["copnumber", "--graph", "c5.json"])), "c = 2\n");
    let o = run(dir.path(), &["copnumber", "--graph", "c5.json", "--max-cops", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(dir.path(), &["linegraph", "--graph", "c5.json"]);
    // a relabeled 5-cycle
    let l = stdout(&o);
    assert!(l.starts_with(r#"{"n":5,"#) && l.matches("],[").count() == 4, "{l}");
}

#[test]
fn policies_and_schedules_simulate() {
    let dir = tempfile::tempdir().unwrap();
    write_family(dir.path(), "path:5", "p5.json");
    let o = run(dir.path(), &["solve", "--variant", "dv", "--graph", "p5.json", "--policy", "pol.txt"]);
    assert!(o.status.success());
    let dct: f64 = stdout(&o).lines().next().unwrap().trim_start_matches("dct = ").parse().unwrap();
    let o = run(dir.path(), &["simulate", "--graph", "p5.json", "--policy", "pol.txt", "--trials", "20000", "--seed", "1"]);
    let out = stdout(&o);
    let field = |name: &str| -> f64 {
        out.lines().find_map(|l| l.strip_prefix(name)).unwrap().parse().unwrap()
    };
    assert!((field("mean = ") - dct).abs() < 4.0 * field("std_error = "));

    let o = run(dir.path(), &["solve", "--variant", "di", "--graph", "p5.json", "--schedule", "sched.txt"]);
    assert!(o.status.success());
    assert!(fs::read_to_string(dir.path().join("sched.txt")).unwrap().lines().count() > 1);
    let o = run(dir.path(), &["simulate", "--graph", "p5.json", "--schedule", "sched.txt", "--trials", "1000"]);
    assert!(o.status.success());
}

#[test]
fn experiment_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["experiment", "--pairs", "1x8,2x4", "--p0", "0,0.5,1", "--reps", "5", "--seed", "7", "--out"];
    let a = run(dir.path(), &[&args[..], &["a.csv"]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(dir.path(), &[&args[..], &["b.csv", "--jobs", "1"]].concat());
    assert!(b.status.success());
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.averages.csv"), read("b.averages.csv"));
    let body = String::from_utf8(read("a.csv")).unwrap();
    assert_eq!(body.lines().count(), 1 + 2 * 3 * 5);
    assert_eq!(String::from_utf8(read("a.averages.csv")).unwrap().lines().count(), 1 + 2 * 3);
}

#[test]
fn usage_and_solver_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_family(dir.path(), "path:3", "p3.json");
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    assert_eq!(code(&["nonsense"]), Some(2));
    assert_eq!(code(&["solve", "--variant", "av", "--graph", "p3.json", "--beam", "4"]), Some(2));
    assert_eq!(code(&["solve", "--variant", "xx", "--graph", "p3.json"]), Some(2));
    assert_eq!(code(&["solve", "--variant", "di", "--graph", "p3.json", "--beam", "0"]), Some(2));
    assert_eq!(code(&["solve", "--variant", "av", "--graph", "missing.json"]), Some(1));
    fs::write(dir.path().join("bad.json"), r#"{"n":3,"edges":[[1,1]]}"#).unwrap();
    assert_eq!(code(&["cov", "--graph", "bad.json"]), Some(1));
}

#[test]
fn help_documents_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let help = |sub: &str| stdout(&run(dir.path(), &[sub, "--help"]));
    let solve = help("solve");
    assert!(solve.contains("1e-9 for dv") && solve.contains("1e-6 for di") && solve.contains("default: 64"));
    assert!(help("experiment").contains("[default: 50]"));
    for sub in ["generate", "copnumber", "linegraph", "cov", "simulate"] {
        assert!(help(sub).contains("Usage:"));
    }
}
