use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nilmas::document::{validate, ResultDocument};
use nilmas::edgelist::parse_edge_list;
use tempfile::TempDir;

fn nilmas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilmas"))
        .args(args)
        .env_remove("NILMAS_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn doc(out: &Output) -> ResultDocument {
    ResultDocument::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn maxmas_on_three_cycle() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c3.txt", "0 1\n1 2\n2 0\n");
    let out = nilmas(&["maxmas", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let d = doc(&out);
    assert_eq!(d.r_star, Some(1));
    assert_eq!(d.n, 3);
    validate(&d, Some(&parse_edge_list("0 1\n1 2\n2 0\n", false).unwrap().pattern())).unwrap();
}

#[test]
fn oracle_and_solver_agree_through_files() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.txt");
    let out = nilmas(&["gen", "uniform", "--n", "6", "--p-edge", "0.5", "--seed", "11", "--output", s(&graph)]);
    assert_eq!(out.status.code(), Some(0));
    let solved = doc(&nilmas(&["maxmas", "--input", s(&graph)]));
    let exact = doc(&nilmas(&["oracle", "maxmas", "--input", s(&graph)]));
    assert_eq!(solved.r_star, exact.r_star);
}

#[test]
fn gen_round_trips_through_the_parser() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("sw.txt");
    let out = nilmas(&["gen", "smallworld", "--n", "30", "--k", "4", "--p", "0.2", "--seed", "3", "--output", s(&graph)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&graph).unwrap();
    let parsed = parse_edge_list(&text, false).unwrap().pattern();
    let expected = nilmas_core::harness::GenSpec::small_world(30, 4, 0.2, 3).generate().unwrap();
    assert_eq!(parsed, expected);
}

#[test]
fn approx_mas_document_validates_from_disk() {
    let dir = TempDir::new().unwrap();
    let graph = dir.path().join("g.txt");
    nilmas(&["gen", "uniform", "--n", "25", "--p-edge", "0.3", "--seed", "2", "--output", s(&graph)]);
    let report = dir.path().join("r.json");
    let out = nilmas(&["approx-mas", "--input", s(&graph), "--output", s(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let check = nilmas(&["validate", "--input", s(&report), "--graph", s(&graph)]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));

    // a tampered document is rejected
    let mut d = ResultDocument::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    let extra = (0..d.n)
        .flat_map(|u| (0..d.n).map(move |v| (u, v)))
        .find(|&(u, v)| u != v && d.output_edges.contains(&(v, u)) && !d.output_edges.contains(&(u, v)))
        .unwrap();
    d.output_edges.push(extra);
    fs::write(&report, d.to_json()).unwrap();
    let check = nilmas(&["validate", "--input", s(&report)]);
    assert_eq!(check.status.code(), Some(1));
}

#[test]
fn protected_cycle_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "g.txt", "0 1\n1 2\n2 0\n0 2\n");
    let protected = write(&dir, "p.txt", "0 1\n1 2\n2 0\n");
    let out = nilmas(&["maxmas", "--input", s(&input), "--untouchable", s(&protected)]);
    assert_eq!(out.status.code(), Some(2));

    let partial = write(&dir, "q.txt", "0 1\n");
    let out = nilmas(&["maxmas", "--input", s(&input), "--untouchable", s(&partial)]);
    assert_eq!(out.status.code(), Some(0));
    let d = doc(&out);
    assert!(d.output_edges.contains(&(0, 1)));
    assert_eq!(d.protected_edges, vec![(0, 1)]);
}

#[test]
fn minrho_budgets_and_infeasibility() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c4.txt", "1 2\n2 3\n3 4\n4 1\n");
    let out = nilmas(&["minrho", "--input", s(&input), "--one-based", "--budget", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc(&out).rho, Some(1.0));

    let budgets = write(&dir, "b.txt", "3 1\n");
    let out = nilmas(&["minrho", "--input", s(&input), "--one-based", "--budgets", s(&budgets)]);
    assert_eq!(out.status.code(), Some(0));
    let d = doc(&out);
    assert_eq!(d.feasible, Some(true));
    assert_eq!(d.per_vertex_cuts, vec![0, 0, 1, 0]);
}

#[test]
fn weighted_maxmas() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "w.txt", "0 1 5\n1 2 0.5\n2 0 3\n");
    let out = nilmas(&["maxmas", "--input", s(&input), "--weights"]);
    assert_eq!(out.status.code(), Some(0));
    let d = doc(&out);
    assert!((d.budget.unwrap() - 0.5).abs() < 1e-9);
    assert!(!d.output_edges.contains(&(1, 2)));
}

#[test]
fn csv_output_has_header() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c3.txt", "0 1\n1 2\n2 0\n");
    let out = nilmas(&["maxmas", "--input", s(&input), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("schema_version,problem,n,edges,"));
    assert!(text.lines().nth(1).unwrap().starts_with("1,max-mas,3,3,"));
}

#[test]
fn bench_writes_cells() {
    let out = nilmas(&[
        "bench", "--family", "smallworld", "--n", "40", "--k", "4,8", "--trials", "3", "--threads", "2", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("cell,family,n,p_edge,k,p_rewire,trials,failures,mean_r_star,mean_gamma"));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "0 1\nx y\n");
    let out = nilmas(&["maxmas", "--input", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(nilmas(&["maxmas", "--input", "/nonexistent/file"]).status.code(), Some(1));
    assert_eq!(nilmas(&["minrho", "--input", s(&bad)]).status.code(), Some(1));
    assert_eq!(nilmas(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nilmas(&["--help"]).status.code(), Some(0));
}
