use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn skyzone(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skyzone"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = skyzone(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn records(text: &str, kind: &str) -> Vec<Value> {
    text.lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["record"] == kind)
        .collect()
}

fn wrap_fixture(dir: &Path) {
    std::fs::write(
        dir.join("wrap.csv"),
        "objID,ra,dec\n1,359.9,0\n2,0.1,0\n3,0.01,0\n4,359.99,0\n5,40,40\n",
    )
    .unwrap();
    ok(dir, &["ingest", "wrap.csv"]);
}

#[test]
fn wraparound_nearby_and_neighbors() {
    let d = tempfile::tempdir().unwrap();
    wrap_fixture(d.path());
    ok(d.path(), &["zone", "build"]);
    let text = ok(d.path(), &["--format", "machine", "zone", "nearby", "--ra", "0.05", "--dec", "0", "--r", "0.2"]);
    let ids: Vec<i64> = records(&text, "match").iter().map(|m| m["obj_id"].as_i64().unwrap()).collect();
    assert_eq!(ids, vec![1, 2, 3, 4]);
    assert_eq!(records(&text, "config").len(), 1);

    ok(d.path(), &["neighbors", "build", "--r", "0.05"]);
    let text = ok(d.path(), &["--format", "machine", "neighbors", "of", "--objid", "3"]);
    let rows = records(&text, "neighbor");
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["neighbor_id"], 4);
}

#[test]
fn two_point_wraparound_fixture() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("w.csv"), "objID,ra,dec\n1,359.9,0.0\n2,0.1,0.0\n").unwrap();
    ok(d.path(), &["ingest", "w.csv"]);
    ok(d.path(), &["zone", "build"]);
    let text = ok(d.path(), &["--format", "machine", "zone", "nearby", "--ra", "0.05", "--dec", "0", "--r", "0.2"]);
    assert_eq!(records(&text, "match").len(), 2);
}

#[test]
fn htm_commands() {
    let d = tempfile::tempdir().unwrap();
    let text = ok(d.path(), &["--format", "machine", "htm", "cover", "--region", "CIRCLE J2000 30 20 3"]);
    let ranges = records(&text, "range");
    assert!(!ranges.is_empty() && ranges.len() <= 20);
    for r in &ranges {
        assert!(r["begin"].as_u64().unwrap() <= r["end"].as_u64().unwrap());
    }
    let human = ok(d.path(), &["htm", "cover", "--region", "CIRCLE J2000 30 20 3"]);
    let first = human.lines().nth(1).unwrap();
    assert_eq!(first.split_whitespace().count(), 2);

    let text = ok(d.path(), &["--format", "machine", "htm", "id", "--ra", "10", "--dec", "45", "--depth", "3"]);
    let id = &records(&text, "htm_id")[0];
    let raw = id["id"].as_u64().unwrap();
    assert!((8 << 6..16 << 6).contains(&raw));
    assert!(id["name"].as_str().unwrap().starts_with('N'));
}

#[test]
fn region_workflow_persists() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["region", "new", "--kind", "CAP", "--spec", "CIRCLE J2000 30 20 60"]);
    ok(p, &["region", "new"]);
    ok(p, &["region", "convex", "2"]);
    ok(p, &["region", "constraint", "2", "1", "--x", "0", "--y", "0", "--z", "1", "--l", "0"]);
    ok(p, &["region", "constraint", "2", "1", "--x", "0", "--y", "0", "--z", "1", "--l", "-0.5"]);
    ok(p, &["region", "and", "1", "2"]);
    ok(p, &["region", "not", "1"]);

    let text = ok(p, &["--format", "machine", "region", "contains", "--ra", "30", "--dec", "20"]);
    let hits: Vec<u64> = records(&text, "hit").iter().map(|h| h["region_id"].as_u64().unwrap()).collect();
    assert_eq!(hits, vec![1, 2, 3]);

    let text = ok(p, &["--format", "machine", "region", "simplify", "2"]);
    assert_eq!(records(&text, "region")[0]["text"], "REGION CONVEX 0 0 1 0");

    let text = ok(p, &["--format", "machine", "region", "predicate", "2"]);
    assert_eq!(records(&text, "predicate")[0]["expression"], "((p.x*0 + p.y*0 + p.z*1) > 0)");

    ok(p, &["region", "drop", "3"]);
    let out = skyzone(p, &["region", "show", "3"]);
    assert_eq!(out.status.code(), Some(4));
    let text = ok(p, &["--format", "machine", "region", "new"]);
    assert_eq!(records(&text, "region")[0]["region_id"], 5);

    std::fs::write(p.join("c.csv"), "objID,ra,dec\n1,30,20\n2,200,-20\n").unwrap();
    ok(p, &["ingest", "c.csv"]);
    let text = ok(p, &["--format", "machine", "region", "points-in", "1"]);
    assert_eq!(records(&text, "point").len(), 1);
}

#[test]
fn pyramid_stage_counts() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["region", "new", "--spec", "CIRCLE J2000 30 20 60"]);
    ok(p, &["region", "new", "--spec", "RECT J2000 100 -10 104 -6"]);
    ok(p, &["region", "new", "--spec", "CONVEX 0 0 1 0.5 0 0 -1 0.5"]);
    let text = ok(p, &["--format", "machine", "pyramid", "build"]);
    assert_eq!(records(&text, "pyramid")[0]["skipped_empty"], 1);
    let text = ok(
        p,
        &["--format", "machine", "pyramid", "overlap", "--ra", "31", "--dec", "20", "--r", "0.5", "--stage-counts"],
    );
    let ids: Vec<i64> = records(&text, "overlap").iter().map(|o| o["region_id"].as_i64().unwrap()).collect();
    assert_eq!(ids, vec![1]);
    let counts: Vec<u64> = records(&text, "stage").iter().skip(1).map(|s| s["count"].as_u64().unwrap()).collect();
    assert_eq!(counts.len(), 5);
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn bench_reports_oracle_match() {
    let d = tempfile::tempdir().unwrap();
    let text = ok(d.path(), &["bench", "nearby", "--n", "10000", "--queries", "200", "--seed", "7"]);
    assert!(text.contains("oracle match: 200/200"), "{text}");
    let zone_speedup: f64 = text
        .lines()
        .find(|l| l.starts_with("zone "))
        .and_then(|l| l.split_whitespace().last())
        .unwrap()
        .parse()
        .unwrap();
    assert!(zone_speedup > 1.0);

    let text = ok(d.path(), &["--format", "machine", "bench", "overlap", "--n", "5000", "--queries", "50"]);
    assert_eq!(records(&text, "bench")[0]["oracle_match"], "50/50");
    let text = ok(d.path(), &["--format", "machine", "bench", "neighbors", "--n", "3000", "--r", "1"]);
    assert_eq!(records(&text, "bench")[0]["oracle_match"], "2/2");
}

#[test]
fn machine_output_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let args = ["--format", "machine", "bench", "overlap", "--n", "2000", "--queries", "30", "--seed", "3"];
    let a = skyzone(d.path(), &args);
    let b = skyzone(d.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("total_ms"));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(skyzone(p, &["zone", "frobnicate"]).status.code(), Some(2));
    assert_eq!(skyzone(p, &["zone", "nearby", "--ra", "1"]).status.code(), Some(2));
    assert_eq!(skyzone(p, &["zone", "build"]).status.code(), Some(3));
    std::fs::write(p.join("bad.csv"), "objID,ra,dec\n1,0,0\n1,2,2\n").unwrap();
    let out = skyzone(p, &["ingest", "bad.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(skyzone(p, &["htm", "cover", "--region", "CIRCLE J2000 30"]).status.code(), Some(3));
    ok(p, &["region", "new"]);
    assert_eq!(skyzone(p, &["region", "show", "42"]).status.code(), Some(4));
    std::fs::write(p.join("skyzone.snap"), b"SKYZSNAP-truncated").unwrap();
    assert_eq!(skyzone(p, &["region", "show"]).status.code(), Some(3));
}
