use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lp::archive::ResultArchive;
use lp_core::oracle::oracle_lp;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn lp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lp"))
        .args(args)
        .env_remove("LP_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_accepts_known_pairs() {
    for name in ["known_l77.seq", "crt_l35.seq"] {
        let o = lp(&["verify", fixture(name).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).contains("result: LP"));
    }
}

#[test]
fn verify_reports_the_failing_lag() {
    let text = fs::read_to_string(fixture("known_l77.seq")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    let mut entries: Vec<&str> = lines[row].split(',').collect();
    let (i, j) = (0..entries.len() - 1)
        .map(|i| (i, i + 1))
        .find(|&(i, j)| entries[i] != entries[j])
        .unwrap();
    entries.swap(i, j);
    lines[row] = entries.join(",");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.seq");
    fs::write(&path, lines.join("\n")).unwrap();
    let o = lp(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("first failing lag"), "{}", stdout(&o));
}

#[test]
fn verify_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("short.seq");
    fs::write(&path, "# lp-seq v1 length=3\n1,0,1\n1,0\n").unwrap();
    let o = lp(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3"));
}

#[test]
fn pairs_summary() {
    let o = lp(&["pairs", "--length", "55", "--delta", "5", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let summary: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(summary["pairs"], 17);
    assert_eq!(summary["expanded"], 31);
    assert_eq!(out.lines().count(), 18);
}

#[test]
fn bmfm_count_and_list() {
    let o = lp(&["bmfm", "--rows", "1,1", "--cols", "1,1", "--count"]);
    assert_eq!(stdout(&o).trim(), "2");
    let o = lp(&["bmfm", "--rows", "1,1", "--cols", "1,1", "--list"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = lp(&["bmfm", "--rows", "2,2,1", "--cols", "2,2,1", "--list", "--limit", "1"]);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn search_matches_oracle_and_stats_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l15.jsonl");
    let o = lp(&["search", "--length", "15", "--factors", "3,5", "--threads", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let archive = ResultArchive::read(&out).unwrap();
    let found: BTreeSet<_> = archive
        .records
        .iter()
        .map(|r| (r.key.first.entries().to_vec(), r.key.second.entries().to_vec()))
        .collect();
    assert_eq!(found, oracle_lp(15).unwrap());

    let csv = dir.path().join("h.csv");
    let o = lp(&["stats", out.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("energy,count\n"));
    let total: usize = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 2 * archive.records.len());
}

#[test]
fn search_output_is_independent_of_threads() {
    let a = lp(&["search", "--length", "21", "--factors", "3,7", "--threads", "1"]);
    let b = lp(&["search", "--length", "21", "--factors", "7,3", "--threads", "4"]);
    let c = lp(&["search", "--length", "21", "--factors", "3,7", "--threads", "4"]);
    assert_eq!(stdout(&a), stdout(&c));
    assert_eq!(b.status.code(), Some(0));
}

#[test]
fn search_interrupted_and_resumed() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("s.ckpt");
    let ck = ckpt.to_str().unwrap();
    let base = ["search", "--length", "21", "--factors", "3,7", "--threads", "2", "--checkpoint", ck];
    let o = lp(&[&base[..], &["--stop-after", "2"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let resumed = lp(&[&base[..], &["--resume"]].concat());
    let fresh = lp(&["search", "--length", "21", "--factors", "3,7"]);
    assert_eq!(stdout(&resumed), stdout(&fresh));
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        &["search", "--length", "15", "--factors", "3,6"][..],
        &["search", "--length", "15", "--factors", "3"],
        &["pairs", "--length", "16", "--delta", "4"],
        &["oracle", "lp", "--length", "25"],
    ] {
        assert_eq!(lp(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn oracle_reports_json() {
    let o = lp(&["oracle", "bmfm", "--rows", "1,1", "--cols", "1,1"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["result"]["count"], 2);
    let o = lp(&["oracle", "feasible", "--rows", "2,0", "--cols", "2,0"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["result"]["feasible"], false);
}
