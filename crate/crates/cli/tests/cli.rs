use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use doctrina::format::DoctrineFile;
use tempfile::TempDir;

fn doctrina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doctrina")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let mut all = vec!["fixture"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", path.to_str().unwrap()]);
    let o = doctrina(&all);
    assert!(o.status.success(), "fixture {args:?}: {}", stderr(&o));
    path
}

#[test]
fn every_fixture_checks_clean() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &[&str]); 6] = [
        ("finset", &["finset-sub"]),
        ("localic", &["localic", "--sizes", "1,2"]),
        ("arrow", &["arrow-presheaf"]),
        ("arrow-nn", &["arrow-presheaf", "--closure", "double-negation"]),
        ("per", &["per"]),
        ("per-pq", &["per", "--algebra", "boolpq"]),
    ];
    for (name, args) in cases {
        let path = fixture(dir.path(), name, args);
        let o = doctrina(&["check", path.to_str().unwrap(), "--laws", "all"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
        assert!(stdout(&o).ends_with("verdict: pass\n"));
    }
}

#[test]
fn files_round_trip_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    for (name, args) in [("a", vec!["finset-sub", "--sizes", "0,1,2"]), ("b", vec!["per", "--sizes", "1"])] {
        let path = fixture(dir.path(), name, &args);
        let text = std::fs::read_to_string(&path).unwrap();
        let file = DoctrineFile::parse(&text).unwrap();
        assert_eq!(file.to_json(), text);
        let again = DoctrineFile::from_doctrine(&file.to_doctrine().unwrap(), file.generator.clone());
        assert_eq!(again, file);
    }
}

#[test]
fn planted_defects_fail_with_their_law() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &[&str], &str); 6] = [
        ("associativity", &["localic", "--sizes", "1,2", "--defect", "associativity"], "associativity at"),
        ("reindex", &["localic", "--sizes", "1,2", "--defect", "reindex"], "reindexing"),
        ("forall", &["localic", "--sizes", "1,2", "--defect", "forall"], "forall not right adjoint"),
        ("membership", &["finset-sub", "--defect", "membership"], "power object"),
        ("nucleus", &["localic", "--sizes", "1,2", "--defect", "nucleus"], "not inflationary"),
        ("frobenius", &["localic", "--algebra", "abc", "--closure", "moore", "--sizes", "1,2"], "Frobenius"),
    ];
    for (name, args, law) in cases {
        let path = fixture(dir.path(), name, args);
        let o = doctrina(&["check", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{name}");
        assert!(stdout(&o).contains(law), "{name}: {}", stdout(&o));
    }
}

#[test]
fn corrupted_files_exit_two() {
    let dir = TempDir::new().unwrap();
    let path = fixture(dir.path(), "base", &["localic", "--sizes", "1,2"]);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["category"]["composition"].as_array_mut().unwrap().remove(3);
    let bad = dir.path().join("corrupted.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = doctrina(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("composition not total at ("), "{}", stderr(&o));

    std::fs::write(&bad, "{\"schema\": \"doctrina/1\"").unwrap();
    assert_eq!(doctrina(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "{\"schema\": \"doctrina/9\"}").unwrap();
    assert_eq!(doctrina(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let path = fixture(dir.path(), "base", &["localic", "--sizes", "1"]);
    let p = path.to_str().unwrap();
    assert_eq!(doctrina(&["check", p, "--laws", "nonsense"]).status.code(), Some(2));
    assert_eq!(doctrina(&["check", p, "--laws", "sheaf"]).status.code(), Some(2));
    assert_eq!(doctrina(&["check", p, "--scope", "Z"]).status.code(), Some(2));
    assert_eq!(doctrina(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(doctrina(&["fixture", "klein-bottle"]).status.code(), Some(2));
    assert_eq!(doctrina(&["fixture", "finset-sub", "--sizes", "9"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = fixture(dir.path(), "arrow", &["arrow-presheaf", "--closure", "double-negation"]);
    let p = path.to_str().unwrap();
    let run = || stdout(&doctrina(&["check", p, "--report", "json", "--seed", "7", "--budget", "4096"]));
    let first = run();
    assert_eq!(first, run());
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["budget"]["seed"], 7);
    assert_eq!(v["input"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn sheafify_certifies_the_unit() {
    let dir = TempDir::new().unwrap();
    let path = fixture(dir.path(), "per", &["per", "--algebra", "boolpq"]);
    let emitted = dir.path().join("emitted.json");
    let o = doctrina(&[
        "sheafify",
        path.to_str().unwrap(),
        "--object",
        "(2, [[p, 0], [0, q]])",
        "--report",
        "json",
        "--emit",
        emitted.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cert = &v["certificates"][0];
    assert_eq!(cert["eta_bijective"], true);
    assert_eq!(cert["eta_iso"], false);
    assert_eq!(cert["membership_identity"], true);
    assert_eq!(cert["object_is_sheaf_on_probes"], false);
    let file = DoctrineFile::parse(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    assert_eq!(file.certificates.len(), 1);
    let by_index = doctrina(&["sheafify", path.to_str().unwrap(), "--object", "A10", "--report", "json"]);
    assert_eq!(stdout(&by_index), stdout(&o));
}

#[test]
fn eval_prints_fiber_elements() {
    let dir = TempDir::new().unwrap();
    let path = fixture(dir.path(), "sets", &["finset-sub", "--sizes", "1,2,4"]);
    let p = path.to_str().unwrap();
    let o = doctrina(&["eval", p, "--context", "x:2, x':2", "--formula", "x = x'"]);
    assert_eq!(stdout(&o), "{0,3}\n");
    let o = doctrina(&["eval", p, "--context", "y:1", "--formula", "E x:2. T"]);
    assert_eq!(stdout(&o), "{0}\n");
    let o = doctrina(&["eval", p, "--context", "x:2", "--formula", "x = "]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("end of input"));
}

#[test]
fn per_complete_emits_a_checkable_file() {
    let dir = TempDir::new().unwrap();
    let base = fixture(dir.path(), "base", &["localic", "--sizes", "1,2"]);
    let out = dir.path().join("per.json");
    let o = doctrina(&[
        "per-complete",
        base.to_str().unwrap(),
        "--objects",
        "1,2",
        "--max-extent",
        "1",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let file = DoctrineFile::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.generator.as_ref().unwrap().max_extent, Some(1));
    let o = doctrina(&["check", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn object_groups_run_on_the_generated_doctrine() {
    let dir = TempDir::new().unwrap();
    let path = fixture(dir.path(), "per", &["per", "--algebra", "boolpq"]);
    let o = doctrina(&["check", path.to_str().unwrap(), "--laws", "singletons,complete", "--object", "A10"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("singletons for (2, [[p, 0], [0, q]]): pass"), "{out}");
    assert!(out.contains("completeness of (2, [[p, 0], [0, q]]): fail"), "{out}");
    assert!(out.contains("functional relation is not a graph at ((1, [[1]]), (p, q))"), "{out}");
}
