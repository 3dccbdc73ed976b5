//! End-to-end flows through the compiled binary: experiment lifecycle,
//! mutant maintenance, the harness child protocol, and corpus commands.

use std::path::{Path, PathBuf};
use std::process::Command;

use crucible::driver::read_records;
use crucible::trial::TrialStatus;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_crucible")
}

fn run(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(exe())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn assert_ok(args: &[&str], cwd: &Path) -> String {
    let (code, stdout, stderr) = run(args, cwd);
    assert_eq!(code, 0, "command {args:?} failed:\n{stdout}\n{stderr}");
    stdout
}

#[test]
fn experiment_lifecycle_mirrors_the_documented_command_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    assert_ok(&["experiment", "new", "myexp"], root);
    assert_ok(&["workload", "add", "--experiment", "myexp", "bst"], root);

    let exp = root.join("myexp");
    assert!(exp.join("tests/bst/default.json").exists());
    assert!(exp.join("workloads/bst/config.json").exists());
    assert!(exp.join("workloads/bst/src/insert.impl").exists());

    // restrict to one mutant for speed
    let spec = serde_json::json!({
        "name": "bst/small",
        "entries": [{
            "workload": "bst",
            "mutants": ["insert_duplicate_entries"],
            "properties": ["InsertValid"],
            "trials": 3,
            "timeout_s": 20.0
        }]
    });
    std::fs::create_dir_all(exp.join("tests/bst")).unwrap();
    std::fs::write(exp.join("tests/bst/small.json"), spec.to_string()).unwrap();

    let stdout = assert_ok(
        &["experiment", "run", "--tests", "bst/small", "--experiment", "myexp"],
        root,
    );
    assert!(stdout.contains("6 new record(s)"), "{stdout}");

    let log = exp.join("results/bst/small.jsonl");
    let records = read_records(&log).unwrap();
    assert_eq!(records.len(), 6); // 1 task x 2 strategies x 3 trials
    assert!(records.iter().all(|r| r.status == TrialStatus::Found));

    // resume: rerunning the same spec appends nothing
    let stdout = assert_ok(
        &["experiment", "run", "--tests", "bst/small", "--experiment", "myexp"],
        root,
    );
    assert!(stdout.contains("0 new record(s)"), "{stdout}");
    assert_eq!(read_records(&log).unwrap().len(), 6);

    // analysis artifacts land in analysis/
    let results = log.to_str().unwrap().to_string();
    assert_ok(&["analyze", "--results", &results], root);
    assert!(exp.join("analysis/summary.json").exists());
    assert!(exp.join("analysis/comparisons.json").exists());

    let summary = exp.join("analysis/summary.json");
    let chart = exp.join("analysis/bst-small.svg");
    assert_ok(
        &[
            "report",
            "--summary",
            summary.to_str().unwrap(),
            "--out",
            chart.to_str().unwrap(),
            "--csv",
            exp.join("analysis/table.csv").to_str().unwrap(),
        ],
        root,
    );
    let svg = std::fs::read_to_string(&chart).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<svg"));
    let csv = std::fs::read_to_string(exp.join("analysis/table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header + 2 strategies
}

#[test]
fn failing_child_protocol_yields_error_exit() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert_ok(&["experiment", "new", "exp"], root);
    let exp = root.join("exp");

    // a workload whose runner prints garbage
    let wl = exp.join("workloads/broken");
    std::fs::create_dir_all(wl.join("src")).unwrap();
    std::fs::write(
        wl.join("src/thing.impl"),
        "{-! -}\nbase\n{-!! broken_mutant -}\n{-!\nbug\n-}\n{- !-}\n",
    )
    .unwrap();
    let config = serde_json::json!({
        "name": "broken",
        "language": "builtin",
        "comment_styles": {"impl": {"begin": "{-", "end": "-}", "marker": "!"}},
        "source_roots": ["src"],
        "properties": ["P"],
        "strategies": [{"name": "s", "kind": "external"}],
        "run": "echo not-json-at-all"
    });
    std::fs::write(wl.join("config.json"), config.to_string()).unwrap();
    let spec = serde_json::json!({
        "name": "broken/t",
        "entries": [{"workload": "broken", "trials": 2}]
    });
    std::fs::create_dir_all(exp.join("tests/broken")).unwrap();
    std::fs::write(exp.join("tests/broken/t.json"), spec.to_string()).unwrap();

    let (code, stdout, _) = run(
        &["experiment", "run", "--tests", "broken/t", "--experiment", "exp"],
        root,
    );
    assert_eq!(code, 1, "error trials must surface in the exit status");
    assert!(stdout.contains("2 error(s)"), "{stdout}");
    let records = read_records(&exp.join("results/broken/t.jsonl")).unwrap();
    assert!(records.iter().all(|r| r.status == TrialStatus::Error));
    assert!(records[0].error.as_deref().unwrap().contains("not-json-at-all"));
}

#[test]
fn mutant_list_toggle_validate() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let wl = crucible::workloads::install_builtin("bst", root).unwrap();
    let src = wl.join("src");

    let stdout = assert_ok(&["mutant", "list", src.to_str().unwrap()], root);
    assert!(stdout.contains("insert_duplicate_entries"));
    assert!(stdout.contains("10 mutant(s)"), "{stdout}");
    assert!(!stdout.contains("[active]"));

    let file = src.join("insert.impl");
    assert_ok(
        &[
            "mutant",
            "toggle",
            file.to_str().unwrap(),
            "--variation",
            "1",
            "--select",
            "insert_flip_gt",
        ],
        root,
    );
    let stdout = assert_ok(&["mutant", "list", src.to_str().unwrap()], root);
    assert!(stdout.contains("insert_flip_gt  [active]"), "{stdout}");

    // toggling back restores the original bytes
    let original = crucible::workloads::builtin_workloads()["bst"]
        .iter()
        .find(|f| f.rel_path == "src/insert.impl")
        .unwrap()
        .contents;
    assert_ok(
        &[
            "mutant",
            "toggle",
            file.to_str().unwrap(),
            "--variation",
            "1",
            "--select",
            "base",
        ],
        root,
    );
    assert_eq!(std::fs::read_to_string(&file).unwrap(), original);

    let (code, _, _) = run(&["mutant", "validate", src.to_str().unwrap()], root);
    assert_eq!(code, 0);

    // malformed file fails validation with a nonzero exit
    std::fs::write(src.join("bad.impl"), "{-! -}\nunterminated\n").unwrap();
    let (code, _, stderr) = run(&["mutant", "validate", src.to_str().unwrap()], root);
    assert_eq!(code, 1);
    assert!(stderr.contains("never closed"), "{stderr}");
}

#[test]
fn harness_run_as_child_process() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let wl = crucible::workloads::install_builtin("rbt", root).unwrap();

    // base-active sources: the property holds, so the run gives up
    let (code, stdout, _) = run(
        &[
            "harness",
            "run",
            "--workload",
            "rbt",
            "--property",
            "InsertValidRBT",
            "--strategy",
            "bespoke",
            "--seed",
            "1",
            "--max-tests",
            "200",
            "--dir",
            wl.to_str().unwrap(),
        ],
        root,
    );
    assert_eq!(code, 0);
    let result = crucible::trial::parse_trial_output(stdout.as_bytes()).unwrap();
    assert_eq!(result.status, TrialStatus::GaveUp);
    assert_eq!(result.tests, 200);
    assert_eq!(result.discards, 0);

    let (code, stdout, _) = run(
        &["harness", "check", "--workload", "rbt", "--dir", wl.to_str().unwrap()],
        root,
    );
    assert_eq!(code, 0);
    assert!(stdout.contains("8 mutant(s)"), "{stdout}");
}

#[test]
fn corpus_gen_and_run_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let corpus = root.join("c.jsonl");

    assert_ok(
        &[
            "corpus",
            "gen",
            "--workload",
            "bst",
            "--strategy",
            "typebased",
            "--property",
            "InsertModel",
            "--seed",
            "33",
            "--count",
            "2000",
            "--out",
            corpus.to_str().unwrap(),
        ],
        root,
    );
    // deterministic values for a fixed seed
    let corpus2 = root.join("c2.jsonl");
    assert_ok(
        &[
            "corpus", "gen", "--workload", "bst", "--strategy", "typebased", "--property",
            "InsertModel", "--seed", "33", "--count", "2000", "--out",
            corpus2.to_str().unwrap(),
        ],
        root,
    );
    let values = |p: &PathBuf| -> Vec<String> {
        let (_, entries) = crucible::crosslang::open_corpus(p).unwrap();
        entries.map(|e| e.unwrap().value).collect()
    };
    assert_eq!(values(&corpus), values(&corpus2));

    let (code, stdout, _) = run(
        &[
            "corpus",
            "run",
            "--corpus",
            corpus.to_str().unwrap(),
            "--workload",
            "bst",
            "--property",
            "InsertModel",
            "--mutant",
            "insert_no_overwrite",
            "--timeout-s",
            "30",
        ],
        root,
    );
    assert_eq!(code, 0);
    let result = crucible::trial::parse_trial_output(stdout.as_bytes()).unwrap();
    assert_eq!(result.status, TrialStatus::Found);
    // decoupled timing populated, and additivity holds exactly
    let gen = result.gen_time_s.unwrap();
    let exec = result.exec_time_s.unwrap();
    assert_eq!(result.time_s, gen + exec);
}
