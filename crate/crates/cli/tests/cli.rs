use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qosrec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qosrec"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Workspace with a 40x40 synthetic matrix and a small run file.
fn workspace(extra_config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = qosrec(
        dir.path(),
        &[
            "synth",
            "rt.txt",
            "--users",
            "40",
            "--services",
            "40",
            "--matrix-seed",
            "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let config = format!(
        "dataset = \"rt.txt\"\nuser_num = 30\nservice_num = 30\nrepetitions = 2\n\
         density = 0.2\nndcg_ks = [5, 10]\n{extra_config}\n[hyperparams]\nfactors = 4\nmax_epochs = 20\n"
    );
    fs::write(dir.path().join("run.toml"), config).unwrap();
    dir
}

#[test]
fn inspect_reports_hand_counted_density() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.txt"), "0.5 -1\n1.25 2\n").unwrap();
    let o = qosrec(dir.path(), &["inspect", "toy.txt"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in [
        "users: 2",
        "services: 2",
        "observed: 3",
        "density: 0.750000",
        "min: 0.5",
        "max: 2",
    ] {
        assert!(text.contains(line), "missing `{line}` in\n{text}");
    }
}

#[test]
fn inspect_missing_file_fails_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = qosrec(dir.path(), &["inspect", "absent.txt"]);
    assert!(!o.status.success());
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("absent.txt"));
}

#[test]
fn inspect_ragged_file_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "1 2\n3\n").unwrap();
    let o = qosrec(dir.path(), &["inspect", "bad.txt"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
}

#[test]
fn compare_single_method_gives_single_row() {
    let dir = workspace("");
    let o = qosrec(
        dir.path(),
        &["compare", "--config", "run.toml", "--methods", "umean"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert_eq!(
        lines[0],
        "method,userNum,serviceNum,density,ndcg_5,ndcg_10,mae,rmse,best_in"
    );
    assert!(lines[1].starts_with("umean,30,30,0.2,"));
}

#[test]
fn compare_deduplicates_methods_with_a_warning() {
    let dir = workspace("");
    let o = qosrec(
        dir.path(),
        &[
            "compare",
            "--config",
            "run.toml",
            "--methods",
            "imean,umean,IMEAN",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("duplicate method"));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn compare_rejects_unknown_and_unimplemented_methods() {
    let dir = workspace("");
    for (id, needle) in [
        ("svdpp", "unknown method"),
        ("gm", "not implemented"),
        ("cloudrank2", "not implemented"),
    ] {
        let o = qosrec(
            dir.path(),
            &["compare", "--config", "run.toml", "--methods", id],
        );
        assert!(!o.status.success());
        assert!(stderr(&o).contains(needle), "{id}: {}", stderr(&o));
    }
}

#[test]
fn compare_writes_result_files() {
    let dir = workspace("densities = [0.1, 0.3]\n");
    // `density` and `densities` together are rejected, so rewrite without `density`
    let config = fs::read_to_string(dir.path().join("run.toml"))
        .unwrap()
        .replace("density = 0.2\n", "");
    fs::write(dir.path().join("run.toml"), config).unwrap();
    let o = qosrec(
        dir.path(),
        &[
            "compare",
            "--config",
            "run.toml",
            "--methods",
            "umean,2rhyrec",
            "--out",
            "res",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let results = fs::read_to_string(dir.path().join("res/results.csv")).unwrap();
    let summary = fs::read_to_string(dir.path().join("res/summary.csv")).unwrap();
    let comparison = fs::read_to_string(dir.path().join("res/comparison.csv")).unwrap();
    assert!(
        results.starts_with("method,userNum,serviceNum,density,repetition,k,ndcg,mae,rmse,seed\n")
    );
    // 2 methods x 2 densities x 2 repetitions x 2 list lengths
    assert_eq!(results.lines().count(), 1 + 16);
    assert!(summary.starts_with("method,userNum,density,k,ndcg_mean,ndcg_std\n"));
    assert_eq!(summary.lines().count(), 1 + 8);
    assert_eq!(comparison.lines().count(), 1 + 4);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = workspace("");
    let args = [
        "compare",
        "--config",
        "run.toml",
        "--methods",
        "wsrec,biassvd,2rhyrec",
    ];
    let a = qosrec(dir.path(), &args);
    let b = qosrec(dir.path(), &[&args[..], &["--jobs", "1"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);

    let t1 = qosrec(
        dir.path(),
        &["trace", "--config", "run.toml", "--out", "t1"],
    );
    let t2 = qosrec(
        dir.path(),
        &[
            "trace", "--config", "run.toml", "--out", "t2", "--jobs", "2",
        ],
    );
    assert!(t1.status.success() && t2.status.success());
    let read = |d: &str| fs::read(dir.path().join(d).join("trace-20.csv")).unwrap();
    assert_eq!(read("t1"), read("t2"));
}

#[test]
fn seed_flag_changes_splits() {
    let dir = workspace("");
    let args = ["compare", "--config", "run.toml", "--methods", "imean"];
    let a = qosrec(dir.path(), &args);
    let b = qosrec(dir.path(), &[&args[..], &["--seed", "99"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn sweep_list_lengths_over_a_range() {
    let dir = workspace("");
    let o = qosrec(
        dir.path(),
        &[
            "sweep", "--config", "run.toml", "--param", "topK", "--values", "2:10:2", "--method",
            "imean",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 5, "{text}");
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("topK,2,imean,30,0.2,2,"));
}

#[test]
fn sweep_rejects_bad_ranges_and_parameters() {
    let dir = workspace("");
    let bad = [
        ["--param", "beta", "--values", "0.1:0.9"],
        ["--param", "beta", "--values", "0.9:0.1:0.1"],
        ["--param", "gamma", "--values", "1,2"],
        ["--param", "beta", "--values", "1.5"],
    ];
    for extra in bad {
        let o = qosrec(
            dir.path(),
            &[&["sweep", "--config", "run.toml"][..], &extra[..]].concat(),
        );
        assert!(!o.status.success(), "{extra:?}");
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn single_epoch_trace_has_one_row_per_density() {
    let dir = workspace("");
    let config = fs::read_to_string(dir.path().join("run.toml"))
        .unwrap()
        .replace("density = 0.2\n", "")
        .replace("max_epochs = 20", "max_epochs = 1");
    fs::write(dir.path().join("run.toml"), config).unwrap();
    let o = qosrec(dir.path(), &["trace", "--config", "run.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "density,epoch,loss,alpha,ndcg_k");
    // default densities 10, 20, 30 and 40 percent, one epoch each
    assert_eq!(lines.len(), 1 + 4, "{text}");
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1) == Some("1")));
}

#[test]
fn config_errors_are_reported() {
    let dir = workspace("");
    fs::write(
        dir.path().join("bad.toml"),
        "dataset = \"rt.txt\"\nlearning_rate = 3\n",
    )
    .unwrap();
    let o = qosrec(
        dir.path(),
        &["compare", "--config", "bad.toml", "--methods", "umean"],
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("learning_rate"), "{}", stderr(&o));

    fs::write(dir.path().join("nodata.toml"), "repetitions = 1\n").unwrap();
    let o = qosrec(
        dir.path(),
        &["compare", "--config", "nodata.toml", "--methods", "umean"],
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no dataset"));
}
