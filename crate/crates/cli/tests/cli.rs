use std::path::Path;
use std::process::{Command, Output};

fn qias(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qias"));
    cmd.args(args);
    for var in [
        "QIAS_CONFIG",
        "QIAS_SCORING",
        "QIAS_K",
        "QIAS_SEED",
        "QIAS_MODEL_URL",
    ] {
        cmd.env_remove(var);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn run_config(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("run_config.json")).unwrap()).unwrap()
}

#[test]
fn solve_prints_table_and_trace() {
    let out = stdout(&qias(&["solve", "--heirs", "son"], &[]));
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("son (ابن)"));
    assert!(row.split_whitespace().any(|c| c == "1"));
    assert!(out.contains("awl applied: no"));

    let out = stdout(&qias(
        &["solve", "--heirs", "husband,full_sister:2,mother"],
        &[],
    ));
    assert!(out.contains("base denominator: 8"));
    assert!(out.contains("awl applied: yes"));
    assert!(out.contains("3/8"));
}

#[test]
fn solve_from_question_marks_target() {
    let q = "مات وترك: بنت و أخ شقيق و ابن أخ شقيق كم النصيب الأصلي لـ ابن أخ شقيق من التركة؟";
    let out = stdout(&qias(&["solve", "--arabic", q], &[]));
    let line = out.lines().find(|l| l.contains("*")).unwrap();
    assert!(line.starts_with("full_brother_son"), "{line}");
    assert!(line.contains("blocked"));
}

#[test]
fn solve_json_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("case.json");
    std::fs::write(
        &case,
        r#"[{"class": "wife", "count": 2}, {"class": "daughter", "count": 1}]"#,
    )
    .unwrap();
    let out = stdout(&qias(
        &["solve", "--case", case.to_str().unwrap(), "--json"],
        &[],
    ));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["radd_applied"], true);
    assert_eq!(v["awl_applied"], false);
}

#[test]
fn errors_are_json_with_exit_one() {
    let out = qias(&["solve", "--heirs", "stranger"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(v["error"].as_str().unwrap().contains("stranger"));

    let out = qias(
        &[
            "report",
            "--dataset",
            "/nonexistent.jsonl",
            "--predictions",
            "/nonexistent.csv",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(!v["causes"].as_array().unwrap().is_empty());
}

#[test]
fn help_lists_defaults() {
    let out = stdout(&qias(&["eval", "--help"], &[]));
    for d in [
        "[default: 5]",
        "[default: 0.05]",
        "[default: 15]",
        "[default: 10000]",
    ] {
        assert!(out.contains(d), "missing {d}");
    }
}

#[test]
fn flag_beats_env_beats_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ds = d.join("d.jsonl");
    stdout(&qias(
        &["generate", "--out", ds.to_str().unwrap(), "--n", "10"],
        &[],
    ));
    let cfg = d.join("c.toml");
    std::fs::write(
        &cfg,
        "[eval]\nscoring = \"equivalence\"\nk = 3\npredictor = \"solver\"\n",
    )
    .unwrap();
    let base = [
        "eval",
        "--dataset",
        ds.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
    ];

    let run = |name: &str, extra: &[&str], envs: &[(&str, &str)]| {
        let out = d.join(name);
        let mut args = base.to_vec();
        args.push(out.to_str().unwrap());
        args.extend_from_slice(extra);
        stdout(&qias(&args, envs));
        run_config(&out)
    };
    let file_only = run("a", &[], &[]);
    assert_eq!(file_only["config"]["scoring"], "equivalence");
    assert_eq!(file_only["config"]["k"], 3);

    let env = run("b", &[], &[("QIAS_SCORING", "strict")]);
    assert_eq!(env["config"]["scoring"], "strict");
    assert_eq!(env["config"]["k"], 3);

    let flag = run(
        "c",
        &["--scoring", "equivalence"],
        &[("QIAS_SCORING", "strict")],
    );
    assert_eq!(flag["config"]["scoring"], "equivalence");
    assert_eq!(flag["config_hash"], file_only["config_hash"]);
    assert_ne!(env["config_hash"], file_only["config_hash"]);
}

#[test]
fn generate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    stdout(&qias(
        &["generate", "--out", &path("a.jsonl"), "--n", "20"],
        &[("QIAS_SEED", "9")],
    ));
    stdout(&qias(
        &[
            "generate",
            "--out",
            &path("b.jsonl"),
            "--n",
            "20",
            "--seed",
            "9",
        ],
        &[],
    ));
    stdout(&qias(
        &[
            "generate",
            "--out",
            &path("c.jsonl"),
            "--n",
            "20",
            "--seed",
            "10",
        ],
        &[],
    ));
    let read = |n: &str| std::fs::read(path(n)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_ne!(read("a.jsonl"), read("c.jsonl"));
}

#[test]
fn llm_predictor_needs_a_url() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("d.jsonl");
    stdout(&qias(
        &["generate", "--out", ds.to_str().unwrap(), "--n", "5"],
        &[],
    ));
    let out = qias(
        &[
            "eval",
            "--dataset",
            ds.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
}
