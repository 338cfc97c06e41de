//! End-to-end tests of the `accentor` binary.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn accentor() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accentor"))
}

fn run_with_stdin(cmd: &mut Command, input: &str) -> Output {
    let mut child = cmd
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn accentor");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn write_conllu(path: &Path) {
    let line =
        |id: usize, form: &str, upos: &str| format!("{id}\t{form}\t_\t{upos}\t_\t_\t0\t_\t_\t_\n");
    let mut text = String::from("# text = белая ворона летит .\n");
    text.push_str(&line(1, "белая", "ADJ"));
    text.push_str(&line(2, "ворона", "NOUN"));
    text.push_str(&line(3, "летит", "VERB"));
    text.push_str(&line(4, ".", "PUNCT"));
    text.push('\n');
    text.push_str(&line(1, "тит", "NOUN"));
    text.push('\n');
    fs::write(path, text).unwrap();
}

#[test]
fn build_dataset_then_annotate_produces_a_loadable_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let treebank = dir.path().join("tb.conllu");
    let tasks = dir.path().join("tasks.jsonl");
    let answers = dir.path().join("answers.jsonl");
    let dataset = dir.path().join("dataset.jsonl");
    let rejects = dir.path().join("rejects.jsonl");
    write_conllu(&treebank);

    let out = accentor()
        .args(["build-dataset", "--lang", "ru"])
        .arg("--treebank")
        .arg(&treebank)
        .arg("--output")
        .arg(&tasks)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kept 4 trigrams"), "{stderr}");
    assert!(stderr.contains("dropped 1"), "{stderr}");

    // answer every task unanimously except one disagreement
    let task_lines: Vec<serde_json::Value> = fs::read_to_string(&tasks)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(task_lines.len(), 4);
    let mut answer_text = String::new();
    for (i, task) in task_lines.iter().enumerate() {
        let id = task["task_id"].as_str().unwrap();
        let answers_json = if i == 0 {
            "[0,0,1]".to_string() // rejected
        } else {
            "[0,0,0]".to_string()
        };
        answer_text.push_str(&format!(
            "{{\"task_id\":\"{id}\",\"answers\":{answers_json}}}\n"
        ));
    }
    fs::write(&answers, answer_text).unwrap();

    let out = accentor()
        .args(["annotate", "--lang", "ru"])
        .arg("--tasks")
        .arg(&tasks)
        .arg("--answers")
        .arg(&answers)
        .arg("--output")
        .arg(&dataset)
        .arg("--rejects")
        .arg(&rejects)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("3 accepted"), "{stderr}");
    assert!(stderr.contains("1 rejected"), "{stderr}");

    let loaded = fs::read_to_string(&dataset).unwrap();
    assert_eq!(loaded.lines().count(), 3);
    let rejected = fs::read_to_string(&rejects).unwrap();
    assert_eq!(rejected.lines().count(), 1);
}

#[test]
fn synth_train_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds.jsonl");
    let ckpt = dir.path().join("model.ckpt");

    let out = accentor()
        .args([
            "synth",
            "--rule",
            "first-vowel",
            "--count",
            "400",
            "--seed",
            "3",
            "--lang",
            "ru",
        ])
        .arg("--output")
        .arg(&dataset)
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = accentor()
        .args([
            "train",
            "--head",
            "global",
            "--epochs",
            "6",
            "--hidden-units",
            "16",
            "--embedding-dim",
            "16",
            "--seed",
            "1",
        ])
        .arg("--dataset")
        .arg(&dataset)
        .arg("--checkpoint")
        .arg(&ckpt)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = run_with_stdin(
        accentor()
            .args(["predict", "--lang", "ru"])
            .arg("--checkpoint")
            .arg(&ckpt),
        "белая ворона летит\nтит\n_ молоко _\n",
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    // first-vowel model: "воро́на" would be position 2
    assert_eq!(lines[0], "во\u{301}рона 2");
    assert_eq!(lines[1], "ти\u{301}т 2");
    // bare-center line: accent on one of the vowels of "молоко" (2, 4, 6)
    let (marked, pos) = lines[2].split_once(' ').unwrap();
    let pos: usize = pos.parse().unwrap();
    assert!([2, 4, 6].contains(&pos), "{}", lines[2]);
    let expected: String = "молоко"
        .chars()
        .enumerate()
        .flat_map(|(i, c)| {
            if i + 1 == pos {
                vec![c, '\u{301}']
            } else {
                vec![c]
            }
        })
        .collect();
    assert_eq!(marked, expected);
}

#[test]
fn predict_on_empty_input_writes_nothing_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds.jsonl");
    let ckpt = dir.path().join("model.ckpt");
    accentor()
        .args([
            "synth",
            "--rule",
            "last-vowel",
            "--count",
            "60",
            "--seed",
            "1",
            "--lang",
            "uk",
        ])
        .arg("--output")
        .arg(&dataset)
        .status()
        .unwrap();
    accentor()
        .args([
            "train",
            "--epochs",
            "0",
            "--hidden-units",
            "8",
            "--embedding-dim",
            "8",
        ])
        .arg("--dataset")
        .arg(&dataset)
        .arg("--checkpoint")
        .arg(&ckpt)
        .output()
        .unwrap();
    let out = run_with_stdin(
        accentor()
            .args(["predict", "--lang", "uk"])
            .arg("--checkpoint")
            .arg(&ckpt),
        "",
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_predict_line_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds.jsonl");
    let ckpt = dir.path().join("model.ckpt");
    accentor()
        .args([
            "synth",
            "--rule",
            "last-vowel",
            "--count",
            "60",
            "--seed",
            "2",
            "--lang",
            "ru",
        ])
        .arg("--output")
        .arg(&dataset)
        .status()
        .unwrap();
    accentor()
        .args([
            "train",
            "--epochs",
            "0",
            "--hidden-units",
            "8",
            "--embedding-dim",
            "8",
        ])
        .arg("--dataset")
        .arg(&dataset)
        .arg("--checkpoint")
        .arg(&ckpt)
        .output()
        .unwrap();
    let out = run_with_stdin(
        accentor()
            .args(["predict", "--lang", "ru"])
            .arg("--checkpoint")
            .arg(&ckpt),
        "два слова\n",
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn config_file_values_are_used_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("ds.jsonl");
    let config = dir.path().join("run.conf");
    let ckpt_a = dir.path().join("a.ckpt");
    let ckpt_b = dir.path().join("b.ckpt");
    accentor()
        .args([
            "synth",
            "--rule",
            "first-vowel",
            "--count",
            "80",
            "--seed",
            "4",
            "--lang",
            "be",
        ])
        .arg("--output")
        .arg(&dataset)
        .status()
        .unwrap();
    fs::write(
        &config,
        format!(
            "# training defaults\nhead = local\nepochs = 1\nhidden-units = 8\nembedding-dim = 8\nseed = 5\ndataset = {}\n",
            dataset.display()
        ),
    )
    .unwrap();

    // config file supplies everything but the checkpoint
    let out = accentor()
        .arg("train")
        .arg("--config")
        .arg(&config)
        .arg("--checkpoint")
        .arg(&ckpt_a)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("trained 1 epochs"));

    // the --epochs flag overrides the file value
    let out = accentor()
        .arg("train")
        .arg("--config")
        .arg(&config)
        .args(["--epochs", "2"])
        .arg("--checkpoint")
        .arg(&ckpt_b)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trained 2 epochs"));
}

#[test]
fn experiment_grid_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut dataset_args = Vec::new();
    for (lang, seed) in [("be", 1u64), ("ru", 2), ("uk", 3)] {
        let path = dir.path().join(format!("{lang}.jsonl"));
        accentor()
            .args([
                "synth",
                "--rule",
                "first-vowel",
                "--count",
                "60",
                "--lang",
                lang,
            ])
            .args(["--seed", &seed.to_string()])
            .arg("--output")
            .arg(&path)
            .status()
            .unwrap();
        dataset_args.push(format!("{lang}={}", path.display()));
    }
    let report_json = dir.path().join("report.json");
    let report_text = dir.path().join("report.txt");
    let mut cmd = accentor();
    cmd.args([
        "experiment",
        "--combos",
        "ru;uk,be",
        "--runs",
        "2",
        "--split",
        "7:3",
        "--epochs",
        "1",
        "--hidden-units",
        "8",
        "--embedding-dim",
        "8",
        "--jobs",
        "1",
        "--seed",
        "9",
    ]);
    for spec in &dataset_args {
        cmd.args(["--dataset", spec]);
    }
    cmd.arg("--report-json").arg(&report_json);
    cmd.arg("--report-text").arg(&report_text);
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("train \\ test"), "{stdout}");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_json).unwrap()).unwrap();
    assert_eq!(json["runs"], 2);
    assert_eq!(json["cells"].as_object().unwrap().len(), 6);
    for cell in json["cells"].as_object().unwrap().values() {
        assert_eq!(cell["runs"], 2);
    }
    assert_eq!(fs::read_to_string(&report_text).unwrap(), stdout);
}

#[test]
fn gradcheck_passes_and_reports() {
    let out = accentor()
        .args([
            "gradcheck",
            "--seeds",
            "2",
            "--samples",
            "150",
            "--seed",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");
    assert!(stdout.contains("max rel error"), "{stdout}");
}

#[test]
fn unknown_language_tag_is_an_input_error() {
    let out = accentor()
        .args([
            "synth",
            "--rule",
            "first-vowel",
            "--count",
            "5",
            "--lang",
            "xx",
            "--output",
            "/dev/null",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = accentor()
        .args([
            "build-dataset",
            "--lang",
            "ru",
            "--treebank",
            "/nonexistent.conllu",
            "--output",
            "/dev/null",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = accentor().args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
