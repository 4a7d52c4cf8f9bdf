//! Acceptance suite, CLI half: training determinism at the file level and
//! the comparative-report shape. One test per criterion; each prints a PASS
//! line (visible with `--nocapture`). Criteria 1–6 live in the core crate's
//! acceptance target.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bloomtax::corpus::Task;
use bloomtax::persist::save_history;
use bloomtax::train::{Arch, EpochMetrics, TrainHistory, TrainingConfig};

fn bloomtax(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bloomtax"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

/// Criterion 7: two runs of `train` with identical flags produce
/// byte-identical history files and model files.
#[test]
fn criterion_7_training_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out = bloomtax(
        &["synth", "--counts", "table1", "--seed", "42", "--out", "c.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = bloomtax(
        &[
            "split", "--corpus", "c.csv", "--ratio", "0.7", "--seed", "42", "--stratify",
            "cognitive", "--out-train", "train.csv", "--out-test", "test.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));

    for arch in ["cnn", "lstm"] {
        let mut artifacts = Vec::new();
        for run in ["a", "b"] {
            let model = format!("{arch}-{run}.bloom");
            let history = format!("{arch}-{run}.csv");
            let out = bloomtax(
                &[
                    "train", "--train", "train.csv", "--test", "test.csv", "--arch", arch,
                    "--task", "cognitive", "--epochs", "3", "--emb-dim", "16", "--num-filters",
                    "16", "--lstm-units", "6", "--maxlen", "20", "--seed", "9", "--model-out",
                    &model, "--history-out", &history,
                ],
                dir.path(),
            );
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            artifacts.push((
                fs::read(dir.path().join(&model)).unwrap(),
                fs::read(dir.path().join(&history)).unwrap(),
            ));
        }
        assert_eq!(
            artifacts[0].0, artifacts[1].0,
            "{arch}: model files differ between identical runs"
        );
        assert_eq!(
            artifacts[0].1, artifacts[1].1,
            "{arch}: history files differ between identical runs"
        );
    }
    println!(
        "ACCEPTANCE 7 (training determinism): PASS — byte-identical model and history files for both architectures"
    );
}

fn history(arch: Arch, task: Task, m: (f64, f64, f64, f64)) -> TrainHistory {
    TrainHistory {
        config: TrainingConfig {
            arch,
            task,
            epochs: 1,
            ..Default::default()
        },
        epochs: vec![EpochMetrics {
            epoch: 1,
            train_accuracy: m.0,
            test_accuracy: m.1,
            train_loss: m.2,
            test_loss: m.3,
        }],
    }
}

/// Criterion 8: `report` over the 2-architecture × 2-task grid renders the
/// reference row/column structure, and feeding it the reference final
/// metrics reproduces the reference table text.
#[test]
fn criterion_8_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let grid = [
        ("cnn-cog.csv", history(Arch::Cnn, Task::Cognitive, (0.75, 0.80, 0.46, 0.47))),
        ("cnn-know.csv", history(Arch::Cnn, Task::Knowledge, (0.8889, 0.6667, 0.33, 0.66))),
        ("lstm-cog.csv", history(Arch::Lstm, Task::Cognitive, (0.77, 0.71, 0.57, 0.63))),
        ("lstm-know.csv", history(Arch::Lstm, Task::Knowledge, (0.9444, 0.44, 0.55, 0.70))),
    ];
    for (name, h) in &grid {
        save_history(h, dir.path().join(name)).unwrap();
    }

    let out = bloomtax(
        &[
            "report", "--histories", "cnn-cog.csv", "cnn-know.csv", "lstm-cog.csv",
            "lstm-know.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();

    let expected = "\
Model  Cognitive Process                       Knowledge Dimension
       Accuracy            Loss                Accuracy            Loss
       Training  Testing   Training  Testing   Training  Testing   Training  Testing
CNN    75%       80%       0.46      0.47      88.89%    66.67%    0.33      0.66
LSTM   77%       71%       0.57      0.63      94.44%    44%       0.55      0.70
";
    assert_eq!(text, expected, "rendered:\n{text}");

    // Structural check: spanning headers, sub-headers, one row per model.
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("Model"));
    assert!(lines[0].contains("Cognitive Process") && lines[0].contains("Knowledge Dimension"));
    assert_eq!(lines[1].matches("Accuracy").count(), 2);
    assert_eq!(lines[1].matches("Loss").count(), 2);
    assert_eq!(lines[2].matches("Training").count(), 4);
    assert_eq!(lines[2].matches("Testing").count(), 4);
    assert!(lines[3].starts_with("CNN"));
    assert!(lines[4].starts_with("LSTM"));

    println!("ACCEPTANCE 8 (report shape): PASS — reference 2×2 grid reproduced verbatim");
}
