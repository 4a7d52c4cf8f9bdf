//! Evaluation and reporting: accuracy/loss over a dataset, confusion
//! matrices, the comparative results table, and per-epoch curve CSVs.
//!
//! Everything here is a pure function of immutable inputs; renderings are
//! byte-identical across runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::{CorpusDataset, Task};
use crate::error::{Error, Result};
use crate::nn::{cross_entropy, model_forward_infer, LayerConfig, ModelParams};
use crate::scalar::Scalar;
use crate::textpipe::{pad_sequences, texts_to_sequences, SequenceMatrix};
use crate::train::{one_hot, Arch, TrainHistory, TrainedModel};

/// C×C counts, rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    task: Task,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn new(task: Task) -> Self {
        let c = task.class_count();
        ConfusionMatrix {
            task,
            counts: vec![0; c * c],
        }
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn record(&mut self, true_class: usize, predicted_class: usize) {
        let c = self.task.class_count();
        self.counts[true_class * c + predicted_class] += 1;
    }

    pub fn count(&self, true_class: usize, predicted_class: usize) -> usize {
        self.counts[true_class * self.task.class_count() + predicted_class]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn diagonal_total(&self) -> usize {
        let c = self.task.class_count();
        (0..c).map(|i| self.count(i, i)).sum()
    }

    /// Count of samples whose true class is `class`.
    pub fn row_total(&self, class: usize) -> usize {
        let c = self.task.class_count();
        (0..c).map(|j| self.count(class, j)).sum()
    }

    /// Fixed-width text rendering with class labels attached.
    pub fn render_text(&self) -> String {
        let c = self.task.class_count();
        let width = (0..c)
            .map(|i| self.task.class_name(i).len())
            .max()
            .unwrap_or(0)
            .max(6)
            + 2;
        let mut out = String::from("true \\ predicted");
        let mut header = format!("{:width$}", "", width = width);
        for j in 0..c {
            header.push_str(&format!("{:>width$}", self.task.class_name(j), width = width));
        }
        out = format!("{out}\n{header}\n");
        for i in 0..c {
            let mut line = format!("{:<width$}", self.task.class_name(i), width = width);
            for j in 0..c {
                line.push_str(&format!("{:>width$}", self.count(i, j), width = width));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Accuracy, mean cross-entropy, and the confusion matrix of one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub accuracy: f64,
    pub mean_loss: f64,
    pub confusion: ConfusionMatrix,
}

/// Inference-mode evaluation over pre-encoded sequences.
pub fn evaluate_sequences<S: Scalar>(
    params: &ModelParams<S>,
    layers: &LayerConfig,
    seqs: &SequenceMatrix,
    truth_indices: &[usize],
    task: Task,
) -> Result<EvalResult> {
    if seqs.rows() == 0 {
        return Err(Error::invalid("cannot evaluate an empty dataset"));
    }
    if seqs.rows() != truth_indices.len() {
        return Err(Error::shape(format!(
            "{} sequences but {} labels",
            seqs.rows(),
            truth_indices.len()
        )));
    }
    let classes = task.class_count();
    let mut confusion = ConfusionMatrix::new(task);
    let mut correct = 0usize;
    let mut loss_sum = 0.0f64;
    for row in 0..seqs.rows() {
        let probs = model_forward_infer(params, seqs.row(row), layers)?;
        let truth_idx = truth_indices[row];
        let truth = one_hot::<S>(truth_idx, classes);
        loss_sum += cross_entropy(&truth, probs.as_slice())?.as_f64();
        // Argmax with lowest-index tie-break.
        let mut predicted = 0usize;
        let slice = probs.as_slice();
        for (i, &p) in slice.iter().enumerate().skip(1) {
            if p > slice[predicted] {
                predicted = i;
            }
        }
        if predicted == truth_idx {
            correct += 1;
        }
        confusion.record(truth_idx, predicted);
    }
    Ok(EvalResult {
        accuracy: correct as f64 / seqs.rows() as f64,
        mean_loss: loss_sum / seqs.rows() as f64,
        confusion,
    })
}

/// Evaluate a trained model over a labeled corpus: accuracy is
/// correct/total under argmax, loss is the mean cross-entropy, all in
/// inference mode.
pub fn evaluate<S: Scalar>(model: &TrainedModel<S>, ds: &CorpusDataset) -> Result<EvalResult> {
    if ds.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty dataset"));
    }
    let seqs = pad_sequences(
        &texts_to_sequences(&model.vocab, &ds.texts()),
        model.config.maxlen,
    )?;
    let truth = ds.label_indices(model.config.task);
    evaluate_sequences(
        &model.params,
        &model.config.layer_config(),
        &seqs,
        &truth,
        model.config.task,
    )
}

/// Which epoch of each history feeds the comparative report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportBasis {
    FinalEpoch,
    BestTestAccuracy,
}

/// One cell of the comparative grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportCell {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_loss: f64,
    pub test_loss: f64,
}

/// Final metrics arranged in the comparative-results layout: one row per
/// architecture, (accuracy, loss) × (training, testing) per task.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparativeReport {
    cells: BTreeMap<(Arch, Task), ReportCell>,
}

/// Collect per-(architecture × task) metrics from training histories.
/// Duplicate grid cells are an error.
pub fn comparative_report(
    histories: &[TrainHistory],
    basis: ReportBasis,
) -> Result<ComparativeReport> {
    let mut cells = BTreeMap::new();
    for history in histories {
        let metrics = match basis {
            ReportBasis::FinalEpoch => history.final_metrics(),
            ReportBasis::BestTestAccuracy => history.best_test_metrics(),
        }
        .ok_or_else(|| Error::invalid("history has no epochs"))?;
        let key = (history.config.arch, history.config.task);
        let cell = ReportCell {
            train_accuracy: metrics.train_accuracy,
            test_accuracy: metrics.test_accuracy,
            train_loss: metrics.train_loss,
            test_loss: metrics.test_loss,
        };
        if cells.insert(key, cell).is_some() {
            return Err(Error::invalid(format!(
                "duplicate history for {} / {}",
                key.0, key.1
            )));
        }
    }
    Ok(ComparativeReport { cells })
}

/// Accuracy as a percentage with up to two decimals, trailing zeros trimmed:
/// 0.75 renders as "75%", 0.8889 as "88.89%".
fn format_percent(value: f64) -> String {
    let mut s = format!("{:.2}", value * 100.0);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    format!("{s}%")
}

fn format_loss(value: f64) -> String {
    format!("{value:.2}")
}

impl ComparativeReport {
    pub fn cell(&self, arch: Arch, task: Task) -> Option<&ReportCell> {
        self.cells.get(&(arch, task))
    }

    fn arch_rows(&self) -> Vec<Arch> {
        let mut rows: Vec<Arch> = self.cells.keys().map(|&(a, _)| a).collect();
        rows.dedup();
        rows
    }

    fn row_values(&self, arch: Arch) -> Vec<String> {
        let mut values = Vec::with_capacity(8);
        for task in [Task::Cognitive, Task::Knowledge] {
            match self.cells.get(&(arch, task)) {
                Some(cell) => {
                    values.push(format_percent(cell.train_accuracy));
                    values.push(format_percent(cell.test_accuracy));
                    values.push(format_loss(cell.train_loss));
                    values.push(format_loss(cell.test_loss));
                }
                None => values.extend(["-", "-", "-", "-"].map(String::from)),
            }
        }
        values
    }

    /// Aligned text table in the reference layout: spanning task
    /// headers, Accuracy/Loss sub-headers, Training/Testing columns.
    pub fn render_text(&self) -> String {
        const MODEL_W: usize = 7;
        const COL_W: usize = 10;
        let pad = |s: &str, w: usize| format!("{s:<w$}");
        let mut lines = Vec::with_capacity(3 + self.cells.len());
        lines.push(format!(
            "{}{}{}",
            pad("Model", MODEL_W),
            pad("Cognitive Process", COL_W * 4),
            "Knowledge Dimension"
        ));
        lines.push(format!(
            "{}{}{}{}{}",
            pad("", MODEL_W),
            pad("Accuracy", COL_W * 2),
            pad("Loss", COL_W * 2),
            pad("Accuracy", COL_W * 2),
            "Loss"
        ));
        let mut header = pad("", MODEL_W);
        for i in 0..8 {
            let title = if i % 2 == 0 { "Training" } else { "Testing" };
            if i == 7 {
                header.push_str(title);
            } else {
                header.push_str(&pad(title, COL_W));
            }
        }
        lines.push(header);
        for arch in self.arch_rows() {
            let name = match arch {
                Arch::Cnn => "CNN",
                Arch::Lstm => "LSTM",
            };
            let mut line = pad(name, MODEL_W);
            let values = self.row_values(arch);
            for (i, value) in values.iter().enumerate() {
                if i == values.len() - 1 {
                    line.push_str(value);
                } else {
                    line.push_str(&pad(value, COL_W));
                }
            }
            lines.push(line);
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// CSV rendering with raw six-decimal metrics; absent cells are empty.
    pub fn render_csv(&self) -> String {
        let mut out = String::from(
            "model,cognitive_training_accuracy,cognitive_testing_accuracy,\
             cognitive_training_loss,cognitive_testing_loss,knowledge_training_accuracy,\
             knowledge_testing_accuracy,knowledge_training_loss,knowledge_testing_loss\n",
        );
        for arch in self.arch_rows() {
            out.push_str(arch.as_str());
            for task in [Task::Cognitive, Task::Knowledge] {
                match self.cells.get(&(arch, task)) {
                    Some(cell) => out.push_str(&format!(
                        ",{:.6},{:.6},{:.6},{:.6}",
                        cell.train_accuracy, cell.test_accuracy, cell.train_loss, cell.test_loss
                    )),
                    None => out.push_str(",,,,"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// The per-epoch curve CSV: header plus one six-decimal row per epoch.
pub fn curves_csv(history: &TrainHistory) -> String {
    let mut out = String::from("epoch,train_accuracy,train_loss,test_accuracy,test_loss\n");
    for e in &history.epochs {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            e.epoch, e.train_accuracy, e.train_loss, e.test_accuracy, e.test_loss
        ));
    }
    out
}

/// Write the curve CSV for external plotting.
pub fn export_curves(history: &TrainHistory, path: impl AsRef<Path>) -> Result<()> {
    if history.epochs.is_empty() {
        return Err(Error::invalid("history has no epochs"));
    }
    let path = path.as_ref();
    fs::write(path, curves_csv(history)).map_err(|e| Error::io(path, e))
}
