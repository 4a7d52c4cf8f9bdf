//! On-disk formats: the versioned model file (config header, embedded
//! vocabulary with integrity hash, named flat parameter arrays) and the
//! history file (config header comments plus the curve CSV).
//!
//! Floats are written in shortest round-trip decimal form, so save → load is
//! bit-exact and repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evalreport::curves_csv;
use crate::nn::{CnnDims, CnnParams, LstmDims, LstmParams, ModelParams};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::textpipe::Vocabulary;
use crate::train::{Arch, EpochMetrics, TrainHistory, TrainedModel, TrainingConfig};

const MODEL_MAGIC: &str = "bloomtax-model v1";
const HISTORY_MAGIC: &str = "# bloomtax-history v1";

/// Serialize a trained model to its text format.
pub fn model_to_string<S: Scalar>(model: &TrainedModel<S>) -> String {
    let vocab_text = model.vocab.to_text();
    let vocab_lines = vocab_text.lines().count();
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');
    out.push_str(&model.config.to_key_values());
    out.push_str(&format!("vocab_hash={}\n", model.vocab.content_hash()));
    out.push_str(&format!("[vocab lines={vocab_lines}]\n"));
    out.push_str(&vocab_text);
    out.push_str("[params]\n");
    for (name, tensor) in model.params.tensors() {
        let dims: Vec<String> = tensor.shape().iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("[array {name} {}]\n", dims.join(" ")));
        write_tensor(&mut out, tensor);
    }
    out.push_str("[end]\n");
    out
}

fn write_tensor<S: Scalar>(out: &mut String, tensor: &Tensor<S>) {
    // 1-D arrays on one line; higher ranks one line per leading index.
    let rows = if tensor.shape().len() == 1 {
        1
    } else {
        tensor.shape()[0]
    };
    let row_len = tensor.len() / rows.max(1);
    for r in 0..rows {
        let slice = &tensor.data()[r * row_len..(r + 1) * row_len];
        for (i, v) in slice.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", v.as_f64());
        }
        out.push('\n');
    }
}

pub fn save_model<S: Scalar>(model: &TrainedModel<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

struct LineReader<'a> {
    path: &'a Path,
    lines: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> LineReader<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        self.lineno += 1;
        self.lines
            .next()
            .ok_or_else(|| Error::file_format(self.path, "unexpected end of file"))
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::file_format(
            self.path,
            format!("line {}: {}", self.lineno, message.into()),
        )
    }
}

/// Load a model file, verifying the format version, the vocabulary integrity
/// hash, every declared array shape, and entry finiteness.
pub fn load_model<S: Scalar>(path: impl AsRef<Path>) -> Result<TrainedModel<S>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = LineReader {
        path,
        lines: content.lines(),
        lineno: 0,
    };

    let magic = reader.next_line()?;
    if magic != MODEL_MAGIC {
        return Err(reader.fail(format!(
            "not a model file (expected {MODEL_MAGIC:?}, found {magic:?})"
        )));
    }

    // Config header runs until the vocab_hash line.
    let mut config = TrainingConfig::default();
    let declared_hash;
    loop {
        let line = reader.next_line()?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| reader.fail(format!("expected key=value, found {line:?}")))?;
        if key == "vocab_hash" {
            declared_hash = value.to_string();
            break;
        }
        config
            .set_key(key, value)
            .map_err(|e| reader.fail(e.to_string()))?;
    }
    config.validate().map_err(|e| reader.fail(e.to_string()))?;

    // Embedded vocabulary block.
    let marker = reader.next_line()?;
    let vocab_lines: usize = marker
        .strip_prefix("[vocab lines=")
        .and_then(|rest| rest.strip_suffix(']'))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| reader.fail(format!("expected [vocab lines=N], found {marker:?}")))?;
    let mut vocab_text = String::new();
    for _ in 0..vocab_lines {
        vocab_text.push_str(reader.next_line()?);
        vocab_text.push('\n');
    }
    let vocab = Vocabulary::from_text(&vocab_text).map_err(|e| reader.fail(e.to_string()))?;
    if vocab.content_hash() != declared_hash {
        return Err(Error::file_format(
            path,
            "vocabulary hash mismatch: model file corrupted or vocabulary altered",
        ));
    }

    let marker = reader.next_line()?;
    if marker != "[params]" {
        return Err(reader.fail(format!("expected [params], found {marker:?}")));
    }

    // Zero-shaped parameters dictate the expected array set.
    let classes = config.task.class_count();
    let vocab_rows = vocab.embedding_rows();
    let mut params: ModelParams<S> = match config.arch {
        Arch::Cnn => ModelParams::Cnn(CnnParams::zeros(&CnnDims {
            vocab_rows,
            emb_dim: config.emb_dim,
            kernel_width: config.kernel_width,
            num_filters: config.num_filters,
            classes,
        })),
        Arch::Lstm => ModelParams::Lstm(LstmParams::zeros(&LstmDims {
            vocab_rows,
            emb_dim: config.emb_dim,
            units: config.lstm_units,
            classes,
        })),
    };

    let expected: Vec<(String, Vec<usize>)> = params
        .tensors()
        .iter()
        .map(|(name, t)| (name.to_string(), t.shape().to_vec()))
        .collect();

    for (name, shape) in &expected {
        let header = reader.next_line()?;
        let body = header
            .strip_prefix("[array ")
            .and_then(|rest| rest.strip_suffix(']'))
            .ok_or_else(|| reader.fail(format!("expected [array ...], found {header:?}")))?;
        let mut fields = body.split(' ');
        let found_name = fields.next().unwrap_or("");
        if found_name != name {
            return Err(reader.fail(format!("expected array {name:?}, found {found_name:?}")));
        }
        let found_shape: Vec<usize> = fields
            .map(|d| d.parse().map_err(|_| reader.fail(format!("bad dimension {d:?}"))))
            .collect::<Result<_>>()?;
        if &found_shape != shape {
            return Err(reader.fail(format!(
                "array {name}: shape {found_shape:?} does not match expected {shape:?}"
            )));
        }

        let rows = if shape.len() == 1 { 1 } else { shape[0] };
        let total: usize = shape.iter().product();
        let row_len = total / rows.max(1);
        let mut values: Vec<S> = Vec::with_capacity(total);
        for _ in 0..rows {
            let line = reader.next_line()?;
            for field in line.split(' ') {
                let v: f64 = field
                    .parse()
                    .map_err(|_| reader.fail(format!("bad number {field:?} in array {name}")))?;
                if !v.is_finite() {
                    return Err(reader.fail(format!("non-finite entry in array {name}")));
                }
                values.push(S::from_f64(v));
            }
            if !values.len().is_multiple_of(row_len) {
                return Err(reader.fail(format!("array {name}: wrong entry count on line")));
            }
        }
        if values.len() != total {
            return Err(reader.fail(format!(
                "array {name}: expected {total} entries, found {}",
                values.len()
            )));
        }
        let slot = params
            .tensors_mut()
            .into_iter()
            .find(|(n, _)| *n == name)
            .expect("expected tensor exists")
            .1;
        slot.data_mut().copy_from_slice(&values);
    }

    let end = reader.next_line()?;
    if end != "[end]" {
        return Err(reader.fail(format!("expected [end], found {end:?}")));
    }

    Ok(TrainedModel {
        config,
        vocab,
        params,
    })
}

/// History file: every config key as a `# key=value` comment, then the
/// standard curve CSV.
pub fn history_to_string(history: &TrainHistory) -> String {
    let mut out = String::new();
    out.push_str(HISTORY_MAGIC);
    out.push('\n');
    for line in history.config.to_key_values().lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&curves_csv(history));
    out
}

pub fn save_history(history: &TrainHistory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, history_to_string(history)).map_err(|e| Error::io(path, e))
}

pub fn load_history(path: impl AsRef<Path>) -> Result<TrainHistory> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = content.lines();
    let magic = lines
        .next()
        .ok_or_else(|| Error::file_format(path, "empty history file"))?;
    if magic != HISTORY_MAGIC {
        return Err(Error::file_format(
            path,
            format!("not a history file (expected {HISTORY_MAGIC:?})"),
        ));
    }

    let mut config = TrainingConfig::default();
    let mut header_seen = false;
    let mut epochs = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("# ") {
            let (key, value) = rest.split_once('=').ok_or_else(|| {
                Error::file_format(path, format!("bad config comment {rest:?}"))
            })?;
            config
                .set_key(key, value)
                .map_err(|e| Error::file_format(path, e.to_string()))?;
            continue;
        }
        if !header_seen {
            if line != "epoch,train_accuracy,train_loss,test_accuracy,test_loss" {
                return Err(Error::file_format(
                    path,
                    format!("unexpected csv header {line:?}"),
                ));
            }
            header_seen = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::file_format(
                path,
                format!("expected 5 csv fields, found {}", fields.len()),
            ));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::file_format(path, format!("bad number {s:?}")))
        };
        epochs.push(EpochMetrics {
            epoch: fields[0]
                .parse()
                .map_err(|_| Error::file_format(path, format!("bad epoch {:?}", fields[0])))?,
            train_accuracy: parse_f(fields[1])?,
            train_loss: parse_f(fields[2])?,
            test_accuracy: parse_f(fields[3])?,
            test_loss: parse_f(fields[4])?,
        });
    }
    if !header_seen {
        return Err(Error::file_format(path, "missing csv header"));
    }
    for (i, e) in epochs.iter().enumerate() {
        if e.epoch != i + 1 {
            return Err(Error::file_format(
                path,
                format!("epoch column must run 1..N, found {} at row {}", e.epoch, i + 1),
            ));
        }
    }
    Ok(TrainHistory { config, epochs })
}
