use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusDataset, CorpusSource, QuestionRecord};
use crate::error::{Error, Result};

/// On-disk corpus encodings. CSV uses the exact header
/// `question,cognitive,knowledge` with RFC-4180 quoting; JSONL holds one
/// object per line with the same three keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    /// Pick a format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") => {
                CorpusFormat::Jsonl
            }
            _ => CorpusFormat::Csv,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::invalid(format!(
                "unknown corpus format {other:?} (expected csv or jsonl)"
            ))),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Csv => "csv",
            CorpusFormat::Jsonl => "jsonl",
        })
    }
}

const CSV_HEADER: [&str; 3] = ["question", "cognitive", "knowledge"];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    question: String,
    cognitive: String,
    knowledge: String,
}

/// Load a labeled corpus from disk. One record per data row, in file order;
/// labels parse case-insensitively. Errors carry the data row number.
pub fn parse_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<CorpusDataset> {
    let path = path.as_ref();
    match format {
        CorpusFormat::Csv => parse_csv(path),
        CorpusFormat::Jsonl => parse_jsonl(path),
    }
}

fn build_record(path: &Path, row: usize, question: &str, cognitive: &str, knowledge: &str) -> Result<QuestionRecord> {
    if question.trim().is_empty() {
        return Err(Error::corpus_row(path, row, "empty question text"));
    }
    let cognitive = cognitive
        .parse()
        .map_err(|e: Error| Error::corpus_row(path, row, e.to_string()))?;
    let knowledge = knowledge
        .parse()
        .map_err(|e: Error| Error::corpus_row(path, row, e.to_string()))?;
    QuestionRecord::new(question, cognitive, knowledge)
        .map_err(|e| Error::corpus_row(path, row, e.to_string()))
}

fn parse_csv(path: &Path) -> Result<CorpusDataset> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::file_format(path, format!("cannot read header: {e}")))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != CSV_HEADER {
        return Err(Error::file_format(
            path,
            format!(
                "expected header \"question,cognitive,knowledge\", got \"{}\"",
                got.join(",")
            ),
        ));
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::corpus_row(path, row_no, e.to_string()))?;
        if row.len() != 3 {
            return Err(Error::corpus_row(
                path,
                row_no,
                format!("expected 3 columns, got {}", row.len()),
            ));
        }
        records.push(build_record(path, row_no, &row[0], &row[1], &row[2])?);
    }
    Ok(CorpusDataset::new(
        records,
        CorpusSource::File(path.to_path_buf()),
    ))
}

fn parse_jsonl(path: &Path) -> Result<CorpusDataset> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut row_no = 0usize;
    for line in content.lines() {
        if line.trim().is_empty() {
            continue;
        }
        row_no += 1;
        let parsed: JsonRecord = serde_json::from_str(line)
            .map_err(|e| Error::corpus_row(path, row_no, e.to_string()))?;
        records.push(build_record(
            path,
            row_no,
            &parsed.question,
            &parsed.cognitive,
            &parsed.knowledge,
        )?);
    }
    Ok(CorpusDataset::new(
        records,
        CorpusSource::File(path.to_path_buf()),
    ))
}

/// Serialize a corpus; `parse_corpus` of the output yields equal records.
pub fn write_corpus(ds: &CorpusDataset, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        CorpusFormat::Csv => corpus_to_csv(ds)?,
        CorpusFormat::Jsonl => corpus_to_jsonl(ds),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// CSV serialization as a string, RFC-4180 quoted.
pub(crate) fn corpus_to_csv(ds: &CorpusDataset) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .map_err(|e| Error::invalid(e.to_string()))?;
    for r in ds.records() {
        writer
            .write_record([r.text.as_str(), r.cognitive.as_str(), r.knowledge.as_str()])
            .map_err(|e| Error::invalid(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn corpus_to_jsonl(ds: &CorpusDataset) -> String {
    let mut out = String::new();
    for r in ds.records() {
        let rec = JsonRecord {
            question: r.text.clone(),
            cognitive: r.cognitive.as_str().to_string(),
            knowledge: r.knowledge.as_str().to_string(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}
