//! Labeled question corpora: loading, validation, synthesis, summaries and
//! train/test splitting.
//!
//! Every type here is immutable after construction and safe to share across
//! threads; all operations are pure functions of their inputs and seeds.

mod io;
mod synth;

pub use io::{parse_corpus, write_corpus, CorpusFormat};
pub use synth::generate_synthetic_corpus;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Cognitive process of the revised taxonomy. Index order is fixed:
/// Remember=0, Understand=1, Apply=2, Evaluate=3, Analyze=4, Create=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CognitiveLabel {
    Remember,
    Understand,
    Apply,
    Evaluate,
    Analyze,
    Create,
}

/// Knowledge dimension. Factual=0, Conceptual=1, Procedural=2.
/// Meta-cognitive is deliberately unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KnowledgeLabel {
    Factual,
    Conceptual,
    Procedural,
}

impl CognitiveLabel {
    pub const COUNT: usize = 6;
    pub const ALL: [CognitiveLabel; 6] = [
        CognitiveLabel::Remember,
        CognitiveLabel::Understand,
        CognitiveLabel::Apply,
        CognitiveLabel::Evaluate,
        CognitiveLabel::Analyze,
        CognitiveLabel::Create,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CognitiveLabel::Remember => "Remember",
            CognitiveLabel::Understand => "Understand",
            CognitiveLabel::Apply => "Apply",
            CognitiveLabel::Evaluate => "Evaluate",
            CognitiveLabel::Analyze => "Analyze",
            CognitiveLabel::Create => "Create",
        }
    }
}

impl KnowledgeLabel {
    pub const COUNT: usize = 3;
    pub const ALL: [KnowledgeLabel; 3] = [
        KnowledgeLabel::Factual,
        KnowledgeLabel::Conceptual,
        KnowledgeLabel::Procedural,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KnowledgeLabel::Factual => "Factual",
            KnowledgeLabel::Conceptual => "Conceptual",
            KnowledgeLabel::Procedural => "Procedural",
        }
    }
}

impl fmt::Display for CognitiveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for KnowledgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// Labels parse case-insensitively; the canonical capitalized form is stored.
impl FromStr for CognitiveLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown cognitive label {s:?}")))
    }
}

impl FromStr for KnowledgeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown knowledge label {s:?}")))
    }
}

/// Which label axis an operation works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Cognitive,
    Knowledge,
}

impl Task {
    pub fn class_count(self) -> usize {
        match self {
            Task::Cognitive => CognitiveLabel::COUNT,
            Task::Knowledge => KnowledgeLabel::COUNT,
        }
    }

    pub fn class_name(self, index: usize) -> &'static str {
        match self {
            Task::Cognitive => CognitiveLabel::ALL[index].as_str(),
            Task::Knowledge => KnowledgeLabel::ALL[index].as_str(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Cognitive => "cognitive",
            Task::Knowledge => "knowledge",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cognitive" => Ok(Task::Cognitive),
            "knowledge" => Ok(Task::Knowledge),
            other => Err(Error::invalid(format!(
                "unknown task {other:?} (expected cognitive or knowledge)"
            ))),
        }
    }
}

/// A label from either axis, tagged with its task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskLabel {
    Cognitive(CognitiveLabel),
    Knowledge(KnowledgeLabel),
}

impl TaskLabel {
    pub fn task(self) -> Task {
        match self {
            TaskLabel::Cognitive(_) => Task::Cognitive,
            TaskLabel::Knowledge(_) => Task::Knowledge,
        }
    }

    pub fn index(self) -> usize {
        match self {
            TaskLabel::Cognitive(l) => l.index(),
            TaskLabel::Knowledge(l) => l.index(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskLabel::Cognitive(l) => l.as_str(),
            TaskLabel::Knowledge(l) => l.as_str(),
        }
    }

    pub fn from_index(task: Task, index: usize) -> Option<Self> {
        match task {
            Task::Cognitive => CognitiveLabel::from_index(index).map(TaskLabel::Cognitive),
            Task::Knowledge => KnowledgeLabel::from_index(index).map(TaskLabel::Knowledge),
        }
    }
}

impl fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One question with both labels. `text` is non-empty after trimming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionRecord {
    pub text: String,
    pub cognitive: CognitiveLabel,
    pub knowledge: KnowledgeLabel,
}

impl QuestionRecord {
    pub fn new(
        text: impl Into<String>,
        cognitive: CognitiveLabel,
        knowledge: KnowledgeLabel,
    ) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::invalid("empty question text"));
        }
        Ok(QuestionRecord {
            text,
            cognitive,
            knowledge,
        })
    }

    pub fn label(&self, task: Task) -> TaskLabel {
        match task {
            Task::Cognitive => TaskLabel::Cognitive(self.cognitive),
            Task::Knowledge => TaskLabel::Knowledge(self.knowledge),
        }
    }
}

/// Where a dataset came from; record order is deterministic given the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    File(PathBuf),
    Synthetic { seed: u64 },
    Derived,
}

/// An ordered, immutable list of labeled questions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusDataset {
    records: Vec<QuestionRecord>,
    source: CorpusSource,
}

impl CorpusDataset {
    pub fn new(records: Vec<QuestionRecord>, source: CorpusSource) -> Self {
        CorpusDataset { records, source }
    }

    pub fn records(&self) -> &[QuestionRecord] {
        &self.records
    }

    pub fn source(&self) -> &CorpusSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.text.as_str()).collect()
    }

    /// Class indices for one label axis, in record order.
    pub fn label_indices(&self, task: Task) -> Vec<usize> {
        self.records
            .iter()
            .map(|r| r.label(task).index())
            .collect()
    }
}

/// Per-class counts over both label axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionTable {
    cognitive: [usize; CognitiveLabel::COUNT],
    knowledge: [usize; KnowledgeLabel::COUNT],
    total: usize,
}

impl DistributionTable {
    /// Build from explicit counts; both axes must sum to the same total.
    pub fn new(
        cognitive: [usize; CognitiveLabel::COUNT],
        knowledge: [usize; KnowledgeLabel::COUNT],
    ) -> Result<Self> {
        let cog_total: usize = cognitive.iter().sum();
        let know_total: usize = knowledge.iter().sum();
        if cog_total != know_total {
            return Err(Error::invalid(format!(
                "inconsistent marginals: cognitive counts sum to {cog_total}, knowledge counts sum to {know_total}"
            )));
        }
        Ok(DistributionTable {
            cognitive,
            knowledge,
            total: cog_total,
        })
    }

    /// The built-in `table1` reference distribution: 844 questions split
    /// 202/464/61/29/41/47 across cognitive processes and 320/290/234
    /// across knowledge dimensions.
    pub fn table1() -> Self {
        DistributionTable {
            cognitive: [202, 464, 61, 29, 41, 47],
            knowledge: [320, 290, 234],
            total: 844,
        }
    }

    pub fn cognitive_counts(&self) -> &[usize; CognitiveLabel::COUNT] {
        &self.cognitive
    }

    pub fn knowledge_counts(&self) -> &[usize; KnowledgeLabel::COUNT] {
        &self.knowledge
    }

    pub fn cognitive_count(&self, label: CognitiveLabel) -> usize {
        self.cognitive[label.index()]
    }

    pub fn knowledge_count(&self, label: KnowledgeLabel) -> usize {
        self.knowledge[label.index()]
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

/// Exact per-label counts of a dataset, consistent across both axes by
/// construction.
pub fn class_distribution(ds: &CorpusDataset) -> DistributionTable {
    let mut cognitive = [0usize; CognitiveLabel::COUNT];
    let mut knowledge = [0usize; KnowledgeLabel::COUNT];
    for r in ds.records() {
        cognitive[r.cognitive.index()] += 1;
        knowledge[r.knowledge.index()] += 1;
    }
    DistributionTable {
        cognitive,
        knowledge,
        total: ds.len(),
    }
}

/// Stratified random train/test partition.
///
/// Train size is `round(N * ratio)`; per-class train counts stay within one
/// record of the proportional share. Membership is a pure function of the
/// seed, and both outputs preserve the original record order.
pub fn split_train_test(
    ds: &CorpusDataset,
    train_ratio: f64,
    seed: u64,
    stratify_by: Task,
) -> Result<(CorpusDataset, CorpusDataset)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::invalid(format!(
            "train ratio must be in (0, 1), got {train_ratio}"
        )));
    }
    let n = ds.len();
    let train_total = (n as f64 * train_ratio).round() as usize;
    if train_total == 0 || train_total >= n {
        return Err(Error::invalid(format!(
            "dataset of {n} records cannot be split {train_ratio} with both sides non-empty"
        )));
    }

    // Group record positions by class, in dataset order.
    let class_count = stratify_by.class_count();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (pos, r) in ds.records().iter().enumerate() {
        by_class[r.label(stratify_by).index()].push(pos);
    }

    // Largest-remainder apportionment of the train quota across classes:
    // every class lands within one record of its proportional share and the
    // totals are exact.
    let mut base: Vec<usize> = Vec::with_capacity(class_count);
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(class_count);
    for (c, members) in by_class.iter().enumerate() {
        let ideal = members.len() as f64 * train_ratio;
        let b = ideal.floor() as usize;
        base.push(b);
        remainders.push((c, ideal - b as f64));
    }
    let assigned: usize = base.iter().sum();
    let mut leftover = train_total.saturating_sub(assigned);
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for (c, _) in remainders {
        if leftover == 0 {
            break;
        }
        if base[c] < by_class[c].len() {
            base[c] += 1;
            leftover -= 1;
        }
    }
    if leftover > 0 {
        return Err(Error::invalid(
            "dataset too small to honor the requested split ratio",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_mask = vec![false; n];
    for (c, members) in by_class.iter().enumerate() {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for &pos in shuffled.iter().take(base[c]) {
            train_mask[pos] = true;
        }
    }

    let mut train = Vec::with_capacity(train_total);
    let mut test = Vec::with_capacity(n - train_total);
    for (pos, r) in ds.records().iter().enumerate() {
        if train_mask[pos] {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    Ok((
        CorpusDataset::new(train, CorpusSource::Derived),
        CorpusDataset::new(test, CorpusSource::Derived),
    ))
}
