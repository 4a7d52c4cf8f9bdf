//! Text preprocessing: tokenization, frequency-capped vocabulary, integer
//! sequences, padding, and one-hot label encoding.
//!
//! A fitted [`Vocabulary`] is immutable and every encoder here is a pure
//! function, so everything can be shared freely across threads.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::{Task, TaskLabel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The default character filter: stripped from text before splitting on
/// whitespace. Matches the conventional tokenizer default (apostrophes are
/// kept, tab and newline included).
pub const DEFAULT_FILTERS: &str = "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n";

/// How text is turned into words and how large the index may grow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    /// Vocabulary cap: word indices run 1..num_words-1 (0 is the pad index).
    pub num_words: usize,
    /// Characters replaced by a space before splitting.
    pub filters: String,
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            num_words: 5000,
            filters: DEFAULT_FILTERS.to_string(),
            lowercase: true,
        }
    }
}

impl TokenizerConfig {
    pub fn with_num_words(num_words: usize) -> Self {
        TokenizerConfig {
            num_words,
            ..Default::default()
        }
    }
}

fn tokenize_with(text: &str, lowercase: bool, filters: &HashSet<char>) -> Vec<String> {
    let lowered;
    let source = if lowercase {
        lowered = text.to_lowercase();
        &lowered
    } else {
        text
    };
    // Filter characters become spaces (not deletions), so "a/b" splits in two.
    let cleaned: String = source
        .chars()
        .map(|c| if filters.contains(&c) { ' ' } else { c })
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// Frequency-ranked word index fitted over a corpus.
///
/// Indices are dense 1..=K in rank order (most frequent word gets 1, ties
/// broken by first appearance); index 0 is reserved for padding so the
/// embedding's row 0 can be the pad embedding. Words ranked past
/// `num_words - 1` stay counted but unindexed.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    config: TokenizerConfig,
    index: HashMap<String, usize>,
    counts: HashMap<String, usize>,
}

/// Count words and build the ranked index over a non-empty list of texts.
pub fn fit_tokenizer<T: AsRef<str>>(texts: &[T], config: TokenizerConfig) -> Result<Vocabulary> {
    if texts.is_empty() {
        return Err(Error::invalid("cannot fit a tokenizer on an empty text list"));
    }
    if config.num_words < 2 {
        return Err(Error::invalid(format!(
            "num_words must be at least 2, got {}",
            config.num_words
        )));
    }
    let filters: HashSet<char> = config.filters.chars().collect();
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut appearance: Vec<String> = Vec::new();
    for text in texts {
        for token in tokenize_with(text.as_ref(), config.lowercase, &filters) {
            match counts.get_mut(&token) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(token.clone(), 1);
                    appearance.push(token);
                }
            }
        }
    }
    // Stable sort keeps first-appearance order among equal counts.
    let mut ranked = appearance;
    ranked.sort_by_key(|w| std::cmp::Reverse(counts[w]));
    let capacity = config.num_words - 1;
    let index: HashMap<String, usize> = ranked
        .into_iter()
        .take(capacity)
        .enumerate()
        .map(|(i, w)| (w, i + 1))
        .collect();
    Ok(Vocabulary {
        config,
        index,
        counts,
    })
}

impl Vocabulary {
    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    /// Tokenize a text under this vocabulary's config.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let filters: HashSet<char> = self.config.filters.chars().collect();
        tokenize_with(text, self.config.lowercase, &filters)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn count_of(&self, word: &str) -> usize {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Highest assigned index K; 0 when nothing is indexed.
    pub fn max_index(&self) -> usize {
        self.index.len()
    }

    /// Embedding table height: K + 1 (row 0 is the pad row).
    pub fn embedding_rows(&self) -> usize {
        self.max_index() + 1
    }

    pub fn indexed_len(&self) -> usize {
        self.index.len()
    }

    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    /// Canonical text serialization: one config header line, then one
    /// `word<TAB>index<TAB>count` line per word. Indexed words come first in
    /// index order; unindexed words follow sorted by (count desc, word asc).
    /// Unindexed words carry index 0.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "#bloomtax-vocab v1\tnum_words={}\tlowercase={}\tfilters={}\n",
            self.config.num_words,
            self.config.lowercase,
            escape(&self.config.filters)
        );
        let mut by_index: Vec<(&String, usize)> =
            self.index.iter().map(|(w, &i)| (w, i)).collect();
        by_index.sort_by_key(|&(_, i)| i);
        for (word, idx) in &by_index {
            out.push_str(&format!("{}\t{}\t{}\n", escape(word), idx, self.counts[*word]));
        }
        let mut rest: Vec<(&String, usize)> = self
            .counts
            .iter()
            .filter(|(w, _)| !self.index.contains_key(*w))
            .map(|(w, &c)| (w, c))
            .collect();
        rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        for (word, count) in rest {
            out.push_str(&format!("{}\t0\t{}\n", escape(word), count));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |msg: String| Error::invalid(format!("vocabulary: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err("empty input".into()))?;
        let mut fields = header.split('\t');
        let magic = fields.next().unwrap_or("");
        if magic != "#bloomtax-vocab v1" {
            return Err(err(format!("unrecognized header {magic:?}")));
        }
        let mut num_words = None;
        let mut lowercase = None;
        let mut filters = None;
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| err(format!("bad header field {field:?}")))?;
            match key {
                "num_words" => {
                    num_words = Some(value.parse().map_err(|_| err(format!("bad num_words {value:?}")))?)
                }
                "lowercase" => {
                    lowercase = Some(value.parse().map_err(|_| err(format!("bad lowercase {value:?}")))?)
                }
                "filters" => filters = Some(unescape(value)?),
                other => return Err(err(format!("unknown header key {other:?}"))),
            }
        }
        let config = TokenizerConfig {
            num_words: num_words.ok_or_else(|| err("missing num_words".into()))?,
            lowercase: lowercase.ok_or_else(|| err("missing lowercase".into()))?,
            filters: filters.ok_or_else(|| err("missing filters".into()))?,
        };
        let mut index = HashMap::new();
        let mut counts = HashMap::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (word, idx, count) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(w), Some(i), Some(c), None) => (w, i, c),
                _ => return Err(err(format!("line {}: expected word<TAB>index<TAB>count", lineno + 2))),
            };
            let word = unescape(word)?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index {idx:?}")))?;
            let count: usize = count.parse().map_err(|_| err(format!("bad count {count:?}")))?;
            if counts.insert(word.clone(), count).is_some() {
                return Err(err(format!("duplicate word {word:?}")));
            }
            if idx > 0 {
                index.insert(word, idx);
            }
        }
        Ok(Vocabulary {
            config,
            index,
            counts,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| Error::file_format(path, e.to_string()))
    }

    /// SHA-256 over the canonical serialization; embedded in model files so a
    /// model is never run against the wrong vocabulary.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_text().as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(Error::invalid(format!(
                    "vocabulary: bad escape sequence \\{}",
                    other.map(String::from).unwrap_or_default()
                )))
            }
        }
    }
    Ok(out)
}

/// Map each text to the indices of its indexed tokens. Out-of-vocabulary and
/// rank-capped tokens are dropped; an empty output sequence is legal.
pub fn texts_to_sequences<T: AsRef<str>>(vocab: &Vocabulary, texts: &[T]) -> Vec<Vec<usize>> {
    let filters: HashSet<char> = vocab.config.filters.chars().collect();
    texts
        .iter()
        .map(|text| {
            tokenize_with(text.as_ref(), vocab.config.lowercase, &filters)
                .into_iter()
                .filter_map(|t| vocab.index.get(&t).copied())
                .collect()
        })
        .collect()
}

/// Rectangular matrix of padded token-index rows; 0 is the pad value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceMatrix {
    rows: usize,
    cols: usize,
    data: Vec<usize>,
}

impl SequenceMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Left-pad short sequences with 0 and keep the last `maxlen` entries of long
/// ones (pre-padding, pre-truncation).
pub fn pad_sequences(seqs: &[Vec<usize>], maxlen: usize) -> Result<SequenceMatrix> {
    if maxlen == 0 {
        return Err(Error::invalid("maxlen must be at least 1"));
    }
    let mut data = Vec::with_capacity(seqs.len() * maxlen);
    for seq in seqs {
        if seq.len() >= maxlen {
            data.extend_from_slice(&seq[seq.len() - maxlen..]);
        } else {
            data.extend(std::iter::repeat_n(0, maxlen - seq.len()));
            data.extend_from_slice(seq);
        }
    }
    Ok(SequenceMatrix {
        rows: seqs.len(),
        cols: maxlen,
        data,
    })
}

/// One-hot label vector: exactly one entry is 1, length matches the task.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotLabel<S> {
    values: Vec<S>,
}

impl<S: Scalar> OneHotLabel<S> {
    pub fn as_slice(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hot_index(&self) -> usize {
        self.values
            .iter()
            .position(|v| *v == S::one())
            .expect("one-hot vector has a hot entry")
    }
}

/// Encode a label as a unit basis vector (length 6 for cognitive, 3 for
/// knowledge).
pub fn encode_label<S: Scalar>(label: TaskLabel) -> OneHotLabel<S> {
    let mut values = vec![S::zero(); label.task().class_count()];
    values[label.index()] = S::one();
    OneHotLabel { values }
}

/// Inverse of encoding for prediction output: the argmax label (ties go to
/// the lowest index) plus its probability.
pub fn decode_label<S: Scalar>(probabilities: &[S], task: Task) -> Result<(TaskLabel, S)> {
    if probabilities.len() != task.class_count() {
        return Err(Error::shape(format!(
            "{} task expects {} probabilities, got {}",
            task,
            task.class_count(),
            probabilities.len()
        )));
    }
    let mut best = 0usize;
    for (i, &p) in probabilities.iter().enumerate().skip(1) {
        if p > probabilities[best] {
            best = i;
        }
    }
    let label = TaskLabel::from_index(task, best).expect("argmax index in range");
    Ok((label, probabilities[best]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        generate_synthetic_corpus, CognitiveLabel, DistributionTable, KnowledgeLabel,
    };

    #[test]
    fn default_config_matches_reference_tokenizer() {
        let config = TokenizerConfig::default();
        assert!(config.lowercase);
        assert_eq!(config.num_words, 5000);
        // 31 punctuation characters plus tab and newline; apostrophes kept.
        assert_eq!(DEFAULT_FILTERS.chars().count(), 33);
        assert!(!DEFAULT_FILTERS.contains('\''));
        assert!(DEFAULT_FILTERS.contains('\t') && DEFAULT_FILTERS.contains('\n'));
        for c in "!\"#$%&()*+,-./:;<=>?@[\\]^_`{|}~".chars() {
            assert!(DEFAULT_FILTERS.contains(c), "missing filter char {c:?}");
        }
    }

    #[test]
    fn counts_and_rank_on_tiny_corpus() {
        let texts = ["Explain DFD", "Explain SRS"];
        let vocab = fit_tokenizer(&texts, TokenizerConfig::default()).unwrap();
        assert_eq!(vocab.count_of("explain"), 2);
        assert_eq!(vocab.count_of("dfd"), 1);
        assert_eq!(vocab.count_of("srs"), 1);
        assert_eq!(vocab.index_of("explain"), Some(1));
    }

    #[test]
    fn filters_strip_punctuation() {
        let vocab = fit_tokenizer(&["a"], TokenizerConfig::default()).unwrap();
        let tokens = vocab.tokenize("What is the work breakdown structure?");
        assert_eq!(
            tokens,
            vec!["what", "is", "the", "work", "breakdown", "structure"]
        );
    }

    #[test]
    fn filter_chars_become_spaces_not_deletions() {
        let vocab = fit_tokenizer(&["a"], TokenizerConfig::default()).unwrap();
        assert_eq!(vocab.tokenize("scheduling/tracking"), vec!["scheduling", "tracking"]);
    }

    #[test]
    fn num_words_caps_the_index() {
        // Five distinct words; counts a=3, b=2, c=d=e=1. Cap 3 keeps 2 indices.
        let texts = ["a a a b b c", "d e"];
        let vocab = fit_tokenizer(&texts, TokenizerConfig::with_num_words(3)).unwrap();
        assert_eq!(vocab.index_of("a"), Some(1));
        assert_eq!(vocab.index_of("b"), Some(2));
        assert_eq!(vocab.index_of("c"), None);
        assert_eq!(vocab.index_of("d"), None);
        assert_eq!(vocab.index_of("e"), None);
        assert_eq!(vocab.max_index(), 2);
        // Unindexed words are still counted.
        assert_eq!(vocab.count_of("e"), 1);
    }

    #[test]
    fn ties_break_by_first_appearance() {
        let texts = ["zeta alpha", "zeta alpha beta"];
        let vocab = fit_tokenizer(&texts, TokenizerConfig::default()).unwrap();
        assert_eq!(vocab.index_of("zeta"), Some(1));
        assert_eq!(vocab.index_of("alpha"), Some(2));
        assert_eq!(vocab.index_of("beta"), Some(3));
    }

    #[test]
    fn fit_rejects_empty_inputs() {
        let empty: [&str; 0] = [];
        assert!(fit_tokenizer(&empty, TokenizerConfig::default()).is_err());
        assert!(fit_tokenizer(&["x"], TokenizerConfig::with_num_words(1)).is_err());
    }

    #[test]
    fn sequences_drop_unindexed_tokens() {
        let texts = ["explain explain explain", "is is dfd explain is"];
        let vocab = fit_tokenizer(&texts, TokenizerConfig::default()).unwrap();
        assert_eq!(vocab.index_of("explain"), Some(1));
        assert_eq!(vocab.index_of("dfd"), Some(3));
        let seqs = texts_to_sequences(&vocab, &["explain dfd", "unknown words only"]);
        assert_eq!(seqs[0], vec![1, 3]);
        assert!(seqs[1].is_empty());
    }

    #[test]
    fn reencoding_fitting_corpus_stays_in_range() {
        let ds = generate_synthetic_corpus(&DistributionTable::table1(), 5).unwrap();
        let texts = ds.texts();
        let num_words = 50; // force rank capping
        let vocab = fit_tokenizer(&texts, TokenizerConfig::with_num_words(num_words)).unwrap();
        assert!(vocab.max_index() < num_words);
        for seq in texts_to_sequences(&vocab, &texts) {
            for idx in seq {
                assert!(idx >= 1 && idx < num_words);
            }
        }
    }

    #[test]
    fn ranking_is_consistent_with_recounted_frequencies() {
        // Independent oracle: recount words by brute force and check the
        // index order never violates the counts.
        let ds = generate_synthetic_corpus(&DistributionTable::table1(), 11).unwrap();
        let texts = ds.texts();
        let vocab = fit_tokenizer(&texts, TokenizerConfig::default()).unwrap();
        let mut recount: HashMap<String, usize> = HashMap::new();
        for t in &texts {
            for token in vocab.tokenize(t) {
                *recount.entry(token).or_insert(0) += 1;
            }
        }
        for (word, &count) in &recount {
            assert_eq!(vocab.count_of(word), count, "count mismatch for {word:?}");
        }
        let mut by_index: Vec<(usize, &String)> = Vec::new();
        for word in recount.keys() {
            if let Some(i) = vocab.index_of(word) {
                by_index.push((i, word));
            }
        }
        by_index.sort();
        for pair in by_index.windows(2) {
            assert!(
                recount[pair[0].1] >= recount[pair[1].1],
                "rank order violates counts: {:?} < {:?}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn padding_and_truncation() {
        let m = pad_sequences(&[vec![3, 7]], 4).unwrap();
        assert_eq!(m.row(0), &[0, 0, 3, 7]);
        let m = pad_sequences(&[vec![1, 2, 3, 4, 5]], 3).unwrap();
        assert_eq!(m.row(0), &[3, 4, 5]);
        let m = pad_sequences(&[vec![]], 4).unwrap();
        assert_eq!(m.row(0), &[0, 0, 0, 0]);
        assert!(pad_sequences(&[vec![1]], 0).is_err());
    }

    #[test]
    fn one_hot_encodings_match_reference_tables() {
        let expected_cognitive: [(CognitiveLabel, [f64; 6]); 6] = [
            (CognitiveLabel::Remember, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            (CognitiveLabel::Understand, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            (CognitiveLabel::Apply, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
            (CognitiveLabel::Evaluate, [0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            (CognitiveLabel::Analyze, [0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            (CognitiveLabel::Create, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ];
        for (label, expected) in expected_cognitive {
            let hot = encode_label::<f64>(TaskLabel::Cognitive(label));
            assert_eq!(hot.as_slice(), expected);
        }
        let expected_knowledge: [(KnowledgeLabel, [f64; 3]); 3] = [
            (KnowledgeLabel::Factual, [1.0, 0.0, 0.0]),
            (KnowledgeLabel::Conceptual, [0.0, 1.0, 0.0]),
            (KnowledgeLabel::Procedural, [0.0, 0.0, 1.0]),
        ];
        for (label, expected) in expected_knowledge {
            let hot = encode_label::<f64>(TaskLabel::Knowledge(label));
            assert_eq!(hot.as_slice(), expected);
        }
    }

    #[test]
    fn encode_decode_is_identity_for_every_label() {
        for label in CognitiveLabel::ALL {
            let hot = encode_label::<f64>(TaskLabel::Cognitive(label));
            let (decoded, conf) = decode_label(hot.as_slice(), Task::Cognitive).unwrap();
            assert_eq!(decoded, TaskLabel::Cognitive(label));
            assert_eq!(conf, 1.0);
        }
        for label in KnowledgeLabel::ALL {
            let hot = encode_label::<f64>(TaskLabel::Knowledge(label));
            let (decoded, conf) = decode_label(hot.as_slice(), Task::Knowledge).unwrap();
            assert_eq!(decoded, TaskLabel::Knowledge(label));
            assert_eq!(conf, 1.0);
        }
    }

    #[test]
    fn decode_argmax_and_tie_break() {
        let (label, conf) =
            decode_label(&[0.1, 0.6, 0.1, 0.1, 0.05, 0.05], Task::Cognitive).unwrap();
        assert_eq!(label, TaskLabel::Cognitive(CognitiveLabel::Understand));
        assert_eq!(conf, 0.6);

        let (label, conf) = decode_label(&[0.5, 0.5, 0.0], Task::Knowledge).unwrap();
        assert_eq!(label, TaskLabel::Knowledge(KnowledgeLabel::Factual));
        assert_eq!(conf, 0.5);

        let uniform = [1.0 / 6.0; 6];
        let (label, conf) = decode_label(&uniform, Task::Cognitive).unwrap();
        assert_eq!(label, TaskLabel::Cognitive(CognitiveLabel::Remember));
        assert_eq!(conf, 1.0 / 6.0);

        assert!(decode_label(&[0.5, 0.5], Task::Knowledge).is_err());
    }

    #[test]
    fn vocabulary_text_round_trip_is_exact() {
        let ds = generate_synthetic_corpus(&DistributionTable::table1(), 13).unwrap();
        let vocab = fit_tokenizer(&ds.texts(), TokenizerConfig::with_num_words(60)).unwrap();
        let text = vocab.to_text();
        let back = Vocabulary::from_text(&text).unwrap();
        assert_eq!(back, vocab);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.content_hash(), vocab.content_hash());
    }

    #[test]
    fn vocabulary_hash_changes_with_content() {
        let a = fit_tokenizer(&["alpha beta"], TokenizerConfig::default()).unwrap();
        let b = fit_tokenizer(&["alpha beta beta"], TokenizerConfig::default()).unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn tokenization_is_deterministic() {
        let texts = ["Explain the spiral model.", "Define risk management."];
        let a = fit_tokenizer(&texts, TokenizerConfig::default()).unwrap();
        let b = fit_tokenizer(&texts, TokenizerConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            texts_to_sequences(&a, &texts),
            texts_to_sequences(&b, &texts)
        );
    }
}
