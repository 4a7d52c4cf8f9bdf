//! Property tests for the invariants that span modules: splits partition,
//! synthetic distributions are exact, padding is rectangular and in-range,
//! softmax is a shift-invariant distribution, and serialization round-trips.

use proptest::prelude::*;

use bloomtax::corpus::{
    class_distribution, generate_synthetic_corpus, parse_corpus, split_train_test, write_corpus,
    CorpusFormat, DistributionTable, Task,
};
use bloomtax::nn::softmax;
use bloomtax::textpipe::{fit_tokenizer, pad_sequences, texts_to_sequences, TokenizerConfig};

fn distribution_strategy() -> impl Strategy<Value = DistributionTable> {
    // Random cognitive counts; knowledge counts built to match the total.
    proptest::collection::vec(0usize..30, 6).prop_flat_map(|cog| {
        let total: usize = cog.iter().sum();
        (Just(cog), 0..=total, 0..=total).prop_map(move |(cog, a, b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let know = [lo, hi - lo, total - hi];
            DistributionTable::new(
                [cog[0], cog[1], cog[2], cog[3], cog[4], cog[5]],
                know,
            )
            .unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthetic_corpus_matches_requested_distribution(
        dist in distribution_strategy(),
        seed in 0u64..1000,
    ) {
        let ds = generate_synthetic_corpus(&dist, seed).unwrap();
        prop_assert_eq!(ds.len(), dist.total());
        prop_assert_eq!(class_distribution(&ds), dist);
    }

    #[test]
    fn split_is_partition_with_rounded_sizes(
        seed in 0u64..1000,
        ratio in 0.05f64..0.95,
        stratify_cognitive in any::<bool>(),
    ) {
        let dist = DistributionTable::new([5, 9, 3, 2, 4, 7], [10, 12, 8]).unwrap();
        let ds = generate_synthetic_corpus(&dist, seed).unwrap();
        let task = if stratify_cognitive { Task::Cognitive } else { Task::Knowledge };
        let expected_train = (ds.len() as f64 * ratio).round() as usize;
        prop_assume!(expected_train > 0 && expected_train < ds.len());

        let (train, test) = split_train_test(&ds, ratio, seed, task).unwrap();
        prop_assert_eq!(train.len(), expected_train);
        prop_assert_eq!(train.len() + test.len(), ds.len());

        // No record lost, none duplicated.
        let mut merged: Vec<String> = train
            .records()
            .iter()
            .chain(test.records())
            .map(|r| format!("{}|{}|{}", r.text, r.cognitive, r.knowledge))
            .collect();
        let mut original: Vec<String> = ds
            .records()
            .iter()
            .map(|r| format!("{}|{}|{}", r.text, r.cognitive, r.knowledge))
            .collect();
        merged.sort();
        original.sort();
        prop_assert_eq!(merged, original);
    }

    #[test]
    fn padding_is_rectangular_and_entries_in_range(
        seqs in proptest::collection::vec(proptest::collection::vec(1usize..50, 0..40), 1..20),
        maxlen in 1usize..40,
    ) {
        let matrix = pad_sequences(&seqs, maxlen).unwrap();
        prop_assert_eq!(matrix.rows(), seqs.len());
        prop_assert_eq!(matrix.cols(), maxlen);
        for (i, seq) in seqs.iter().enumerate() {
            let row = matrix.row(i);
            prop_assert_eq!(row.len(), maxlen);
            prop_assert!(row.iter().all(|&v| v < 50));
            if seq.len() >= maxlen {
                prop_assert_eq!(row, &seq[seq.len() - maxlen..]);
            } else {
                prop_assert!(row[..maxlen - seq.len()].iter().all(|&v| v == 0));
                prop_assert_eq!(&row[maxlen - seq.len()..], &seq[..]);
            }
        }
    }

    #[test]
    fn softmax_is_a_distribution_and_shift_invariant(
        logits in proptest::collection::vec(-40.0f64..40.0, 2..12),
        shift in -100.0f64..100.0,
    ) {
        let probs = softmax(&logits);
        let sum: f64 = probs.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|z| z + shift).collect();
        let probs_shifted = softmax(&shifted);
        for (a, b) in probs.iter().zip(probs_shifted.iter()) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn corpus_round_trip_both_formats(seed in 0u64..500) {
        let dist = DistributionTable::new([2, 3, 1, 1, 2, 3], [4, 4, 4]).unwrap();
        let ds = generate_synthetic_corpus(&dist, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for format in [CorpusFormat::Csv, CorpusFormat::Jsonl] {
            let path = dir.path().join(format!("c.{format}"));
            write_corpus(&ds, &path, format).unwrap();
            let back = parse_corpus(&path, format).unwrap();
            prop_assert_eq!(back.records(), ds.records());
        }
    }

    #[test]
    fn encoding_fitted_texts_never_emits_pad_or_capped_indices(
        seed in 0u64..500,
        num_words in 5usize..200,
    ) {
        let dist = DistributionTable::new([3, 3, 3, 3, 3, 3], [6, 6, 6]).unwrap();
        let ds = generate_synthetic_corpus(&dist, seed).unwrap();
        let texts = ds.texts();
        let vocab = fit_tokenizer(&texts, TokenizerConfig::with_num_words(num_words)).unwrap();
        for seq in texts_to_sequences(&vocab, &texts) {
            prop_assert!(seq.iter().all(|&idx| idx >= 1 && idx < num_words));
        }
    }
}
