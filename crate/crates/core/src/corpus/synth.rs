use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    CognitiveLabel, CorpusDataset, CorpusSource, DistributionTable, KnowledgeLabel, QuestionRecord,
};
use crate::error::{Error, Result};

// Leading verbs per cognitive process, following the taxonomy's verb lists.
// The banks are disjoint so the generated corpus is separable by class.
const REMEMBER_VERBS: [&str; 6] = ["Define", "List", "Recall", "State", "Identify", "Name"];
const UNDERSTAND_VERBS: [&str; 6] = [
    "Explain",
    "Classify",
    "Compare",
    "Summarize",
    "Describe",
    "Interpret",
];
const APPLY_VERBS: [&str; 6] = ["Implement", "Execute", "Apply", "Demonstrate", "Use", "Measure"];
const ANALYZE_VERBS: [&str; 6] = [
    "Differentiate",
    "Organize",
    "Outline",
    "Distinguish",
    "Examine",
    "Analyze",
];
const EVALUATE_VERBS: [&str; 6] = ["Check", "Critique", "Judge", "Assess", "Evaluate", "Monitor"];
const CREATE_VERBS: [&str; 6] = ["Design", "Plan", "Construct", "Develop", "Generate", "Propose"];

// Noun-centered phrases that mark the knowledge dimension of a question.
const FACTUAL_PHRASES: [&str; 5] = [
    "the definition of",
    "the basic terminology of",
    "the key facts about",
    "the specific details of",
    "the standard notation for",
];
const CONCEPTUAL_PHRASES: [&str; 5] = [
    "the underlying concept of",
    "the principle behind",
    "the theoretical model of",
    "the classification scheme for",
    "the relationship between the parts of",
];
const PROCEDURAL_PHRASES: [&str; 5] = [
    "the steps involved in",
    "the procedure for",
    "the algorithm used in",
    "the step by step method for",
    "the workflow of",
];

// Software-engineering topic bank shared by every class.
const TOPICS: [&str; 24] = [
    "the waterfall model",
    "requirement elicitation",
    "the spiral model",
    "software configuration management",
    "unit testing",
    "integration testing",
    "the work breakdown structure",
    "function point analysis",
    "risk management",
    "software quality assurance",
    "the capability maturity model",
    "object oriented design",
    "data flow diagrams",
    "use case modeling",
    "cost estimation",
    "project scheduling",
    "version control",
    "black box testing",
    "white box testing",
    "agile development",
    "code refactoring",
    "the software development life cycle",
    "design patterns",
    "coupling and cohesion",
];

// Trailing instruction phrases, in the style of compound exam questions
// ("List down and explain ..."). Each class keeps its own tail vocabulary so
// the class marking is present near the end of the sentence as well as at
// the leading verb.
const REMEMBER_TAILS: [&str; 2] = ["from memory.", "as stated in the notes."];
const UNDERSTAND_TAILS: [&str; 2] = ["in your own words.", "with a clear explanation."];
const APPLY_TAILS: [&str; 2] = ["in practice.", "for a live project."];
const ANALYZE_TAILS: [&str; 2] = ["and point out the differences.", "part by part."];
const EVALUATE_TAILS: [&str; 2] = ["and give your verdict.", "and rate its effectiveness."];
const CREATE_TAILS: [&str; 2] = ["as a fresh proposal.", "from the ground up."];

fn verbs_for(label: CognitiveLabel) -> &'static [&'static str; 6] {
    match label {
        CognitiveLabel::Remember => &REMEMBER_VERBS,
        CognitiveLabel::Understand => &UNDERSTAND_VERBS,
        CognitiveLabel::Apply => &APPLY_VERBS,
        CognitiveLabel::Analyze => &ANALYZE_VERBS,
        CognitiveLabel::Evaluate => &EVALUATE_VERBS,
        CognitiveLabel::Create => &CREATE_VERBS,
    }
}

fn tails_for(label: CognitiveLabel) -> &'static [&'static str; 2] {
    match label {
        CognitiveLabel::Remember => &REMEMBER_TAILS,
        CognitiveLabel::Understand => &UNDERSTAND_TAILS,
        CognitiveLabel::Apply => &APPLY_TAILS,
        CognitiveLabel::Analyze => &ANALYZE_TAILS,
        CognitiveLabel::Evaluate => &EVALUATE_TAILS,
        CognitiveLabel::Create => &CREATE_TAILS,
    }
}

fn phrases_for(label: KnowledgeLabel) -> &'static [&'static str; 5] {
    match label {
        KnowledgeLabel::Factual => &FACTUAL_PHRASES,
        KnowledgeLabel::Conceptual => &CONCEPTUAL_PHRASES,
        KnowledgeLabel::Procedural => &PROCEDURAL_PHRASES,
    }
}

/// Real-valued joint cell targets fitted to the two marginals by iterative
/// proportional fitting. With no structural zeros this converges to the
/// independence table, which is exactly what sampling should follow.
fn ipf_targets(dist: &DistributionTable) -> [[f64; KnowledgeLabel::COUNT]; CognitiveLabel::COUNT] {
    let rows = dist.cognitive_counts();
    let cols = dist.knowledge_counts();
    let mut table = [[1.0f64; KnowledgeLabel::COUNT]; CognitiveLabel::COUNT];
    for _ in 0..50 {
        for (i, row) in table.iter_mut().enumerate() {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                let scale = rows[i] as f64 / sum;
                for cell in row.iter_mut() {
                    *cell *= scale;
                }
            }
        }
        for j in 0..KnowledgeLabel::COUNT {
            let sum: f64 = table.iter().map(|row| row[j]).sum();
            if sum > 0.0 {
                let scale = cols[j] as f64 / sum;
                for row in table.iter_mut() {
                    row[j] *= scale;
                }
            }
        }
    }
    table
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

/// A second topic distinct from `first`.
fn pick_other<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str], first: &str) -> &'a str {
    let mut idx = rng.gen_range(0..items.len());
    if items[idx] == first {
        idx = (idx + 1) % items.len();
    }
    items[idx]
}

fn question_text(
    rng: &mut ChaCha8Rng,
    cognitive: CognitiveLabel,
    knowledge: KnowledgeLabel,
) -> String {
    let verb = pick(rng, verbs_for(cognitive));
    let phrase = pick(rng, phrases_for(knowledge));
    let topic = pick(rng, &TOPICS);

    // Three phrasings per class: a class-specific structure, a compound
    // question with a trailing instruction, and a bare verb-led form.
    let style = rng.gen::<f64>();
    if style < 0.30 {
        match cognitive {
            CognitiveLabel::Remember => format!("What is {phrase} {topic}?"),
            CognitiveLabel::Understand => {
                format!("{verb} {phrase} {topic} in your own words.")
            }
            CognitiveLabel::Apply => format!(
                "How do you measure {phrase} {topic}? Explain with any two quality metrics."
            ),
            CognitiveLabel::Analyze => {
                let other = pick_other(rng, &TOPICS, topic);
                format!("{verb} between {topic} and {other} considering {phrase} each.")
            }
            CognitiveLabel::Evaluate => {
                let other = pick_other(rng, &TOPICS, topic);
                format!("{verb} whether {topic} satisfies {phrase} {other}.")
            }
            CognitiveLabel::Create => {
                let other = pick_other(rng, &TOPICS, topic);
                format!("{verb} a new approach to {topic} based on {phrase} {other}.")
            }
        }
    } else if style < 0.85 {
        // Compound instruction: "List down and explain ..." style.
        let second = pick_other(rng, verbs_for(cognitive), verb).to_lowercase();
        let tail = pick(rng, tails_for(cognitive));
        format!("{verb} and {second} {phrase} {topic} {tail}")
    } else {
        format!("{verb} {phrase} {topic}.")
    }
}

/// Build a corpus whose class distribution equals `dist` exactly.
///
/// Each record's (cognitive, knowledge) cell is drawn from the seeded IPF
/// targets restricted to cells with remaining quota, so both marginals are
/// honored exactly; the text is assembled from the verb and phrase banks.
/// Output is deterministic given `(dist, seed)`.
pub fn generate_synthetic_corpus(dist: &DistributionTable, seed: u64) -> Result<CorpusDataset> {
    let cog_total: usize = dist.cognitive_counts().iter().sum();
    let know_total: usize = dist.knowledge_counts().iter().sum();
    if cog_total != know_total {
        return Err(Error::invalid(format!(
            "inconsistent marginals: cognitive counts sum to {cog_total}, knowledge counts sum to {know_total}"
        )));
    }

    let targets = ipf_targets(dist);
    let mut remaining_cog = *dist.cognitive_counts();
    let mut remaining_know = *dist.knowledge_counts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(dist.total());

    for _ in 0..dist.total() {
        let mut weights = [[0.0f64; KnowledgeLabel::COUNT]; CognitiveLabel::COUNT];
        let mut sum = 0.0;
        for (i, row) in targets.iter().enumerate() {
            if remaining_cog[i] == 0 {
                continue;
            }
            for (j, &t) in row.iter().enumerate() {
                if remaining_know[j] == 0 {
                    continue;
                }
                // Every permitted cell keeps a positive floor so feasible
                // allocations are always reachable even when the fitted
                // target for the cell is tiny.
                let w = t.max(1e-9);
                weights[i][j] = w;
                sum += w;
            }
        }
        debug_assert!(sum > 0.0);

        let mut draw = rng.gen::<f64>() * sum;
        let mut chosen = None;
        'outer: for (i, row) in weights.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                if draw < w {
                    chosen = Some((i, j));
                    break 'outer;
                }
                draw -= w;
            }
        }
        // Guard against accumulated floating-point spill past the last cell.
        let (i, j) = chosen.unwrap_or_else(|| {
            let i = remaining_cog.iter().position(|&c| c > 0).unwrap();
            let j = remaining_know.iter().position(|&c| c > 0).unwrap();
            (i, j)
        });

        remaining_cog[i] -= 1;
        remaining_know[j] -= 1;
        let cognitive = CognitiveLabel::from_index(i).unwrap();
        let knowledge = KnowledgeLabel::from_index(j).unwrap();
        let text = question_text(&mut rng, cognitive, knowledge);
        records.push(QuestionRecord::new(text, cognitive, knowledge)?);
    }

    Ok(CorpusDataset::new(
        records,
        CorpusSource::Synthetic { seed },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::class_distribution;

    #[test]
    fn table1_corpus_matches_requested_distribution_exactly() {
        let dist = DistributionTable::table1();
        let ds = generate_synthetic_corpus(&dist, 42).unwrap();
        assert_eq!(ds.len(), 844);
        assert_eq!(class_distribution(&ds), dist);
    }

    #[test]
    fn all_zero_distribution_gives_empty_dataset() {
        let dist = DistributionTable::new([0; 6], [0; 3]).unwrap();
        let ds = generate_synthetic_corpus(&dist, 1).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn same_seed_gives_identical_corpora() {
        let dist = DistributionTable::table1();
        let a = generate_synthetic_corpus(&dist, 9).unwrap();
        let b = generate_synthetic_corpus(&dist, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(&dist, 10).unwrap();
        assert_ne!(a.records(), c.records());
    }

    #[test]
    fn verb_banks_are_disjoint() {
        let banks = [
            REMEMBER_VERBS,
            UNDERSTAND_VERBS,
            APPLY_VERBS,
            ANALYZE_VERBS,
            EVALUATE_VERBS,
            CREATE_VERBS,
        ];
        let mut seen = std::collections::HashSet::new();
        for bank in banks {
            for verb in bank {
                assert!(seen.insert(verb.to_ascii_lowercase()), "duplicate verb {verb}");
            }
        }
    }

    #[test]
    fn leading_verb_comes_from_the_class_bank() {
        let dist = DistributionTable::new([5, 5, 5, 5, 5, 5], [10, 10, 10]).unwrap();
        let ds = generate_synthetic_corpus(&dist, 3).unwrap();
        for r in ds.records() {
            let first = r.text.split_whitespace().next().unwrap();
            let bank = verbs_for(r.cognitive);
            let ok = bank.contains(&first)
                || (r.cognitive == CognitiveLabel::Remember && first == "What")
                || (r.cognitive == CognitiveLabel::Apply && first == "How");
            assert!(ok, "unexpected lead {first:?} for {}", r.cognitive);
        }
    }
}
