//! Scoring pair sets against the golden set, plus the desk-scale
//! verification tools: a seeded synthetic corpus generator and a
//! brute-force matching oracle.
//!
//! Precision is measured over predicted pairs whose tweeter appears in the
//! golden set; recall over all golden pairs. A true positive is an exact
//! `(author_id, tweeter_id)` match.

mod oracle;
mod synth;

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

pub use oracle::{brute_force_match, ORACLE_LIMIT};
pub use synth::{
    generate_synthetic_corpus, write_planted, PlantedPair, SynthParams, SyntheticCorpus,
};

use crate::corpus::{GoldenPair, Id};
use crate::matcher::{MatchOutcome, MatchStep, MatchedPair, PairCounts};

/// Golden pairs with the set of tweeters they cover.
#[derive(Debug, Clone, Default)]
pub struct GoldenSet {
    pairs: HashSet<(Id, Id)>,
    tweeters: HashSet<Id>,
}

impl GoldenSet {
    pub fn new<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = &'a GoldenPair>,
    {
        let mut golden = GoldenSet::default();
        for pair in pairs {
            golden.tweeters.insert(pair.tweeter_id.clone());
            golden
                .pairs
                .insert((pair.author_id.clone(), pair.tweeter_id.clone()));
        }
        golden
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, author_id: &Id, tweeter_id: &Id) -> bool {
        self.pairs
            .contains(&(author_id.clone(), tweeter_id.clone()))
    }

    pub fn covers_tweeter(&self, tweeter_id: &Id) -> bool {
        self.tweeters.contains(tweeter_id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Which zero-division conventions fired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Conventions {
    /// No evaluable predictions; precision set to 1.
    pub precision_defaulted: bool,
    /// Empty golden set; recall set to 1.
    pub recall_defaulted: bool,
    /// Precision and recall both 0; F set to 0.
    pub f_defaulted: bool,
}

impl Conventions {
    pub fn any(&self) -> bool {
        self.precision_defaulted || self.recall_defaulted || self.f_defaulted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    /// TP over every predicted pair, golden tweeter or not.
    pub unrestricted_precision: f64,
    pub predicted: usize,
    pub conventions: Conventions,
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn evaluate<'a, I>(predicted: I, golden: &GoldenSet) -> EvalReport
where
    I: IntoIterator<Item = (&'a Id, &'a Id)>,
{
    let predicted: HashSet<(&Id, &Id)> = predicted.into_iter().collect();
    let mut restricted = 0;
    let mut tp = 0;
    for &(author_id, tweeter_id) in &predicted {
        if golden.covers_tweeter(tweeter_id) {
            restricted += 1;
            if golden.contains(author_id, tweeter_id) {
                tp += 1;
            }
        }
    }
    let counts = ConfusionCounts {
        true_positives: tp,
        false_positives: restricted - tp,
        false_negatives: golden.len() - tp,
    };
    let mut conventions = Conventions::default();
    let precision = if restricted == 0 {
        conventions.precision_defaulted = true;
        1.0
    } else {
        tp as f64 / restricted as f64
    };
    let recall = if golden.is_empty() {
        conventions.recall_defaulted = true;
        1.0
    } else {
        tp as f64 / golden.len() as f64
    };
    conventions.f_defaulted = precision + recall == 0.0;
    let unrestricted_precision = if predicted.is_empty() {
        1.0
    } else {
        tp as f64 / predicted.len() as f64
    };
    EvalReport {
        counts,
        precision,
        recall,
        f_score: f_measure(precision, recall),
        unrestricted_precision,
        predicted: predicted.len(),
        conventions,
    }
}

pub fn evaluate_pairs(pairs: &[MatchedPair], golden: &GoldenSet) -> EvalReport {
    evaluate(pairs.iter().map(|p| (&p.author_id, &p.tweeter_id)), golden)
}

/// One table row; `step` is `None` for the combined row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRow {
    pub step: Option<MatchStep>,
    pub counts: PairCounts,
    pub report: EvalReport,
}

impl StepRow {
    fn new(step: Option<MatchStep>, pairs: &[MatchedPair], golden: &GoldenSet) -> Self {
        StepRow {
            step,
            counts: PairCounts::of(pairs.iter().map(|p| (&p.author_id, &p.tweeter_id))),
            report: evaluate_pairs(pairs, golden),
        }
    }
}

/// The three views of per-step performance, each closed by a combined row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTables {
    /// Each step on its own, ignoring the hierarchy.
    pub per_criterion: Vec<StepRow>,
    /// Pairs first found at each step.
    pub new_pairs: Vec<StepRow>,
    /// Union of pairs up to each step.
    pub cumulative: Vec<StepRow>,
}

pub fn evaluate_per_step(
    outcome: &MatchOutcome,
    independent: &BTreeMap<MatchStep, Vec<MatchedPair>>,
    golden: &GoldenSet,
) -> StepTables {
    let combined = StepRow::new(None, &outcome.combined, golden);
    let empty = Vec::new();

    let mut per_criterion: Vec<StepRow> = outcome
        .steps
        .par_iter()
        .map(|step| StepRow::new(Some(*step), independent.get(step).unwrap_or(&empty), golden))
        .collect();
    per_criterion.push(combined);

    let mut new_pairs: Vec<StepRow> = outcome
        .steps
        .par_iter()
        .map(|step| {
            StepRow::new(
                Some(*step),
                outcome.new_pairs_by_step.get(step).unwrap_or(&empty),
                golden,
            )
        })
        .collect();
    new_pairs.push(combined);

    let prefixes: Vec<Vec<MatchedPair>> = outcome
        .steps
        .iter()
        .scan(Vec::new(), |acc: &mut Vec<MatchedPair>, step| {
            acc.extend(
                outcome
                    .new_pairs_by_step
                    .get(step)
                    .into_iter()
                    .flatten()
                    .cloned(),
            );
            Some(acc.clone())
        })
        .collect();
    let mut cumulative: Vec<StepRow> = outcome
        .steps
        .par_iter()
        .zip(prefixes.par_iter())
        .map(|(step, pairs)| StepRow::new(Some(*step), pairs, golden))
        .collect();
    cumulative.push(combined);

    StepTables {
        per_criterion,
        new_pairs,
        cumulative,
    }
}
