//! Link scholarly author records to social-media accounts that tweeted
//! their publications.
//!
//! Candidates are blocked on shared DOIs, then matched through nine name
//! criteria ordered from most to least precise. Each linked pair keeps the
//! first criterion that caught it, and the result can be scored against a
//! golden set of self-reported links.

pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod matcher;
pub mod namekit;
pub mod reporter;

pub use corpus::{
    build_doi_index, load_corpus, normalize_doi, AuthorRecord, ConceptScore, Corpus, CorpusPaths,
    DoiIndex, GoldenPair, Id, LoadReport, TweetEvent, TweeterProfile, WorkRecord,
};
pub use error::{Error, Result};
pub use evaluator::{
    brute_force_match, evaluate, evaluate_per_step, generate_synthetic_corpus, EvalReport,
    GoldenSet, StepTables, SynthParams, SyntheticCorpus,
};
pub use matcher::{
    generate_candidates, run_hierarchy, run_independent, step_matches, CandidatePair, Criteria,
    Field, MatchOutcome, MatchStep, MatchedPair, VariantTables,
};
pub use namekit::{
    concat_full, expand_variants, normalize_handle, normalize_name, Honorifics, NameVariant,
    NormalizedName,
};
