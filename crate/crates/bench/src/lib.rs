//! Shared inputs for the criterion benches.

use selftweet::{
    build_doi_index, generate_candidates, generate_synthetic_corpus, CandidatePair, Corpus,
    Honorifics, SynthParams, VariantTables,
};

/// Raw names with the punctuation, diacritics and honorifics seen in
/// author and profile fields.
pub const NAMES: [&str; 8] = [
    "Dr. María-José García López",
    "John Smith",
    "Prof. Anna K. Berg PhD",
    "Ångström, Jürgen",
    "Seán Ó'Briain",
    "Li Wei",
    "Peter van der Berg Jr.",
    "ŁUKASZ   Nowak-Kowalski",
];

/// A synthetic corpus of `authors` authors with roughly as many tweeters
/// and ten events per author.
pub fn corpus(authors: usize) -> Corpus {
    let params = SynthParams {
        authors,
        planted: authors / 2,
        distractors: authors / 2,
        homonym_rate: 0.1,
        works: authors * 3 / 2,
        events: authors * 10,
        ..SynthParams::default()
    };
    generate_synthetic_corpus(42, &params)
        .expect("valid params")
        .corpus
}

pub struct Prepared {
    pub corpus: Corpus,
    pub candidates: Vec<CandidatePair>,
    pub tables: VariantTables,
}

pub fn prepare(authors: usize) -> Prepared {
    let corpus = corpus(authors);
    let index = build_doi_index(&corpus.works, &corpus.events);
    let candidates = generate_candidates(&index);
    let tables = VariantTables::build(&corpus.authors, &corpus.tweeters, &Honorifics::default());
    Prepared {
        corpus,
        candidates,
        tables,
    }
}
