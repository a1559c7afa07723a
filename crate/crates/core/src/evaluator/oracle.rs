use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{Corpus, Id};
use crate::error::{Error, Result};
use crate::matcher::{
    canonical_steps, step_matches, AuthorForms, MatchOutcome, MatchStep, MatchedPair, TweeterForms,
};
use crate::namekit::Honorifics;

/// Largest author or tweeter population the oracle accepts.
pub const ORACLE_LIMIT: usize = 1_000;

/// Reference matcher: scans events against works for shared DOIs, then for
/// every candidate tries each step in order through [`step_matches`], with
/// no indexing and no shortcuts.
pub fn brute_force_match(
    corpus: &Corpus,
    steps: &[MatchStep],
    honorifics: &Honorifics,
) -> Result<MatchOutcome> {
    if corpus.authors.len() > ORACLE_LIMIT || corpus.tweeters.len() > ORACLE_LIMIT {
        return Err(Error::CorpusTooLarge {
            authors: corpus.authors.len(),
            tweeters: corpus.tweeters.len(),
            limit: ORACLE_LIMIT,
        });
    }

    let mut candidates: BTreeSet<(Id, Id)> = BTreeSet::new();
    for event in &corpus.events {
        for work in &corpus.works {
            if work.doi == event.doi {
                for author_id in &work.author_ids {
                    candidates.insert((author_id.clone(), event.tweeter_id.clone()));
                }
            }
        }
    }

    let mut authors: BTreeMap<&str, Option<AuthorForms>> = BTreeMap::new();
    for author in &corpus.authors {
        authors
            .entry(&author.author_id)
            .or_insert_with(|| AuthorForms::new(author, honorifics).ok());
    }
    let mut tweeters: BTreeMap<&str, TweeterForms> = BTreeMap::new();
    for tweeter in &corpus.tweeters {
        tweeters
            .entry(&tweeter.tweeter_id)
            .or_insert_with(|| TweeterForms::new(tweeter, honorifics));
    }

    let steps = canonical_steps(steps);
    let mut new_pairs: BTreeMap<MatchStep, Vec<MatchedPair>> = BTreeMap::new();
    for (author_id, tweeter_id) in &candidates {
        let (Some(Some(author)), Some(tweeter)) =
            (authors.get(&**author_id), tweeters.get(&**tweeter_id))
        else {
            continue;
        };
        for &step in &steps {
            if let Some(witness) = step_matches(step, author, tweeter) {
                new_pairs.entry(step).or_default().push(MatchedPair {
                    author_id: author_id.clone(),
                    tweeter_id: tweeter_id.clone(),
                    step,
                    matched_author_variant: witness.author,
                    matched_tweeter_value: witness.tweeter,
                });
                break;
            }
        }
    }
    Ok(MatchOutcome::from_new_pairs(&steps, new_pairs))
}
