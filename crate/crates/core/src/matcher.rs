//! DOI-blocked candidate generation and the nine-step matching hierarchy.
//!
//! Steps run from most to least precise. A pair caught by a step is sealed
//! with that step and never evaluated again, so every linked pair records
//! the most precise criterion that matched it.
//!
//! [`step_matches`] states each rule directly on strings. The hierarchy
//! itself works on [`VariantTables`], where every comparison key is interned
//! to an integer once per entity; the brute-force oracle in the evaluator
//! checks that both routes agree.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{AuthorRecord, DoiIndex, Id, TweeterProfile};
use crate::error::{Error, Result};
use crate::namekit::{
    expand_variants, normalize_handle, normalize_name_with, Honorifics, NameVariant, NormalizedName,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Criteria {
    FullNameExact,
    FullNameSubstring,
    LastNameInitials,
    LastNameFirstToken,
    LastNameFirstInitial,
}

impl Criteria {
    pub fn as_str(self) -> &'static str {
        match self {
            Criteria::FullNameExact => "FullNameExact",
            Criteria::FullNameSubstring => "FullNameSubstring",
            Criteria::LastNameInitials => "LastNameInitials",
            Criteria::LastNameFirstToken => "LastNameFirstToken",
            Criteria::LastNameFirstInitial => "LastNameFirstInitial",
        }
    }

    /// Human-readable table label.
    pub fn label(self) -> &'static str {
        match self {
            Criteria::FullNameExact => "Full name exact match",
            Criteria::FullNameSubstring => "Full name substring",
            Criteria::LastNameInitials => "Last name + initials",
            Criteria::LastNameFirstToken => "Last name + first token",
            Criteria::LastNameFirstInitial => "Last name + first initial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Field {
    Handle,
    ProfileName,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Handle => "Handle",
            Field::ProfileName => "ProfileName",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Field::Handle => "Handle",
            Field::ProfileName => "Profile name",
        }
    }
}

/// The nine matching steps in canonical (most to least precise) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[repr(u8)]
pub enum MatchStep {
    HandleLastNameFirstToken = 1,
    HandleFullNameExact = 2,
    HandleLastNameInitials = 3,
    HandleLastNameFirstInitial = 4,
    ProfileFullNameExact = 5,
    ProfileLastNameFirstToken = 6,
    ProfileFullNameSubstring = 7,
    ProfileLastNameInitials = 8,
    ProfileLastNameFirstInitial = 9,
}

impl MatchStep {
    pub const ALL: [MatchStep; 9] = [
        MatchStep::HandleLastNameFirstToken,
        MatchStep::HandleFullNameExact,
        MatchStep::HandleLastNameInitials,
        MatchStep::HandleLastNameFirstInitial,
        MatchStep::ProfileFullNameExact,
        MatchStep::ProfileLastNameFirstToken,
        MatchStep::ProfileFullNameSubstring,
        MatchStep::ProfileLastNameInitials,
        MatchStep::ProfileLastNameFirstInitial,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(usize::from(id).checked_sub(1)?).copied()
    }

    pub fn criteria(self) -> Criteria {
        use MatchStep::*;
        match self {
            HandleFullNameExact | ProfileFullNameExact => Criteria::FullNameExact,
            ProfileFullNameSubstring => Criteria::FullNameSubstring,
            HandleLastNameInitials | ProfileLastNameInitials => Criteria::LastNameInitials,
            HandleLastNameFirstToken | ProfileLastNameFirstToken => Criteria::LastNameFirstToken,
            HandleLastNameFirstInitial | ProfileLastNameFirstInitial => {
                Criteria::LastNameFirstInitial
            }
        }
    }

    pub fn field(self) -> Field {
        if self.id() <= 4 {
            Field::Handle
        } else {
            Field::ProfileName
        }
    }
}

impl fmt::Display for MatchStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.criteria().as_str(), self.field().as_str())
    }
}

/// Sort and deduplicate a step selection into canonical order.
pub fn canonical_steps(steps: &[MatchStep]) -> Vec<MatchStep> {
    let mut steps = steps.to_vec();
    steps.sort_unstable();
    steps.dedup();
    steps
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CandidatePair {
    pub author_id: Id,
    pub tweeter_id: Id,
    /// Sorted, never empty.
    pub shared_dois: Vec<Id>,
}

/// Cross product of authors and tweeters under every DOI present on both
/// sides, merged per pair and sorted by `(author_id, tweeter_id)`.
pub fn generate_candidates(index: &DoiIndex) -> Vec<CandidatePair> {
    let mut triples: Vec<(Id, Id, Id)> = index
        .authors_by_doi
        .par_iter()
        .filter_map(|(doi, authors)| {
            index
                .tweeters_by_doi
                .get(doi)
                .map(|tweeters| (doi, authors, tweeters))
        })
        .flat_map_iter(|(doi, authors, tweeters)| {
            authors.iter().flat_map(move |a| {
                tweeters
                    .iter()
                    .map(move |t| (a.clone(), t.clone(), doi.clone()))
            })
        })
        .collect();
    triples.par_sort_unstable();

    let mut candidates: Vec<CandidatePair> = Vec::new();
    for (author_id, tweeter_id, doi) in triples {
        match candidates.last_mut() {
            Some(last) if last.author_id == author_id && last.tweeter_id == tweeter_id => {
                last.shared_dois.push(doi);
            }
            _ => candidates.push(CandidatePair {
                author_id,
                tweeter_id,
                shared_dois: vec![doi],
            }),
        }
    }
    candidates
}

/// Name forms of an author usable for matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorForms {
    pub author_id: Id,
    pub name: NormalizedName,
    pub variants: Vec<NameVariant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorSkip {
    EmptyName,
    SingleToken,
}

impl AuthorForms {
    /// Authors need at least two name tokens; single tokens cannot be split
    /// into first and last names.
    pub fn new(author: &AuthorRecord, honorifics: &Honorifics) -> Result<Self, AuthorSkip> {
        let name = normalize_name_with(&author.display_name, honorifics)
            .map_err(|_| AuthorSkip::EmptyName)?;
        if name.len() < 2 {
            return Err(AuthorSkip::SingleToken);
        }
        let variants = expand_variants(&author.author_id, &name);
        Ok(AuthorForms {
            author_id: author.author_id.clone(),
            name,
            variants,
        })
    }
}

/// Handle and profile-name forms of a tweeter. Either side may be unusable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweeterForms {
    pub tweeter_id: Id,
    /// Normalized handle; empty when unusable.
    pub handle: String,
    pub profile: Option<NormalizedName>,
    pub variants: Vec<NameVariant>,
}

impl TweeterForms {
    pub fn new(tweeter: &TweeterProfile, honorifics: &Honorifics) -> Self {
        let profile = normalize_name_with(&tweeter.profile_name, honorifics).ok();
        let variants = profile
            .as_ref()
            .map(|p| expand_variants(&tweeter.tweeter_id, p))
            .unwrap_or_default();
        TweeterForms {
            tweeter_id: tweeter.tweeter_id.clone(),
            handle: normalize_handle(&tweeter.handle),
            profile,
            variants,
        }
    }
}

/// Which author form and which tweeter form produced a match.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Witness {
    pub author: String,
    pub tweeter: String,
}

fn handle_prefix(step: MatchStep, v: &NameVariant) -> &str {
    match step.criteria() {
        Criteria::LastNameInitials => &v.initials,
        Criteria::LastNameFirstToken => &v.first_token,
        _ => unreachable!("not a variant handle step"),
    }
}

fn variant_key_equal(criteria: Criteria, a: &NameVariant, b: &NameVariant) -> bool {
    a.last_name == b.last_name
        && match criteria {
            Criteria::LastNameInitials => a.initials == b.initials,
            Criteria::LastNameFirstToken => a.first_token == b.first_token,
            Criteria::LastNameFirstInitial => a.first_initial == b.first_initial,
            _ => unreachable!("not a variant criterion"),
        }
}

/// Apply one step's rule to an author and a tweeter.
///
/// Author variants are tried in split order, and for each of them tweeter
/// variants in split order; the first hit is the witness.
pub fn step_matches(
    step: MatchStep,
    author: &AuthorForms,
    tweeter: &TweeterForms,
) -> Option<Witness> {
    use MatchStep::*;
    match step {
        HandleFullNameExact => {
            if tweeter.handle.is_empty() || author.name.concat() != tweeter.handle {
                return None;
            }
            Some(Witness {
                author: author.name.joined(),
                tweeter: tweeter.handle.clone(),
            })
        }
        HandleLastNameFirstToken | HandleLastNameInitials | HandleLastNameFirstInitial => {
            if tweeter.handle.is_empty() {
                return None;
            }
            author.variants.iter().find_map(|v| {
                let form = match step {
                    HandleLastNameFirstInitial => format!("{}{}", v.first_initial, v.last_concat()),
                    _ => format!("{}{}", handle_prefix(step, v), v.last_concat()),
                };
                (form == tweeter.handle).then(|| Witness {
                    author: v.render(),
                    tweeter: tweeter.handle.clone(),
                })
            })
        }
        ProfileFullNameExact => {
            let profile = tweeter.profile.as_ref()?;
            (profile.joined() == author.name.joined()).then(|| Witness {
                author: author.name.joined(),
                tweeter: profile.joined(),
            })
        }
        ProfileFullNameSubstring => {
            let profile = tweeter.profile.as_ref()?;
            let needle = author.name.tokens();
            profile
                .tokens()
                .windows(needle.len())
                .any(|w| w == needle)
                .then(|| Witness {
                    author: author.name.joined(),
                    tweeter: profile.joined(),
                })
        }
        ProfileLastNameInitials | ProfileLastNameFirstToken | ProfileLastNameFirstInitial => {
            let criteria = step.criteria();
            author.variants.iter().find_map(|a| {
                tweeter
                    .variants
                    .iter()
                    .find(|b| variant_key_equal(criteria, a, b))
                    .map(|b| Witness {
                        author: a.render(),
                        tweeter: b.render(),
                    })
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MatchedPair {
    pub author_id: Id,
    pub tweeter_id: Id,
    pub step: MatchStep,
    pub matched_author_variant: String,
    pub matched_tweeter_value: String,
}

/// Distinct authors, distinct tweeters and pairs in a pair set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub authors: usize,
    pub tweeters: usize,
    pub pairs: usize,
}

impl PairCounts {
    pub fn of<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a Id, &'a Id)>,
    {
        let mut authors = HashSet::new();
        let mut tweeters = HashSet::new();
        let mut seen = HashSet::new();
        for (a, t) in pairs {
            authors.insert(a);
            tweeters.insert(t);
            seen.insert((a, t));
        }
        PairCounts {
            authors: authors.len(),
            tweeters: tweeters.len(),
            pairs: seen.len(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOutcome {
    /// Steps that were run, in canonical order.
    pub steps: Vec<MatchStep>,
    /// Pairs first caught at each step, sorted by `(author_id, tweeter_id)`.
    pub new_pairs_by_step: BTreeMap<MatchStep, Vec<MatchedPair>>,
    /// Counts over the union of pairs up to and including each step.
    pub cumulative_by_step: BTreeMap<MatchStep, PairCounts>,
    /// All matched pairs, sorted by `(author_id, tweeter_id)`.
    pub combined: Vec<MatchedPair>,
}

impl MatchOutcome {
    /// Assemble an outcome from per-step new pairs.
    pub fn from_new_pairs(
        steps: &[MatchStep],
        mut new_pairs_by_step: BTreeMap<MatchStep, Vec<MatchedPair>>,
    ) -> Self {
        let steps = canonical_steps(steps);
        let mut authors = HashSet::new();
        let mut tweeters = HashSet::new();
        let mut pairs = 0;
        let mut cumulative_by_step = BTreeMap::new();
        let mut combined = Vec::new();
        for step in &steps {
            let new_pairs = new_pairs_by_step.entry(*step).or_default();
            new_pairs.sort_unstable_by(|x, y| {
                (&x.author_id, &x.tweeter_id).cmp(&(&y.author_id, &y.tweeter_id))
            });
            for pair in new_pairs.iter() {
                authors.insert(pair.author_id.clone());
                tweeters.insert(pair.tweeter_id.clone());
            }
            pairs += new_pairs.len();
            cumulative_by_step.insert(
                *step,
                PairCounts {
                    authors: authors.len(),
                    tweeters: tweeters.len(),
                    pairs,
                },
            );
            combined.extend(new_pairs.iter().cloned());
        }
        combined.sort_unstable_by(|x, y| {
            (&x.author_id, &x.tweeter_id).cmp(&(&y.author_id, &y.tweeter_id))
        });
        MatchOutcome {
            steps,
            new_pairs_by_step,
            cumulative_by_step,
            combined,
        }
    }

    pub fn combined_counts(&self) -> PairCounts {
        PairCounts::of(self.combined.iter().map(|p| (&p.author_id, &p.tweeter_id)))
    }

    /// Pairs in export order: `(step_id, author_id, tweeter_id)`.
    pub fn export_order(&self) -> Vec<&MatchedPair> {
        self.new_pairs_by_step.values().flatten().collect()
    }

    /// Check the accounting invariants: the per-step sets partition the
    /// combined set, each pair carries the step it was filed under,
    /// cumulative counts never decrease and the last one equals the
    /// combined counts.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut seen: HashMap<(&Id, &Id), MatchStep> = HashMap::new();
        for (step, pairs) in &self.new_pairs_by_step {
            for pair in pairs {
                if pair.step != *step {
                    return Err(format!(
                        "pair ({}, {}) filed under step {} but labelled {}",
                        pair.author_id,
                        pair.tweeter_id,
                        step.id(),
                        pair.step.id()
                    ));
                }
                if let Some(earlier) = seen.insert((&pair.author_id, &pair.tweeter_id), *step) {
                    return Err(format!(
                        "pair ({}, {}) appears under steps {} and {}",
                        pair.author_id,
                        pair.tweeter_id,
                        earlier.id(),
                        step.id()
                    ));
                }
            }
        }
        if seen.len() != self.combined.len()
            || self
                .combined
                .iter()
                .any(|p| seen.get(&(&p.author_id, &p.tweeter_id)) != Some(&p.step))
        {
            return Err("combined set differs from the union of per-step sets".into());
        }
        let mut previous = PairCounts::default();
        for (step, counts) in &self.cumulative_by_step {
            if counts.pairs < previous.pairs
                || counts.authors < previous.authors
                || counts.tweeters < previous.tweeters
            {
                return Err(format!("cumulative counts decrease at step {}", step.id()));
            }
            previous = *counts;
        }
        let last = self
            .cumulative_by_step
            .values()
            .next_back()
            .copied()
            .unwrap_or_default();
        if last != self.combined_counts() {
            return Err(format!(
                "final cumulative row {last:?} differs from combined {:?}",
                self.combined_counts()
            ));
        }
        Ok(())
    }
}

type Key = u32;

#[derive(Default)]
struct Interner {
    ids: HashMap<Box<str>, Key>,
}

impl Interner {
    fn key(&mut self, s: &str) -> Key {
        if let Some(&k) = self.ids.get(s) {
            return k;
        }
        let k = Key::try_from(self.ids.len()).expect("more than u32::MAX distinct keys");
        self.ids.insert(s.into(), k);
        k
    }
}

/// Per-variant comparison keys, one list per criterion, in split order.
#[derive(Debug, Default)]
struct VariantKeys {
    last_first_token: Vec<Key>,
    last_initials: Vec<Key>,
    last_first_initial: Vec<Key>,
}

impl VariantKeys {
    fn build(variants: &[NameVariant], interner: &mut Interner) -> Self {
        let mut keys = VariantKeys::default();
        for v in variants {
            keys.last_first_token
                .push(interner.key(&format!("{}\u{1f}{}", v.last_name, v.first_token)));
            keys.last_initials
                .push(interner.key(&format!("{}\u{1f}{}", v.last_name, v.initials)));
            keys.last_first_initial
                .push(interner.key(&format!("{}\u{1f}{}", v.last_name, v.first_initial)));
        }
        keys
    }

    fn for_criteria(&self, criteria: Criteria) -> &[Key] {
        match criteria {
            Criteria::LastNameFirstToken => &self.last_first_token,
            Criteria::LastNameInitials => &self.last_initials,
            Criteria::LastNameFirstInitial => &self.last_first_initial,
            _ => unreachable!("not a variant criterion"),
        }
    }
}

#[derive(Debug)]
struct AuthorKeys {
    tokens: Vec<Key>,
    concat_full: Key,
    handle_first_token: Vec<Key>,
    handle_initials: Vec<Key>,
    handle_first_initial: Vec<Key>,
    variants: VariantKeys,
}

#[derive(Debug)]
struct TweeterKeys {
    handle: Option<Key>,
    tokens: Vec<Key>,
    variants: VariantKeys,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Full,
    Handle,
    Variant(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Hit {
    author: Side,
    tweeter: Side,
}

/// Tallies of records that cannot take part in some or all steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FormTallies {
    pub authors_empty_name: usize,
    pub authors_single_token: usize,
    pub tweeters_without_handle: usize,
    pub tweeters_without_profile: usize,
}

/// Name forms and interned comparison keys for every usable author and
/// every tweeter. Read-only once built.
pub struct VariantTables {
    author_index: HashMap<Id, u32>,
    authors: Vec<AuthorForms>,
    author_keys: Vec<AuthorKeys>,
    tweeter_index: HashMap<Id, u32>,
    tweeters: Vec<TweeterForms>,
    tweeter_keys: Vec<TweeterKeys>,
    pub tallies: FormTallies,
}

impl VariantTables {
    pub fn build(
        authors: &[AuthorRecord],
        tweeters: &[TweeterProfile],
        honorifics: &Honorifics,
    ) -> Self {
        let author_forms: Vec<Result<AuthorForms, AuthorSkip>> = authors
            .par_iter()
            .map(|a| AuthorForms::new(a, honorifics))
            .collect();
        let tweeter_forms: Vec<TweeterForms> = tweeters
            .par_iter()
            .map(|t| TweeterForms::new(t, honorifics))
            .collect();

        let mut tallies = FormTallies::default();
        let mut interner = Interner::default();
        let mut tables = VariantTables {
            author_index: HashMap::with_capacity(authors.len()),
            authors: Vec::with_capacity(authors.len()),
            author_keys: Vec::with_capacity(authors.len()),
            tweeter_index: HashMap::with_capacity(tweeters.len()),
            tweeters: Vec::with_capacity(tweeters.len()),
            tweeter_keys: Vec::with_capacity(tweeters.len()),
            tallies,
        };

        for forms in author_forms {
            let forms = match forms {
                Ok(forms) => forms,
                Err(AuthorSkip::EmptyName) => {
                    tallies.authors_empty_name += 1;
                    continue;
                }
                Err(AuthorSkip::SingleToken) => {
                    tallies.authors_single_token += 1;
                    continue;
                }
            };
            let mut handle_first_token = Vec::with_capacity(forms.variants.len());
            let mut handle_initials = Vec::with_capacity(forms.variants.len());
            let mut handle_first_initial = Vec::with_capacity(forms.variants.len());
            for v in &forms.variants {
                let last = v.last_concat();
                handle_first_token.push(interner.key(&format!("{}{last}", v.first_token)));
                handle_initials.push(interner.key(&format!("{}{last}", v.initials)));
                handle_first_initial.push(interner.key(&format!("{}{last}", v.first_initial)));
            }
            let keys = AuthorKeys {
                tokens: forms
                    .name
                    .tokens()
                    .iter()
                    .map(|t| interner.key(t))
                    .collect(),
                concat_full: interner.key(&forms.name.concat()),
                handle_first_token,
                handle_initials,
                handle_first_initial,
                variants: VariantKeys::build(&forms.variants, &mut interner),
            };
            let index = tables.authors.len() as u32;
            tables.author_index.insert(forms.author_id.clone(), index);
            tables.authors.push(forms);
            tables.author_keys.push(keys);
        }

        for forms in tweeter_forms {
            if forms.handle.is_empty() {
                tallies.tweeters_without_handle += 1;
            }
            if forms.profile.is_none() {
                tallies.tweeters_without_profile += 1;
            }
            let keys = TweeterKeys {
                handle: (!forms.handle.is_empty()).then(|| interner.key(&forms.handle)),
                tokens: forms
                    .profile
                    .iter()
                    .flat_map(|p| p.tokens())
                    .map(|t| interner.key(t))
                    .collect(),
                variants: VariantKeys::build(&forms.variants, &mut interner),
            };
            let index = tables.tweeters.len() as u32;
            tables.tweeter_index.insert(forms.tweeter_id.clone(), index);
            tables.tweeters.push(forms);
            tables.tweeter_keys.push(keys);
        }
        tables.tallies = tallies;
        tables
    }

    pub fn author(&self, author_id: &str) -> Option<&AuthorForms> {
        self.author_index
            .get(author_id)
            .map(|&i| &self.authors[i as usize])
    }

    pub fn tweeter(&self, tweeter_id: &str) -> Option<&TweeterForms> {
        self.tweeter_index
            .get(tweeter_id)
            .map(|&i| &self.tweeters[i as usize])
    }

    pub fn authors(&self) -> &[AuthorForms] {
        &self.authors
    }

    pub fn tweeters(&self) -> &[TweeterForms] {
        &self.tweeters
    }

    fn resolve(&self, candidate: &CandidatePair) -> Option<(u32, u32)> {
        Some((
            *self.author_index.get(&candidate.author_id)?,
            *self.tweeter_index.get(&candidate.tweeter_id)?,
        ))
    }

    fn first_hit(author: &[Key], tweeter: &[Key]) -> Option<(u32, u32)> {
        author.iter().enumerate().find_map(|(i, k)| {
            tweeter
                .iter()
                .position(|t| t == k)
                .map(|j| (i as u32, j as u32))
        })
    }

    fn match_keys(&self, step: MatchStep, author: u32, tweeter: u32) -> Option<Hit> {
        use MatchStep::*;
        let a = &self.author_keys[author as usize];
        let t = &self.tweeter_keys[tweeter as usize];
        match step {
            HandleFullNameExact => (t.handle? == a.concat_full).then_some(Hit {
                author: Side::Full,
                tweeter: Side::Handle,
            }),
            HandleLastNameFirstToken | HandleLastNameInitials | HandleLastNameFirstInitial => {
                let handle = t.handle?;
                let forms = match step {
                    HandleLastNameFirstToken => &a.handle_first_token,
                    HandleLastNameInitials => &a.handle_initials,
                    _ => &a.handle_first_initial,
                };
                forms.iter().position(|k| *k == handle).map(|i| Hit {
                    author: Side::Variant(i as u32),
                    tweeter: Side::Handle,
                })
            }
            ProfileFullNameExact => (!t.tokens.is_empty() && t.tokens == a.tokens).then_some(Hit {
                author: Side::Full,
                tweeter: Side::Full,
            }),
            ProfileFullNameSubstring => t
                .tokens
                .windows(a.tokens.len())
                .any(|w| w == a.tokens.as_slice())
                .then_some(Hit {
                    author: Side::Full,
                    tweeter: Side::Full,
                }),
            ProfileLastNameInitials | ProfileLastNameFirstToken | ProfileLastNameFirstInitial => {
                let criteria = step.criteria();
                Self::first_hit(
                    a.variants.for_criteria(criteria),
                    t.variants.for_criteria(criteria),
                )
                .map(|(i, j)| Hit {
                    author: Side::Variant(i),
                    tweeter: Side::Variant(j),
                })
            }
        }
    }

    fn render(&self, step: MatchStep, author: u32, tweeter: u32, hit: Hit) -> MatchedPair {
        let a = &self.authors[author as usize];
        let t = &self.tweeters[tweeter as usize];
        let matched_author_variant = match hit.author {
            Side::Variant(i) => a.variants[i as usize].render(),
            _ => a.name.joined(),
        };
        let matched_tweeter_value = match hit.tweeter {
            Side::Handle => t.handle.clone(),
            Side::Variant(j) => t.variants[j as usize].render(),
            Side::Full => t.profile.as_ref().map(|p| p.joined()).unwrap_or_default(),
        };
        MatchedPair {
            author_id: a.author_id.clone(),
            tweeter_id: t.tweeter_id.clone(),
            step,
            matched_author_variant,
            matched_tweeter_value,
        }
    }
}

/// Run the enabled steps hierarchically over the candidates.
///
/// Steps are applied in canonical order whatever order `steps` lists them
/// in. Each step is a barrier: its hits are sealed before the next step
/// starts. Parallel within a step; the result does not depend on the size
/// of the thread pool.
pub fn run_hierarchy(
    candidates: &[CandidatePair],
    tables: &VariantTables,
    steps: &[MatchStep],
) -> MatchOutcome {
    let steps = canonical_steps(steps);
    let resolved: Vec<Option<(u32, u32)>> =
        candidates.par_iter().map(|c| tables.resolve(c)).collect();
    let mut sealed: Vec<Option<(MatchStep, Hit)>> = vec![None; candidates.len()];

    for &step in &steps {
        let hits: Vec<(usize, Hit)> = resolved
            .par_iter()
            .zip(sealed.par_iter())
            .enumerate()
            .filter_map(|(i, (pair, seal))| {
                if seal.is_some() {
                    return None;
                }
                let (a, t) = (*pair)?;
                tables.match_keys(step, a, t).map(|hit| (i, hit))
            })
            .collect();
        for (i, hit) in hits {
            sealed[i] = Some((step, hit));
        }
    }

    let mut new_pairs_by_step: BTreeMap<MatchStep, Vec<MatchedPair>> = BTreeMap::new();
    let rendered: Vec<MatchedPair> = sealed
        .par_iter()
        .zip(resolved.par_iter())
        .filter_map(|(seal, pair)| {
            let (step, hit) = (*seal)?;
            let (a, t) = (*pair)?;
            Some(tables.render(step, a, t, hit))
        })
        .collect();
    for pair in rendered {
        new_pairs_by_step.entry(pair.step).or_default().push(pair);
    }
    MatchOutcome::from_new_pairs(&steps, new_pairs_by_step)
}

/// Each step evaluated on its own over every candidate, ignoring the
/// hierarchy.
pub fn run_independent(
    candidates: &[CandidatePair],
    tables: &VariantTables,
    steps: &[MatchStep],
) -> BTreeMap<MatchStep, Vec<MatchedPair>> {
    let resolved: Vec<Option<(u32, u32)>> =
        candidates.par_iter().map(|c| tables.resolve(c)).collect();
    canonical_steps(steps)
        .into_iter()
        .map(|step| {
            let mut pairs: Vec<MatchedPair> = resolved
                .par_iter()
                .filter_map(|pair| {
                    let (a, t) = (*pair)?;
                    tables
                        .match_keys(step, a, t)
                        .map(|hit| tables.render(step, a, t, hit))
                })
                .collect();
            pairs.sort_unstable_by(|x, y| {
                (&x.author_id, &x.tweeter_id).cmp(&(&y.author_id, &y.tweeter_id))
            });
            (step, pairs)
        })
        .collect()
}

pub const MATCHES_HEADER: [&str; 7] = [
    "author_id",
    "tweeter_id",
    "step_id",
    "criteria",
    "field",
    "matched_author_variant",
    "matched_tweeter_value",
];

/// Write the match export sorted by `(step_id, author_id, tweeter_id)`.
pub fn write_matches(path: &Path, outcome: &MatchOutcome) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    writer
        .write_record(MATCHES_HEADER)
        .map_err(|e| Error::csv(path, e))?;
    for pair in outcome.export_order() {
        let step = pair.step;
        writer
            .write_record([
                &*pair.author_id,
                &*pair.tweeter_id,
                &step.id().to_string(),
                step.criteria().as_str(),
                step.field().as_str(),
                &pair.matched_author_variant,
                &pair.matched_tweeter_value,
            ])
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
