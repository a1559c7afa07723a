//! Seeded synthetic corpora with planted author/tweeter links.
//!
//! Author tokens never contain `x` or `q`, and every author's final name
//! token is a unique eight-letter surname (unless a homonym copies it).
//! Planted tweeters render their author's name through one step pattern.
//! Random distractors draw every token from an alphabet that always
//! contains `x` or `q`, so they cannot match any author. Homonym
//! distractors copy an author's surname and tweet one of that author's
//! papers.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{
    AuthorRecord, ConceptScore, Corpus, GoldenPair, Id, TweetEvent, TweeterProfile, WorkRecord,
};
use crate::error::{Error, Result};
use crate::matcher::MatchStep;
use crate::namekit::{expand_variants, normalize_name};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthParams {
    pub authors: usize,
    /// Authors that get a planted tweeter account.
    pub planted: usize,
    pub distractors: usize,
    /// Fraction of distractors that copy an author's surname, and of
    /// authors that share another author's surname.
    pub homonym_rate: f64,
    pub works: usize,
    /// Total events to reach by padding with random tweets; the planted
    /// and distractor tweets come first regardless.
    pub events: usize,
    /// Planted step classes, assigned round-robin.
    pub classes: Vec<MatchStep>,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            authors: 200,
            planted: 100,
            distractors: 100,
            homonym_rate: 0.1,
            works: 200,
            events: 0,
            classes: MatchStep::ALL.to_vec(),
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.authors == 0 {
            return fail("authors must be positive");
        }
        if self.works == 0 {
            return fail("works must be positive");
        }
        if self.planted > self.authors {
            return fail("planted cannot exceed authors");
        }
        if !(0.0..=1.0).contains(&self.homonym_rate) {
            return fail("homonym_rate must lie in [0, 1]");
        }
        if self.planted > 0 && self.classes.is_empty() {
            return fail("at least one planted step class is required");
        }
        if self.authors > 10_000_000 {
            return fail("authors exceeds the surname space");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PlantedPair {
    pub author_id: Id,
    pub tweeter_id: Id,
    /// Step pattern used to render the tweeter.
    pub class: MatchStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// `golden` holds the planted pairs.
    pub corpus: Corpus,
    pub planted: Vec<PlantedPair>,
}

const GIVEN: [&str; 40] = [
    "john", "mary", "anna", "peter", "maria", "david", "laura", "james", "sofia", "lucas", "elena",
    "marco", "paula", "henrik", "ingrid", "tomas", "carla", "diego", "fatima", "omar", "yuki",
    "kenji", "aisha", "ravi", "priya", "nora", "liam", "emma", "oliver", "chloe", "mateo", "lena",
    "jonas", "sara", "ivan", "olga", "pablo", "rosa", "hugo", "ines",
];

const DISTRACTOR_GIVEN: [&str; 12] = [
    "xavi", "quinn", "roxy", "maxim", "felix", "alexa", "dexter", "xena", "quentin", "jax",
    "xiomara", "oqba",
];

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

const FILLERS: [&str; 9] = [
    "lab", "science", "fan", "official", "news", "research", "group", "team", "blog",
];

const DISCIPLINES: [&str; 19] = [
    "Medicine",
    "Biology",
    "Psychology",
    "Computer science",
    "Political science",
    "Chemistry",
    "Materials science",
    "Environmental science",
    "Business",
    "Sociology",
    "Geography",
    "Economics",
    "Geology",
    "Physics",
    "Art",
    "History",
    "Philosophy",
    "Mathematics",
    "Engineering",
];

const COUNTRIES: [&str; 22] = [
    "US", "GB", "AU", "CA", "ES", "DE", "FR", "NL", "IN", "IT", "BR", "CH", "SE", "IE", "BE", "CN",
    "FI", "DK", "JP", "MX", "ZA", "KR",
];

const DOI_PREFIXES: [&str; 4] = ["10.1000", "10.1371", "10.1038", "10.5555"];

fn syllable(rng: &mut ChaCha8Rng) -> [char; 2] {
    [
        *CONSONANTS.choose(rng).unwrap() as char,
        *VOWELS.choose(rng).unwrap() as char,
    ]
}

fn surname(rng: &mut ChaCha8Rng) -> String {
    (0..4).flat_map(|_| syllable(rng)).collect()
}

fn distractor_surname(rng: &mut ChaCha8Rng) -> String {
    let mut s: String = (0..2).flat_map(|_| syllable(rng)).collect();
    s.push(if rng.gen_bool(0.5) { 'x' } else { 'q' });
    s.extend((0..2).flat_map(|_| syllable(rng)));
    s
}

fn capitalize(token: &str) -> String {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Render tokens for display, sometimes with accents or a title that
/// normalization removes again.
fn display(tokens: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<String> = tokens.iter().map(|t| capitalize(t)).collect();
    if rng.gen_bool(0.1) {
        let i = rng.gen_range(0..words.len());
        words[i] = words[i].replacen('a', "á", 1).replacen('e', "é", 1);
    }
    if rng.gen_bool(0.05) {
        words.insert(0, "Dr.".to_string());
    }
    words.join(" ")
}

fn unusable_handle(rng: &mut ChaCha8Rng) -> String {
    format!("_{}", rng.gen_range(10..100_000))
}

const UNUSABLE_PROFILE: &str = "📚";

fn event(events: &mut Vec<TweetEvent>, tweeter_id: &Id, doi: &Id) {
    events.push(TweetEvent {
        tweet_id: Id::from(format!("tw{:09}", events.len() + 1)),
        tweeter_id: tweeter_id.clone(),
        doi: doi.clone(),
    });
}

struct Author {
    id: Id,
    tokens: Vec<String>,
    works: Vec<usize>,
}

pub fn generate_synthetic_corpus(seed: u64, params: &SynthParams) -> Result<SyntheticCorpus> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut surnames: HashSet<String> = HashSet::new();
    let mut authors: Vec<Author> = Vec::with_capacity(params.authors);
    let mut records: Vec<AuthorRecord> = Vec::with_capacity(params.authors);
    for i in 0..params.authors {
        let last = if i > 0 && rng.gen_bool(params.homonym_rate) {
            authors[rng.gen_range(0..i)].tokens.last().unwrap().clone()
        } else {
            loop {
                let s = surname(&mut rng);
                if surnames.insert(s.clone()) {
                    break s;
                }
            }
        };
        let mut tokens = vec![GIVEN.choose(&mut rng).unwrap().to_string()];
        if rng.gen_bool(0.4) {
            tokens.push(GIVEN.choose(&mut rng).unwrap().to_string());
        }
        if rng.gen_bool(0.1) {
            tokens.push((0..3).flat_map(|_| syllable(&mut rng)).collect());
        }
        tokens.push(last);
        let id = Id::from(format!("A{:07}", i + 1));
        let country = rng.gen_bool(0.85).then(|| {
            COUNTRIES[rng
                .gen_range(0..COUNTRIES.len())
                .min(rng.gen_range(0..COUNTRIES.len()))]
            .to_string()
        });
        records.push(AuthorRecord {
            author_id: id.clone(),
            display_name: display(&tokens, &mut rng),
            orcid: rng.gen_bool(0.05).then(|| {
                format!(
                    "0000-0002-{:04}-{:04}",
                    rng.gen_range(0..10_000),
                    i % 10_000
                )
            }),
            country,
        });
        authors.push(Author {
            id,
            tokens,
            works: Vec::new(),
        });
    }

    let mut works: Vec<WorkRecord> = Vec::with_capacity(params.works);
    let mut work_authors: Vec<Vec<usize>> = vec![Vec::new(); params.works];
    for (a, _) in authors.iter().enumerate() {
        work_authors[a % params.works].push(a);
    }
    for (w, list) in work_authors.iter_mut().enumerate() {
        for _ in 0..rng.gen_range(0..3) {
            let a = rng.gen_range(0..params.authors);
            if !list.contains(&a) {
                list.push(a);
            }
        }
        if list.is_empty() {
            list.push(rng.gen_range(0..params.authors));
        }
        let doi = if w > 0 && rng.gen_bool(0.02) {
            works[w - 1].doi.clone()
        } else {
            Id::from(format!(
                "{}/syn.{}",
                DOI_PREFIXES.choose(&mut rng).unwrap(),
                w + 1
            ))
        };
        let mut concepts: Vec<ConceptScore> = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            let name = DISCIPLINES[rng
                .gen_range(0..DISCIPLINES.len())
                .min(rng.gen_range(0..DISCIPLINES.len()))];
            if concepts.iter().all(|c| c.name != name) {
                concepts.push(ConceptScore {
                    name: name.to_string(),
                    level: 0,
                    score: f64::from(rng.gen_range(0..=1000u32)) / 1000.0,
                });
            }
        }
        if rng.gen_bool(0.3) {
            concepts.push(ConceptScore {
                name: "Subfield".to_string(),
                level: 1,
                score: f64::from(rng.gen_range(0..=1000u32)) / 1000.0,
            });
        }
        for &a in list.iter() {
            authors[a].works.push(w);
        }
        works.push(WorkRecord {
            work_id: Id::from(format!("W{:08}", w + 1)),
            doi,
            author_ids: list.iter().map(|&a| authors[a].id.clone()).collect(),
            concepts,
        });
    }

    let mut tweeters: Vec<TweeterProfile> = Vec::new();
    let mut events: Vec<TweetEvent> = Vec::new();
    let mut planted: Vec<PlantedPair> = Vec::with_capacity(params.planted);
    let next_tweeter_id =
        |tweeters: &Vec<TweeterProfile>| Id::from(format!("T{:07}", tweeters.len() + 1));

    let mut order: Vec<usize> = (0..params.authors).collect();
    order.shuffle(&mut rng);
    for (k, &a) in order.iter().take(params.planted).enumerate() {
        let class = params.classes[k % params.classes.len()];
        let author = &authors[a];
        let name = normalize_name(&author.tokens.join(" ")).expect("generated names are letters");
        let variants = expand_variants(&author.id, &name);
        let v = variants
            .choose(&mut rng)
            .expect("generated names have two or more tokens");
        let profile_tokens = |tokens: Vec<String>, rng: &mut ChaCha8Rng| display(&tokens, rng);
        let split = |s: &str| s.split(' ').map(str::to_string).collect::<Vec<_>>();
        let (handle, profile_name) = match class {
            MatchStep::HandleLastNameFirstToken => (
                format!("@{}{}", capitalize(&v.first_token), v.last_concat()),
                UNUSABLE_PROFILE.to_string(),
            ),
            MatchStep::HandleFullNameExact => (name.concat(), UNUSABLE_PROFILE.to_string()),
            MatchStep::HandleLastNameInitials => (
                format!(
                    "{}{}",
                    v.initials.to_uppercase(),
                    capitalize(&v.last_concat())
                ),
                UNUSABLE_PROFILE.to_string(),
            ),
            MatchStep::HandleLastNameFirstInitial => (
                format!(
                    "{}{}{}",
                    v.first_initial,
                    v.last_concat(),
                    rng.gen_range(0..100)
                ),
                UNUSABLE_PROFILE.to_string(),
            ),
            MatchStep::ProfileFullNameExact => {
                let mut profile = display(&author.tokens, &mut rng);
                if rng.gen_bool(0.3) {
                    profile.push_str(", PhD");
                }
                (unusable_handle(&mut rng), profile)
            }
            MatchStep::ProfileLastNameFirstToken => {
                let mut tokens = vec![v.first_token.clone()];
                tokens.extend(split(&v.last_name));
                (unusable_handle(&mut rng), profile_tokens(tokens, &mut rng))
            }
            MatchStep::ProfileFullNameSubstring => {
                let filler = FILLERS.choose(&mut rng).unwrap().to_string();
                let mut tokens = author.tokens.clone();
                if rng.gen_bool(0.5) {
                    tokens.push(filler);
                } else {
                    tokens.insert(0, filler);
                }
                (unusable_handle(&mut rng), profile_tokens(tokens, &mut rng))
            }
            MatchStep::ProfileLastNameInitials => {
                let initials: Vec<String> = v
                    .initials
                    .chars()
                    .map(|c| format!("{}.", c.to_uppercase()))
                    .collect();
                let last: Vec<String> = split(&v.last_name).iter().map(|t| capitalize(t)).collect();
                (
                    unusable_handle(&mut rng),
                    format!("{} {}", initials.join(" "), last.join(" ")),
                )
            }
            MatchStep::ProfileLastNameFirstInitial => {
                let mut tokens = vec![v.first_initial.to_string()];
                tokens.extend(split(&v.last_name));
                (unusable_handle(&mut rng), profile_tokens(tokens, &mut rng))
            }
        };
        let tweeter_id = next_tweeter_id(&tweeters);
        tweeters.push(TweeterProfile {
            tweeter_id: tweeter_id.clone(),
            handle,
            profile_name,
        });
        let own = &author.works;
        for _ in 0..rng.gen_range(1..=own.len().min(3)) {
            let w = *own.choose(&mut rng).unwrap();
            event(&mut events, &tweeter_id, &works[w].doi);
        }
        planted.push(PlantedPair {
            author_id: author.id.clone(),
            tweeter_id,
            class,
        });
    }

    for _ in 0..params.distractors {
        let tweeter_id = next_tweeter_id(&tweeters);
        if rng.gen_bool(params.homonym_rate) {
            let target = &authors[rng.gen_range(0..params.authors)];
            let given = GIVEN.choose(&mut rng).unwrap();
            let last = target.tokens.last().unwrap();
            let handle = if rng.gen_bool(0.5) {
                format!("{}{}", &given[..1], last)
            } else {
                unusable_handle(&mut rng)
            };
            tweeters.push(TweeterProfile {
                tweeter_id: tweeter_id.clone(),
                handle,
                profile_name: format!("{} {}", capitalize(given), capitalize(last)),
            });
            let w = *target.works.choose(&mut rng).unwrap();
            event(&mut events, &tweeter_id, &works[w].doi);
        } else {
            let given = DISTRACTOR_GIVEN.choose(&mut rng).unwrap();
            let last = distractor_surname(&mut rng);
            tweeters.push(TweeterProfile {
                tweeter_id: tweeter_id.clone(),
                handle: format!("{given}_{last}{}", rng.gen_range(0..1000)),
                profile_name: format!("{} {}", capitalize(given), capitalize(&last)),
            });
            for _ in 0..rng.gen_range(1..=3) {
                let w = rng.gen_range(0..works.len());
                event(&mut events, &tweeter_id, &works[w].doi);
            }
        }
    }

    if !tweeters.is_empty() {
        while events.len() < params.events {
            let t = rng.gen_range(0..tweeters.len());
            let w = rng.gen_range(0..works.len());
            let tweeter_id = tweeters[t].tweeter_id.clone();
            event(&mut events, &tweeter_id, &works[w].doi);
        }
    }

    let golden = planted
        .iter()
        .map(|p| GoldenPair {
            author_id: p.author_id.clone(),
            tweeter_id: p.tweeter_id.clone(),
        })
        .collect();
    Ok(SyntheticCorpus {
        corpus: Corpus {
            authors: records,
            works,
            events,
            tweeters,
            golden,
        },
        planted,
    })
}

/// Write planted pairs with their step class.
pub fn write_planted(path: &Path, planted: &[PlantedPair]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    writer
        .write_record(["author_id", "tweeter_id", "step_class"])
        .map_err(|e| Error::csv(path, e))?;
    for p in planted {
        writer
            .write_record([&*p.author_id, &*p.tweeter_id, &p.class.id().to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
