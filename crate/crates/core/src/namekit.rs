//! Personal-name normalization and first/last split variants.
//!
//! A normalized name is a sequence of lowercase letter-only tokens. A name
//! with `n` tokens yields `n - 1` variants, one per split point, each
//! carrying the initials, first initial and first token of its first-name
//! part.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::corpus::Id;
use crate::error::{EmptyName, Error, Result};

pub const DEFAULT_HONORIFICS: [&str; 15] = [
    "dr",
    "prof",
    "professor",
    "phd",
    "md",
    "msc",
    "bsc",
    "mr",
    "mrs",
    "ms",
    "sir",
    "jr",
    "sr",
    "ii",
    "iii",
];

/// Title and suffix tokens dropped from names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Honorifics(HashSet<String>);

impl Default for Honorifics {
    fn default() -> Self {
        Honorifics(DEFAULT_HONORIFICS.iter().map(|s| s.to_string()).collect())
    }
}

impl Honorifics {
    /// Build a custom list. Entries are folded the same way name tokens are,
    /// so `"Ph.D."` and `"phd"` are equivalent.
    pub fn from_list<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let none = Honorifics(HashSet::new());
        let set = entries
            .into_iter()
            .filter_map(|e| normalize_name_with(e.as_ref(), &none).ok())
            .map(|name| name.concat())
            .collect();
        Honorifics(set)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    /// Entries in sorted order.
    pub fn sorted(&self) -> Vec<&str> {
        let mut list: Vec<&str> = self.0.iter().map(String::as_str).collect();
        list.sort_unstable();
        list
    }
}

/// Lowercase, letter-only tokens of a personal name. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalizedName {
    tokens: Vec<String>,
}

impl NormalizedName {
    /// Wrap tokens that are already normalized. Returns `None` when empty.
    pub fn from_tokens<I, S>(tokens: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens
            .into_iter()
            .map(Into::into)
            .filter(|t| !t.is_empty())
            .collect();
        (!tokens.is_empty()).then_some(NormalizedName { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Space-joined form.
    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }

    /// Tokens joined with no separator.
    pub fn concat(&self) -> String {
        self.tokens.concat()
    }
}

impl fmt::Display for NormalizedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

fn is_hyphen(c: char) -> bool {
    matches!(
        c,
        '-' | '\u{2010}'..='\u{2015}' | '\u{2212}' | '\u{FE63}' | '\u{FF0D}'
    )
}

fn is_apostrophe(c: char) -> bool {
    matches!(
        c,
        '\'' | '`' | '\u{2018}' | '\u{2019}' | '\u{02BC}' | '\u{FF07}'
    )
}

pub fn normalize_name(raw: &str) -> Result<NormalizedName, EmptyName> {
    normalize_name_with(raw, &Honorifics::default())
}

/// Normalize a raw name: fold diacritics, lowercase, split hyphens, delete
/// apostrophes, drop everything but letters, and remove honorific tokens.
pub fn normalize_name_with(
    raw: &str,
    honorifics: &Honorifics,
) -> Result<NormalizedName, EmptyName> {
    let mut folded = String::with_capacity(raw.len());
    for c in raw.nfkd().filter(|c| !is_combining_mark(*c)) {
        folded.extend(c.to_lowercase());
    }
    let mut cleaned = String::with_capacity(folded.len());
    for c in folded.chars() {
        if is_hyphen(c) || c.is_whitespace() {
            cleaned.push(' ');
        } else if is_apostrophe(c) {
            continue;
        } else if c.is_alphabetic() && !is_combining_mark(c) {
            cleaned.push(c);
        }
    }
    let tokens: Vec<String> = cleaned
        .split_whitespace()
        .filter(|t| !honorifics.contains(t))
        .map(str::to_string)
        .collect();
    if tokens.is_empty() {
        Err(EmptyName)
    } else {
        Ok(NormalizedName { tokens })
    }
}

/// All tokens joined with no separator.
pub fn concat_full(name: &NormalizedName) -> String {
    name.concat()
}

/// Strip a leading `@`, lowercase, and keep letters only. An empty result
/// means the handle cannot take part in handle matching.
pub fn normalize_handle(raw: &str) -> String {
    let raw = raw.trim();
    let raw = raw.strip_prefix('@').unwrap_or(raw);
    raw.chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .collect()
}

/// One first/last decomposition of a normalized name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct NameVariant {
    pub owner_id: Id,
    pub first_name: String,
    pub last_name: String,
    pub initials: String,
    pub first_initial: char,
    pub first_token: String,
}

impl NameVariant {
    /// Last-name tokens with the separating spaces removed.
    pub fn last_concat(&self) -> String {
        self.last_name.split(' ').collect()
    }

    /// `first|last`, the form recorded as a match witness.
    pub fn render(&self) -> String {
        format!("{}|{}", self.first_name, self.last_name)
    }
}

/// One variant per split point; empty for single-token names.
pub fn expand_variants(owner_id: &Id, name: &NormalizedName) -> Vec<NameVariant> {
    let tokens = name.tokens();
    (1..tokens.len())
        .map(|split| {
            let (first, last) = tokens.split_at(split);
            let initials: String = first.iter().filter_map(|t| t.chars().next()).collect();
            NameVariant {
                owner_id: owner_id.clone(),
                first_name: first.join(" "),
                last_name: last.join(" "),
                first_initial: initials.chars().next().expect("first part is non-empty"),
                initials,
                first_token: first[0].clone(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    Author,
    Tweeter,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Author => "author",
            VariantKind::Tweeter => "tweeter",
        }
    }
}

pub const VARIANTS_HEADER: [&str; 7] = [
    "owner_id",
    "kind",
    "first_name",
    "last_name",
    "initials",
    "first_initial",
    "first_token",
];

/// Debug export of variant rows.
pub fn write_variants<'a, I>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = (VariantKind, &'a NameVariant)>,
{
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    writer
        .write_record(VARIANTS_HEADER)
        .map_err(|e| Error::csv(path, e))?;
    let mut initial = [0u8; 4];
    for (kind, v) in rows {
        writer
            .write_record([
                &*v.owner_id,
                kind.as_str(),
                &v.first_name,
                &v.last_name,
                &v.initials,
                v.first_initial.encode_utf8(&mut initial),
                &v.first_token,
            ])
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tokens(raw: &str) -> Vec<String> {
        normalize_name(raw).unwrap().tokens().to_vec()
    }

    fn name(tokens: &[&str]) -> NormalizedName {
        NormalizedName::from_tokens(tokens.iter().copied()).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(tokens("John William Smith"), ["john", "william", "smith"]);
        assert_eq!(tokens("Dr. Jane O'Brien, PhD 🧪"), ["jane", "obrien"]);
        assert_eq!(normalize_name("Dr."), Err(EmptyName));
        assert_eq!(normalize_name(""), Err(EmptyName));
        assert_eq!(normalize_name("🧪 123"), Err(EmptyName));
    }

    #[test]
    fn normalization_details() {
        assert_eq!(tokens("José Núñez-García"), ["jose", "nunez", "garcia"]);
        assert_eq!(tokens("Anne\u{2019}s  Müller\tJr."), ["annes", "muller"]);
        assert_eq!(tokens("Prof. Dr. Zoë Ångström III"), ["zoe", "angstrom"]);
        assert_eq!(tokens("John Smith Jr."), ["john", "smith"]);
        assert_eq!(tokens("Ph.D. Ann Lee"), ["ann", "lee"]);
        assert_eq!(tokens("ＪＯＨＮ"), ["john"]);
    }

    #[test]
    fn custom_honorifics() {
        let list = Honorifics::from_list(["Rev.", "Ph.D."]);
        assert!(list.contains("rev") && list.contains("phd"));
        let n = normalize_name_with("Rev. Dr. Ann Lee", &list).unwrap();
        assert_eq!(n.tokens(), ["dr", "ann", "lee"]);
    }

    #[test]
    fn variants_of_three_token_name() {
        let owner = Id::from("T");
        let variants = expand_variants(&owner, &name(&["john", "william", "smith"]));
        assert_eq!(variants.len(), 2);
        let v = &variants[0];
        assert_eq!(
            (
                &*v.first_name,
                &*v.last_name,
                &*v.initials,
                v.first_initial,
                &*v.first_token
            ),
            ("john", "william smith", "j", 'j', "john")
        );
        let v = &variants[1];
        assert_eq!(
            (
                &*v.first_name,
                &*v.last_name,
                &*v.initials,
                v.first_initial,
                &*v.first_token
            ),
            ("john william", "smith", "jw", 'j', "john")
        );
        assert_eq!(v.render(), "john william|smith");
        assert_eq!(variants[0].last_concat(), "williamsmith");
    }

    #[test]
    fn variants_of_short_names() {
        let owner = Id::from("A");
        let variants = expand_variants(&owner, &name(&["jane", "smith"]));
        assert_eq!(variants.len(), 1);
        assert_eq!(variants[0].first_name, "jane");
        assert_eq!(variants[0].last_name, "smith");
        assert_eq!(variants[0].initials, "j");
        assert_eq!(variants[0].first_token, "jane");
        assert!(expand_variants(&owner, &name(&["smith"])).is_empty());
    }

    #[test]
    fn concatenation() {
        assert_eq!(
            concat_full(&name(&["john", "william", "smith"])),
            "johnwilliamsmith"
        );
        assert_eq!(concat_full(&name(&["jane"])), "jane");
        assert_eq!(concat_full(&name(&["jw", "smith"])), "jwsmith");
    }

    #[test]
    fn handles() {
        assert_eq!(normalize_handle("@JWSmith"), "jwsmith");
        assert_eq!(normalize_handle("jwsmith"), "jwsmith");
        assert_eq!(normalize_handle("_1234_"), "");
        assert_eq!(normalize_handle("@ann_lee_42"), "annlee");
    }

    #[test]
    fn variants_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("variants.csv");
        let owner = Id::from("A1");
        let variants = expand_variants(&owner, &name(&["jane", "smith"]));
        write_variants(&path, variants.iter().map(|v| (VariantKind::Author, v))).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "owner_id,kind,first_name,last_name,initials,first_initial,first_token\n\
             A1,author,jane,smith,j,j,jane\n"
        );
    }

    fn raw_name() -> impl Strategy<Value = String> {
        let token = "[A-Za-zÀ-ÿ'’.-]{1,8}";
        prop::collection::vec(token, 1..7).prop_map(|t| t.join(" "))
    }

    proptest! {
        #[test]
        fn variant_laws(tokens in prop::collection::vec("[a-z]{1,6}", 1..7)) {
            let name = NormalizedName::from_tokens(tokens.clone()).unwrap();
            let owner = Id::from("x");
            let variants = expand_variants(&owner, &name);
            prop_assert_eq!(variants.len(), tokens.len().saturating_sub(1));
            for v in &variants {
                let expected: String = v.first_name.split(' ').filter_map(|t| t.chars().next()).collect();
                prop_assert_eq!(&v.initials, &expected);
                prop_assert_eq!(v.initials.chars().count(), v.first_name.split(' ').count());
                prop_assert_eq!(Some(v.first_initial), v.initials.chars().next());
                prop_assert_eq!(Some(v.first_token.as_str()), v.first_name.split(' ').next());
                prop_assert_eq!(format!("{} {}", v.first_name, v.last_name), name.joined());
            }
            if let Some(first) = variants.first() {
                prop_assert_eq!(format!("{}{}", first.first_token, first.last_concat()), concat_full(&name));
            }
        }

        #[test]
        fn normalization_is_idempotent(raw in raw_name()) {
            if let Ok(once) = normalize_name(&raw) {
                let twice = normalize_name(&once.joined()).unwrap();
                prop_assert_eq!(twice, once.clone());
                for t in once.tokens() {
                    prop_assert!(t.chars().all(char::is_alphabetic));
                    prop_assert!(!DEFAULT_HONORIFICS.contains(&t.as_str()));
                }
            }
        }

        #[test]
        fn normalization_never_panics(raw in "\\PC{0,40}") {
            if let Ok(once) = normalize_name(&raw) {
                prop_assert_eq!(normalize_name(&once.joined()).unwrap(), once);
            }
        }
    }
}
