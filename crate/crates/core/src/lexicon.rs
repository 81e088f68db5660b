//! Two-source semantic type lexicon (common-noun `WDN_` types and
//! proper-noun `NEL_` categories).

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::normalize_text;
use crate::error::{Error, LineError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeSource {
    #[serde(rename = "WDN")]
    Wdn,
    #[serde(rename = "NEL")]
    Nel,
}

impl TypeSource {
    pub fn prefix(self) -> &'static str {
        match self {
            TypeSource::Wdn => "WDN",
            TypeSource::Nel => "NEL",
        }
    }

    fn index(self) -> usize {
        match self {
            TypeSource::Wdn => 0,
            TypeSource::Nel => 1,
        }
    }
}

/// A semantic type rendered as `WDN_name` or `NEL_name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TypeName {
    pub source: TypeSource,
    pub name: String,
}

impl TypeName {
    pub fn new(source: TypeSource, name: &str) -> Result<Self, Error> {
        let valid = !name.is_empty()
            && name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_');
        if !valid {
            return Err(Error::BadTypeName(format!("{}_{}", source.prefix(), name)));
        }
        Ok(TypeName { source, name: name.to_string() })
    }

    pub fn wdn(name: &str) -> Self {
        TypeName::new(TypeSource::Wdn, name).expect("valid WDN type name")
    }

    pub fn nel(name: &str) -> Self {
        TypeName::new(TypeSource::Nel, name).expect("valid NEL type name")
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.source.prefix(), self.name)
    }
}

impl FromStr for TypeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (prefix, name) = s.split_once('_').ok_or_else(|| Error::BadTypeName(s.to_string()))?;
        let source = match prefix {
            "WDN" => TypeSource::Wdn,
            "NEL" => TypeSource::Nel,
            _ => return Err(Error::BadTypeName(s.to_string())),
        };
        TypeName::new(source, name).map_err(|_| Error::BadTypeName(s.to_string()))
    }
}

impl TryFrom<String> for TypeName {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<TypeName> for String {
    fn from(t: TypeName) -> String {
        t.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub phrase_key: String,
    /// Rank order; index 0 is the preferred sense.
    pub types: Vec<TypeName>,
}

/// Outcome of loading one lexicon stream.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines_read: usize,
    pub duplicates: usize,
    pub hypernym_edges: usize,
    pub errors: Vec<LineError>,
}

/// Immutable after loading; lookups are pure.
#[derive(Debug, Clone, Default)]
pub struct TypeLexicon {
    entries: HashMap<String, LexiconEntry>,
    per_source: [usize; 2],
}

/// Marker for hierarchy lines, which resolution ignores:
/// `@hypernym<TAB>TYPE<TAB>PARENT_TYPE`.
pub const HYPERNYM_MARKER: &str = "@hypernym";

impl TypeLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct phrase keys.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of `(phrase, type)` pairs contributed by a source.
    pub fn source_count(&self, source: TypeSource) -> usize {
        self.per_source[source.index()]
    }

    pub fn entry(&self, phrase_key: &str) -> Option<&LexiconEntry> {
        self.entries.get(phrase_key)
    }

    /// Adds one `(phrase, type)` pair; returns false if it was already present.
    pub fn insert(&mut self, phrase: &str, ty: TypeName) -> bool {
        let key = normalize_text(phrase);
        let entry = self
            .entries
            .entry(key.clone())
            .or_insert_with(|| LexiconEntry { phrase_key: key, types: Vec::new() });
        if entry.types.contains(&ty) {
            return false;
        }
        self.per_source[ty.source.index()] += 1;
        entry.types.push(ty);
        true
    }

    /// Merges a lexicon-TSV stream into this lexicon. Malformed lines are
    /// collected in the report and skipped.
    pub fn extend_from_reader<R: BufRead>(&mut self, input: R) -> std::io::Result<LoadReport> {
        let mut report = LoadReport::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            report.lines_read += 1;
            let cols: Vec<&str> = line.split('\t').collect();
            if cols[0] == HYPERNYM_MARKER {
                report.hypernym_edges += 1;
                continue;
            }
            if cols.len() != 2 || cols[0].trim().is_empty() {
                report.errors.push(LineError {
                    line: line_no,
                    message: format!("expected `phrase<TAB>TYPE`, found {} columns", cols.len()),
                });
                continue;
            }
            match cols[1].trim().parse::<TypeName>() {
                Ok(ty) => {
                    if !self.insert(cols[0], ty) {
                        report.duplicates += 1;
                    }
                }
                Err(e) => report.errors.push(LineError { line: line_no, message: e.to_string() }),
            }
        }
        Ok(report)
    }

    /// Types for a normalized phrase: exact match first, otherwise the
    /// entry of its head word (last word). At most `max_per_source` types
    /// per source, in rank order. Empty when the phrase is untypeable.
    pub fn resolve_types(&self, phrase_key: &str, max_per_source: usize) -> Vec<TypeName> {
        let entry = self.entries.get(phrase_key).or_else(|| {
            let head = phrase_key.rsplit(' ').next()?;
            if head == phrase_key {
                return None;
            }
            self.entries.get(head)
        });
        let Some(entry) = entry else {
            return Vec::new();
        };
        let mut taken = [0usize; 2];
        entry
            .types
            .iter()
            .filter(|t| {
                let slot = &mut taken[t.source.index()];
                if *slot < max_per_source {
                    *slot += 1;
                    true
                } else {
                    false
                }
            })
            .cloned()
            .collect()
    }
}

/// Loads a single lexicon-TSV stream.
pub fn load_lexicon<R: BufRead>(input: R) -> std::io::Result<(TypeLexicon, LoadReport)> {
    let mut lex = TypeLexicon::new();
    let report = lex.extend_from_reader(input)?;
    Ok((lex, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex(text: &str) -> TypeLexicon {
        load_lexicon(text.as_bytes()).unwrap().0
    }

    #[test]
    fn type_name_rendering() {
        assert_eq!(TypeName::wdn("political_office").to_string(), "WDN_political_office");
        assert_eq!("NEL_person".parse::<TypeName>().unwrap(), TypeName::nel("person"));
        for bad in ["XYZ_person", "NEL_", "NEL_Person", "person", "WDN_a-b"] {
            assert!(bad.parse::<TypeName>().is_err(), "{bad}");
        }
    }

    #[test]
    fn loads_two_entries() {
        let l = lex("mccain\tNEL_politician\npresident\tWDN_political_office\n");
        assert_eq!(l.len(), 2);
        assert_eq!(l.source_count(TypeSource::Nel), 1);
        assert_eq!(l.source_count(TypeSource::Wdn), 1);
    }

    #[test]
    fn empty_stream_is_valid() {
        let (l, report) = load_lexicon(&b""[..]).unwrap();
        assert_eq!(l.len(), 0);
        assert!(report.errors.is_empty());
    }

    #[test]
    fn duplicate_line_is_ignored() {
        let text =
            "knife\tWDN_weapon\naxe\tWDN_weapon\nknife\tWDN_weapon\nbob\tNEL_person\nparis\tNEL_city\n";
        let (l, report) = load_lexicon(text.as_bytes()).unwrap();
        assert_eq!(l.len(), 4);
        assert_eq!(report.duplicates, 1);
    }

    #[test]
    fn bad_prefix_and_column_count_are_line_errors() {
        let text =
            "# comment\nknife\tXYZ_weapon\nbob\tNEL_person\nbroken line\n@hypernym\tWDN_knife\tWDN_weapon\n";
        let (l, report) = load_lexicon(text.as_bytes()).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(report.errors.len(), 2);
        assert_eq!(report.errors[0].line, 2);
        assert_eq!(report.errors[1].line, 4);
        assert_eq!(report.hypernym_edges, 1);
    }

    #[test]
    fn phrases_are_normalized_at_load() {
        let l = lex("The  New Yorker\tNEL_publication\n");
        assert_eq!(l.resolve_types("new yorker", 1), vec![TypeName::nel("publication")]);
    }

    #[test]
    fn resolves_exact_then_head_word() {
        let l = lex("knife\tWDN_weapon\n");
        assert_eq!(l.resolve_types("knife", 1), vec![TypeName::wdn("weapon")]);
        assert_eq!(l.resolve_types("hunting knife", 1), vec![TypeName::wdn("weapon")]);
        assert!(l.resolve_types("zzyzx", 1).is_empty());
    }

    #[test]
    fn exact_match_shadows_head_word() {
        let l = lex("knife\tWDN_weapon\nhunting knife\tWDN_tool\n");
        assert_eq!(l.resolve_types("hunting knife", 2), vec![TypeName::wdn("tool")]);
    }

    #[test]
    fn caps_types_per_source_in_rank_order() {
        let l = lex(
            "washington\tNEL_city\nwashington\tWDN_location\nwashington\tNEL_person\nwashington\tWDN_state\n",
        );
        assert_eq!(l.resolve_types("washington", 1), vec![TypeName::nel("city"), TypeName::wdn("location")]);
        assert_eq!(l.resolve_types("washington", 2).len(), 4);
    }

    proptest! {
        #[test]
        fn resolution_respects_bounds_and_rank(
            pairs in prop::collection::vec((0usize..6, any::<bool>(), 0usize..5), 0..40),
            key in 0usize..6,
            max in 1usize..4,
        ) {
            let words = ["alpha", "beta", "gamma", "delta", "beta gamma", "x delta"];
            let mut text = String::new();
            for (w, nel, t) in &pairs {
                let src = if *nel { "NEL" } else { "WDN" };
                text.push_str(&format!("{}\t{}_t{}\n", words[*w], src, t));
            }
            let a = lex(&text);
            let b = lex(&text);
            let got = a.resolve_types(words[key], max);
            prop_assert!(got.len() <= 2 * max);
            prop_assert_eq!(&got, &b.resolve_types(words[key], max));
            // rank order within each source follows the entry order
            let entry = a.entry(words[key]).or_else(|| a.entry(words[key].rsplit(' ').next().unwrap()));
            if let Some(entry) = entry {
                for src in [TypeSource::Wdn, TypeSource::Nel] {
                    let expect: Vec<_> = entry.types.iter().filter(|t| t.source == src).take(max).collect();
                    let have: Vec<_> = got.iter().filter(|t| t.source == src).collect();
                    prop_assert_eq!(expect, have);
                }
            } else {
                prop_assert!(got.is_empty());
            }
        }
    }
}
