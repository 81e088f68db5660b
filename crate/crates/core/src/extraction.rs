//! `N1 V N2 P N3` tuple extraction over chunked sentences.
//!
//! Both extractors anchor on a verb group `V` whose nearest noun phrases on
//! each side are `N1` and `N2`; only `OTHER` chunks totalling at most two
//! tokens may separate them from the verb group.
//!
//! * strict: a preposition from the configured set, preceded by at most two
//!   tokens of any chunks after `N2`, immediately followed by `N3`; the verb
//!   head lemma must be a trigger of some event type.
//! * generalized: any verb; `N3` is any noun phrase that starts one to
//!   `max_connector_len` tokens after `N2` ends, the tokens in between being
//!   the connector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{ChunkKind, ChunkedSentence};
use crate::error::Error;

/// Tokens of `OTHER` material tolerated around the verb group and before
/// the strict-mode preposition.
pub const MAX_INTERVENING_TOKENS: usize = 2;
pub const DEFAULT_MAX_CONNECTOR_LEN: usize = 3;
pub const MAX_MANUAL_TRIGGERS: usize = 3;

pub const DEFAULT_PREPOSITIONS: &[&str] =
    &["in", "at", "for", "from", "to", "with", "over", "on", "by", "against", "of", "during"];

/// Event configuration shipped with the crate: the eighteen event types
/// with empty trigger slots.
pub const DEFAULT_EVENT_CONFIG: &str = include_str!("../config/events.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriggerOrigin {
    Manual,
    Bootstrapped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub event_type: String,
    pub triggers: BTreeMap<String, TriggerOrigin>,
}

impl EventSpec {
    pub fn new(event_type: &str, triggers: &[&str]) -> Self {
        EventSpec {
            event_type: event_type.to_string(),
            triggers: triggers.iter().map(|t| (t.to_lowercase(), TriggerOrigin::Manual)).collect(),
        }
    }

    /// Adds a bootstrapped trigger; returns false if the lemma was known.
    pub fn add_bootstrapped(&mut self, lemma: &str) -> bool {
        let lemma = lemma.to_lowercase();
        if self.triggers.contains_key(&lemma) {
            return false;
        }
        self.triggers.insert(lemma, TriggerOrigin::Bootstrapped);
        true
    }

    pub fn manual_count(&self) -> usize {
        self.triggers.values().filter(|o| **o == TriggerOrigin::Manual).count()
    }
}

#[derive(Deserialize, Serialize)]
struct EventConfigFile {
    #[serde(default)]
    event: Vec<EventConfigEntry>,
}

#[derive(Deserialize, Serialize)]
struct EventConfigEntry {
    #[serde(rename = "type")]
    event_type: String,
    #[serde(default)]
    triggers: Vec<String>,
}

/// Parses the TOML event configuration. Event types with no triggers are
/// kept (they are inactive until filled in).
pub fn parse_event_config(text: &str) -> Result<Vec<EventSpec>, Error> {
    let file: EventConfigFile = toml::from_str(text).map_err(|e| Error::EventConfig(e.to_string()))?;
    let mut seen = BTreeSet::new();
    let mut specs = Vec::with_capacity(file.event.len());
    for entry in file.event {
        if entry.event_type.trim().is_empty() {
            return Err(Error::EventConfig("empty event type".into()));
        }
        if !seen.insert(entry.event_type.clone()) {
            return Err(Error::EventConfig(format!("duplicate event type {}", entry.event_type)));
        }
        let lemmas: Vec<&str> = entry.triggers.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
        let spec = EventSpec::new(&entry.event_type, &lemmas);
        if spec.manual_count() > MAX_MANUAL_TRIGGERS {
            return Err(Error::EventConfig(format!(
                "{} lists {} trigger verbs; at most {MAX_MANUAL_TRIGGERS} are allowed",
                entry.event_type,
                spec.manual_count()
            )));
        }
        specs.push(spec);
    }
    Ok(specs)
}

pub fn render_event_config(specs: &[EventSpec]) -> String {
    let file = EventConfigFile {
        event: specs
            .iter()
            .map(|s| EventConfigEntry {
                event_type: s.event_type.clone(),
                triggers: s.triggers.keys().cloned().collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("event config serializes")
}

/// Trigger lemma index over the active event types.
#[derive(Debug, Clone, Default)]
pub struct TriggerIndex {
    by_lemma: BTreeMap<String, Vec<String>>,
}

impl TriggerIndex {
    pub fn new(specs: &[EventSpec]) -> Self {
        let mut by_lemma: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for spec in specs {
            for lemma in spec.triggers.keys() {
                by_lemma.entry(lemma.clone()).or_default().push(spec.event_type.clone());
            }
        }
        for events in by_lemma.values_mut() {
            events.sort();
            events.dedup();
        }
        TriggerIndex { by_lemma }
    }

    pub fn is_empty(&self) -> bool {
        self.by_lemma.is_empty()
    }

    pub fn events_for(&self, lemma: &str) -> &[String] {
        self.by_lemma.get(&lemma.to_lowercase()).map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepositionSet(BTreeSet<String>);

impl PrepositionSet {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(preps: I) -> Self {
        PrepositionSet(preps.into_iter().map(|p| p.as_ref().to_lowercase()).collect())
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.0.contains(&surface.to_lowercase())
    }
}

impl Default for PrepositionSet {
    fn default() -> Self {
        PrepositionSet::new(DEFAULT_PREPOSITIONS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Generalized,
}

/// Normalized noun-phrase argument with its surface form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Argument {
    pub norm: String,
    pub raw: String,
}

/// Chunk indices of the four phrase slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Provenance {
    pub doc_id: String,
    pub sent_index: usize,
    pub n1: usize,
    pub verb: usize,
    pub n2: usize,
    pub n3: usize,
}

/// A normalized `(n1, n2, n3)` argument triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArgTriple(pub String, pub String, pub String);

impl ArgTriple {
    pub fn new(a: &str, b: &str, c: &str) -> Self {
        ArgTriple(a.to_string(), b.to_string(), c.to_string())
    }
}

impl fmt::Display for ArgTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0, self.1, self.2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tuple5 {
    pub provenance: Provenance,
    pub n1: Argument,
    pub verb_lemma: String,
    pub verb_surface: String,
    pub n2: Argument,
    pub connector: Vec<String>,
    pub n3: Argument,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_type: Option<String>,
}

impl Tuple5 {
    pub fn args(&self) -> ArgTriple {
        ArgTriple(self.n1.norm.clone(), self.n2.norm.clone(), self.n3.norm.clone())
    }

    pub fn raw_args(&self) -> [String; 3] {
        [self.n1.raw.clone(), self.n2.raw.clone(), self.n3.raw.clone()]
    }

    /// The five items with the arguments bracketed, for review displays.
    pub fn context(&self) -> String {
        format!(
            "[{}] {} [{}] {} [{}]",
            self.n1.raw,
            self.verb_surface,
            self.n2.raw,
            self.connector.join(" "),
            self.n3.raw
        )
    }
}

fn is_np(cs: &ChunkedSentence, i: usize) -> bool {
    cs.chunks[i].kind == ChunkKind::NounPhrase
}

/// Nearest NP before the verb group at `verb`, across `OTHER` chunks only.
fn noun_phrase_before(cs: &ChunkedSentence, verb: usize) -> Option<usize> {
    let mut tokens = 0;
    let mut j = verb;
    while j > 0 {
        j -= 1;
        let c = &cs.chunks[j];
        match c.kind {
            ChunkKind::NounPhrase => return Some(j),
            ChunkKind::Other => {
                tokens += c.len();
                if tokens > MAX_INTERVENING_TOKENS {
                    return None;
                }
            }
            _ => return None,
        }
    }
    None
}

fn noun_phrase_after(cs: &ChunkedSentence, verb: usize) -> Option<usize> {
    let mut tokens = 0;
    for j in verb + 1..cs.chunks.len() {
        let c = &cs.chunks[j];
        match c.kind {
            ChunkKind::NounPhrase => return Some(j),
            ChunkKind::Other => {
                tokens += c.len();
                if tokens > MAX_INTERVENING_TOKENS {
                    return None;
                }
            }
            _ => return None,
        }
    }
    None
}

/// `(n1, verb, n2)` chunk index triples around every verb group.
fn anchors(cs: &ChunkedSentence) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    cs.chunks
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ChunkKind::VerbGroup)
        .filter_map(|(v, _)| Some((noun_phrase_before(cs, v)?, v, noun_phrase_after(cs, v)?)))
}

fn argument(cs: &ChunkedSentence, i: usize) -> Argument {
    let c = &cs.chunks[i];
    Argument { norm: c.norm_text.clone(), raw: c.text.clone() }
}

fn build_tuple(
    cs: &ChunkedSentence,
    (n1, v, n2, n3): (usize, usize, usize, usize),
    connector: Vec<String>,
    mode: Mode,
    event_type: Option<String>,
) -> Tuple5 {
    let verb = &cs.chunks[v];
    Tuple5 {
        provenance: Provenance {
            doc_id: cs.sentence.doc_id.clone(),
            sent_index: cs.sentence.sent_index,
            n1,
            verb: v,
            n2,
            n3,
        },
        n1: argument(cs, n1),
        verb_lemma: cs.head_lemma(verb).to_lowercase(),
        verb_surface: cs.head_surface(verb).to_string(),
        n2: argument(cs, n2),
        connector,
        n3: argument(cs, n3),
        mode,
        event_type,
    }
}

/// Trigger-anchored tuples with a single-preposition connector.
pub fn extract_strict(cs: &ChunkedSentence, triggers: &TriggerIndex, preps: &PrepositionSet) -> Vec<Tuple5> {
    let mut out = Vec::new();
    for (n1, v, n2) in anchors(cs) {
        let events = triggers.events_for(cs.head_lemma(&cs.chunks[v]));
        if events.is_empty() {
            continue;
        }
        let mut skipped = 0;
        for p in n2 + 1..cs.chunks.len() {
            let c = &cs.chunks[p];
            if c.kind == ChunkKind::Preposition
                && preps.contains(&c.text)
                && p + 1 < cs.chunks.len()
                && is_np(cs, p + 1)
            {
                for event in events {
                    out.push(build_tuple(
                        cs,
                        (n1, v, n2, p + 1),
                        vec![c.text.clone()],
                        Mode::Strict,
                        Some(event.clone()),
                    ));
                }
            }
            skipped += c.len();
            if skipped > MAX_INTERVENING_TOKENS {
                break;
            }
        }
    }
    out
}

/// Tuples for any verb with a 1..=`max_connector_len` token connector.
pub fn extract_generalized(cs: &ChunkedSentence, max_connector_len: usize) -> Vec<Tuple5> {
    let mut out = Vec::new();
    for (n1, v, n2) in anchors(cs) {
        let n2_end = cs.chunks[n2].end;
        for m in n2 + 1..cs.chunks.len() {
            let c = &cs.chunks[m];
            let gap = c.start - n2_end - 1;
            if gap > max_connector_len {
                break;
            }
            if gap >= 1 && c.kind == ChunkKind::NounPhrase {
                let connector =
                    cs.sentence.tokens[n2_end + 1..c.start].iter().map(|t| t.surface.clone()).collect();
                out.push(build_tuple(cs, (n1, v, n2, m), connector, Mode::Generalized, None));
            }
        }
    }
    out
}
